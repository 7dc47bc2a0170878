//! Jackson network models and the lattice geometry shared by the other modules.
//!
//! Nodes are labelled `0..=d`; node `0` stands for the outside world. The
//! matrix entry `p(i, j)` is the probability that the next event moves a
//! customer from `i` to `j`, so the walk `X` jumps by `e_j - e_i` with
//! `e_0 = 0`, and the jump is suppressed when queue `i` is empty.

use log::warn;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::solve_real;

/// Integer lattice point; `x[k]` is coordinate `k + 1`.
pub type LatticePoint = Vec<i64>;

const EXACT_TOL: f64 = 1e-12;
const RENORMALISE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JacksonNetwork {
    d: usize,
    p: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    nu: Vec<f64>,
    rho: Vec<f64>,
    io_ratio: f64,
}

impl JacksonNetwork {
    /// Validates a `(d+1) x (d+1)` jump matrix and derives the rates.
    ///
    /// Matrices summing to 1 within `1e-9` are renormalised with a warning.
    pub fn from_matrix(d: usize, p: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(d, &p)?;
        let sum: f64 = p.iter().flatten().sum();
        if (sum - 1.0).abs() > RENORMALISE_TOL {
            return Err(Error::NotStochastic { sum });
        }
        let p = if (sum - 1.0).abs() > EXACT_TOL {
            warn!("jump matrix sums to {sum}; renormalising");
            scale(p, 1.0 / sum)
        } else {
            p
        };
        Self::build(d, p)
    }

    /// Divides the matrix by its total before validation.
    pub fn from_matrix_normalized(d: usize, p: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(d, &p)?;
        let sum: f64 = p.iter().flatten().sum();
        if !(sum > 0.0) {
            return Err(Error::NotStochastic { sum });
        }
        Self::build(d, scale(p, 1.0 / sum))
    }

    /// Tandem network `0 -> 1 -> 2 -> ... -> d -> 0`.
    pub fn tandem(lambda: f64, mu: &[f64]) -> Result<Self> {
        let sum = lambda + mu.iter().sum::<f64>();
        if (sum - 1.0).abs() > RENORMALISE_TOL {
            return Err(Error::BadNormalization { sum });
        }
        Self::tandem_normalized(lambda, mu)
    }

    /// Tandem network with the rates rescaled to sum to one.
    pub fn tandem_normalized(lambda: f64, mu: &[f64]) -> Result<Self> {
        if mu.is_empty() || !(lambda > 0.0) || mu.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::NonPositiveRate);
        }
        let d = mu.len();
        let sum = lambda + mu.iter().sum::<f64>();
        let mut p = vec![vec![0.0; d + 1]; d + 1];
        p[0][1] = lambda / sum;
        for j in 1..d {
            p[j][j + 1] = mu[j - 1] / sum;
        }
        p[d][0] = mu[d - 1] / sum;
        Self::build(d, p)
    }

    fn build(d: usize, p: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry { i, j, value: v });
                }
            }
            if row[i] != 0.0 {
                return Err(Error::NonzeroDiagonal { node: i, value: row[i] });
            }
        }
        if !strongly_connected(&p) {
            return Err(Error::Reducible);
        }
        let lambda: Vec<f64> = (1..=d).map(|j| p[0][j]).collect();
        if lambda.iter().all(|&l| l == 0.0) {
            return Err(Error::NoArrivals);
        }
        let mu: Vec<f64> = (1..=d).map(|j| p[j].iter().sum()).collect();
        // (I - R^T) nu = lambda with R(i,j) = p(i,j) / mu_i
        let mut a = vec![vec![0.0; d]; d];
        for j in 0..d {
            a[j][j] = 1.0;
            for i in 0..d {
                a[j][i] -= p[i + 1][j + 1] / mu[i];
            }
        }
        let nu = solve_real(a, lambda.clone())?;
        let rho: Vec<f64> = nu.iter().zip(&mu).map(|(n, m)| n / m).collect();
        let exits: f64 = (1..=d).map(|j| p[j][0]).sum();
        if exits == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let io_ratio = lambda.iter().sum::<f64>() / exits;
        let net = JacksonNetwork { d, p, lambda, mu, nu, rho, io_ratio };
        if d == 2 && !crate::charsurf::simplifying_condition_holds(&net) {
            warn!("the imaginary part of the discriminant vanishes inside (-1,1); root labels may jump");
        }
        Ok(net)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Jump probability `p(i, j)`, nodes `0..=d`.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// External arrival rate of node `j` (1-based).
    pub fn lambda(&self, j: usize) -> f64 {
        self.lambda[j - 1]
    }

    /// Total service rate of node `j` (1-based).
    pub fn mu(&self, j: usize) -> f64 {
        self.mu[j - 1]
    }

    /// Total arrival rate of node `j` (1-based), from the traffic equations.
    pub fn nu(&self, j: usize) -> f64 {
        self.nu[j - 1]
    }

    /// Utilisation of node `j` (1-based).
    pub fn rho(&self, j: usize) -> f64 {
        self.rho[j - 1]
    }

    /// Routing probability `r(i, j) = p(i, j) / mu_i` for `i >= 1`.
    pub fn routing(&self, i: usize, j: usize) -> f64 {
        self.p[i][j] / self.mu[i - 1]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    pub fn nus(&self) -> &[f64] {
        &self.nu
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rho
    }

    /// Total arrival over total exit probability.
    pub fn io_ratio(&self) -> f64 {
        self.io_ratio
    }

    pub fn is_stable(&self) -> bool {
        self.rho.iter().all(|&r| r < 1.0)
    }

    /// `(lambda, mu)` when the network is a tandem `0 -> 1 -> ... -> d -> 0`.
    pub fn as_tandem(&self) -> Option<(f64, Vec<f64>)> {
        let d = self.d;
        for i in 0..=d {
            for j in 0..=d {
                let expected = (i < d && j == i + 1) || (i == d && j == 0);
                if !expected && self.p[i][j] != 0.0 {
                    return None;
                }
            }
        }
        Some((self.p[0][1], self.mu.clone()))
    }

    /// Network with node labels permuted: old node `perm[k-1]` becomes node `k`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let d = self.d;
        let mut seen = vec![false; d + 1];
        if perm.len() != d || perm.iter().any(|&k| k == 0 || k > d || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Config("relabelling must be a permutation of 1..=d".into()));
        }
        let map = |k: usize| if k == 0 { 0 } else { perm[k - 1] };
        let mut q = vec![vec![0.0; d + 1]; d + 1];
        for (i, row) in q.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.p[map(i)][map(j)];
            }
        }
        Self::build(d, q)
    }

    /// Swaps nodes 1 and `i`, so that corner `i` becomes corner 1.
    pub fn corner_view(&self, i: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (1..=self.d).collect();
        perm.swap(0, i - 1);
        self.relabel(&perm)
    }

    /// Jumps of `X` with positive probability.
    pub fn x_increments(&self) -> Vec<XIncrement> {
        let d = self.d;
        let mut out = Vec::new();
        for i in 0..=d {
            for j in 0..=d {
                if i != j && self.p[i][j] > 0.0 {
                    let mut v = vec![0i64; d];
                    if i > 0 {
                        v[i - 1] -= 1;
                    }
                    if j > 0 {
                        v[j - 1] += 1;
                    }
                    out.push(XIncrement { from: i, to: j, v, prob: self.p[i][j] });
                }
            }
        }
        out
    }
}

/// A customer moving from node `from` to node `to` (node 0 is the outside),
/// with probability `p(from, to)`. The walk moves by `v = e_to - e_from`.
#[derive(Debug, Clone, PartialEq)]
pub struct XIncrement {
    pub from: usize,
    pub to: usize,
    pub v: Vec<i64>,
    pub prob: f64,
}

impl XIncrement {
    /// Node (1-based) whose queue must be nonempty for the jump to happen.
    pub fn needs_positive(&self) -> Option<usize> {
        (self.from > 0).then_some(self.from)
    }
}

fn check_shape(d: usize, p: &[Vec<f64>]) -> Result<()> {
    if d == 0 || p.len() != d + 1 || p.iter().any(|r| r.len() != d + 1) {
        return Err(Error::BadShape {
            rows: p.len(),
            cols: p.first().map_or(0, |r| r.len()),
            expected: d + 1,
        });
    }
    Ok(())
}

fn scale(p: Vec<Vec<f64>>, f: f64) -> Vec<Vec<f64>> {
    p.into_iter().map(|r| r.into_iter().map(|v| v * f).collect()).collect()
}

fn reach(p: &[Vec<f64>], forward: bool) -> Vec<bool> {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let w = if forward { p[i][j] } else { p[j][i] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

fn strongly_connected(p: &[Vec<f64>]) -> bool {
    reach(p, true).into_iter().all(|b| b) && reach(p, false).into_iter().all(|b| b)
}

/// Exact solution of the traffic equations for a rational jump matrix.
///
/// Returns `nu` with `nu[k]` the total arrival rate of node `k + 1`.
pub fn traffic_exact(p: &[Vec<BigRational>]) -> Result<Vec<BigRational>> {
    let n = p.len();
    if n < 2 || p.iter().any(|r| r.len() != n) {
        return Err(Error::BadShape { rows: n, cols: p.first().map_or(0, |r| r.len()), expected: n });
    }
    let d = n - 1;
    let mu: Vec<BigRational> = (1..=d)
        .map(|j| p[j].iter().fold(BigRational::zero(), |a, b| a + b))
        .collect();
    if mu.iter().any(|m| m.is_zero()) {
        return Err(Error::NonPositiveRate);
    }
    let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); d + 1]; d];
    for j in 0..d {
        a[j][j] = BigRational::one();
        for i in 0..d {
            a[j][i] = &a[j][i] - &p[i + 1][j + 1] / &mu[i];
        }
        a[j][d] = p[0][j + 1].clone();
    }
    for k in 0..d {
        let piv = (k..d).find(|&i| !a[i][k].is_zero()).ok_or(Error::SingularTraffic)?;
        a.swap(k, piv);
        for i in 0..d {
            if i != k && !a[i][k].is_zero() {
                let f = &a[i][k] / &a[k][k];
                for j in k..=d {
                    let t = &f * &a[k][j];
                    a[i][j] = &a[i][j] - t;
                }
            }
        }
    }
    Ok((0..d).map(|k| &a[k][d] / &a[k][k]).collect())
}

/// Rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `T_n^i`: replaces coordinate `i` by `n - x(i)`. An involution.
pub fn transform(n: i64, i: usize, x: &[i64]) -> LatticePoint {
    let mut y = x.to_vec();
    y[i - 1] = n - x[i - 1];
    y
}

/// `x` in `A_n = {x >= 0, sum x <= n}`.
pub fn in_a(n: i64, x: &[i64]) -> bool {
    x.iter().all(|&v| v >= 0) && x.iter().sum::<i64>() <= n
}

/// `x` on `dA_n = {x >= 0, sum x = n}`.
pub fn on_boundary_a(n: i64, x: &[i64]) -> bool {
    x.iter().all(|&v| v >= 0) && x.iter().sum::<i64>() == n
}

/// `y(i) - sum_{j != i} y(j)`; the walk is on the `zeta_m` level when this equals `m`.
pub fn level(i: usize, y: &[i64]) -> i64 {
    let total: i64 = y.iter().sum();
    2 * y[i - 1] - total
}

/// `y` in `B` for corner `i`, with the other coordinates nonnegative.
pub fn in_b(i: usize, y: &[i64]) -> bool {
    y.iter().enumerate().all(|(k, &v)| k == i - 1 || v >= 0) && level(i, y) >= 0
}

/// `y` on `dB = {y(i) = sum_{j != i} y(j)}`.
pub fn on_boundary_b(i: usize, y: &[i64]) -> bool {
    y.iter().enumerate().all(|(k, &v)| k == i - 1 || v >= 0) && level(i, y) == 0
}

/// `y` on the `zeta_m` level set `{y(i) = sum_{j != i} y(j) + m}`.
pub fn on_zeta_level(i: usize, m: i64, y: &[i64]) -> bool {
    level(i, y) == m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tandem_rates() {
        let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5]).unwrap();
        assert!((net.nu(1) - 0.1).abs() < 1e-15 && (net.nu(2) - 0.1).abs() < 1e-15);
        assert!((net.rho(1) - 0.25).abs() < 1e-15 && (net.rho(2) - 0.2).abs() < 1e-15);
        assert!((net.io_ratio() - 0.2).abs() < 1e-15);
        assert!(net.is_stable());
    }

    #[test]
    fn unstable_tandem_is_built() {
        let net = JacksonNetwork::tandem(0.5, &[0.25, 0.25]).unwrap();
        assert!(!net.is_stable());
        assert_eq!(net.rho(1), 2.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        let short = vec![vec![0.0, 0.15, 0.1], vec![0.2, 0.0, 0.1], vec![0.24, 0.06, 0.0]];
        assert!(matches!(JacksonNetwork::from_matrix(2, short), Err(Error::NotStochastic { .. })));
        let diag = vec![vec![0.0, 0.5], vec![0.25, 0.25]];
        assert!(matches!(JacksonNetwork::from_matrix(1, diag), Err(Error::NonzeroDiagonal { .. })));
        let reducible = vec![vec![0.0, 0.5, 0.0], vec![0.5, 0.0, 0.0], vec![0.0, 0.0, 0.0]];
        assert_eq!(JacksonNetwork::from_matrix(2, reducible), Err(Error::Reducible));
        let no_arrivals = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(JacksonNetwork::from_matrix(1, no_arrivals), Err(Error::Reducible));
    }

    #[test]
    fn near_stochastic_matrix_is_renormalised() {
        let p = vec![vec![0.0, 0.1 + 5e-10], vec![0.9, 0.0]];
        let net = JacksonNetwork::from_matrix(1, p).unwrap();
        let total: f64 = net.matrix().iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tandem_normalisation_guard() {
        assert!(matches!(JacksonNetwork::tandem(0.1, &[0.4, 0.4]), Err(Error::BadNormalization { .. })));
        let net = JacksonNetwork::tandem_normalized(1.0, &[4.0, 5.0]).unwrap();
        assert!((net.p(0, 1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tandem_detection_and_relabel() {
        let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5]).unwrap();
        assert_eq!(net.as_tandem().unwrap().0, 0.1);
        let swapped = net.corner_view(2).unwrap();
        assert!(swapped.as_tandem().is_none());
        assert_eq!(swapped.p(0, 2), 0.1);
        assert_eq!(swapped.p(1, 0), 0.5);
    }

    #[test]
    fn transform_and_predicates() {
        assert_eq!(transform(60, 1, &[1, 0]), vec![59, 0]);
        assert_eq!(transform(60, 2, &[0, 5]), vec![0, 55]);
        assert!(on_boundary_a(5, &[2, 3]));
        assert!(on_boundary_b(1, &[4, 4]));
        assert!(on_boundary_b(1, &[5, 2, 3]));
        assert!(on_zeta_level(1, 3, &[5, 2, 0]));
        assert!(in_b(1, &[7, 2, 3]) && !in_b(1, &[4, 2, 3]));
    }

    #[test]
    fn exact_traffic_matches_float() {
        let p = vec![
            vec![ratio(0, 1), ratio(5, 100), ratio(10, 100)],
            vec![ratio(35, 100), ratio(0, 1), ratio(12, 100)],
            vec![ratio(30, 100), ratio(8, 100), ratio(0, 1)],
        ];
        let nu = traffic_exact(&p).unwrap();
        let pf: Vec<Vec<f64>> = vec![vec![0.0, 0.05, 0.1], vec![0.35, 0.0, 0.12], vec![0.3, 0.08, 0.0]];
        let net = JacksonNetwork::from_matrix(2, pf).unwrap();
        for k in 0..2 {
            let x: f64 = num_traits::ToPrimitive::to_f64(&nu[k]).unwrap();
            assert!((x - net.nus()[k]).abs() < 1e-15);
        }
    }
}

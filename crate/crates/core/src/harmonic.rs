//! Harmonic functions of `Y` built from log-linear terms.
//!
//! A [`LogLinearCombination`] is `sum_k c_k [(beta_k, alpha_k), y]`. Harmonic
//! systems glue such terms along the edges of a labelled graph so that the
//! boundary residuals cancel in pairs; for tandem walks the system has an
//! explicit solution and yields a finite formula for `P_y(tau < inf)`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Neg;

use num_traits::Num;

use crate::charsurf::{self, c, y_increments, SurfacePoint, C64};
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::network::JacksonNetwork;

/// Relative gap below which two service rates count as equal.
pub const EQUAL_RATE_TOL: f64 = 1e-9;

/// Below this magnitude a term is evaluated in log space.
const LOG_SPACE_BELOW: f64 = -640.0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogLinearCombination {
    pub terms: Vec<(C64, SurfacePoint)>,
}

impl LogLinearCombination {
    /// Drops terms with a zero coefficient.
    pub fn new(terms: Vec<(C64, SurfacePoint)>) -> Self {
        LogLinearCombination { terms: terms.into_iter().filter(|(k, _)| *k != c(0.0)).collect() }
    }

    pub fn single(coef: C64, pt: SurfacePoint) -> Self {
        Self::new(vec![(coef, pt)])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::new(self.terms.iter().map(|(a, p)| (a * k, p.clone())).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().cloned());
        Self::new(t)
    }

    pub fn eval(&self, y: &[i64]) -> Result<C64> {
        let (m, s) = self.eval_scaled(y)?;
        Ok(if s == 0.0 { m } else { m * s.exp() })
    }

    /// Value as `(m, s)` with value `= m * e^s`, safe far below `1e-300`.
    pub fn eval_scaled(&self, y: &[i64]) -> Result<(C64, f64)> {
        let mut logs = Vec::with_capacity(self.terms.len());
        for (k, pt) in &self.terms {
            let la = pt.ln_abs(y)?;
            logs.push(la + k.norm().ln());
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok((c(0.0), 0.0));
        }
        if top > LOG_SPACE_BELOW && top < 600.0 {
            let mut s = c(0.0);
            for (k, pt) in &self.terms {
                s += k * pt.eval(y)?;
            }
            return Ok((s, 0.0));
        }
        let mut s = c(0.0);
        for ((k, pt), la) in self.terms.iter().zip(&logs) {
            if *la == f64::NEG_INFINITY {
                continue;
            }
            s += C64::from_polar((la - top).exp(), k.arg() + pt.arg(y));
        }
        Ok((s, top))
    }

    /// Natural log of the real part; `NaN` when it is not positive.
    pub fn ln_real(&self, y: &[i64]) -> Result<f64> {
        let (m, s) = self.eval_scaled(y)?;
        Ok(if m.re > 0.0 { m.re.ln() + s } else { f64::NAN })
    }
}

fn active_mass(net: &JacksonNetwork, y: &[i64], pt: &SurfacePoint) -> Result<C64> {
    let mut s = c(0.0);
    for inc in y_increments(net) {
        match inc.blocked_by() {
            Some(j) if y[j - 1] == 0 => s += inc.prob,
            _ => s += inc.prob * pt.eval(&inc.v)?,
        }
    }
    Ok(s)
}

/// `E_y[V(Y_1)] - V(y)` for a log-linear `V`, with the constraints active at `y`.
///
/// Each term factors as `[(beta, alpha), y] * (sum_v p(v)[(beta, alpha), v] - 1)`,
/// which keeps the residual accurate when the values themselves are tiny.
pub fn residual(net: &JacksonNetwork, comb: &LogLinearCombination, y: &[i64]) -> Result<C64> {
    let mut s = c(0.0);
    for (k, pt) in &comb.terms {
        s += k * pt.eval(y)? * (active_mass(net, y, pt)? - 1.0);
    }
    Ok(s)
}

/// Residual of an arbitrary function of `y`.
pub fn residual_fn<F: Fn(&[i64]) -> f64>(net: &JacksonNetwork, f: F, y: &[i64]) -> f64 {
    let here = f(y);
    let mut next = Vec::new();
    let mut z = y.to_vec();
    for inc in y_increments(net) {
        if inc.blocked_by().is_some_and(|j| y[j - 1] == 0) {
            next.push(inc.prob * here);
            continue;
        }
        for (zi, (yi, vi)) in z.iter_mut().zip(y.iter().zip(&inc.v)) {
            *zi = yi + vi;
        }
        next.push(inc.prob * f(&z));
    }
    compensated_sum(next.into_iter().chain(std::iter::once(-here)))
}

/// `C(l, beta, alpha_2)[(beta, alpha_1), .] - C(l, beta, alpha_1)[(beta, alpha_2), .]`
/// with `alpha_2` the `l`-conjugate of `alpha_1`.
pub fn two_term(net: &JacksonNetwork, l: usize, beta: C64, alpha1: &[C64]) -> Result<LogLinearCombination> {
    let p1 = SurfacePoint::new(beta, alpha1.to_vec());
    let p2 = SurfacePoint::new(beta, charsurf::conjugator(net, l, &p1)?);
    let c1 = charsurf::boundary_coeff(net, l, &p1)?;
    let c2 = charsurf::boundary_coeff(net, l, &p2)?;
    Ok(LogLinearCombination::new(vec![(c2, p1), (-c1, p2)]))
}

/// Edge-labelled graph with label sets on loops.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSystemGraph {
    /// The label set, the constrained coordinates `{2, ..., d}`.
    pub labels: Vec<usize>,
    /// Vertex names; for tandem graphs the subsets `a` of `{1, ..., d}`.
    pub vertices: Vec<Vec<usize>>,
    /// `(i, j) -> label` with `i < j`.
    pub edges: BTreeMap<(usize, usize), usize>,
    pub loops: Vec<BTreeSet<usize>>,
}

impl HarmonicSystemGraph {
    pub fn edge(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Every vertex has exactly one `l`-edge or `l`-loop for each label `l`.
    pub fn is_edge_complete(&self) -> bool {
        (0..self.vertices.len()).all(|v| {
            self.labels.iter().all(|&l| {
                let edges = self.edges.iter().filter(|(&(a, b), &lab)| lab == l && (a == v || b == v)).count();
                edges + usize::from(self.loops[v].contains(&l)) == 1
            })
        })
    }

    /// Adds an `l`-loop on every vertex for each new label.
    pub fn extend(&self, new_labels: &[usize]) -> Self {
        let mut g = self.clone();
        for &l in new_labels {
            if !g.labels.contains(&l) {
                g.labels.push(l);
            }
            for lp in &mut g.loops {
                lp.insert(l);
            }
        }
        g
    }
}

/// `G_d` for a tandem of dimension `dim`: vertices `a + {d}`, `a` a subset of
/// `{1, ..., d-1}`, ordered by the binary encoding of `a`.
pub fn tandem_graph(dim: usize, d: usize) -> HarmonicSystemGraph {
    assert!(1 <= d && d <= dim, "need 1 <= d <= dim");
    let labels: Vec<usize> = (2..=dim).collect();
    let mut vertices = Vec::new();
    for mask in 0u64..(1u64 << (d - 1)) {
        let mut v: Vec<usize> = (1..d).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        v.push(d);
        vertices.push(v);
    }
    let index: BTreeMap<Vec<usize>, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = BTreeMap::new();
    let mut loops = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let mut lp = BTreeSet::new();
        for &l in &labels {
            if !v.contains(&l) {
                lp.insert(l);
            } else if !v.contains(&(l - 1)) {
                let mut w = v.clone();
                w.push(l - 1);
                w.sort_unstable();
                let j = index[&w];
                edges.insert((i.min(j), i.max(j)), l);
            }
        }
        loops.push(lp);
    }
    HarmonicSystemGraph { labels, vertices, edges, loops }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub beta: C64,
    pub alpha: Vec<Vec<C64>>,
    pub c: Vec<C64>,
}

impl SystemSolution {
    pub fn point(&self, v: usize) -> SurfacePoint {
        SurfacePoint::new(self.beta, self.alpha[v].clone())
    }

    /// `h_G = sum_j c_j [(beta, alpha_j), .]`.
    pub fn function(&self) -> LogLinearCombination {
        LogLinearCombination::new((0..self.c.len()).map(|v| (self.c[v], self.point(v))).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation found; for distinctness the smallest gap instead.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport {
    pub conditions: Vec<ConditionCheck>,
}

impl SystemReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|k| k.passed)
    }

    pub fn worst_violation(&self) -> f64 {
        self.conditions.iter().filter(|k| k.name != "distinct").map(|k| k.worst).fold(0.0, f64::max)
    }
}

fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Checks the five defining conditions of a harmonic system.
pub fn verify_system(net: &JacksonNetwork, g: &HarmonicSystemGraph, sol: &SystemSolution, tol: f64) -> SystemReport {
    let nv = g.vertices.len();
    let bad = f64::INFINITY;

    let mut surf = 0.0f64;
    let mut zero_c = false;
    for v in 0..nv {
        surf = surf.max(charsurf::char_poly(net, &[], &sol.point(v)).map(|p| (p - 1.0).norm()).unwrap_or(bad));
        zero_c |= sol.c[v] == c(0.0);
    }
    let c1 = ConditionCheck { name: "on-surface", passed: surf < tol && !zero_c, worst: if zero_c { bad } else { surf } };

    let mut gap = f64::INFINITY;
    for i in 0..nv {
        for j in i + 1..nv {
            gap = gap.min(vec_dist(&sol.alpha[i], &sol.alpha[j]));
        }
    }
    let c2 = ConditionCheck { name: "distinct", passed: gap > tol, worst: gap };

    let mut conj = 0.0f64;
    let mut ratio = 0.0f64;
    for (&(i, j), &l) in &g.edges {
        let mut off = 0.0f64;
        for (k, (a, b)) in sol.alpha[i].iter().zip(&sol.alpha[j]).enumerate() {
            if k + 2 != l {
                off = off.max((a - b).norm());
            }
        }
        let img = charsurf::conjugator(net, l, &sol.point(i)).map(|a| (a[l - 2] - sol.alpha[j][l - 2]).norm()).unwrap_or(bad);
        conj = conj.max(off).max(img);
        let ci = charsurf::boundary_coeff(net, l, &sol.point(i));
        let cj = charsurf::boundary_coeff(net, l, &sol.point(j));
        ratio = ratio.max(match (ci, cj) {
            (Ok(ci), Ok(cj)) => {
                let a = sol.c[i] * ci;
                let b = sol.c[j] * cj;
                let scale = a.norm() + b.norm();
                if scale == 0.0 {
                    0.0
                } else {
                    (a + b).norm() / scale
                }
            }
            _ => bad,
        });
    }
    let c3 = ConditionCheck { name: "conjugacy", passed: conj < tol, worst: conj };
    let c4 = ConditionCheck { name: "coefficient-ratio", passed: ratio < tol, worst: ratio };

    let mut lp = 0.0f64;
    for v in 0..nv {
        for &l in &g.loops[v] {
            let r = charsurf::char_poly(net, &[l], &sol.point(v)).map(|p| (p - 1.0).norm()).unwrap_or(bad);
            lp = lp.max(r);
        }
    }
    let c5 = ConditionCheck { name: "loops", passed: lp < tol, worst: lp };
    SystemReport { conditions: vec![c1, c2, c3, c4, c5] }
}

/// `c*_b = (-1)^(|b|-1) prod_k prod_{l = b_k + 1}^{b_{k+1}} (mu_l - lambda)/(mu_l - mu_{b_k})`.
///
/// `mu[l - 1]` is the rate of node `l`; `b` is increasing.
pub fn cstar<T>(lambda: &T, mu: &[T], b: &[usize]) -> T
where
    T: Num + Clone + Neg<Output = T>,
{
    let mut out = T::one();
    for w in b.windows(2) {
        for l in w[0] + 1..=w[1] {
            out = out * (mu[l - 1].clone() - lambda.clone()) / (mu[l - 1].clone() - mu[w[0] - 1].clone());
        }
        out = -out;
    }
    out
}

/// `alpha*_b` over the coordinates `2..=dim`, as indices into the utilisations:
/// `None` stands for 1 and `Some(k)` for `rho_k`.
pub fn alpha_star_pattern(dim: usize, b: &[usize]) -> Vec<Option<usize>> {
    (2..=dim)
        .map(|l| {
            if l <= b[0] {
                None
            } else {
                Some(*b.iter().take_while(|&&bk| bk < l).last().unwrap())
            }
        })
        .collect()
}

/// `alpha*_b` with entries in any field, given the utilisations `rho[k - 1]`.
pub fn alpha_star<T: Num + Clone>(rho: &[T], dim: usize, b: &[usize]) -> Vec<T> {
    alpha_star_pattern(dim, b).into_iter().map(|p| p.map_or(T::one(), |k| rho[k - 1].clone())).collect()
}

/// `prod_{l = d+1}^{dim} (mu_l - lambda)/(mu_l - mu_d)`.
pub fn exit_weight<T: Num + Clone>(lambda: &T, mu: &[T], d: usize) -> T {
    let mut out = T::one();
    for l in d + 1..=mu.len() {
        out = out * (mu[l - 1].clone() - lambda.clone()) / (mu[l - 1].clone() - mu[d - 1].clone());
    }
    out
}

fn tandem_rates(net: &JacksonNetwork) -> Result<(f64, Vec<f64>)> {
    net.as_tandem().ok_or(Error::NotTandem)
}

/// The exit formula is a probability only when every `mu_i > lambda`.
fn stable_tandem_rates(net: &JacksonNetwork) -> Result<(f64, Vec<f64>)> {
    let (lambda, mu) = tandem_rates(net)?;
    if !net.is_stable() {
        return Err(Error::OutsideDomain("the tandem is unstable, some mu_i <= lambda".into()));
    }
    Ok((lambda, mu))
}

fn first_equal_pair(mu: &[f64], upto: usize) -> Option<(usize, usize)> {
    let top = mu.iter().cloned().fold(0.0, f64::max);
    for i in 0..upto {
        for j in i + 1..upto {
            if (mu[i] - mu[j]).abs() < EQUAL_RATE_TOL * top {
                return Some((i + 1, j + 1));
            }
        }
    }
    None
}

/// The solution `(c*, rho_d, alpha*)` of the harmonic system on `G_d`.
pub fn tandem_solution(net: &JacksonNetwork, d: usize) -> Result<(HarmonicSystemGraph, SystemSolution)> {
    let (lambda, mu) = tandem_rates(net)?;
    let dim = mu.len();
    if d == 0 || d > dim {
        return Err(Error::BadCoordinate(d));
    }
    if let Some((i, j)) = first_equal_pair(&mu, d) {
        return Err(Error::EqualRates(i, j));
    }
    let g = tandem_graph(dim, d);
    let rho = net.rhos();
    let alpha = g.vertices.iter().map(|b| alpha_star(rho, dim, b).into_iter().map(c).collect()).collect();
    let cs = g.vertices.iter().map(|b| c(cstar(&lambda, &mu, b))).collect();
    Ok((g, SystemSolution { beta: c(rho[d - 1]), alpha, c: cs }))
}

/// `h*_d` as a log-linear combination.
pub fn tandem_hd(net: &JacksonNetwork, d: usize) -> Result<LogLinearCombination> {
    Ok(tandem_solution(net, d)?.1.function())
}

/// The whole exit formula `sum_d K_d h*_d` as one combination (`2^dim - 1` terms).
pub fn tandem_exit_combination(net: &JacksonNetwork) -> Result<LogLinearCombination> {
    let (lambda, mu) = tandem_rates(net)?;
    let mut out = LogLinearCombination::default();
    for d in 1..=mu.len() {
        out = out.add(&tandem_hd(net, d)?.scale(c(exit_weight(&lambda, &mu, d))));
    }
    Ok(out)
}

/// Fast evaluation of the tandem exit formula.
///
/// Summing `h*_d` over its `2^(d-1)` vertices is a sum over increasing chains
/// ending at `d`, which a recursion over the last link evaluates in `O(d^2)`.
#[derive(Debug, Clone)]
pub struct TandemExit {
    mu: Vec<f64>,
    ln_rho: Vec<f64>,
    weight: Vec<f64>,
    links: Vec<Vec<f64>>,
}

impl TandemExit {
    pub fn new(net: &JacksonNetwork) -> Result<Self> {
        let (lambda, mu) = stable_tandem_rates(net)?;
        if let Some((i, j)) = first_equal_pair(&mu, mu.len()) {
            return Err(Error::EqualRates(i, j));
        }
        let dim = mu.len();
        let weight = (1..=dim).map(|d| exit_weight(&lambda, &mu, d)).collect();
        let link = |i: usize, k: usize| -> f64 {
            (i + 1..=k).map(|l| (mu[l - 1] - lambda) / (mu[l - 1] - mu[i - 1])).product()
        };
        let links = (0..=dim).map(|i| (0..=dim).map(|k| if i >= 1 && i < k { link(i, k) } else { 0.0 }).collect()).collect();
        Ok(TandemExit { ln_rho: mu.iter().map(|m| (lambda / m).ln()).collect(), mu, weight, links })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `ln P_y(tau < inf)`; `NaN` if cancellation leaves a nonpositive sum.
    pub fn ln_value(&self, y: &[i64]) -> f64 {
        let dim = self.dim();
        let mut prefix = vec![0i64; dim + 1];
        for k in 2..=dim {
            prefix[k] = prefix[k - 1] + y[k - 1];
        }
        let ybar = y[0] - prefix[dim];
        let mut f = vec![0.0; dim + 1];
        for k in 1..=dim {
            let mut s = vec![1.0];
            for i in 1..k {
                s.push(-f[i] * self.links[i][k] * ((prefix[k] - prefix[i]) as f64 * self.ln_rho[i - 1]).exp());
            }
            f[k] = compensated_sum(s);
        }
        let mut terms = Vec::with_capacity(dim);
        for d in 1..=dim {
            let coef = self.weight[d - 1] * f[d];
            if coef != 0.0 {
                let e = (ybar + prefix[dim] - prefix[d]) as f64 * self.ln_rho[d - 1];
                terms.push((coef, e));
            }
        }
        signed_log_sum(&terms)
    }

    pub fn value(&self, y: &[i64]) -> f64 {
        self.ln_value(y).exp()
    }

    pub fn power_table(&self, n: i64) -> PowerTable {
        let pow = self
            .ln_rho
            .iter()
            .map(|l| (0..=n.max(0)).map(|m| (m as f64 * l).exp()).collect())
            .collect();
        PowerTable { n, pow }
    }

    /// Same sum as [`TandemExit::ln_value`] in plain floating point with table
    /// lookups. `None` when an exponent leaves the table or the result is not
    /// a positive normal number.
    pub fn value_tabled(&self, y: &[i64], t: &PowerTable, f: &mut Vec<f64>) -> Option<f64> {
        let dim = self.dim();
        let tail: i64 = y[1..].iter().sum();
        if y[0] > t.n || y[0] < tail {
            return None;
        }
        f.clear();
        f.push(0.0);
        for k in 1..=dim {
            let mut s = 1.0;
            let mut run = 0;
            for i in (1..k).rev() {
                run += y[i];
                s -= f[i] * self.links[i][k] * t.pow[i - 1][run as usize];
            }
            f.push(s);
        }
        let mut total = 0.0;
        let mut e = y[0] - tail;
        for d in (1..=dim).rev() {
            total += self.weight[d - 1] * f[d] * t.pow[d - 1][e as usize];
            e += if d >= 2 { y[d - 1] } else { 0 };
        }
        total.is_normal().then_some(total).filter(|v| *v > 0.0)
    }
}

/// `rho_i^m` for `0 <= m <= n`.
#[derive(Debug, Clone)]
pub struct PowerTable {
    n: i64,
    pow: Vec<Vec<f64>>,
}

/// `ln(sum_k a_k e^{e_k})`, `NaN` when the sum is not positive.
pub(crate) fn signed_log_sum(terms: &[(f64, f64)]) -> f64 {
    let top = terms.iter().map(|t| t.1 + t.0.abs().ln()).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s = compensated_sum(terms.iter().map(|&(a, e)| a.signum() * (a.abs().ln() + e - top).exp()));
    if s > 0.0 {
        s.ln() + top
    } else {
        f64::NAN
    }
}

/// `P_y(tau < inf)` for a tandem walk; dispatches to the equal-rate limits
/// when service rates coincide.
pub fn tandem_exit_probability(net: &JacksonNetwork, y: &[i64]) -> Result<f64> {
    Ok(tandem_exit_ln(net, y)?.exp())
}

/// Natural log of [`tandem_exit_probability`].
pub fn tandem_exit_ln(net: &JacksonNetwork, y: &[i64]) -> Result<f64> {
    let (lambda, mu) = stable_tandem_rates(net)?;
    check_in_b(y)?;
    if first_equal_pair(&mu, mu.len()).is_some() {
        return Ok(tandem_exit_equal_rates(net, y)?.ln());
    }
    if mu.len() == 2 {
        return Ok(nicerep_ln(lambda, mu[0], mu[1], y));
    }
    Ok(TandemExit::new(net)?.ln_value(y))
}

fn check_in_b(y: &[i64]) -> Result<()> {
    if y.iter().skip(1).any(|&v| v < 0) || y[0] < y[1..].iter().sum::<i64>() {
        return Err(Error::OutsideDomain(format!("{y:?} is not in B")));
    }
    Ok(())
}

/// The two node formula
/// `rho2^(y1-y2) + k rho1^y1 - k rho2^(y1-y2) rho1^y2`, `k = (mu2-lambda)/(mu2-mu1)`.
fn nicerep_ln(lambda: f64, mu1: f64, mu2: f64, y: &[i64]) -> f64 {
    let (l1, l2) = ((lambda / mu1).ln(), (lambda / mu2).ln());
    let k = (mu2 - lambda) / (mu2 - mu1);
    let ybar = (y[0] - y[1]) as f64;
    signed_log_sum(&[(1.0, ybar * l2), (k, y[0] as f64 * l1), (-k, ybar * l2 + y[1] as f64 * l1)])
}

/// Explicit sum over every nonempty `b` of `{1, ..., dim}`:
/// `K_{max b} c*_b [(rho_{max b}, alpha*_b), y]`.
pub fn tandem_exit_expanded(net: &JacksonNetwork, y: &[i64]) -> Result<f64> {
    let (lambda, mu) = stable_tandem_rates(net)?;
    if let Some((i, j)) = first_equal_pair(&mu, mu.len()) {
        return Err(Error::EqualRates(i, j));
    }
    check_in_b(y)?;
    let dim = mu.len();
    let ln_rho: Vec<f64> = net.rhos().iter().map(|r| r.ln()).collect();
    let weight: Vec<f64> = (1..=dim).map(|d| exit_weight(&lambda, &mu, d)).collect();
    let ybar = y[0] - y[1..].iter().sum::<i64>();
    let mut terms = Vec::with_capacity((1usize << dim) - 1);
    for mask in 1u64..(1u64 << dim) {
        let b: Vec<usize> = (1..=dim).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        let top = *b.last().unwrap();
        let mut e = ybar as f64 * ln_rho[top - 1];
        for (l, pat) in (2..=dim).zip(alpha_star_pattern(dim, &b)) {
            if let Some(k) = pat {
                e += y[l - 1] as f64 * ln_rho[k - 1];
            }
        }
        terms.push((weight[top - 1] * cstar(&lambda, &mu, &b), e));
    }
    Ok(signed_log_sum(&terms).exp())
}

/// Limits of the exit formula when all service rates coincide (two or three nodes).
pub fn tandem_exit_equal_rates(net: &JacksonNetwork, y: &[i64]) -> Result<f64> {
    let (lambda, mu) = stable_tandem_rates(net)?;
    check_in_b(y)?;
    let top = mu.iter().cloned().fold(0.0, f64::max);
    let all_equal = mu.iter().all(|m| (m - mu[0]).abs() < EQUAL_RATE_TOL * top);
    if !all_equal || !(mu.len() == 2 || mu.len() == 3) {
        return Err(Error::UnsupportedPattern(format!("service rates {mu:?}")));
    }
    let m = mu[0];
    let rho = lambda / m;
    let c0 = (m - lambda) / m;
    let ybar = (y[0] - y[1..].iter().sum::<i64>()) as f64;
    if mu.len() == 2 {
        let y2 = y[1] as f64;
        return Ok(rho.powf(ybar) * (1.0 + c0 * ybar * rho.powf(y2)));
    }
    let (y2, y3) = (y[1] as f64, y[2] as f64);
    let inner = 0.5 * c0 * c0 * ybar * ybar * rho.powf(y2 + y3)
        + rho.powf(y3) * ((0.5 * c0 * c0 + y3 * c0 * c0) * rho.powf(y2) + c0) * ybar
        + 1.0;
    Ok(rho.powf(ybar) * inner)
}

/// Checks that `net1` is a simple extension of `net`: the first `d` nodes of
/// `net1` are the nodes of `net`, the new nodes never feed old nodes, and
/// lumping the new nodes into 0 gives a multiple of `p` off the diagonal.
pub fn check_simple_extension(net: &JacksonNetwork, net1: &JacksonNetwork) -> Result<f64> {
    let (d, d1) = (net.d(), net1.d());
    if d1 < d {
        return Err(Error::NotSimpleExtension("fewer nodes".into()));
    }
    for i in d + 1..=d1 {
        for j in 1..=d {
            if net1.p(i, j) != 0.0 {
                return Err(Error::NotSimpleExtension(format!("new node {i} feeds old node {j}")));
            }
        }
    }
    let lumped = |i: usize, j: usize| -> f64 {
        if j == 0 {
            net1.p(i, 0) + (d + 1..=d1).map(|k| net1.p(i, k)).sum::<f64>()
        } else {
            net1.p(i, j)
        }
    };
    let mut s = 0.0;
    for i in 0..=d {
        for j in 0..=d {
            if i != j {
                s += lumped(i, j);
            }
        }
    }
    if s == 0.0 {
        return Err(Error::NotSimpleExtension("lumped matrix vanishes".into()));
    }
    for i in 0..=d {
        for j in 0..=d {
            if i != j && (lumped(i, j) - s * net.p(i, j)).abs() > 1e-9 * s {
                return Err(Error::NotSimpleExtension(format!(
                    "lumped p'({i},{j}) = {} is not {s} * p({i},{j}) = {}",
                    lumped(i, j),
                    s * net.p(i, j)
                )));
            }
        }
    }
    Ok(s)
}

/// Lifts a solution to a simple extension: new coordinates of every `alpha` are `beta`.
pub fn extend_solution(net: &JacksonNetwork, net1: &JacksonNetwork, sol: &SystemSolution) -> Result<SystemSolution> {
    check_simple_extension(net, net1)?;
    let extra = net1.d() - net.d();
    let alpha = sol
        .alpha
        .iter()
        .map(|a| a.iter().cloned().chain(std::iter::repeat(sol.beta).take(extra)).collect())
        .collect();
    Ok(SystemSolution { beta: sol.beta, alpha, c: sol.c.clone() })
}

/// Hitting probability of the diagonal for the constrained diffusion with
/// drift `(2a + b, a - b)`, started at `x` with `x(1) >= x(2) >= 0`.
pub fn diffusion_exit_probability(a: f64, b: f64, x: [f64; 2]) -> Result<f64> {
    if a == b {
        return Err(Error::EqualDrifts);
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::OutsideDomain("drifts must be positive".into()));
    }
    if x[0] < x[1] || x[1] < 0.0 {
        return Err(Error::OutsideDomain(format!("{x:?}")));
    }
    let k = (a + 2.0 * b) / (a - b);
    let q = 3.0 * (2.0 * a + b);
    let e1 = (-(a + 2.0 * b) * 3.0 * (x[0] - x[1])).exp();
    // on the diagonal e1 = 1 and the bracket cancels exactly
    Ok(e1 + k * (e1 * (-q * x[1]).exp() - (-q * x[0]).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::transform;

    fn t2() -> JacksonNetwork {
        JacksonNetwork::tandem(0.1, &[0.4, 0.5]).unwrap()
    }

    #[test]
    fn term_arithmetic() {
        let h = LogLinearCombination::single(c(1.0), SurfacePoint::real(0.5, &[1.0]));
        assert!((h.eval(&[3, 1]).unwrap() - 0.25).norm() < 1e-15);
        assert!((h.eval(&[4, 4]).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn log_space_matches_direct() {
        let h = LogLinearCombination::new(vec![
            (c(2.0), SurfacePoint::real(0.3, &[0.9])),
            (c(-1.0), SurfacePoint::real(0.2, &[0.5])),
        ]);
        let y = [900, 3];
        let (m, s) = h.eval_scaled(&y).unwrap();
        let want = 2.0 * (897.0 * 0.3f64.ln() + 3.0 * 0.9f64.ln()).exp();
        let got = m.re.ln() + s;
        assert!((got - want.ln()).abs() < 1e-9 || want == 0.0);
        let ln_direct = 897.0 * 0.3f64.ln() + 3.0 * 0.9f64.ln() + 2f64.ln();
        assert!((got - ln_direct).abs() < 1e-9);
    }

    #[test]
    fn section_one_values() {
        let net = t2();
        let f = |x: [i64; 2]| tandem_exit_probability(&net, &transform(60, 1, &x)).unwrap();
        assert!((f([1, 0]) / 1.2037e-35 - 1.0).abs() < 5e-5);
        assert!((f([2, 0]) / 4.8148e-35 - 1.0).abs() < 5e-5);
        assert!((f([9, 0]) / 7.8885e-31 - 1.0).abs() < 5e-5);
    }

    #[test]
    fn two_node_formula_matches_general_sum() {
        let net = t2();
        let te = TandemExit::new(&net).unwrap();
        for y in [[0, 0], [3, 1], [10, 4], [59, 0], [40, 40]] {
            let a = tandem_exit_probability(&net, &y).unwrap();
            let b = te.value(&y);
            let e = tandem_exit_expanded(&net, &y).unwrap();
            assert!((a - b).abs() <= 1e-12 * a, "{y:?}");
            assert!((a - e).abs() <= 1e-12 * a, "{y:?}");
        }
    }

    #[test]
    fn graph_shapes() {
        let g = tandem_graph(4, 4);
        assert_eq!(g.vertices.len(), 8);
        assert!(g.is_edge_complete());
        let g2 = tandem_graph(2, 2);
        assert_eq!(g2.vertices, vec![vec![2], vec![1, 2]]);
        assert_eq!(g2.edge(0, 1), Some(2));
    }

    #[test]
    fn cstar_examples() {
        let mu = [0.11, 0.13, 0.07, 0.05, 0.19, 0.17, 0.12, 0.1];
        let lam: f64 = 0.06;
        let want = -((mu[3] - lam) * (mu[4] - lam) * (mu[5] - lam)) / ((mu[3] - mu[2]) * (mu[4] - mu[2]) * (mu[5] - mu[2]));
        assert!((cstar(&lam, &mu, &[3, 6]) - want).abs() < 1e-15);
        assert_eq!(cstar(&lam, &mu, &[5]), 1.0);
        let rho: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        assert_eq!(alpha_star(&rho, 8, &[5]), vec![1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0]);
        assert_eq!(alpha_star(&rho, 8, &[3, 6]), vec![1.0, 1.0, 3.0, 3.0, 3.0, 6.0, 6.0]);
    }

    #[test]
    fn equal_rates_on_boundary() {
        let net = JacksonNetwork::tandem(0.2, &[0.4, 0.4]).unwrap();
        assert!((tandem_exit_probability(&net, &[5, 5]).unwrap() - 1.0).abs() < 1e-15);
        let n3 = JacksonNetwork::tandem(0.1, &[0.3, 0.3, 0.3]).unwrap();
        assert!((tandem_exit_probability(&n3, &[5, 2, 3]).unwrap() - 1.0).abs() < 1e-15);
        let mixed = JacksonNetwork::tandem(0.1, &[0.25, 0.25, 0.2, 0.2]).unwrap();
        assert!(matches!(tandem_exit_probability(&mixed, &[5, 0, 0, 0]), Err(Error::UnsupportedPattern(_))));
    }

    #[test]
    fn diffusion_diagonal() {
        assert_eq!(diffusion_exit_probability(0.3, 0.1, [2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(diffusion_exit_probability(0.3, 0.3, [2.0, 1.0]), Err(Error::EqualDrifts));
    }
}

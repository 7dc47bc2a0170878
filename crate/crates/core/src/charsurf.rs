//! Characteristic polynomials and surfaces of the limit walk `Y`.
//!
//! `Y` is unconstrained in its first coordinate and constrained in the
//! coordinates `N = {2, ..., d}`. A point `(beta, alpha)` carries one complex
//! number `alpha(j)` for every `j` in `N`; the log-linear function it defines is
//! `[(beta, alpha), z] = beta^(z(1) - sum_j z(j)) * prod_j alpha(j)^z(j)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::JacksonNetwork;

pub type C64 = Complex64;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(beta, alpha)` with `alpha[k]` the value at constrained coordinate `k + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub beta: C64,
    pub alpha: Vec<C64>,
}

impl SurfacePoint {
    pub fn new(beta: C64, alpha: Vec<C64>) -> Self {
        SurfacePoint { beta, alpha }
    }

    pub fn real(beta: f64, alpha: &[f64]) -> Self {
        SurfacePoint { beta: c(beta), alpha: alpha.iter().map(|&a| c(a)).collect() }
    }

    /// `alpha = (1, ..., 1)` in dimension `d`.
    pub fn ones(d: usize, beta: C64) -> Self {
        SurfacePoint { beta, alpha: vec![c(1.0); d - 1] }
    }

    /// `alpha(j)` for `j` in `2..=d`.
    pub fn alpha_at(&self, j: usize) -> C64 {
        self.alpha[j - 2]
    }

    pub fn with_alpha(&self, j: usize, value: C64) -> Self {
        let mut out = self.clone();
        out.alpha[j - 2] = value;
        out
    }

    /// Dimension `d` of the walk this point belongs to.
    pub fn dim(&self) -> usize {
        self.alpha.len() + 1
    }

    /// `[(beta, alpha), z]`.
    pub fn eval(&self, z: &[i64]) -> Result<C64> {
        let e1 = z[0] - z[1..].iter().sum::<i64>();
        let mut v = ipow(self.beta, e1)?;
        for (a, &k) in self.alpha.iter().zip(&z[1..]) {
            v *= ipow(*a, k)?;
        }
        Ok(v)
    }

    /// Natural log of `|[(beta, alpha), z]|`, `-inf` when the value is 0.
    pub fn ln_abs(&self, z: &[i64]) -> Result<f64> {
        let e1 = z[0] - z[1..].iter().sum::<i64>();
        let mut s = ln_pow(self.beta, e1)?;
        for (a, &k) in self.alpha.iter().zip(&z[1..]) {
            s += ln_pow(*a, k)?;
        }
        Ok(s)
    }

    /// Argument of `[(beta, alpha), z]`.
    pub fn arg(&self, z: &[i64]) -> f64 {
        let e1 = z[0] - z[1..].iter().sum::<i64>();
        let mut s = e1 as f64 * self.beta.arg();
        for (a, &k) in self.alpha.iter().zip(&z[1..]) {
            s += k as f64 * a.arg();
        }
        s
    }

    fn nonzero(&self) -> Result<()> {
        if self.beta == c(0.0) || self.alpha.iter().any(|a| *a == c(0.0)) {
            Err(Error::ZeroCoordinate)
        } else {
            Ok(())
        }
    }
}

pub(crate) fn ipow(z: C64, k: i64) -> Result<C64> {
    if k == 0 {
        return Ok(c(1.0));
    }
    if z == c(0.0) {
        return if k > 0 { Ok(c(0.0)) } else { Err(Error::ZeroToNegativePower) };
    }
    if k.unsigned_abs() <= i32::MAX as u64 {
        Ok(z.powi(k as i32))
    } else {
        Ok(C64::from_polar(z.norm().powf(k as f64), z.arg() * k as f64))
    }
}

fn ln_pow(z: C64, k: i64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    if z == c(0.0) {
        return if k > 0 { Ok(f64::NEG_INFINITY) } else { Err(Error::ZeroToNegativePower) };
    }
    Ok(k as f64 * z.norm().ln())
}

/// An increment of `Y` and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementWeight {
    pub v: Vec<i64>,
    pub prob: f64,
    /// Node whose queue the jump empties from; blocks the jump when that
    /// coordinate of `Y` is 0 (never for node 0 or node 1).
    pub from: usize,
}

impl IncrementWeight {
    pub fn blocked_by(&self) -> Option<usize> {
        (self.from >= 2).then_some(self.from)
    }
}

/// Increments of `Y`: the increments of `X` with the first coordinate negated.
pub fn y_increments(net: &JacksonNetwork) -> Vec<IncrementWeight> {
    net.x_increments()
        .into_iter()
        .map(|inc| {
            let mut v = inc.v;
            v[0] = -v[0];
            IncrementWeight { v, prob: inc.prob, from: inc.from }
        })
        .collect()
}

/// Increments of `Z`, the unconstrained version of `Y`.
pub fn z_increments(net: &JacksonNetwork) -> Vec<IncrementWeight> {
    y_increments(net)
}

/// `p_a(beta, alpha)`: the characteristic polynomial (rational form) of the
/// boundary face on which the coordinates in `a` vanish.
pub fn char_poly(net: &JacksonNetwork, a: &[usize], pt: &SurfacePoint) -> Result<C64> {
    pt.nonzero()?;
    check_labels(net, a)?;
    let mut s = c(0.0);
    for inc in y_increments(net) {
        if inc.blocked_by().is_some_and(|j| a.contains(&j)) {
            continue;
        }
        s += inc.prob * pt.eval(&inc.v)?;
    }
    for &j in a {
        s += net.mu(j);
    }
    Ok(s)
}

/// `|p_a(beta, alpha) - 1| < tol`.
pub fn on_surface(net: &JacksonNetwork, a: &[usize], pt: &SurfacePoint, tol: f64) -> bool {
    char_poly(net, a, pt).map(|v| (v - 1.0).norm() < tol).unwrap_or(false)
}

fn check_labels(net: &JacksonNetwork, a: &[usize]) -> Result<()> {
    match a.iter().find(|&&j| j < 2 || j > net.d()) {
        Some(&j) => Err(Error::BadCoordinate(j)),
        None => Ok(()),
    }
}

struct P2 {
    p01: f64,
    p02: f64,
    p10: f64,
    p12: f64,
    p20: f64,
    p21: f64,
}

fn p2(net: &JacksonNetwork) -> Result<P2> {
    if net.d() != 2 {
        return Err(Error::NotTwoDimensional(net.d()));
    }
    Ok(P2 {
        p01: net.p(0, 1),
        p02: net.p(0, 2),
        p10: net.p(1, 0),
        p12: net.p(1, 2),
        p20: net.p(2, 0),
        p21: net.p(2, 1),
    })
}

/// The two dimensional characteristic polynomial in polynomial form,
/// `beta * alpha * p(beta, alpha)`; the characteristic equation reads
/// `poly = beta * alpha`.
pub fn char_poly_2d(net: &JacksonNetwork, beta: C64, alpha: C64) -> Result<C64> {
    let q = p2(net)?;
    Ok((q.p10 * alpha + q.p20) * beta * beta
        + (q.p12 * alpha * alpha + q.p21) * beta
        + q.p02 * alpha * alpha
        + q.p01 * alpha)
}

/// Discriminant of the quadratic in `beta`, normalised by `alpha^2`:
/// `(p12 alpha + p21/alpha - 1)^2 - 4 (p10 + p20/alpha)(p02 alpha + p01)`.
///
/// At `alpha = 1` this is `((p10 + p20) - (p01 + p02))^2`.
pub fn discriminant2d(net: &JacksonNetwork, alpha: C64) -> Result<C64> {
    let q = p2(net)?;
    if alpha == c(0.0) {
        return Err(Error::ZeroCoordinate);
    }
    let t = q.p12 * alpha + q.p21 / alpha - 1.0;
    Ok(t * t - 4.0 * (q.p10 + q.p20 / alpha) * (q.p02 * alpha + q.p01))
}

/// Square root with nonnegative real part; a negative real radicand gives `+i sqrt|z|`.
pub fn sqrt_right(z: C64) -> C64 {
    let s = z.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

/// Roots `(beta_1, beta_2)` of the characteristic equation at fixed `alpha`.
///
/// `beta_1` takes the minus sign in front of the square root. When the
/// equation degenerates to an affine one its single root is returned twice.
pub fn beta_roots2d(net: &JacksonNetwork, alpha: C64) -> Result<(C64, C64)> {
    let q = p2(net)?;
    if alpha == c(0.0) {
        return Err(Error::ZeroCoordinate);
    }
    let lead = q.p20 + q.p10 * alpha;
    let b = q.p12 * alpha * alpha + q.p21 - alpha;
    let c0 = q.p02 * alpha * alpha + q.p01 * alpha;
    if lead.norm() < 1e-300 {
        if b.norm() < 1e-300 {
            return Err(Error::DegenerateAffine);
        }
        let r = -c0 / b;
        return Ok((r, r));
    }
    let s = sqrt_right(discriminant2d(net, alpha)?);
    let m = 1.0 - q.p12 * alpha - q.p21 / alpha;
    let den = 2.0 * lead;
    Ok((alpha * (m - s) / den, alpha * (m + s) / den))
}

/// Condition under which the imaginary part of the discriminant does not
/// vanish on the open upper half of the unit circle.
pub fn simplifying_condition_holds(net: &JacksonNetwork) -> bool {
    let Ok(q) = p2(net) else { return true };
    let num = 2.0 * q.p02 * q.p10 - 2.0 * q.p01 * q.p20 + q.p12 - q.p21;
    let den = q.p12 * q.p12 - q.p21 * q.p21;
    if den == 0.0 {
        return true;
    }
    let x = num / den;
    !(x > -1.0 && x < 1.0)
}

fn sums_at(net: &JacksonNetwork, l: usize, pt: &SurfacePoint) -> Result<(C64, C64)> {
    let base = pt.with_alpha(l, c(1.0));
    let mut minus = c(0.0);
    let mut plus = c(0.0);
    for inc in y_increments(net) {
        match inc.v[l - 1] {
            -1 => minus += inc.prob * base.eval(&inc.v)?,
            1 => plus += inc.prob * base.eval(&inc.v)?,
            _ => {}
        }
    }
    Ok((minus, plus))
}

/// The `l`-conjugate of a point of the characteristic surface: the other
/// root in `alpha(l)` with every other coordinate fixed. Returns the new `alpha`.
pub fn conjugator(net: &JacksonNetwork, l: usize, pt: &SurfacePoint) -> Result<Vec<C64>> {
    check_labels(net, &[l])?;
    pt.nonzero()?;
    let (minus, plus) = sums_at(net, l, pt)?;
    if plus.norm() < 1e-300 {
        return Err(Error::SingularBoundaryPolynomial);
    }
    let mut alpha = pt.alpha.clone();
    alpha[l - 2] = minus / plus / pt.alpha_at(l);
    Ok(alpha)
}

/// Two dimensional conjugator `(p20 beta^2 + p21 beta) / ((p02 + beta p12) alpha)`.
pub fn conjugator2d(net: &JacksonNetwork, beta: C64, alpha: C64) -> Result<C64> {
    let q = p2(net)?;
    if alpha == c(0.0) {
        return Err(Error::ZeroCoordinate);
    }
    let den = q.p02 + beta * q.p12;
    if den.norm() < 1e-300 {
        return Err(Error::SingularBoundaryPolynomial);
    }
    Ok((q.p20 * beta * beta + q.p21 * beta) / den / alpha)
}

/// `C(j, beta, alpha) = mu_j - sum_{v(j) = -1} p(v) [(beta, alpha), v]`.
pub fn boundary_coeff(net: &JacksonNetwork, j: usize, pt: &SurfacePoint) -> Result<C64> {
    check_labels(net, &[j])?;
    if pt.alpha_at(j) == c(0.0) {
        return Err(Error::ZeroCoordinate);
    }
    let mut s = c(net.mu(j));
    for inc in y_increments(net) {
        if inc.v[j - 1] == -1 {
            s -= inc.prob * pt.eval(&inc.v)?;
        }
    }
    Ok(s)
}

/// Root `r_1` of the single-term harmonic function and `beta(r_1)`, where
/// `beta(alpha) = (mu_2 alpha - p21) / p20`.
pub fn single_term_root2d(net: &JacksonNetwork) -> Result<(f64, f64)> {
    let q = p2(net)?;
    if q.p20 == 0.0 {
        return Err(Error::NoExitAtTwo);
    }
    let mu2 = net.mu(2);
    let a = q.p21 / q.p20;
    let r1 = (q.p01 + a * (1.0 + q.p10 * a - mu2)) / ((mu2 / q.p20) * (mu2 * q.p10 / q.p20 + q.p12));
    Ok((r1, single_term_beta(net, r1)?))
}

/// `beta(alpha) = (mu_2 alpha - p21) / p20`, the `beta` at which
/// `C(2, beta, alpha)` vanishes.
pub fn single_term_beta(net: &JacksonNetwork, alpha: f64) -> Result<f64> {
    let q = p2(net)?;
    if q.p20 == 0.0 {
        return Err(Error::NoExitAtTwo);
    }
    Ok((net.mu(2) * alpha - q.p21) / q.p20)
}

/// Hamiltonian `H_a(q)` of the walk `X` on the face where the nodes in `a` are empty.
pub fn hamiltonian(net: &JacksonNetwork, a: &[usize], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for inc in net.x_increments() {
        if inc.needs_positive().is_some_and(|j| a.contains(&j)) {
            s += inc.prob;
        } else {
            let ip: f64 = inc.v.iter().zip(q).map(|(&v, &qq)| v as f64 * qq).sum();
            s += inc.prob * (-ip).exp();
        }
    }
    -s.ln()
}

/// The surface point matching `q` in `H(q) = -log p(beta, alpha)`:
/// `beta = e^{q(1)}`, `alpha(j) = e^{q(1) - q(j)}`.
pub fn point_from_q(q: &[f64]) -> SurfacePoint {
    let beta = q[0].exp();
    SurfacePoint::real(beta, &q[1..].iter().map(|&qj| (q[0] - qj).exp()).collect::<Vec<_>>())
}

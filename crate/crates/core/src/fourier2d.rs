//! Balayage approximations for two dimensional walks.
//!
//! On the boundary of `B` a log-linear term reduces to `alpha^y`, so harmonic
//! pairs built on `alpha` near a circle of radius `R` act like a perturbed
//! Fourier basis. Interpolating a boundary function with `K + 1` of them and
//! bounding the interpolation error on the rest of the boundary gives a
//! certified approximation of its Balayage image.

use std::f64::consts::PI;

use crate::charsurf::{self, c, SurfacePoint, C64};
use crate::error::{Error, Result};
use crate::harmonic::LogLinearCombination;
use crate::linalg::ComplexLu;
use crate::network::JacksonNetwork;

/// Largest accepted condition number of the basis matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Hard cap on the error search window.
const SEARCH_CAP: i64 = 1_000_000;

/// `A_0 = [(r, 1), .] + c7 [(r, alpha'), .]`, harmonic and equal to
/// `1 + c7 alpha'^y` on the boundary of `B`.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    pub r: f64,
    pub alpha_conj: f64,
    pub c7: f64,
    pub a0: LogLinearCombination,
    /// `max_y |A_0(y, y) - 1| = |c7|`, attained at `y = 0`.
    pub sup_deviation: f64,
}

impl FirstOrder {
    /// `(lower, upper)` multipliers of `A_0` bracketing `P_y(tau < inf)`.
    ///
    /// When `c7 >= 0`, `A_0 >= 1` on the boundary, so `A_0 / (1 + sup) <= P <= A_0`.
    /// When `c7 < 0` only `P >= A_0` is certain, and the upper multiplier is
    /// `1 / (1 - sup)` if `sup < 1` and infinite otherwise.
    pub fn bracket(&self) -> (f64, f64) {
        if self.c7 >= 0.0 {
            (1.0 / (1.0 + self.sup_deviation), 1.0)
        } else if self.sup_deviation < 1.0 {
            (1.0, 1.0 / (1.0 - self.sup_deviation))
        } else {
            (1.0, f64::INFINITY)
        }
    }
}

pub fn first_order(net: &JacksonNetwork) -> Result<FirstOrder> {
    let (b1, _) = charsurf::beta_roots2d(net, c(1.0))?;
    let r = b1.re;
    let a2 = charsurf::conjugator2d(net, c(r), c(1.0))?;
    if !(a2.norm() < 1.0) {
        return Err(Error::AssumptionViolated(format!("conjugate point alpha(r, 1) = {a2} is not inside the unit disc")));
    }
    let p1 = SurfacePoint::real(r, &[1.0]);
    let p2 = SurfacePoint::new(c(r), vec![a2]);
    let c_conj = charsurf::boundary_coeff(net, 2, &p2)?;
    if c_conj.norm() < 1e-14 {
        return Err(Error::AssumptionViolated("C(r, alpha(r, 1)) vanishes".into()));
    }
    let c7 = -(charsurf::boundary_coeff(net, 2, &p1)? / c_conj).re;
    let a0 = LogLinearCombination::new(vec![(c(1.0), p1), (c(c7), SurfacePoint::new(c(r), vec![c(a2.re)]))]);
    Ok(FirstOrder { r, alpha_conj: a2.re, c7, a0, sup_deviation: c7.abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    /// `[(beta(r_1), r_1), .]`, harmonic on its own.
    SingleTerm,
    /// Normalised harmonic pair built on `alpha`.
    Pair,
}

#[derive(Debug, Clone)]
pub struct BasisElement {
    pub kind: BasisKind,
    pub beta: C64,
    pub alpha: C64,
    /// Conjugate point; equal to `alpha` for the single-term element.
    pub alpha_conj: C64,
    /// Boundary trace is `alpha^y - kappa alpha_conj^y`.
    pub kappa: C64,
    pub form: LogLinearCombination,
}

impl BasisElement {
    pub fn trace(&self, y: i64) -> C64 {
        self.alpha.powi(y as i32) - self.kappa * self.alpha_conj.powi(y as i32)
    }

    /// `|trace(y)| <= envelope(y)`, nonincreasing in `y`.
    pub fn envelope(&self, y: i64) -> f64 {
        self.alpha.norm().powi(y as i32) + self.kappa.norm() * self.alpha_conj.norm().powi(y as i32)
    }
}

/// The single-term element `[(beta(r_1), r_1), .]`.
pub fn single_term_basis(net: &JacksonNetwork) -> Result<BasisElement> {
    let (r1, b) = charsurf::single_term_root2d(net)?;
    if !(b.abs() < 1.0 && r1.abs() <= 1.0) {
        return Err(Error::NotBalayageDetermined(format!("beta(r1) = {b}, r1 = {r1}")));
    }
    let pt = SurfacePoint::real(b, &[r1]);
    Ok(BasisElement {
        kind: BasisKind::SingleTerm,
        beta: c(b),
        alpha: c(r1),
        alpha_conj: c(r1),
        kappa: c(0.0),
        form: LogLinearCombination::single(c(1.0), pt),
    })
}

/// The pair `[(beta_1, alpha), .] - kappa [(beta_1, alpha'), .]` with
/// `beta_1 = beta_1(alpha)`, `alpha'` its conjugate and
/// `kappa = C(beta_1, alpha) / C(beta_1, alpha')`.
pub fn perturbed_basis(net: &JacksonNetwork, alpha: C64) -> Result<BasisElement> {
    let (b1, _) = charsurf::beta_roots2d(net, alpha)?;
    let a2 = charsurf::conjugator2d(net, b1, alpha)?;
    if !(b1.norm() < 1.0 && alpha.norm() <= 1.0 && a2.norm() < 1.0) {
        return Err(Error::NotBalayageDetermined(format!(
            "|beta_1| = {}, |alpha| = {}, |alpha'| = {}",
            b1.norm(),
            alpha.norm(),
            a2.norm()
        )));
    }
    let p1 = SurfacePoint::new(b1, vec![alpha]);
    let p2 = SurfacePoint::new(b1, vec![a2]);
    let cc = charsurf::boundary_coeff(net, 2, &p2)?;
    if cc.norm() < 1e-300 {
        return Err(Error::SingularBoundaryPolynomial);
    }
    let kappa = charsurf::boundary_coeff(net, 2, &p1)? / cc;
    Ok(BasisElement {
        kind: BasisKind::Pair,
        beta: b1,
        alpha,
        alpha_conj: a2,
        kappa,
        form: LogLinearCombination::new(vec![(c(1.0), p1), (-kappa, p2)]),
    })
}

/// `alpha_j = R e^{2 pi i j / (K + 1)}`, `j = 1..K`.
pub fn phase_layout(k: usize, radius: f64) -> Vec<C64> {
    (1..=k).map(|j| C64::from_polar(radius, 2.0 * PI * j as f64 / (k as f64 + 1.0))).collect()
}

/// The single-term element followed by the `K` pairs of [`phase_layout`].
pub fn basis(net: &JacksonNetwork, k: usize, radius: f64) -> Result<Vec<BasisElement>> {
    let mut out = vec![single_term_basis(net)?];
    for a in phase_layout(k, radius) {
        out.push(perturbed_basis(net, a)?);
    }
    Ok(out)
}

/// A function on the boundary of `B`, indexed by `y` in `(y, y)`:
/// `head[y]` for `y < head.len()`, and `tail_const + sum_k c_k z_k^y` beyond.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryTarget {
    pub head: Vec<C64>,
    pub tail_const: C64,
    pub tail_geo: Vec<(C64, C64)>,
}

impl BoundaryTarget {
    pub fn geometric(coef: C64, ratio: C64) -> Self {
        BoundaryTarget { head: Vec::new(), tail_const: c(0.0), tail_geo: vec![(coef, ratio)] }
    }

    pub fn eval(&self, y: i64) -> C64 {
        if (y as usize) < self.head.len() {
            return self.head[y as usize];
        }
        self.tail_const + self.tail_geo.iter().map(|(k, z)| k * z.powi(y as i32)).sum::<C64>()
    }

    /// Bound on `|target(y) - tail_const|` beyond the head.
    fn tail_envelope(&self, y: i64) -> f64 {
        self.tail_geo.iter().map(|(k, z)| k.norm() * z.norm().powi(y as i32)).sum()
    }

    pub fn is_real(&self) -> bool {
        self.head.iter().all(|z| z.im == 0.0)
            && self.tail_const.im == 0.0
            && self.tail_geo.iter().all(|(k, z)| k.im == 0.0 && z.im == 0.0)
    }

    fn tail_ok(&self) -> bool {
        self.tail_geo.iter().all(|(_, z)| z.norm() < 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct BalayageApproximation {
    pub combination: LogLinearCombination,
    pub psi: Vec<C64>,
    pub condition: f64,
    /// Certified `sup_y |approx(y, y) - target(y)|`.
    pub max_error: f64,
    pub argmax: i64,
    /// End of the explicit search window.
    pub search_end: i64,
    /// `(1 / (1 + max_error), 1 / (1 - max_error))`; multipliers of the
    /// approximation bracketing the Balayage of a target equal to 1.
    pub bracket: (f64, f64),
    /// Largest interpolation residual on `0..=K`.
    pub interpolation_error: f64,
}

fn bracket_of(eps: f64) -> (f64, f64) {
    (1.0 / (1.0 + eps), if eps < 1.0 { 1.0 / (1.0 - eps) } else { f64::INFINITY })
}

/// Interpolates `target` on `0..=K` with the basis of [`basis`] and certifies
/// the error on the rest of the boundary.
pub fn refine(net: &JacksonNetwork, k: usize, radius: f64, target: &BoundaryTarget) -> Result<BalayageApproximation> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if !target.tail_ok() {
        return Err(Error::UnsupportedTail);
    }
    let els = basis(net, k, radius)?;
    let n = k + 1;
    // Column j holds the trace of element j, so the system is `B^T psi = b`.
    let m: Vec<Vec<C64>> = (0..n).map(|y| els.iter().map(|e| e.trace(y as i64)).collect()).collect();
    let lu = ComplexLu::new(m.clone()).ok_or(Error::SingularBasis { cond: f64::INFINITY })?;
    let cond = lu.condition(&m);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularBasis { cond });
    }
    let b: Vec<C64> = (0..n).map(|y| target.eval(y as i64)).collect();
    let mut psi = lu.solve(&b);
    if target.is_real() {
        // alpha_j and alpha_{K+1-j} are conjugate, so a real target has
        // psi_{K+1-j} = conj(psi_j); enforcing it makes the sum exactly real.
        let raw = psi.clone();
        psi[0] = c(raw[0].re);
        for j in 1..=k {
            psi[j] = 0.5 * (raw[j] + raw[k + 1 - j].conj());
        }
    }
    let approx = |y: i64| -> C64 { els.iter().zip(&psi).map(|(e, p)| p * e.trace(y)).sum() };
    let env = |y: i64| -> f64 { els.iter().zip(&psi).map(|(e, p)| p.norm() * e.envelope(y)).sum::<f64>() + target.tail_envelope(y) };
    let interpolation_error = (0..n).map(|y| (approx(y as i64) - b[y]).norm()).fold(0.0, f64::max);

    let tail_abs = target.tail_const.norm();
    let start = (k as i64 + 1).max(target.head.len() as i64);
    let mut best = 0.0f64;
    let mut argmax = k as i64 + 1;
    let mut y = k as i64 + 1;
    loop {
        let e = (approx(y) - target.eval(y)).norm();
        if e > best {
            best = e;
            argmax = y;
        }
        if y >= start && (env(y + 1) <= 0.5 * best || y >= SEARCH_CAP) {
            break;
        }
        y += 1;
    }
    // Beyond `y`, the error is at most `|tail_const| + env`.
    let beyond = tail_abs + env(y + 1);
    let max_error = best.max(beyond).max(interpolation_error);
    Ok(BalayageApproximation {
        combination: els
            .iter()
            .zip(&psi)
            .fold(LogLinearCombination::default(), |acc, (e, p)| acc.add(&e.form.scale(*p))),
        psi,
        condition: cond,
        max_error,
        argmax,
        search_end: y,
        bracket: bracket_of(max_error),
        interpolation_error,
    })
}

/// The first order approximation corrected by interpolating `-c7 alpha'^y`.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub first: FirstOrder,
    pub refined: BalayageApproximation,
    /// `g = A_0 + A_1`, within a factor `bracket` of `P_y(tau < inf)`.
    pub g: LogLinearCombination,
    pub bracket: (f64, f64),
}

impl Pipeline {
    /// `(g, lower, upper)` at `y`.
    pub fn at(&self, y: &[i64]) -> Result<(f64, f64, f64)> {
        let g = self.g.eval(y)?.re;
        Ok((g, g * self.bracket.0, g * self.bracket.1))
    }
}

pub fn pipeline(net: &JacksonNetwork, k: usize, radius: f64) -> Result<Pipeline> {
    let first = first_order(net)?;
    let target = BoundaryTarget::geometric(c(-first.c7), c(first.alpha_conj));
    let refined = refine(net, k, radius, &target)?;
    let g = first.a0.add(&refined.combination);
    let bracket = refined.bracket;
    Ok(Pipeline { first, refined, g, bracket })
}

/// Approximation of `y -> E_y[f(Y_tau) 1{tau < inf}]` for `f` given by its
/// values on `0..=K` and a zero or constant tail.
///
/// A constant tail `t` is carried by `t A_0`; the rest is interpolated.
/// `|approx - E f| <= max_error * P_y(tau < inf)`.
pub fn balayage_general(net: &JacksonNetwork, f: &[C64], tail: Tail, k: usize, radius: f64) -> Result<BalayageApproximation> {
    if f.len() > k + 1 {
        return Err(Error::Config(format!("{} boundary values given, at most K + 1 = {} used", f.len(), k + 1)));
    }
    let t = match tail {
        Tail::Zero => c(0.0),
        Tail::Constant(v) => v,
    };
    if t == c(0.0) {
        let target = BoundaryTarget { head: f.to_vec(), tail_const: c(0.0), tail_geo: vec![] };
        return refine(net, k, radius, &target);
    }
    let first = first_order(net)?;
    let dev = |y: i64| t * first.c7 * first.alpha_conj.powi(y as i32);
    let head: Vec<C64> = (0..f.len()).map(|y| f[y] - t - dev(y as i64)).collect();
    let target = BoundaryTarget { head, tail_const: c(0.0), tail_geo: vec![(-t * first.c7, c(first.alpha_conj))] };
    let mut out = refine(net, k, radius, &target)?;
    out.combination = first.a0.scale(t).add(&out.combination);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Zero,
    Constant(C64),
}

/// `E_z[alpha^{Z_tau(2)} 1{tau < inf}] = alpha^{z(2)} beta_1(alpha)^{z(1) - z(2)}`
/// for the unconstrained walk and `|alpha| = 1`.
pub fn balayage_z(net: &JacksonNetwork, alpha: C64, z: &[i64]) -> Result<C64> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::OutsideDomain(format!("|alpha| = {} is not 1", alpha.norm())));
    }
    if z[0] < z[1] {
        return Err(Error::OutsideDomain(format!("{z:?} is not in B")));
    }
    let (b1, _) = charsurf::beta_roots2d(net, alpha)?;
    Ok(alpha.powi(z[1] as i32) * b1.powi((z[0] - z[1]) as i32))
}

/// `max(g1(T^1_n x), g2(T^2_n x))`; `g2` is written in the coordinates of the
/// network with nodes 1 and 2 exchanged, where `T^2_n x = (n - x(2), x(1))`.
pub fn combine_corners(n: i64, g1: &LogLinearCombination, g2: &LogLinearCombination, x: &[i64]) -> Result<f64> {
    let y1 = [n - x[0], x[1]];
    let y2 = [n - x[1], x[0]];
    Ok(g1.eval(&y1)?.re.max(g2.eval(&y2)?.re))
}

/// Corner approximations `g1`, `g2` of a two node network.
pub fn corner_pipelines(net: &JacksonNetwork, k: usize, radius: f64) -> Result<(Pipeline, Pipeline)> {
    Ok((pipeline(net, k, radius)?, pipeline(&net.corner_view(2)?, k, radius)?))
}

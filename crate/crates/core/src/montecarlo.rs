//! Path simulation and estimators.
//!
//! Every estimator splits its samples into fixed-size batches. Batch `b`
//! draws from the ChaCha stream `b` of the given seed, so results do not
//! depend on the number of worker threads.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{tandem_exit_ln, PowerTable, TandemExit};
use crate::linalg::bisect;
use crate::solve::{exact_exit_grid, SolveOptions};
use crate::network::{level, transform, JacksonNetwork, LatticePoint, XIncrement};

/// Samples per batch, and per RNG stream.
pub const BATCH: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Process {
    /// The queue lengths, constrained on every face.
    X,
    /// `T_n X`: constrained on every face, with `y(1) <= n`.
    Yn(i64),
    /// Constrained off the first coordinate.
    Y,
    /// Unconstrained.
    Z,
}

/// Stopping rules; the first one to fire ends the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stops {
    /// `X` only: `sum x = n`.
    pub tau_n: Option<i64>,
    /// `Yn`, `Y`, `Z`: the walk is on the boundary of `B`.
    pub tau: bool,
    /// `X` and `Yn`: the network is empty, checked from step 1 on.
    pub tau_0: bool,
    /// `Y`, `Z`: `y(1) - sum_{j >= 2} y(j)` reaches this level.
    pub zeta: Option<i64>,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub process: Process,
    pub start: LatticePoint,
    pub stops: Stops,
}

impl PathSpec {
    fn validate(&self, d: usize) -> Result<()> {
        if self.start.len() != d {
            return Err(Error::Config(format!("start has {} coordinates, network has {d}", self.start.len())));
        }
        let s = &self.stops;
        let bad = |m: &str| Err(Error::Config(m.into()));
        match self.process {
            Process::X => {
                if self.start.iter().any(|&v| v < 0) {
                    return bad("X starts outside the orthant");
                }
                if s.tau || s.zeta.is_some() {
                    return bad("tau and zeta stops apply to Y-type walks");
                }
            }
            Process::Yn(n) => {
                if self.start[0] > n || self.start[1..].iter().any(|&v| v < 0) {
                    return bad("Yn starts outside its domain");
                }
                if s.tau_n.is_some() || s.zeta.is_some() {
                    return bad("tau_n and zeta stops do not apply to Yn");
                }
            }
            Process::Y | Process::Z => {
                if self.process == Process::Y && self.start[1..].iter().any(|&v| v < 0) {
                    return bad("Y starts outside its domain");
                }
                if s.tau_n.is_some() || s.tau_0 {
                    return bad("tau_n and tau_0 stops apply to X and Yn");
                }
            }
        }
        let finite = s.tau_n.is_some() || s.tau || s.tau_0 || s.zeta.is_some();
        if s.cap == 0 && !finite {
            return bad("no stopping rule");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopKind {
    TauN,
    Tau,
    Tau0,
    Zeta,
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub stop: StopKind,
    pub point: LatticePoint,
    pub steps: u64,
}

/// Draws the node pair `(i, j)` of each step.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    incs: Vec<XIncrement>,
    dist: WeightedIndex<f64>,
}

impl IncrementSampler {
    pub fn new(net: &JacksonNetwork) -> Self {
        let incs = net.x_increments();
        let dist = WeightedIndex::new(incs.iter().map(|i| i.prob)).expect("jump probabilities are positive");
        IncrementSampler { incs, dist }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> &XIncrement {
        &self.incs[self.dist.sample(rng)]
    }
}

fn stop_now(spec: &PathSpec, y: &[i64], steps: u64) -> Option<StopKind> {
    let s = &spec.stops;
    match spec.process {
        Process::X => {
            if s.tau_n.is_some_and(|n| y.iter().sum::<i64>() >= n) {
                return Some(StopKind::TauN);
            }
            if s.tau_0 && steps > 0 && y.iter().all(|&v| v == 0) {
                return Some(StopKind::Tau0);
            }
        }
        Process::Yn(n) => {
            if s.tau && level(1, y) <= 0 {
                return Some(StopKind::Tau);
            }
            if s.tau_0 && steps > 0 && y[0] == n && y[1..].iter().all(|&v| v == 0) {
                return Some(StopKind::Tau0);
            }
        }
        Process::Y | Process::Z => {
            let m = level(1, y);
            if s.tau && m <= 0 {
                return Some(StopKind::Tau);
            }
            if s.zeta.is_some_and(|z| m >= z) {
                return Some(StopKind::Zeta);
            }
        }
    }
    (s.cap > 0 && steps >= s.cap).then_some(StopKind::Cap)
}

/// Applies one jump; blocked jumps leave the walk in place.
fn apply(process: Process, inc: &XIncrement, y: &mut [i64]) {
    let from = inc.from;
    let blocked = match process {
        Process::X => from >= 1 && y[from - 1] == 0,
        Process::Yn(n) => (from == 1 && y[0] == n) || (from >= 2 && y[from - 1] == 0),
        Process::Y => from >= 2 && y[from - 1] == 0,
        Process::Z => false,
    };
    if blocked {
        return;
    }
    let flip = !matches!(process, Process::X);
    for (k, &v) in inc.v.iter().enumerate() {
        y[k] += if flip && k == 0 { -v } else { v };
    }
}

pub fn simulate<R: Rng>(sampler: &IncrementSampler, spec: &PathSpec, rng: &mut R) -> Outcome {
    let mut y = spec.start.clone();
    let mut steps = 0u64;
    loop {
        if let Some(stop) = stop_now(spec, &y, steps) {
            return Outcome { stop, point: y, steps };
        }
        apply(spec.process, sampler.sample(rng), &mut y);
        steps += 1;
    }
}

/// One path from the stream `stream` of `seed`.
pub fn simulate_seeded(net: &JacksonNetwork, spec: &PathSpec, seed: u64, stream: u64) -> Result<Outcome> {
    spec.validate(net.d())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok(simulate(&IncrementSampler::new(net), spec, &mut rng))
}

/// `X` and `Xbar = T_n Y` driven by the same jumps, for `steps` steps or
/// until `X` reaches `sum x = n`. Entry `k` is `(X_k, Xbar_k)`.
pub fn simulate_coupled<R: Rng>(net: &JacksonNetwork, n: i64, x0: &[i64], steps: u64, rng: &mut R) -> Vec<(LatticePoint, LatticePoint)> {
    let sampler = IncrementSampler::new(net);
    let mut x = x0.to_vec();
    let mut y = transform(n, 1, x0);
    let mut out = vec![(x.clone(), x.clone())];
    for _ in 0..steps {
        if x.iter().sum::<i64>() >= n {
            break;
        }
        let inc = sampler.sample(rng);
        apply(Process::X, inc, &mut x);
        apply(Process::Y, inc, &mut y);
        out.push((x.clone(), transform(n, 1, &y)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Stop(StopKind),
    Never,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Stats {
    count: u64,
    sum: f64,
    sumsq: f64,
    work: u64,
    censored: u64,
    fallbacks: u64,
}

impl Stats {
    fn push(&mut self, v: f64, steps: u64, censored: bool) {
        self.count += 1;
        self.sum += v;
        self.sumsq += v * v;
        self.work += steps;
        self.censored += censored as u64;
    }

    fn merge(mut self, o: &Stats) -> Stats {
        self.count += o.count;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
        self.work += o.work;
        self.censored += o.censored;
        self.fallbacks += o.fallbacks;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub samples: u64,
    pub mean: f64,
    /// Sample variance of one replicate.
    pub variance: f64,
    pub ci95: (f64, f64),
    /// Total steps simulated.
    pub work: u64,
    /// Paths stopped by the step cap; counted as misses.
    pub censored: u64,
    /// IS steps where the tilt degenerated and the plain step was used.
    pub fallbacks: u64,
    /// `(samples so far, estimated relative error)` after each batch.
    pub trajectory: Vec<(u64, f64)>,
}

impl EstimatorResult {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.samples as f64).sqrt()
    }

    pub fn half_width(&self) -> f64 {
        1.96 * self.std_error()
    }

    pub fn relative_error(&self) -> f64 {
        self.std_error() / self.mean
    }

    fn from_batches(batches: &[Stats]) -> Self {
        let mut acc = Stats::default();
        let mut trajectory = Vec::with_capacity(batches.len());
        for b in batches {
            acc = acc.merge(b);
            let (m, v) = moments(&acc);
            trajectory.push((acc.count, (v / acc.count as f64).sqrt() / m));
        }
        let (mean, variance) = moments(&acc);
        let h = 1.96 * (variance / acc.count as f64).sqrt();
        EstimatorResult {
            samples: acc.count,
            mean,
            variance,
            ci95: (mean - h, mean + h),
            work: acc.work,
            censored: acc.censored,
            fallbacks: acc.fallbacks,
            trajectory,
        }
    }
}

fn moments(s: &Stats) -> (f64, f64) {
    let n = s.count as f64;
    let mean = s.sum / n;
    let var = if s.count > 1 { ((s.sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, var)
}

fn run_batches<F>(samples: u64, seed: u64, f: F) -> Result<EstimatorResult>
where
    F: Fn(&mut ChaCha8Rng, u64, &mut Stats) + Sync,
{
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let nb = samples.div_ceil(BATCH);
    let batches: Vec<Stats> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut st = Stats::default();
            f(&mut rng, BATCH.min(samples - b * BATCH), &mut st);
            st
        })
        .collect();
    Ok(EstimatorResult::from_batches(&batches))
}

/// Plain Monte Carlo estimate of `P(event)` for paths of `spec`.
pub fn mc_probability(net: &JacksonNetwork, spec: &PathSpec, event: Event, samples: u64, seed: u64) -> Result<EstimatorResult> {
    spec.validate(net.d())?;
    let sampler = IncrementSampler::new(net);
    run_batches(samples, seed, |rng, k, st| {
        for _ in 0..k {
            let o = simulate(&sampler, spec, rng);
            let hit = event == Event::Stop(o.stop);
            st.push(hit as u64 as f64, o.steps, o.stop == StopKind::Cap);
        }
    })
}

/// Default step cap `50 n d`.
pub fn default_cap(n: i64, d: usize) -> u64 {
    50 * n.max(1) as u64 * d as u64
}

/// Paths of `X` from `x`, stopped at `tau_n`, `tau_0` or the cap.
pub fn exit_spec(n: i64, x: &[i64], d: usize) -> PathSpec {
    PathSpec {
        process: Process::X,
        start: x.to_vec(),
        stops: Stops { tau_n: Some(n), tau: false, tau_0: true, zeta: None, cap: default_cap(n, d) },
    }
}

/// Naive estimate of `P_x(tau_n < tau_0)`.
pub fn naive_estimate(net: &JacksonNetwork, n: i64, x: &[i64], samples: u64, seed: u64) -> Result<EstimatorResult> {
    mc_probability(net, &exit_spec(n, x, net.d()), Event::Stop(StopKind::TauN), samples, seed)
}

/// `gamma = -max(log rho_1, log rho_2)`.
pub fn gamma(net: &JacksonNetwork) -> Result<f64> {
    let (r1, r2) = rho2d(net)?;
    Ok(-(r1.ln().max(r2.ln())))
}

fn rho2d(net: &JacksonNetwork) -> Result<(f64, f64)> {
    if net.d() != 2 || net.as_tandem().is_none() {
        return Err(Error::NotTandem2D);
    }
    Ok((net.rho(1), net.rho(2)))
}

/// Large deviation limit of `-(1/n) log P_{nx}(tau_n < tau_0)`:
/// `min(-log rho_1 + <r_1, x>, -log rho_2 + <r_3, x>)` with
/// `r_1 = log(rho_1) (1, 0)` and `r_3 = log(rho_2) (1, 1)`.
pub fn ld_value2d(net: &JacksonNetwork, x: [f64; 2]) -> Result<f64> {
    let (r1, r2) = rho2d(net)?;
    let (l1, l2) = (r1.ln(), r2.ln());
    Ok((-l1 + l1 * x[0]).min(-l2 + l2 * (x[0] + x[1])))
}

/// `ln P_{T_n x}(tau < inf)` of a tandem, evaluated in `X` coordinates.
#[derive(Debug, Clone)]
pub struct ExitFormula {
    n: i64,
    fast: Option<(TandemExit, PowerTable)>,
    net: JacksonNetwork,
}

impl ExitFormula {
    pub fn new(net: &JacksonNetwork, n: i64) -> Result<Self> {
        if net.as_tandem().is_none() {
            return Err(Error::NotTandem);
        }
        let fast = if net.d() > 2 {
            TandemExit::new(net).ok().map(|t| {
                let tab = t.power_table(n);
                (t, tab)
            })
        } else {
            None
        };
        let f = ExitFormula { n, fast, net: net.clone() };
        // Probe once so equal-rate patterns without a formula fail here.
        f.ln_checked(&vec![0; net.d()])?;
        Ok(f)
    }

    fn ln_checked(&self, x: &[i64]) -> Result<f64> {
        let y = transform(self.n, 1, x);
        match &self.fast {
            Some((t, _)) => Ok(t.ln_value(&y)),
            None => tandem_exit_ln(&self.net, &y),
        }
    }

    pub fn ln(&self, x: &[i64]) -> f64 {
        if x.iter().sum::<i64>() >= self.n {
            return 0.0;
        }
        self.ln_checked(x).unwrap_or(f64::NAN)
    }

    /// Table based value; `None` when unavailable or not representable.
    fn value(&self, x: &[i64], y: &mut Vec<i64>, scratch: &mut Vec<f64>) -> Option<f64> {
        let (t, tab) = self.fast.as_ref()?;
        if x.iter().sum::<i64>() >= self.n {
            return Some(1.0);
        }
        y.clear();
        y.extend_from_slice(x);
        y[0] = self.n - x[0];
        t.value_tabled(y, tab, scratch)
    }

    /// `w[i] = p_i f(next_i) / f(x)`.
    fn tilts(&self, x: &[i64], next: &[Vec<i64>], incs: &[XIncrement], w: &mut [f64], buf: &mut (Vec<i64>, Vec<f64>)) {
        if let Some(f0) = self.value(x, &mut buf.0, &mut buf.1) {
            let mut ok = true;
            for (i, inc) in incs.iter().enumerate() {
                match self.value(&next[i], &mut buf.0, &mut buf.1) {
                    Some(v) => w[i] = inc.prob * v / f0,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return;
            }
        }
        let f0 = self.ln(x);
        for (i, inc) in incs.iter().enumerate() {
            w[i] = inc.prob * (self.ln(&next[i]) - f0).exp();
        }
    }
}

/// `W_n(x) = -(1/n) log f(T_n x)` with `f` the tandem exit formula.
pub fn subsolution_wn(net: &JacksonNetwork, n: i64, x: &[i64]) -> Result<f64> {
    if x.iter().any(|&v| v < 0) || x.iter().sum::<i64>() > n {
        return Err(Error::OutsideDomain(format!("{x:?} is not in A_{n}")));
    }
    Ok(-tandem_exit_ln(net, &transform(n, 1, x))? / n as f64)
}

/// Importance sampling estimate of `P_x(tau_n < tau_0)` for a tandem.
///
/// At `x` each jump `v` is drawn with probability proportional to
/// `p(v) exp(-n (W_n(x + v) - W_n(x)))`, blocked jumps counting as `x + v = x`.
pub fn is_estimate(net: &JacksonNetwork, n: i64, start: &[i64], samples: u64, seed: u64) -> Result<EstimatorResult> {
    let spec = exit_spec(n, start, net.d());
    spec.validate(net.d())?;
    let formula = ExitFormula::new(net, n)?;
    let sampler = IncrementSampler::new(net);
    let warned = std::sync::atomic::AtomicBool::new(false);
    run_batches(samples, seed, |rng, k, st| {
        let mut next = vec![vec![0i64; net.d()]; sampler.incs.len()];
        let mut w = vec![0.0; sampler.incs.len()];
        let mut buf = (Vec::new(), Vec::new());
        for _ in 0..k {
            let mut x = start.to_vec();
            let mut steps = 0u64;
            // ln of the likelihood ratio, accumulated step by step.
            let mut ln_lr = 0.0;
            let hit = loop {
                if let Some(s) = stop_now(&spec, &x, steps) {
                    break s;
                }
                for (i, inc) in sampler.incs.iter().enumerate() {
                    next[i].copy_from_slice(&x);
                    apply(Process::X, inc, &mut next[i]);
                }
                formula.tilts(&x, &next, &sampler.incs, &mut w, &mut buf);
                let total: f64 = w.iter().sum();
                let pick = if total.is_finite() && total > 0.0 && w.iter().all(|v| v.is_finite()) {
                    let u = rng.gen::<f64>() * total;
                    let mut acc = 0.0;
                    let mut pick = w.len() - 1;
                    for (i, wi) in w.iter().enumerate() {
                        acc += wi;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    ln_lr += (sampler.incs[pick].prob * total / w[pick]).ln();
                    pick
                } else {
                    st.fallbacks += 1;
                    if !warned.swap(true, std::sync::atomic::Ordering::Relaxed) {
                        log::warn!("{}; using the plain step at {x:?}", Error::DegenerateTilt);
                    }
                    sampler.dist.sample(rng)
                };
                x.copy_from_slice(&next[pick]);
                steps += 1;
            };
            let v = if hit == StopKind::TauN { ln_lr.exp() } else { 0.0 };
            st.push(v, steps, hit == StopKind::Cap);
        }
    })
}

/// Naive and IS estimates from the same seed.
pub fn paired(net: &JacksonNetwork, n: i64, start: &[i64], samples: u64, seed: u64) -> Result<(EstimatorResult, EstimatorResult)> {
    Ok((naive_estimate(net, n, start, samples, seed)?, is_estimate(net, n, start, samples, seed)?))
}

/// Equal-rate two node tandem: `(lambda, mu)`.
fn equal_rate_pair(net: &JacksonNetwork) -> Result<(f64, f64)> {
    let (lambda, mu) = net.as_tandem().filter(|(_, m)| m.len() == 2).ok_or(Error::NotTandem2D)?;
    if (mu[0] - mu[1]).abs() > crate::harmonic::EQUAL_RATE_TOL {
        return Err(Error::UnsupportedPattern("boundary layer needs mu_1 = mu_2".into()));
    }
    Ok((lambda, mu[0]))
}

/// Boundary of the layer `{y(2) <= l(y(1))}`: the `y(2)` in `[0, y(1))` where
/// the `(1, 1)` derivative of `-log` of the exit probability is half its
/// value at `y(2) = 0`.
pub fn boundary_layer(net: &JacksonNetwork, y1: f64) -> Result<f64> {
    let (lambda, mu) = equal_rate_pair(net)?;
    if !(y1 > 0.0) {
        return Err(Error::OutsideDomain(format!("y1 = {y1} must be positive")));
    }
    let g = layer_equation(lambda, mu, y1);
    bisect(g, 0.0, y1).ok_or(Error::NoRoot)
}

/// `log` form of the layer equation, decreasing in `y(2)`.
fn layer_equation(lambda: f64, mu: f64, y1: f64) -> impl Fn(f64) -> f64 {
    let c = 1.0 + 0.5 * (mu - lambda) / mu * y1;
    let ln_rho = (lambda / mu).ln();
    move |y2: f64| (y1 - y2).ln() + c.ln() - (0.5 * y1).ln() + y2 * ln_rho
}

/// Residual of the layer equation at `y(2)`, relative to its right side.
pub fn boundary_layer_residual(net: &JacksonNetwork, y1: f64, y2: f64) -> Result<f64> {
    let (lambda, mu) = equal_rate_pair(net)?;
    Ok(layer_equation(lambda, mu, y1)(y2).exp_m1())
}

/// One row of the layer overlay: in `X` coordinates the layer boundary is
/// `x(2) = l(n - x(1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub x1: i64,
    pub y1: i64,
    pub layer: f64,
    /// Where the `(1, 1)` difference of `-log` of the grid oracle falls to
    /// half its value at `y(2) = 0`, linearly interpolated; `None` if it
    /// never does.
    pub kink: Option<f64>,
}

/// Boundary layer next to the gradient transition of the exact grid, for
/// `y(1) = 1, ..., n - 1`.
pub fn layer_overlay(net: &JacksonNetwork, n: i64, opts: SolveOptions) -> Result<Vec<LayerRow>> {
    equal_rate_pair(net)?;
    let g = exact_exit_grid(net, n, opts)?;
    let w = |y1: i64, y2: i64| -> f64 { -g.get(&[n - y1, y2]).map_or(f64::NAN, f64::ln) };
    // `(1, 1)` difference centred at `(y1 + 1/2, y2 + 1/2)`.
    let diff = |y1: i64, y2: i64| w(y1 + 1, y2 + 1) - w(y1, y2);
    let mut rows = Vec::new();
    for y1 in 1..n {
        let half = 0.5 * diff(y1, 0);
        let mut kink = None;
        for y2 in 1..y1 {
            let (a, b) = (diff(y1, y2 - 1), diff(y1, y2));
            if b <= half {
                kink = Some(y2 as f64 - 0.5 + (half - a) / (b - a));
                break;
            }
        }
        rows.push(LayerRow { x1: n - y1, y1, layer: boundary_layer(net, y1 as f64)?, kink });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> JacksonNetwork {
        JacksonNetwork::tandem(0.1, &[0.4, 0.5]).unwrap()
    }

    #[test]
    fn y_on_boundary_stops_at_once() {
        let spec = PathSpec {
            process: Process::Y,
            start: vec![3, 3],
            stops: Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(10), cap: 0 },
        };
        let o = simulate_seeded(&t2(), &spec, 1, 0).unwrap();
        assert_eq!((o.stop, o.steps), (StopKind::Tau, 0));
    }

    #[test]
    fn empty_event_has_zero_estimate() {
        let r = mc_probability(&t2(), &exit_spec(5, &[1, 0], 2), Event::Never, 500, 3).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.variance, 0.0);
    }

    #[test]
    fn gamma_of_reference_tandem() {
        assert!((gamma(&t2()).unwrap() - 4f64.ln()).abs() < 1e-15);
        let v = ld_value2d(&t2(), [0.0, 0.0]).unwrap();
        assert!((v - 4f64.ln().min(5f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn is_from_exit_boundary_is_one() {
        let r = is_estimate(&t2(), 6, &[4, 2], 100, 1).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.variance, 0.0);
    }

    #[test]
    fn estimates_do_not_depend_on_threads() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = pool.install(|| is_estimate(&t2(), 8, &[1, 0], 3000, 9).unwrap());
        let b = is_estimate(&t2(), 8, &[1, 0], 3000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn layer_is_inside_range() {
        let net = JacksonNetwork::tandem(0.2, &[0.4, 0.4]).unwrap();
        let l = boundary_layer(&net, 10.0).unwrap();
        assert!(l > 0.0 && l < 10.0);
        assert!(boundary_layer_residual(&net, 10.0, l).unwrap().abs() < 1e-12);
    }
}

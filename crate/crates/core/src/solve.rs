//! Finite grid oracles.
//!
//! Every oracle here is an absorbing Markov chain on a finite set of lattice
//! points: the value at a transient point is the expected pinned value at
//! absorption. Self-loops (suppressed jumps) are eliminated up front and the
//! system is solved by symmetric Gauss-Seidel sweeps, for several pinned
//! right-hand sides at once.

use std::collections::HashMap;

use crate::charsurf::y_increments;
use crate::error::{Error, Result};
use crate::network::JacksonNetwork;

/// Largest number of transient states accepted.
pub const STATE_LIMIT: u128 = 100_000_000;
/// Dense index tables are used below this many cells.
const DENSE_LIMIT: u128 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative change per sweep at which iteration stops.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor, 1 for plain Gauss-Seidel.
    pub omega: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-14, max_sweeps: 200_000, omega: 1.0 }
    }
}

#[derive(Debug, Clone)]
enum Indexer {
    Dense { lo: Vec<i64>, extent: Vec<i64>, table: Vec<u32> },
    Sparse(HashMap<Vec<i64>, u32>),
}

impl Indexer {
    fn new(points: &[Vec<i64>], lo: Vec<i64>, hi: Vec<i64>) -> Self {
        let extent: Vec<i64> = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).collect();
        let cells: u128 = extent.iter().map(|&e| e.max(0) as u128).product();
        if cells <= DENSE_LIMIT {
            let mut table = vec![u32::MAX; cells as usize];
            let mut ix = Indexer::Dense { lo, extent, table: Vec::new() };
            for (k, p) in points.iter().enumerate() {
                table[ix.cell(p).unwrap()] = k as u32;
            }
            if let Indexer::Dense { table: t, .. } = &mut ix {
                *t = table;
            }
            ix
        } else {
            Indexer::Sparse(points.iter().enumerate().map(|(k, p)| (p.clone(), k as u32)).collect())
        }
    }

    fn cell(&self, p: &[i64]) -> Option<usize> {
        let Indexer::Dense { lo, extent, .. } = self else { return None };
        let mut c = 0usize;
        for ((&x, &l), &e) in p.iter().zip(lo).zip(extent) {
            let o = x - l;
            if o < 0 || o >= e {
                return None;
            }
            c = c * e as usize + o as usize;
        }
        Some(c)
    }

    fn get(&self, p: &[i64]) -> Option<usize> {
        match self {
            Indexer::Dense { table, .. } => self.cell(p).and_then(|c| {
                let k = table[c];
                (k != u32::MAX).then_some(k as usize)
            }),
            Indexer::Sparse(m) => m.get(p).map(|&k| k as usize),
        }
    }
}

/// Values of an absorbing chain on a finite set of lattice points.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub dim: usize,
    pub points: Vec<Vec<i64>>,
    pub values: Vec<f64>,
    /// Absorbing points reached in one step, with their pinned values.
    pub pinned: HashMap<Vec<i64>, f64>,
    pub sweeps: usize,
    pub change: f64,
    index: std::sync::Arc<Indexer>,
}

impl GridSolution {
    /// Value at a transient or pinned point.
    pub fn get(&self, p: &[i64]) -> Option<f64> {
        self.index.get(p).map(|k| self.values[k]).or_else(|| self.pinned.get(p).copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct Chain {
    start: Vec<usize>,
    target: Vec<u32>,
    prob: Vec<f64>,
    /// `1 / (1 - self-loop mass)`.
    scale: Vec<f64>,
    rhs: usize,
    /// Absorbed mass times pinned value, `rhs` entries per state.
    constant: Vec<f64>,
}

/// Builds the chain. `moves(p)` lists `(target, prob)`; targets equal to `p`
/// are self-loops; `pin(t)` gives the pinned values of an absorbing target.
fn build_chain<M, P>(points: &[Vec<i64>], index: &Indexer, rhs: usize, moves: M, pin: P) -> (Chain, HashMap<Vec<i64>, Vec<f64>>)
where
    M: Fn(&[i64]) -> Vec<(Vec<i64>, f64)>,
    P: Fn(&[i64]) -> Vec<f64>,
{
    let n = points.len();
    let mut chain = Chain {
        start: Vec::with_capacity(n + 1),
        target: Vec::new(),
        prob: Vec::new(),
        scale: vec![1.0; n],
        rhs,
        constant: vec![0.0; n * rhs],
    };
    let mut pinned = HashMap::new();
    chain.start.push(0);
    for (k, p) in points.iter().enumerate() {
        let mut stay = 0.0;
        for (t, q) in moves(p) {
            if t == *p {
                stay += q;
            } else if let Some(j) = index.get(&t) {
                chain.target.push(j as u32);
                chain.prob.push(q);
            } else {
                let vals = pinned.entry(t.clone()).or_insert_with(|| pin(&t));
                for (r, v) in vals.iter().enumerate() {
                    chain.constant[k * rhs + r] += q * v;
                }
            }
        }
        chain.scale[k] = 1.0 / (1.0 - stay);
        for r in 0..rhs {
            chain.constant[k * rhs + r] *= chain.scale[k];
        }
        let (a, b) = (chain.start[k], chain.target.len());
        for q in &mut chain.prob[a..b] {
            *q *= chain.scale[k];
        }
        chain.start.push(b);
    }
    (chain, pinned)
}

fn sweep(chain: &Chain, x: &mut [f64], omega: f64, order: impl Iterator<Item = usize>) -> f64 {
    let m = chain.rhs;
    let mut change = 0.0f64;
    let mut acc = vec![0.0; m];
    for k in order {
        acc.copy_from_slice(&chain.constant[k * m..(k + 1) * m]);
        for e in chain.start[k]..chain.start[k + 1] {
            let t = chain.target[e] as usize * m;
            let q = chain.prob[e];
            for (a, v) in acc.iter_mut().zip(&x[t..t + m]) {
                *a += q * v;
            }
        }
        for (old, &gs) in x[k * m..(k + 1) * m].iter_mut().zip(&acc) {
            let new = *old + omega * (gs - *old);
            let d = (new - *old).abs();
            change = change.max(if new.abs() > 1e-300 { d / new.abs() } else { d });
            *old = new;
        }
    }
    change
}

fn iterate(chain: &Chain, opts: SolveOptions) -> Result<(Vec<Vec<f64>>, usize, f64)> {
    let n = chain.scale.len();
    let m = chain.rhs;
    let mut x = vec![0.0; n * m];
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_sweeps {
        let c1 = sweep(chain, &mut x, opts.omega, 0..n);
        let c2 = sweep(chain, &mut x, opts.omega, (0..n).rev());
        change = c1.max(c2);
        if change < opts.tol {
            let cols = (0..m).map(|r| (0..n).map(|k| x[k * m + r]).collect()).collect();
            return Ok((cols, it, change));
        }
    }
    Err(Error::NonConvergent { iterations: opts.max_sweeps, change })
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

fn simplex_points(d: usize, max_sum: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(k: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, max_sum, &mut cur, &mut out);
    out
}

fn x_moves(net: &JacksonNetwork) -> impl Fn(&[i64]) -> Vec<(Vec<i64>, f64)> {
    let incs = net.x_increments();
    move |x: &[i64]| {
        incs.iter()
            .map(|inc| {
                if inc.needs_positive().is_some_and(|i| x[i - 1] == 0) {
                    (x.to_vec(), inc.prob)
                } else {
                    (x.iter().zip(&inc.v).map(|(a, b)| a + b).collect(), inc.prob)
                }
            })
            .collect()
    }
}

/// `E_x[f(X_{tau_n}) 1{tau_n < tau_0}]` on `A_n`, with `f` given on `{sum x = n}`.
pub fn balayage_exact<F: Fn(&[i64]) -> f64>(net: &JacksonNetwork, n: i64, f: F, opts: SolveOptions) -> Result<GridSolution> {
    if n < 1 {
        return Err(Error::Config("n must be positive".into()));
    }
    let d = net.d();
    let states = binomial(n as u128 - 1 + d as u128, d as u128);
    if states > STATE_LIMIT {
        return Err(Error::TooLarge { states, limit: STATE_LIMIT });
    }
    let points: Vec<Vec<i64>> = simplex_points(d, n - 1).into_iter().filter(|p| p.iter().any(|&v| v != 0)).collect();
    let index = Indexer::new(&points, vec![0; d], vec![n - 1; d]);
    let (chain, pinned) = build_chain(&points, &index, 1, x_moves(net), |t| {
        if t.iter().sum::<i64>() >= n {
            vec![f(t)]
        } else {
            vec![0.0]
        }
    });
    let (mut x, sweeps, change) = iterate(&chain, opts)?;
    Ok(GridSolution {
        dim: d,
        points,
        values: x.remove(0),
        pinned: pinned.into_iter().map(|(k, v)| (k, v[0])).collect(),
        sweeps,
        change,
        index: std::sync::Arc::new(index),
    })
}

/// `P_x(tau_n < tau_0)` on `A_n`.
pub fn exact_exit_grid(net: &JacksonNetwork, n: i64, opts: SolveOptions) -> Result<GridSolution> {
    balayage_exact(net, n, |_| 1.0, opts)
}

/// Bracket for `P_y(tau < inf)` of the limit walk `Y` on a truncated domain.
#[derive(Debug, Clone)]
pub struct YBracket {
    pub truncation: i64,
    pub lower: GridSolution,
    pub upper: GridSolution,
    /// Bound used on the truncation level `{ybar = N}`.
    pub level_bound: f64,
}

impl YBracket {
    /// `(lower, upper)` at `y` given in `Y` coordinates.
    pub fn at(&self, y: &[i64]) -> Option<(f64, f64)> {
        let key = to_level_coords(y);
        Some((self.lower.get(&key)?, self.upper.get(&key)?))
    }
}

fn to_level_coords(y: &[i64]) -> Vec<i64> {
    let mut k = y.to_vec();
    k[0] = y[0] - y[1..].iter().sum::<i64>();
    k
}

/// Brackets `P_y(tau < inf)` on `{1 <= ybar <= N - 1, 0 <= y(j) <= N}`,
/// `ybar = y(1) - sum_{j >= 2} y(j)`.
pub fn exact_y_hit_bracket(net: &JacksonNetwork, n_trunc: i64, opts: SolveOptions) -> Result<YBracket> {
    exact_y_hit_bracket_with(net, n_trunc, n_trunc, opts)
}

/// As [`exact_y_hit_bracket`] with the constrained coordinates cut at `extent`.
///
/// Four pinned problems are solved together, each the probability of leaving
/// through one part of the truncated boundary: `L` the boundary of `B`, `Q`
/// the level `ybar = N`, and the box faces `y(j) = extent + 1` split into
/// `Blo` (below the level `m = N/2`) and `Bhi` (at or above it). `L` is a
/// lower bound. Since `P` depends on `y(1)` only through `ybar`, its supremum
/// `S_k` over level `k` satisfies `S_{j+k} <= S_j S_k`, so `S_N <= S_m^2` and
/// `S_k <= S_m` for `k >= m`, and at any point `c` of level `m`
/// `S_m <= L + Blo + Bhi S_m + Q S_m^2`, which for `S_m < 1` forces
/// `S_m <= (L + Blo) / Q`. The supremum is taken over `y(j) <= extent / 2`
/// only, so the upper bound `L + Blo + s Bhi + s^2 Q` assumes that `P` on
/// level `m` peaks there (true for tandems, where `P` falls as `y(j)` grows).
pub fn exact_y_hit_bracket_with(net: &JacksonNetwork, n_trunc: i64, extent: i64, opts: SolveOptions) -> Result<YBracket> {
    exact_y_balayage_bracket(net, n_trunc, extent, |_| 1.0, opts)
}

/// Bracket for `E_y[f(Y_tau) 1{tau < inf}]` with `0 <= f <= 1` on the boundary of `B`.
///
/// `f` receives boundary points as `(0, y(2), ..., y(d))`, i.e. with the
/// first coordinate replaced by `ybar = 0`. The construction is that of
/// [`exact_y_hit_bracket_with`], with `f` pinned in place of 1 for the lower
/// bound and the level bound computed from the problem with `f = 1`.
pub fn exact_y_balayage_bracket<F: Fn(&[i64]) -> f64>(
    net: &JacksonNetwork,
    n_trunc: i64,
    extent: i64,
    f: F,
    opts: SolveOptions,
) -> Result<YBracket> {
    if n_trunc < 2 || extent < 0 {
        return Err(Error::Config("truncation must be at least 2".into()));
    }
    let d = net.d();
    let states = (n_trunc as u128 - 1) * (extent as u128 + 1).pow(d as u32 - 1);
    if states > STATE_LIMIT {
        return Err(Error::TooLarge { states, limit: STATE_LIMIT });
    }
    let mut points = Vec::with_capacity(states as usize);
    let mut lo = vec![0i64; d];
    let mut hi = vec![extent; d];
    lo[0] = 1;
    hi[0] = n_trunc - 1;
    let mut cur = lo.clone();
    loop {
        points.push(cur.clone());
        let mut k = d;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
        if cur == lo {
            break;
        }
    }
    let index = Indexer::new(&points, lo, hi);
    let incs: Vec<(Vec<i64>, f64, Option<usize>)> = y_increments(net)
        .into_iter()
        .map(|inc| {
            let mut w = inc.v.clone();
            w[0] = inc.v[0] - inc.v[1..].iter().sum::<i64>();
            (w, inc.prob, inc.blocked_by())
        })
        .collect();
    let moves = |p: &[i64]| -> Vec<(Vec<i64>, f64)> {
        incs.iter()
            .map(|(w, q, blk)| {
                if blk.is_some_and(|j| p[j - 1] == 0) {
                    (p.to_vec(), *q)
                } else {
                    (p.iter().zip(w).map(|(a, b)| a + b).collect(), *q)
                }
            })
            .collect()
    };
    let m = n_trunc / 2;
    let pin = |t: &[i64]| -> Vec<f64> {
        if t[0] <= 0 {
            vec![1.0, 0.0, 0.0, 0.0, f(t)]
        } else if t[0] >= n_trunc {
            vec![0.0, 0.0, 0.0, 1.0, 0.0]
        } else if t[0] < m {
            vec![0.0, 1.0, 0.0, 0.0, 0.0]
        } else {
            vec![0.0, 0.0, 1.0, 0.0, 0.0]
        }
    };
    let (chain, pinned) = build_chain(&points, &index, 5, moves, pin);
    let (x, sweeps, change) = iterate(&chain, opts)?;
    let (l, blo, bhi, q, lf) = (&x[0], &x[1], &x[2], &x[3], &x[4]);

    let mut s = 0.0f64;
    let inner = |p: &[i64]| p[0] == m && p[1..].iter().all(|&v| 2 * v <= extent);
    for k in (0..points.len()).filter(|&k| inner(&points[k])) {
        s = s.max(if q[k] > 0.0 { (l[k] + blo[k]) / q[k] } else { f64::INFINITY });
    }
    let s = s.min(1.0);
    let upper_at = |v: &[f64]| (v[4] + v[1] + s * v[2] + s * s * v[3]).min(1.0);
    let upper: Vec<f64> = (0..points.len()).map(|k| upper_at(&[l[k], blo[k], bhi[k], q[k], lf[k]])).collect();
    let index = std::sync::Arc::new(index);
    let mut pin_l = HashMap::new();
    let mut pin_u = HashMap::new();
    for (t, v) in pinned {
        pin_l.insert(t.clone(), v[4]);
        pin_u.insert(t, upper_at(&v));
    }
    let mk = |values: Vec<f64>, pinned| GridSolution {
        dim: d,
        points: points.clone(),
        values,
        pinned,
        sweeps,
        change,
        index: index.clone(),
    };
    Ok(YBracket { truncation: n_trunc, lower: mk(lf.clone(), pin_l), upper: mk(upper, pin_u), level_bound: s * s })
}

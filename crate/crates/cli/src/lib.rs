//! Command line front end: each subcommand writes CSV or JSON to stdout or `--out`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use jackexit::charsurf::{beta_roots2d, conjugator2d, discriminant2d, sqrt_right};
use jackexit::fourier2d::{self, BoundaryTarget, Tail};
use jackexit::harmonic::{self, tandem_exit_ln};
use jackexit::model::{parse_number, parse_point, ModelSpec};
use jackexit::montecarlo::{self, Event, PathSpec, Process, StopKind, Stops};
use jackexit::network::{in_a, transform};
use jackexit::solve::{self, SolveOptions};
use jackexit::{Error, JacksonNetwork, C64};

pub const THREADS_ENV: &str = "JACKEXIT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "jackexit", version, about = "Exit probabilities of Jackson networks")]
pub struct Cli {
    /// Worker threads for grid sweeps and simulations.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Validate the configuration, print it as JSON and stop.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

impl ModelArgs {
    fn spec(&self) -> jackexit::Result<ModelSpec> {
        let mut spec = match (&self.model, &self.tandem) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ModelSpec::from_json(&text)?
            }
            (None, Some(t)) => ModelSpec::parse_tandem(t)?,
            _ => return Err(Error::Config("give exactly one of --model and --tandem".into())),
        };
        if self.normalize {
            match &mut spec {
                ModelSpec::Matrix { normalize, .. } | ModelSpec::Tandem { normalize, .. } => *normalize = true,
            }
        }
        Ok(spec)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessArg {
    X,
    Yn,
    Y,
    Z,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exit probabilities on A_n by iterating the grid equations.
    Exact {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long)]
        n: i64,
        /// Only points matching a pattern such as `0,0,i,j`.
        #[arg(long)]
        slice: Option<String>,
    },
    /// Tandem exit formula at `--y`, or at `T_n x` for `--x` (pattern allowed).
    TandemExit {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long, conflicts_with = "x")]
        y: Option<String>,
        #[arg(long, requires = "n")]
        x: Option<String>,
        #[arg(long)]
        n: Option<i64>,
        /// Print only log10 of the probability.
        #[arg(long)]
        log10: bool,
    },
    /// Perturbed Fourier approximation of a two dimensional Balayage.
    Balayage2d {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long, default_value_t = 11)]
        k: usize,
        #[arg(long, default_value_t = 0.7)]
        r: f64,
        /// Boundary values at `(y, y)`, `y = 0, 1, ...`, as a JSON array; the
        /// exit probability pipeline when absent.
        #[arg(long)]
        target: Option<String>,
        /// Constant value of the target beyond the array.
        #[arg(long)]
        tail: Option<f64>,
        /// CSV of the boundary error for `y <= 10 K`.
        #[arg(long)]
        emit_trace: Option<PathBuf>,
    },
    /// Roots and conjugates on the unit circle.
    Charsurf {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long, default_value_t = 360)]
        points: usize,
    },
    /// Checks the tandem harmonic system for exit boundary `d`.
    VerifySystem {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        /// Defaults to the number of nodes.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Plain Monte Carlo.
    Mc {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = ProcessArg::X)]
        process: ProcessArg,
        /// Buffer size: `tau_n` for X, the domain of Yn.
        #[arg(long)]
        n: Option<i64>,
        /// Truncation level for Y and Z.
        #[arg(long)]
        zeta: Option<i64>,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Importance sampling of `P_x(tau_n < tau_0)` for a tandem.
    Is {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also run plain Monte Carlo on the same streams.
        #[arg(long)]
        paired: bool,
    },
    /// Exact grid against the tandem formula, with `V_n` and `W_n`.
    Compare {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        slice: Option<String>,
    },
    /// Boundary layer of an equal-rate two node tandem, overlaid on the grid.
    BoundaryLayer {
        #[command(flatten)]
        #[serde(skip)]
        model: ModelArgs,
        #[arg(long)]
        n: i64,
    },
    /// Exit probability of the constrained diffusion.
    Diffusion {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// `x1,x2` with `x1 >= x2 >= 0`.
        #[arg(long)]
        x: String,
    },
}

/// Model arguments; resolved into the config's `model` field.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// JSON model file.
    #[arg(long, conflicts_with = "tandem")]
    pub model: Option<PathBuf>,
    /// Inline tandem `lambda,mu_1,...,mu_d`; fractions like `1/18` allowed.
    #[arg(long)]
    pub tandem: Option<String>,
    /// Divide the rates by their total.
    #[arg(long)]
    pub normalize: bool,
}

impl Command {
    fn model_args(&self) -> Option<&ModelArgs> {
        use Command::*;
        match self {
            Exact { model, .. }
            | TandemExit { model, .. }
            | Balayage2d { model, .. }
            | Charsurf { model, .. }
            | VerifySystem { model, .. }
            | Mc { model, .. }
            | Is { model, .. }
            | Compare { model, .. }
            | BoundaryLayer { model, .. } => Some(model),
            Diffusion { .. } => None,
        }
    }
}

/// Everything a run depends on; its JSON form is canonical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<ModelSpec>,
    #[serde(flatten)]
    pub command: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> jackexit::Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

/// Failure of a run, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    /// The reader went away; not an error.
    ClosedPipe,
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 1,
            Failure::ClosedPipe => 0,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Config(e.to_string())
    }
}

type Out<'a> = &'a mut dyn Write;

/// Fixed 17 significant digit format.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn log10_of(v: f64) -> String {
    fmt(v.log10())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

fn header_coords(d: usize, prefix: &str) -> String {
    (1..=d).map(|k| format!("{prefix}{k}")).collect::<Vec<_>>().join(",")
}

fn json_out(out: Out, v: &impl Serialize) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serialisable"))?;
    Ok(())
}

/// Parses argv and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Config(m) => {
                    let _ = writeln!(stderr, "configuration error: {m}");
                }
                Failure::Numeric(m) => {
                    let _ = writeln!(stderr, "numeric failure: {m}");
                }
                Failure::ClosedPipe => {}
            }
            f.code()
        }
    }
}

/// The canonical config of a parsed command line.
pub fn config_of(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let model = cli.command.model_args().map(|m| m.spec()).transpose()?;
    let command = serde_json::to_value(&cli.command).expect("serialisable");
    Ok(ExperimentConfig { model, command })
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let config = config_of(cli)?;
    let net = config.model.as_ref().map(|m| m.build()).transpose()?;
    validate(&cli.command, net.as_ref())?;
    if cli.dry_run {
        writeln!(stdout, "{}", config.to_json())?;
        return Ok(());
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        // A second build in the same process fails harmlessly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut file;
    let out: Out = match &cli.out {
        Some(p) => {
            file = std::io::BufWriter::new(fs::File::create(p)?);
            &mut file
        }
        None => stdout,
    };
    dispatch(&cli.command, net.as_ref(), out)?;
    out.flush()?;
    Ok(())
}

fn need<'a>(net: Option<&'a JacksonNetwork>) -> &'a JacksonNetwork {
    net.expect("validated: command has a model")
}

fn cfg(m: &str) -> Failure {
    Failure::Config(m.to_string())
}

fn validate(cmd: &Command, net: Option<&JacksonNetwork>) -> Result<(), Failure> {
    use Command::*;
    let d = net.map_or(0, |n| n.d());
    let check_n = |n: i64| if n >= 1 { Ok(()) } else { Err(cfg("--n must be at least 1")) };
    if matches!(cmd, TandemExit { .. } | Compare { .. } | Is { .. } | BoundaryLayer { .. }) && !need(net).is_stable() {
        return Err(cfg("the network is unstable"));
    }
    match cmd {
        Exact { n, slice, .. } | Compare { n, slice, .. } => {
            check_n(*n)?;
            if let Some(s) = slice {
                Pattern::parse(s, d)?;
            }
            if matches!(cmd, Compare { .. }) && need(net).as_tandem().is_none() {
                return Err(Error::NotTandem.into());
            }
        }
        TandemExit { y, x, n, .. } => {
            if need(net).as_tandem().is_none() {
                return Err(Error::NotTandem.into());
            }
            match (y, x) {
                (Some(y), None) => {
                    let p = parse_point(y)?;
                    if p.len() != d {
                        return Err(cfg("--y has the wrong number of coordinates"));
                    }
                }
                (None, Some(x)) => {
                    Pattern::parse(x, d)?;
                    check_n(n.unwrap_or(0))?;
                }
                _ => return Err(cfg("give --y or --x with --n")),
            }
        }
        Balayage2d { k, r, target, .. } => {
            if d != 2 {
                return Err(Error::NotTwoDimensional(d).into());
            }
            if *k == 0 || !(*r > 0.0 && *r <= 1.0) {
                return Err(cfg("need K >= 1 and 0 < R <= 1"));
            }
            if let Some(t) = target {
                parse_target(t)?;
            }
        }
        Charsurf { points, .. } => {
            if d != 2 {
                return Err(Error::NotTwoDimensional(d).into());
            }
            if *points == 0 {
                return Err(cfg("--points must be positive"));
            }
        }
        VerifySystem { d: dd, .. } => {
            if need(net).as_tandem().is_none() {
                return Err(Error::NotTandem.into());
            }
            if dd.is_some_and(|v| v == 0 || v > d) {
                return Err(Error::BadCoordinate(dd.unwrap()).into());
            }
        }
        Mc { process, n, zeta, start, samples, .. } => {
            let p = parse_point(start)?;
            if p.len() != d || *samples == 0 {
                return Err(cfg("--start must have one coordinate per node and --samples be positive"));
            }
            match process {
                ProcessArg::X | ProcessArg::Yn if n.is_none() => return Err(cfg("X and Yn need --n")),
                ProcessArg::Y | ProcessArg::Z if zeta.is_none() => return Err(cfg("Y and Z need --zeta")),
                _ => {}
            }
        }
        Is { n, start, samples, .. } => {
            check_n(*n)?;
            let p = parse_point(start)?;
            if p.len() != d || !in_a(*n, &p) || *samples == 0 {
                return Err(cfg("--start must lie in A_n and --samples be positive"));
            }
            if need(net).as_tandem().is_none() {
                return Err(Error::NotTandem.into());
            }
        }
        BoundaryLayer { n, .. } => {
            check_n(*n)?;
            let t = need(net).as_tandem().filter(|(_, m)| m.len() == 2).ok_or(Error::NotTandem2D)?;
            if (t.1[0] - t.1[1]).abs() > harmonic::EQUAL_RATE_TOL {
                return Err(Error::UnsupportedPattern("boundary layer needs mu_1 = mu_2".into()).into());
            }
        }
        Diffusion { x, .. } => {
            parse_xy(x)?;
        }
    }
    Ok(())
}

fn parse_xy(s: &str) -> Result<[f64; 2], Failure> {
    let v = s.split(',').map(|t| parse_number(t.trim())).collect::<jackexit::Result<Vec<_>>>()?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(cfg("--x needs two coordinates")),
    }
}

fn parse_target(s: &str) -> Result<Vec<f64>, Failure> {
    serde_json::from_str::<Vec<f64>>(s).map_err(|e| cfg(&format!("--target: {e}")))
}

/// A lattice point with free coordinates, e.g. `0,0,i,j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern(Vec<Option<i64>>);

impl Pattern {
    pub fn parse(s: &str, d: usize) -> Result<Self, Failure> {
        let v: Vec<Option<i64>> = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<i64>() {
                    Ok(v) => Ok(Some(v)),
                    Err(_) if !t.is_empty() && t.chars().all(|c| c.is_ascii_alphabetic() || c == '*') => Ok(None),
                    Err(_) => Err(cfg(&format!("bad coordinate '{t}' in '{s}'"))),
                }
            })
            .collect::<Result<_, _>>()?;
        if v.len() != d {
            return Err(cfg(&format!("'{s}' has {} coordinates, the network has {d}", v.len())));
        }
        Ok(Pattern(v))
    }

    pub fn matches(&self, x: &[i64]) -> bool {
        self.0.iter().zip(x).all(|(p, &v)| p.is_none_or(|p| p == v))
    }

    /// Every point of `A_n` matching the pattern, in lexicographic order.
    pub fn points(&self, n: i64) -> Vec<Vec<i64>> {
        let fixed: i64 = self.0.iter().flatten().sum();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.0.len());
        self.fill(0, n - fixed, &mut cur, &mut out);
        out.retain(|x| in_a(n, x));
        out
    }

    fn fill(&self, k: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == self.0.len() {
            out.push(cur.clone());
            return;
        }
        match self.0[k] {
            Some(v) => {
                cur.push(v);
                self.fill(k + 1, budget, cur, out);
                cur.pop();
            }
            None => {
                for v in 0..=budget.max(-1) {
                    cur.push(v);
                    self.fill(k + 1, budget - v, cur, out);
                    cur.pop();
                }
            }
        }
    }
}

fn grid_rows(g: &solve::GridSolution, n: i64, slice: Option<&Pattern>) -> Vec<(Vec<i64>, f64)> {
    let mut rows: Vec<(Vec<i64>, f64)> = g.points.iter().cloned().zip(g.values.iter().copied()).collect();
    rows.extend(g.pinned.iter().filter(|(p, _)| in_a(n, p)).map(|(p, v)| (p.clone(), *v)));
    if let Some(s) = slice {
        rows.retain(|(p, _)| s.matches(p));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows
}

fn dispatch(cmd: &Command, net: Option<&JacksonNetwork>, out: Out) -> Result<(), Failure> {
    use Command::*;
    match cmd {
        Exact { n, slice, .. } => {
            let net = need(net);
            let slice = slice.as_deref().map(|s| Pattern::parse(s, net.d())).transpose()?;
            let g = solve::exact_exit_grid(net, *n, SolveOptions::default())?;
            writeln!(out, "{},value,log10_value", header_coords(net.d(), "x"))?;
            for (p, v) in grid_rows(&g, *n, slice.as_ref()) {
                writeln!(out, "{},{},{}", join(&p), fmt(v), log10_of(v))?;
            }
        }
        TandemExit { y, x, n, log10, .. } => {
            let net = need(net);
            let points: Vec<(Option<Vec<i64>>, Vec<i64>)> = match (y, x) {
                (Some(y), _) => vec![(None, parse_point(y)?)],
                (None, Some(x)) => {
                    let n = n.expect("validated");
                    Pattern::parse(x, net.d())?.points(n).into_iter().map(|p| (Some(p.clone()), transform(n, 1, &p))).collect()
                }
                _ => unreachable!("validated"),
            };
            if *log10 && points.len() == 1 {
                let l = tandem_exit_ln(net, &points[0].1)?;
                writeln!(out, "{}", fmt(l / std::f64::consts::LN_10))?;
                return Ok(());
            }
            let d = net.d();
            let lead = if x.is_some() { format!("{},", header_coords(d, "x")) } else { String::new() };
            writeln!(out, "{lead}{},value,log10_value", header_coords(d, "y"))?;
            for (xp, yp) in points {
                let l = tandem_exit_ln(net, &yp)?;
                let lead = xp.map(|p| format!("{},", join(&p))).unwrap_or_default();
                writeln!(out, "{lead}{},{},{}", join(&yp), fmt(l.exp()), fmt(l / std::f64::consts::LN_10))?;
            }
        }
        Balayage2d { k, r, target, tail, emit_trace, .. } => balayage2d(need(net), *k, *r, target.as_deref(), *tail, emit_trace.as_ref(), out)?,
        Charsurf { points, .. } => {
            let net = need(net);
            writeln!(out, "theta,beta1_re,beta1_im,beta2_re,beta2_im,sqrt_delta_re,sqrt_delta_im,alpha_conj_re,alpha_conj_im")?;
            for k in 0..*points {
                let th = 2.0 * std::f64::consts::PI * k as f64 / *points as f64;
                let a = C64::from_polar(1.0, th);
                let (b1, b2) = beta_roots2d(net, a)?;
                let s = sqrt_right(discriminant2d(net, a)?);
                let ac = conjugator2d(net, b1, a)?;
                let cells = [th, b1.re, b1.im, b2.re, b2.im, s.re, s.im, ac.re, ac.im];
                writeln!(out, "{}", cells.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(","))?;
            }
        }
        VerifySystem { d, tol, .. } => {
            let net = need(net);
            let d = d.unwrap_or(net.d());
            let (g, sol) = harmonic::tandem_solution(net, d)?;
            let rep = harmonic::verify_system(net, &g, &sol, *tol);
            #[derive(Serialize)]
            struct Row {
                condition: &'static str,
                passed: bool,
                worst: f64,
            }
            #[derive(Serialize)]
            struct Report {
                d: usize,
                vertices: usize,
                edges: usize,
                all_passed: bool,
                conditions: Vec<Row>,
            }
            let rows = rep.conditions.iter().map(|c| Row { condition: c.name, passed: c.passed, worst: c.worst }).collect();
            json_out(
                out,
                &Report { d, vertices: g.vertices.len(), edges: g.edges.len(), all_passed: rep.all_passed(), conditions: rows },
            )?;
            if !rep.all_passed() {
                return Err(Failure::Numeric("harmonic system check failed".into()));
            }
        }
        Mc { process, n, zeta, start, samples, seed, cap, .. } => {
            let net = need(net);
            let start = parse_point(start)?;
            let (process, stops, event) = match process {
                ProcessArg::X => {
                    let n = n.expect("validated");
                    let spec = montecarlo::exit_spec(n, &start, net.d());
                    (Process::X, spec.stops, StopKind::TauN)
                }
                ProcessArg::Yn => {
                    let n = n.expect("validated");
                    let stops = Stops { tau_n: None, tau: true, tau_0: true, zeta: None, cap: montecarlo::default_cap(n, net.d()) };
                    (Process::Yn(n), stops, StopKind::Tau)
                }
                ProcessArg::Y | ProcessArg::Z => {
                    let z = zeta.expect("validated");
                    let stops = Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(z), cap: 0 };
                    (if *process == ProcessArg::Y { Process::Y } else { Process::Z }, stops, StopKind::Tau)
                }
            };
            let mut spec = PathSpec { process, start, stops };
            if let Some(c) = cap {
                spec.stops.cap = *c;
            }
            let r = montecarlo::mc_probability(net, &spec, Event::Stop(event), *samples, *seed)?;
            json_out(out, &r)?;
        }
        Is { n, start, samples, seed, paired, .. } => {
            let net = need(net);
            let start = parse_point(start)?;
            if *paired {
                let (a, b) = montecarlo::paired(net, *n, &start, *samples, *seed)?;
                json_out(out, &serde_json::json!({ "naive": a, "is": b }))?;
            } else {
                json_out(out, &montecarlo::is_estimate(net, *n, &start, *samples, *seed)?)?;
            }
        }
        Compare { n, slice, .. } => {
            let net = need(net);
            let slice = slice.as_deref().map(|s| Pattern::parse(s, net.d())).transpose()?;
            let g = solve::exact_exit_grid(net, *n, SolveOptions::default())?;
            let nf = *n as f64;
            writeln!(out, "{},exact,approx,relative_error,log10_exact,log10_approx,V_n,W_n", header_coords(net.d(), "x"))?;
            for (p, v) in grid_rows(&g, *n, slice.as_ref()) {
                if p.iter().all(|&c| c == 0) {
                    continue;
                }
                let l = tandem_exit_ln(net, &transform(*n, 1, &p))?;
                let a = l.exp();
                let cells = [v, a, (a - v) / v, v.log10(), l / std::f64::consts::LN_10, -v.ln() / nf, -l / nf];
                writeln!(out, "{},{}", join(&p), cells.iter().map(|c| fmt(*c)).collect::<Vec<_>>().join(","))?;
            }
        }
        BoundaryLayer { n, .. } => {
            let rows = montecarlo::layer_overlay(need(net), *n, SolveOptions::default())?;
            writeln!(out, "x1,y1,layer,kink")?;
            for r in rows {
                writeln!(out, "{},{},{},{}", r.x1, r.y1, fmt(r.layer), r.kink.map(fmt).unwrap_or_default())?;
            }
        }
        Diffusion { a, b, x, .. } => {
            let x = parse_xy(x)?;
            let v = harmonic::diffusion_exit_probability(*a, *b, x)?;
            writeln!(out, "{},{}", fmt(v), log10_of(v))?;
        }
    }
    Ok(())
}

fn balayage2d(
    net: &JacksonNetwork,
    k: usize,
    r: f64,
    target: Option<&str>,
    tail: Option<f64>,
    trace: Option<&PathBuf>,
    out: Out,
) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Report {
        k: usize,
        radius: f64,
        psi: Vec<(f64, f64)>,
        condition: f64,
        interpolation_error: f64,
        max_error: f64,
        argmax: i64,
        search_end: i64,
        bracket: (f64, f64),
        #[serde(skip_serializing_if = "Option::is_none")]
        first_order: Option<serde_json::Value>,
    }
    let (approx, first, eval): (fourier2d::BalayageApproximation, _, Box<dyn Fn(i64) -> f64>) = match target {
        None => {
            let p = fourier2d::pipeline(net, k, r)?;
            let f = &p.first;
            let first = serde_json::json!({
                "r": f.r, "alpha_conj": f.alpha_conj, "c7": f.c7,
                "sup_deviation": f.sup_deviation, "bracket": f.bracket(),
            });
            let g = p.g.clone();
            (p.refined, Some(first), Box::new(move |y| g.eval(&[y, y]).map_or(f64::NAN, |v| v.re - 1.0)))
        }
        Some(t) => {
            let vals: Vec<C64> = parse_target(t)?.into_iter().map(|v| C64::new(v, 0.0)).collect();
            let tl = match tail {
                Some(v) if v != 0.0 => Tail::Constant(C64::new(v, 0.0)),
                _ => Tail::Zero,
            };
            let a = fourier2d::balayage_general(net, &vals, tl, k, r)?;
            let comb = a.combination.clone();
            let tv = tail.unwrap_or(0.0);
            let target = BoundaryTarget { head: vals, tail_const: C64::new(tv, 0.0), tail_geo: vec![] };
            (a, None, Box::new(move |y| comb.eval(&[y, y]).map_or(f64::NAN, |v| v.re) - target.eval(y).re))
        }
    };
    if let Some(path) = trace {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(f, "y,error")?;
        for y in 0..=(10 * k as i64).max(approx.search_end) {
            writeln!(f, "{y},{}", fmt(eval(y)))?;
        }
        f.flush()?;
    }
    let rep = Report {
        k,
        radius: r,
        psi: approx.psi.iter().map(|z| (z.re, z.im)).collect(),
        condition: approx.condition,
        interpolation_error: approx.interpolation_error,
        max_error: approx.max_error,
        argmax: approx.argmax,
        search_end: approx.search_end,
        bracket: approx.bracket,
        first_order: first,
    };
    json_out(out, &rep)
}

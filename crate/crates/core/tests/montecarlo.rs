mod common;

use common::tandem2;
use jackexit::harmonic::tandem_exit_probability;
use jackexit::montecarlo::{
    boundary_layer, boundary_layer_residual, gamma, is_estimate, layer_overlay, ld_value2d, mc_probability, naive_estimate,
    paired, simulate_coupled, simulate_seeded, subsolution_wn, Event, PathSpec, Process, StopKind, Stops,
};
use jackexit::network::transform;
use jackexit::solve::{exact_exit_grid, SolveOptions};
use jackexit::{Error, JacksonNetwork};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn within(mean: f64, se: f64, want: f64, k: f64) -> bool {
    (mean - want).abs() <= k * se
}

#[test]
fn x_returns_to_empty() {
    let spec = PathSpec {
        process: Process::X,
        start: vec![0, 0],
        stops: Stops { tau_n: None, tau: false, tau_0: true, zeta: None, cap: 1_000_000 },
    };
    for s in 0..20 {
        let o = simulate_seeded(&tandem2(), &spec, 5, s).unwrap();
        assert_eq!(o.stop, StopKind::Tau0);
        assert!(o.steps > 0 && o.point == vec![0, 0]);
    }
}

#[test]
fn y_on_boundary_stops_immediately() {
    let spec = PathSpec {
        process: Process::Y,
        start: vec![4, 4],
        stops: Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(50), cap: 0 },
    };
    let o = simulate_seeded(&tandem2(), &spec, 9, 0).unwrap();
    assert_eq!((o.stop, o.steps), (StopKind::Tau, 0));
}

#[test]
fn bad_specs_are_config_errors() {
    let spec = PathSpec {
        process: Process::X,
        start: vec![0, 0],
        stops: Stops { tau_n: None, tau: false, tau_0: false, zeta: None, cap: 0 },
    };
    assert!(matches!(simulate_seeded(&tandem2(), &spec, 1, 0), Err(Error::Config(_))));
    let spec = PathSpec { start: vec![1, 0, 0], ..spec };
    assert!(matches!(mc_probability(&tandem2(), &spec, Event::Never, 10, 1), Err(Error::Config(_))));
}

#[test]
fn coupled_paths() {
    let net = JacksonNetwork::tandem(0.2, &[0.35, 0.45]).unwrap();
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut reached = 0;
    for _ in 0..200 {
        let path = simulate_coupled(&net, n, &[2, 3], 5000, &mut rng);
        let sigma1 = path.iter().position(|(x, _)| x[0] == 0).unwrap_or(path.len() - 1);
        let sigma12 = path.iter().skip(sigma1 + 1).position(|(x, _)| x[1] == 0).map_or(path.len() - 1, |k| k + sigma1 + 1);
        for (k, (x, xb)) in path.iter().enumerate() {
            if k <= sigma1 {
                assert_eq!(x, xb, "step {k}");
            }
            if k <= sigma12 {
                assert_eq!(x[0] + x[1], xb[0] + xb[1], "step {k}");
            }
        }
        reached += usize::from(sigma12 < path.len() - 1);
    }
    assert!(reached > 50);
}

#[test]
fn z_hits_diagonal_with_probability_r() {
    let spec = PathSpec {
        process: Process::Z,
        start: vec![1, 0],
        stops: Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(50), cap: 0 },
    };
    let r = mc_probability(&tandem2(), &spec, Event::Stop(StopKind::Tau), 100_000, 21).unwrap();
    assert!(within(r.mean, r.std_error(), 0.2, 3.0), "{r:?}");
    assert_eq!(r.censored, 0);
}

#[test]
fn y_hits_diagonal_with_formula_probability() {
    let net = tandem2();
    let spec = PathSpec {
        process: Process::Y,
        start: vec![3, 0],
        stops: Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(60), cap: 0 },
    };
    let want = tandem_exit_probability(&net, &[3, 0]).unwrap();
    let r = mc_probability(&net, &spec, Event::Stop(StopKind::Tau), 100_000, 22).unwrap();
    assert!(within(r.mean, r.std_error(), want, 3.0), "{} vs {want}", r.mean);
    let (lo, hi) = (r.mean - r.half_width(), r.mean + r.half_width());
    assert!((lo - r.mean + 1.96 * r.std_error()).abs() < 1e-15 && hi > lo);
}

#[test]
fn empty_event() {
    let spec = PathSpec {
        process: Process::Z,
        start: vec![1, 0],
        stops: Stops { tau_n: None, tau: true, tau_0: false, zeta: Some(5), cap: 0 },
    };
    let r = mc_probability(&tandem2(), &spec, Event::Never, 2000, 1).unwrap();
    assert_eq!((r.mean, r.samples), (0.0, 2000));
}

#[test]
fn seeds_reproduce() {
    let a = naive_estimate(&tandem2(), 6, &[1, 0], 3000, 7).unwrap();
    let b = naive_estimate(&tandem2(), 6, &[1, 0], 3000, 7).unwrap();
    let c = naive_estimate(&tandem2(), 6, &[1, 0], 3000, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
}

#[test]
fn ld_quantities() {
    let net = tandem2();
    assert!((gamma(&net).unwrap() - 1.3863).abs() < 5e-5);
    let v0 = ld_value2d(&net, [0.0, 0.0]).unwrap();
    assert!((v0 - (-(0.25f64).ln()).min(-(0.2f64).ln())).abs() < 1e-15);
    assert!(matches!(gamma(&JacksonNetwork::tandem(0.1, &[0.2, 0.3, 0.4]).unwrap()), Err(Error::NotTandem2D)));

    let n = 200;
    let g = exact_exit_grid(&net, n, SolveOptions::default()).unwrap();
    let vn = -g.get(&[60, 60]).unwrap().ln() / n as f64;
    assert!((vn - ld_value2d(&net, [0.3, 0.3]).unwrap()).abs() < 0.05);
}

#[test]
fn subsolution_surface() {
    let net = tandem2();
    assert_eq!(subsolution_wn(&net, 30, &[10, 20]).unwrap(), 0.0);
    assert!(subsolution_wn(&net, 30, &[10, 25]).is_err());

    let eq = JacksonNetwork::tandem(0.2, &[0.4, 0.4]).unwrap();
    let (rho, c0, n) = (0.5f64, 0.5, 40i64);
    for x in [[1, 0], [5, 7], [20, 3], [0, 39]] {
        let ybar = (n - x[0] - x[1]) as f64;
        let want = -(rho.powf(ybar) + c0 * ybar * rho.powf((n - x[0]) as f64)).ln() / n as f64;
        assert!((subsolution_wn(&eq, n, &x).unwrap() - want).abs() < 1e-14, "{x:?}");
    }

    let n = 200;
    for k in 1..=10 {
        let x = [0.05 * k as f64, 0.3 - 0.02 * k as f64];
        let xn = [(x[0] * n as f64) as i64, (x[1] * n as f64) as i64];
        let w = subsolution_wn(&net, n, &xn).unwrap();
        assert!((w - ld_value2d(&net, x).unwrap()).abs() < 0.05, "{x:?}");
    }
}

#[test]
fn is_from_exit_boundary() {
    let r = is_estimate(&tandem2(), 10, &[4, 6], 500, 1).unwrap();
    assert_eq!((r.mean, r.variance), (1.0, 0.0));
}

#[test]
fn is_against_grid_and_naive() {
    let net = tandem2();
    let n = 10;
    let exact = exact_exit_grid(&net, n, SolveOptions::default()).unwrap().get(&[1, 0]).unwrap();
    let (naive, is) = paired(&net, n, &[1, 0], 20_000, 5).unwrap();
    assert!(within(is.mean, is.std_error(), exact, 3.0), "{} vs {exact}", is.mean);
    // naive hits are too rare at this level to estimate their spread
    assert!(is.variance < exact * (1.0 - exact));
    assert!(naive.mean < 1e-3);

    // likelihood ratios have the naive expectation
    let (naive, is) = paired(&net, 4, &[1, 0], 20_000, 6).unwrap();
    let se = (naive.std_error().powi(2) + is.std_error().powi(2)).sqrt();
    assert!(within(is.mean, se, naive.mean, 3.0), "{} vs {}", is.mean, naive.mean);
    assert!(is.variance < naive.variance && naive.mean > 0.0);
    assert!(!is.trajectory.is_empty());
}

#[test]
fn is_replications() {
    let net = tandem2();
    let n = 8;
    let exact = exact_exit_grid(&net, n, SolveOptions::default()).unwrap().get(&[1, 0]).unwrap();
    let good = (0..20).filter(|&s| {
        let r = is_estimate(&net, n, &[1, 0], 1000, 100 + s).unwrap();
        within(r.mean, r.std_error(), exact, 3.0)
    });
    assert!(good.count() >= 19);
}

#[test]
fn is_three_nodes() {
    let net = JacksonNetwork::tandem(0.1, &[0.2, 0.3, 0.4]).unwrap();
    let n = 8;
    let exact = exact_exit_grid(&net, n, SolveOptions::default()).unwrap().get(&[1, 0, 0]).unwrap();
    let r = is_estimate(&net, n, &[1, 0, 0], 10_000, 3).unwrap();
    assert!(within(r.mean, r.std_error(), exact, 3.0), "{} vs {exact}", r.mean);
    assert_eq!(r.fallbacks, 0);
}

#[test]
fn layer_curve() {
    let net = JacksonNetwork::tandem(0.2, &[0.4, 0.4]).unwrap();
    assert!(boundary_layer(&net, 1e-9).unwrap() < 1e-8);
    let mut last = 0.0;
    for k in 1..=600 {
        let y1 = 0.1 * k as f64;
        let l = boundary_layer(&net, y1).unwrap();
        assert!(l > last && l < y1);
        assert!(boundary_layer_residual(&net, y1, l).unwrap().abs() < 1e-12);
        last = l;
    }
    assert!(matches!(boundary_layer(&tandem2(), 5.0), Err(Error::UnsupportedPattern(_))));
}

#[test]
fn layer_overlay_tracks_grid() {
    let net = JacksonNetwork::tandem(0.2, &[0.4, 0.4]).unwrap();
    let n = 40;
    let rows = layer_overlay(&net, n, SolveOptions::default()).unwrap();
    assert_eq!(rows.len(), (n - 1) as usize);
    for r in &rows {
        assert_eq!(r.x1, transform(n, 1, &[r.y1, 0])[0]);
        if let (true, Some(k)) = (r.x1 >= 2, r.kink) {
            assert!((k - r.layer).abs() <= 2.0, "{r:?}");
        }
    }
}

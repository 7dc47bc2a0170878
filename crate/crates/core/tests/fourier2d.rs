mod common;

use std::f64::consts::PI;

use common::{net_from_weights, tandem2};
use jackexit::charsurf::{beta_roots2d, c, single_term_root2d, z_increments};
use jackexit::fourier2d::{
    balayage_general, balayage_z, basis, combine_corners, corner_pipelines, first_order, perturbed_basis, pipeline, refine,
    single_term_basis, BasisKind, BoundaryTarget, Tail,
};
use jackexit::harmonic::residual;
use jackexit::solve::{exact_exit_grid, exact_y_balayage_bracket, exact_y_hit_bracket_with, SolveOptions};
use jackexit::{Error, JacksonNetwork, C64};
use proptest::prelude::*;

fn normalised() -> JacksonNetwork {
    JacksonNetwork::from_matrix_normalized(2, vec![vec![0.0, 0.15, 0.1], vec![0.2, 0.0, 0.1], vec![0.24, 0.06, 0.0]]).unwrap()
}

fn b_points() -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    for y2 in [0, 1, 2, 5, 9] {
        for gap in [0, 1, 3, 8, 20] {
            out.push([y2 + gap, y2]);
        }
    }
    out
}

#[test]
fn first_order_deviation_peaks_at_zero() {
    let f = first_order(&normalised()).unwrap();
    let dev: Vec<f64> = (0..60).map(|y| (f.a0.eval(&[y, y]).unwrap().re - 1.0).abs()).collect();
    assert!((dev[0] - f.sup_deviation).abs() < 1e-12);
    assert!(dev.iter().all(|&d| d <= dev[0]));
    assert!(f.c7 < 0.0);
}

#[test]
fn first_order_with_unit_row_sum() {
    // with p(1,0) = 0.35 the matrix sums to one and gives the printed constants
    let net = JacksonNetwork::from_matrix(2, vec![vec![0.0, 0.15, 0.1], vec![0.35, 0.0, 0.1], vec![0.24, 0.06, 0.0]]).unwrap();
    let f = first_order(&net).unwrap();
    assert!((f.r - 0.42373).abs() < 5e-6);
    assert!((f.alpha_conj - 0.48123).abs() < 5e-6);
    assert!((f.c7 - 3.8418).abs() < 5e-5);
    let (lo, hi) = f.bracket();
    assert!(lo > 0.2 && hi == 1.0);
    let grid = exact_y_hit_bracket_with(&net, 100, 200, SolveOptions::default()).unwrap();
    for y in [[1, 0], [4, 2], [10, 0], [12, 6]] {
        let a0 = f.a0.eval(&y).unwrap().re;
        let (glo, ghi) = grid.at(&y).unwrap();
        assert!(a0 / 5.0 < glo && ghi < a0, "{y:?}");
    }
}

#[test]
fn first_order_lower_bound_for_negative_c7() {
    let net = tandem2();
    let f = first_order(&net).unwrap();
    assert!(f.c7 < 0.0 && f.sup_deviation > 1.0);
    assert_eq!(f.bracket(), (1.0, f64::INFINITY));
    let grid = exact_y_hit_bracket_with(&net, 60, 60, SolveOptions::default()).unwrap();
    for y in [[1, 0], [4, 2], [10, 0], [12, 6]] {
        let (glo, _) = grid.at(&y).unwrap();
        assert!(f.a0.eval(&y).unwrap().re <= glo, "{y:?}");
    }
}

#[test]
fn assumption_violation_is_reported() {
    // node 2 fed faster than it drains along the boundary: alpha(r, 1) >= 1
    let net = JacksonNetwork::from_matrix_normalized(2, vec![vec![0.0, 0.05, 0.3], vec![0.3, 0.0, 0.05], vec![0.2, 0.1, 0.0]]).unwrap();
    match first_order(&net) {
        Err(Error::AssumptionViolated(_)) => {}
        Ok(f) => assert!(f.alpha_conj < 1.0),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn pair_at_one_is_first_order() {
    let net = normalised();
    let f = first_order(&net).unwrap();
    let e = perturbed_basis(&net, c(1.0)).unwrap();
    for y in b_points() {
        assert!((e.form.eval(&y).unwrap() - f.a0.eval(&y).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn single_term_element() {
    let net = normalised();
    let (r1, _) = single_term_root2d(&net).unwrap();
    let e = single_term_basis(&net).unwrap();
    assert_eq!(e.kind, BasisKind::SingleTerm);
    for y in 0..20 {
        assert!((e.trace(y) - r1.powi(y as i32)).norm() < 1e-15);
        assert!((e.form.eval(&[y, y]).unwrap() - e.trace(y)).norm() < 1e-15);
    }
}

#[test]
fn eleven_elements_pass_modulus_checks() {
    let net = normalised();
    let els = basis(&net, 11, 0.7).unwrap();
    assert_eq!(els.len(), 12);
    for e in &els[1..] {
        assert!(e.beta.norm() < 1.0 && e.alpha.norm() <= 1.0 && e.alpha_conj.norm() < 1.0);
        for y in b_points() {
            assert!(residual(&net, &e.form, &y).unwrap().norm() < 1e-10);
        }
        for y in 0..15 {
            assert!((e.form.eval(&[y, y]).unwrap() - e.trace(y)).norm() < 1e-13);
        }
    }
}

#[test]
fn outside_disc_is_rejected() {
    let net = normalised();
    assert!(matches!(perturbed_basis(&net, c(1.3)), Err(Error::NotBalayageDetermined(_))));
}

#[test]
fn basis_trace_gives_unit_psi() {
    let net = normalised();
    let els = basis(&net, 11, 0.7).unwrap();
    let e = &els[5];
    let t = BoundaryTarget { tail_geo: vec![(c(1.0), e.alpha), (-e.kappa, e.alpha_conj)], ..Default::default() };
    let a = refine(&net, 11, 0.7, &t).unwrap();
    for (j, p) in a.psi.iter().enumerate() {
        assert!((p - if j == 5 { 1.0 } else { 0.0 }).norm() < 1e-8, "{j}: {p}");
    }
    assert!(a.max_error < 1e-8);
}

#[test]
fn pipeline_interpolates() {
    let net = normalised();
    let pl = pipeline(&net, 11, 0.7).unwrap();
    for y in 0..=11 {
        let g = pl.g.eval(&[y, y]).unwrap();
        assert!((g - 1.0).norm() < 1e-12, "{y}: {g}");
        assert!(g.im.abs() < 1e-12);
    }
    let worst = (0..=200).map(|y| (pl.g.eval(&[y, y]).unwrap().re - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= pl.refined.max_error + 1e-12);
    assert!(pl.refined.argmax > 11 && pl.refined.search_end >= pl.refined.argmax);
}

#[test]
fn constant_tail_matches_pipeline() {
    let net = normalised();
    let pl = pipeline(&net, 11, 0.7).unwrap();
    let b = balayage_general(&net, &[c(1.0)], Tail::Constant(c(1.0)), 11, 0.7).unwrap();
    for y in b_points() {
        assert!((b.combination.eval(&y).unwrap() - pl.g.eval(&y).unwrap()).norm() < 1e-12);
    }
    assert!((b.max_error - pl.refined.max_error).abs() < 1e-12);
}

#[test]
fn indicator_matches_grid_balayage() {
    let net = tandem2();
    let a = balayage_general(&net, &[c(1.0)], Tail::Zero, 11, 0.7).unwrap();
    let grid = exact_y_balayage_bracket(&net, 60, 120, |t| if t[1] == 0 { 1.0 } else { 0.0 }, SolveOptions::default()).unwrap();
    for y in [[1, 0], [3, 1], [6, 0], [8, 3]] {
        let v = a.combination.eval(&y).unwrap().re;
        let (lo, hi) = grid.at(&y).unwrap();
        // |approx - E f| <= max_error * P_y(tau < inf) <= max_error
        assert!(v >= lo - a.max_error && v <= hi + a.max_error, "{y:?}: {v} [{lo}, {hi}]");
    }
    assert!(a.max_error < 1e-2);
}

#[test]
fn unconstrained_closed_form() {
    let net = normalised();
    for k in 0..12 {
        let alpha = C64::from_polar(1.0, 2.0 * PI * k as f64 / 12.0 + 0.1);
        let (b1, _) = beta_roots2d(&net, alpha).unwrap();
        assert!((balayage_z(&net, alpha, &[4, 4]).unwrap() - alpha.powi(4)).norm() < 1e-14);
        // harmonic for Z at points of B away from the diagonal
        for z in [[3i64, 1], [6, -2], [10, 4]] {
            let f = |w: &[i64]| alpha.powi(w[1] as i32) * b1.powi((w[0] - w[1]) as i32);
            let step: C64 = z_increments(&net).iter().map(|inc| inc.prob * f(&[z[0] + inc.v[0], z[1] + inc.v[1]])).sum();
            assert!((step - f(&z)).norm() < 1e-13);
            if z[1] >= 0 {
                assert!((balayage_z(&net, alpha, &z).unwrap() - f(&z)).norm() < 1e-14);
            }
        }
    }
    assert!(balayage_z(&net, c(0.5), &[1, 0]).is_err());
}

#[test]
fn corners() {
    let net = normalised();
    let n = 30;
    let (g1, g2) = corner_pipelines(&net, 11, 0.7).unwrap();
    // away from the x(2) axis corner 1 dominates
    for x in [[10, 2], [15, 1], [20, 5], [25, 1]] {
        let v = combine_corners(n, &g1.g, &g2.g, &x).unwrap();
        let v1 = g1.g.eval(&[n - x[0], x[1]]).unwrap().re;
        assert_eq!(v, v1);
        assert!(v1 > g2.g.eval(&[n - x[1], x[0]]).unwrap().re);
    }

    let sym = JacksonNetwork::from_matrix_normalized(2, vec![vec![0.0, 0.08, 0.08], vec![0.3, 0.0, 0.12], vec![0.3, 0.12, 0.0]]).unwrap();
    // a symmetric network has r = p(0,1) / p(1,0), where C(r, alpha(r, 1)) = 0,
    // so compare boundary-indicator approximations instead
    assert!(matches!(first_order(&sym), Err(Error::AssumptionViolated(_))));
    let f = vec![c(1.0); 12];
    let h1 = balayage_general(&sym, &f, Tail::Zero, 11, 0.7).unwrap().combination;
    let h2 = balayage_general(&sym.corner_view(2).unwrap(), &f, Tail::Zero, 11, 0.7).unwrap().combination;
    for k in [2, 5, 9] {
        let a = h1.eval(&[n - k, k]).unwrap().re;
        let b = h2.eval(&[n - k, k]).unwrap().re;
        assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} {b}");
        assert_eq!(combine_corners(n, &h1, &h2, &[k, k]).unwrap(), a.max(b));
    }
}

#[test]
fn corners_against_grid() {
    let net = normalised();
    let n = 30;
    let (g1, g2) = corner_pipelines(&net, 11, 0.7).unwrap();
    let grid = exact_exit_grid(&net, n, SolveOptions::default()).unwrap();
    // near the exit boundary; deep inside the box both corners undershoot
    for x in [[20, 5], [5, 20], [25, 1], [1, 25], [14, 14], [28, 0], [0, 28]] {
        let f = combine_corners(n, &g1.g, &g2.g, &x).unwrap();
        let e = grid.get(&x).unwrap();
        assert!(((f - e) / e).abs() < 0.02, "{x:?}: {f:e} vs {e:e}");
    }
}

/// 2-D networks satisfying the assumptions, with the constrained queue of `Y` stable.
fn assumption_net() -> impl Strategy<Value = JacksonNetwork> {
    (prop::collection::vec(0.02f64..1.0, 6), 0.05f64..0.4)
        .prop_filter_map("assumptions", |(w, a)| {
            let net = net_from_weights(2, &w, a)?;
            let f = first_order(&net).ok()?;
            let stable_y2 = net.p(0, 2) + net.p(1, 2) < net.mu(2);
            (stable_y2 && f.sup_deviation < 0.9 && basis(&net, 11, 0.7).is_ok()).then_some(net)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn certificate_is_valid(
        head in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..12),
        geo in prop::collection::vec((-2.0f64..2.0, 0.05f64..0.95, 0.0..2.0 * PI), 1..3),
    ) {
        let net = normalised();
        let target = BoundaryTarget {
            head: head.iter().map(|&(a, b)| C64::new(a, b)).collect(),
            tail_const: c(0.0),
            tail_geo: geo.iter().map(|&(k, m, t)| (c(k), C64::from_polar(m, t))).collect(),
        };
        let a = refine(&net, 11, 0.7, &target).unwrap();
        for y in 0..=12 {
            let e = (a.combination.eval(&[y, y]).unwrap() - target.eval(y)).norm();
            prop_assert!(e <= 1e-12 * (1.0 + target.eval(y).norm()) || y > 11, "interpolation at {}", y);
        }
        for y in 0..=110 {
            let e = (a.combination.eval(&[y, y]).unwrap() - target.eval(y)).norm();
            prop_assert!(e <= a.max_error + 1e-12, "y = {}: {} > {}", y, e, a.max_error);
        }
    }

    #[test]
    fn accepted_elements_are_harmonic(m in 0.2f64..1.0, t in 0.0..2.0 * PI) {
        let net = normalised();
        if let Ok(e) = perturbed_basis(&net, C64::from_polar(m, t)) {
            for y in b_points() {
                prop_assert!(residual(&net, &e.form, &y).unwrap().norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn pipeline_bracket_contains_grid(net in assumption_net()) {
        let pl = pipeline(&net, 11, 0.7).unwrap();
        let grid = exact_y_hit_bracket_with(&net, 80, 160, SolveOptions::default()).unwrap();
        for y in [[1, 0], [3, 1], [5, 5], [8, 2], [12, 0]] {
            let (_, lo, hi) = pl.at(&y).unwrap();
            let (glo, ghi) = grid.at(&y).unwrap();
            prop_assert!(lo <= ghi * (1.0 + 1e-12) && glo <= hi * (1.0 + 1e-12), "{:?}: [{}, {}] vs grid [{}, {}]", y, lo, hi, glo, ghi);
        }
    }
}

#![allow(dead_code)]

use jackexit::JacksonNetwork;
use proptest::prelude::*;

/// Off-diagonal weights with arrivals scaled down by `arrivals`, normalised.
pub fn net_from_weights(d: usize, w: &[f64], arrivals: f64) -> Option<JacksonNetwork> {
    let mut p = vec![vec![0.0; d + 1]; d + 1];
    let mut k = 0;
    for i in 0..=d {
        for j in 0..=d {
            if i != j {
                p[i][j] = if i == 0 { w[k] * arrivals } else { w[k] };
                k += 1;
            }
        }
    }
    JacksonNetwork::from_matrix_normalized(d, p).ok().filter(|n| n.is_stable())
}

/// Random stable networks of dimension `d` with every entry positive.
pub fn stable_net(d: usize) -> impl Strategy<Value = JacksonNetwork> {
    (prop::collection::vec(0.02f64..1.0, (d + 1) * d), 0.05f64..0.6)
        .prop_filter_map("unstable", move |(w, a)| net_from_weights(d, &w, a))
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn tandem2() -> JacksonNetwork {
    JacksonNetwork::tandem(0.1, &[0.4, 0.5]).unwrap()
}

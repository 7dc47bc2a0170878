//! Builds a network from its jump matrix and prints the derived rates.

use jackexit::network::{ratio, traffic_exact};
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let p = vec![vec![0.0, 0.15, 0.10], vec![0.20, 0.0, 0.10], vec![0.24, 0.06, 0.0]];
    // The matrix sums to 0.85, so scale it first.
    let net = JacksonNetwork::from_matrix_normalized(2, p)?;
    for j in 1..=net.d() {
        println!("node {j}: lambda {:.6} mu {:.6} nu {:.6} rho {:.6}", net.lambda(j), net.mu(j), net.nu(j), net.rho(j));
    }
    println!("input/output ratio r = {:.6}, stable: {}", net.io_ratio(), net.is_stable());

    let exact = vec![
        vec![ratio(0, 1), ratio(15, 85), ratio(10, 85)],
        vec![ratio(20, 85), ratio(0, 1), ratio(10, 85)],
        vec![ratio(24, 85), ratio(6, 85), ratio(0, 1)],
    ];
    for (k, v) in traffic_exact(&exact)?.iter().enumerate() {
        println!("nu_{} = {v}", k + 1);
    }
    Ok(())
}

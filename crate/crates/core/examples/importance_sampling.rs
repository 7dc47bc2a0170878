//! Plain Monte Carlo and importance sampling on the same streams.

use jackexit::montecarlo::paired;
use jackexit::solve::{exact_exit_grid, SolveOptions};
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.2, &[0.35, 0.45])?;
    let (n, x) = (20, [10, 0]);
    let exact = exact_exit_grid(&net, n, SolveOptions::default())?.get(&x).unwrap();
    let (naive, is) = paired(&net, n, &x, 20_000, 11)?;
    println!("exact  {exact:.6e}");
    for (name, r) in [("naive", &naive), ("IS", &is)] {
        println!("{name:6} {:.6e}  95% CI [{:.6e}, {:.6e}]  variance {:.3e}", r.mean, r.ci95.0, r.ci95.1, r.variance);
    }
    Ok(())
}

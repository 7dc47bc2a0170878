//! Exact grid values of P_x(tau_n < tau_0) and a bracket for the limit walk.

use jackexit::harmonic::tandem_exit_probability;
use jackexit::network::transform;
use jackexit::solve::{exact_exit_grid, exact_y_hit_bracket_with, SolveOptions};
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5])?;
    let n = 60;
    let g = exact_exit_grid(&net, n, SolveOptions::default())?;
    println!("{} states, {} sweeps", g.len(), g.sweeps);
    for x in [[1, 0], [2, 0], [9, 0]] {
        let f = tandem_exit_probability(&net, &transform(n, 1, &x))?;
        println!("x = {x:?}: grid {:.5e}, formula {f:.5e}", g.get(&x).unwrap());
    }

    let br = exact_y_hit_bracket_with(&net, 60, 160, SolveOptions::default())?;
    for y in [[1, 0], [12, 7]] {
        let (lo, hi) = br.at(&y).unwrap();
        println!("y = {y:?}: {lo:.10e} <= P <= {hi:.10e}");
    }
    Ok(())
}

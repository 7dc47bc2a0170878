//! A 14 node tandem: the 16383 term formula and an importance sampling check.

use std::time::Instant;

use jackexit::harmonic::{tandem_exit_expanded, tandem_exit_probability};
use jackexit::montecarlo::is_estimate;
use jackexit::network::transform;
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let mu = [0.05, 0.08, 0.06, 0.09, 0.065, 0.075, 0.085, 0.062, 0.07, 0.078, 0.068, 0.072, 0.058, 0.057];
    let net = JacksonNetwork::tandem(0.03, &mu)?;
    let n = 60;
    let mut x = vec![0; 14];
    x[0] = 20;
    let y = transform(n, 1, &x);
    let t = Instant::now();
    let f = tandem_exit_expanded(&net, &y)?;
    println!("explicit sum {f:.6e} in {:?}; recursion {:.6e}", t.elapsed(), tandem_exit_probability(&net, &y)?);
    let r = is_estimate(&net, n, &x, 1000, 3)?;
    println!("IS {:.6e}, CI [{:.6e}, {:.6e}]", r.mean, r.ci95.0, r.ci95.1);
    Ok(())
}

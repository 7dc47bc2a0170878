//! Exit probability of the constrained diffusion limit.

use jackexit::harmonic::diffusion_exit_probability;

fn main() -> jackexit::Result<()> {
    let (a, b) = (1.0, 0.5);
    for x in [[0.2, 0.2], [0.5, 0.1], [1.0, 0.0], [2.0, 1.0]] {
        println!("x = {x:?}: {:.6}", diffusion_exit_probability(a, b, x)?);
    }
    Ok(())
}

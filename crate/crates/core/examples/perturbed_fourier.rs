//! Certified approximation of P_y(tau < inf) for a general two node network.

use jackexit::fourier2d::pipeline;
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let p = vec![vec![0.0, 0.15, 0.10], vec![0.20, 0.0, 0.10], vec![0.24, 0.06, 0.0]];
    let net = JacksonNetwork::from_matrix_normalized(2, p)?;
    let pl = pipeline(&net, 11, 0.7)?;
    let f = &pl.first;
    println!("r = {:.6}, alpha(r,1) = {:.6}, c7 = {:.6}", f.r, f.alpha_conj, f.c7);
    println!(
        "max boundary error {:.5} at y = {}, basis condition {:.3e}",
        pl.refined.max_error, pl.refined.argmax, pl.refined.condition
    );
    for y in [[1, 0], [5, 2], [20, 10]] {
        let (g, lo, hi) = pl.at(&y)?;
        println!("y = {y:?}: g = {g:.6e}, {lo:.6e} <= P <= {hi:.6e}");
    }
    Ok(())
}

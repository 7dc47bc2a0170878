//! Combining the approximations of both corners of a two node network.

use jackexit::fourier2d::{combine_corners, corner_pipelines};
use jackexit::solve::{exact_exit_grid, SolveOptions};
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let p = vec![vec![0.0, 0.15, 0.10], vec![0.20, 0.0, 0.10], vec![0.24, 0.06, 0.0]];
    let net = JacksonNetwork::from_matrix_normalized(2, p)?;
    let n = 30;
    let (g1, g2) = corner_pipelines(&net, 11, 0.7)?;
    let grid = exact_exit_grid(&net, n, SolveOptions::default())?;
    for x in [[1, 0], [10, 2], [2, 10], [0, 15], [14, 14]] {
        let f = combine_corners(n, &g1.g, &g2.g, &x)?;
        let e = grid.get(&x).unwrap();
        println!("x = {x:?}: approx {f:.6e}, grid {e:.6e}, relative error {:+.3e}", (f - e) / e);
    }
    Ok(())
}

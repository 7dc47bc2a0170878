//! The large deviation limit against W_n and the exact grid.

use jackexit::montecarlo::{gamma, ld_value2d, subsolution_wn};
use jackexit::solve::{exact_exit_grid, SolveOptions};
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5])?;
    let n = 200;
    println!("gamma = {:.6}", gamma(&net)?);
    let g = exact_exit_grid(&net, n, SolveOptions::default())?;
    for x in [[0.3, 0.3], [0.1, 0.5], [0.6, 0.1]] {
        let p = [(x[0] * n as f64) as i64, (x[1] * n as f64) as i64];
        let vn = -g.get(&p).unwrap().ln() / n as f64;
        println!("x = {x:?}: V = {:.4}, V_n = {vn:.4}, W_n = {:.4}", ld_value2d(&net, x)?, subsolution_wn(&net, n, &p)?);
    }
    Ok(())
}

//! Balayage of a boundary indicator, checked against the truncated grid.

use jackexit::fourier2d::{balayage_general, Tail};
use jackexit::solve::{exact_y_balayage_bracket, SolveOptions};
use jackexit::{JacksonNetwork, C64};

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5])?;
    // f = 1 at (0, 0) and 0 elsewhere on the boundary.
    let f = [C64::new(1.0, 0.0)];
    let a = balayage_general(&net, &f, Tail::Zero, 11, 0.7)?;
    println!("certified error {:.3e}", a.max_error);
    let br = exact_y_balayage_bracket(&net, 60, 120, |t| if t[1] == 0 { 1.0 } else { 0.0 }, SolveOptions::default())?;
    for y in [[1, 0], [3, 1], [6, 0]] {
        let v = a.combination.eval(&y)?.re;
        let (lo, hi) = br.at(&y).unwrap();
        println!("y = {y:?}: approx {v:.6e}, grid [{lo:.6e}, {hi:.6e}]");
    }
    Ok(())
}

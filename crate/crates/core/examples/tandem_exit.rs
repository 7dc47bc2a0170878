//! Exit probability of a tandem walk: the harmonic system and the formula.

use jackexit::harmonic::{tandem_exit_expanded, tandem_exit_probability, tandem_solution, verify_system};
use jackexit::network::transform;
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(1.0 / 18.0, &[3.0 / 18.0, 7.0 / 18.0, 2.0 / 18.0, 5.0 / 18.0])?;
    for d in 1..=net.d() {
        let (g, sol) = tandem_solution(&net, d)?;
        let rep = verify_system(&net, &g, &sol, 1e-10);
        println!("d = {d}: {} vertices, all conditions hold: {}", g.vertices.len(), rep.all_passed());
    }
    let n = 60;
    for x in [[0, 0, 10, 5], [0, 0, 30, 0], [5, 5, 5, 5]] {
        let y = transform(n, 1, &x);
        let f = tandem_exit_probability(&net, &y)?;
        let e = tandem_exit_expanded(&net, &y)?;
        println!("x = {x:?}: P = {f:.6e} (explicit sum {e:.6e})");
    }
    Ok(())
}

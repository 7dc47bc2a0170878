//! Boundary layer of an equal-rate tandem, next to the grid's gradient transition.

use jackexit::montecarlo::layer_overlay;
use jackexit::solve::SolveOptions;
use jackexit::JacksonNetwork;

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.2, &[0.4, 0.4])?;
    println!("  x1  layer   grid kink");
    for r in layer_overlay(&net, 40, SolveOptions::default())?.iter().step_by(4) {
        println!("{:4}  {:.3}   {}", r.x1, r.layer, r.kink.map_or("-".into(), |k| format!("{k:.3}")));
    }
    Ok(())
}

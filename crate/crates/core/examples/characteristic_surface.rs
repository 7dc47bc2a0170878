//! Roots of the characteristic equation around the unit circle.

use jackexit::charsurf::{beta_roots2d, conjugator2d, single_term_root2d};
use jackexit::{JacksonNetwork, C64};

fn main() -> jackexit::Result<()> {
    let net = JacksonNetwork::tandem(0.1, &[0.4, 0.5])?;
    println!("theta      |beta1|    |beta2|    |alpha'|");
    for k in 0..12 {
        let th = std::f64::consts::TAU * k as f64 / 12.0;
        let a = C64::from_polar(1.0, th);
        let (b1, b2) = beta_roots2d(&net, a)?;
        let ac = conjugator2d(&net, b1, a)?;
        println!("{th:8.4}  {:9.6}  {:9.6}  {:9.6}", b1.norm(), b2.norm(), ac.norm());
    }
    let (r1, b) = single_term_root2d(&net)?;
    println!("single-term point: alpha = {r1:.6}, beta = {b:.6}");
    Ok(())
}

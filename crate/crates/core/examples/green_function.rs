//! The Green's function g_n on an exact tuple, place by place, next to the
//! determinant witness and the Hadamard envelope.

use greenfield::basis::special_basis;
use greenfield::config::SystemConfig;
use greenfield::green::{dbn_witness, green_value, hadamard_envelope};
use greenfield::homopoly::ProjPoint;
use greenfield::pf::Place;

fn main() -> greenfield::Result<()> {
    let system = SystemConfig::new(&["x^2", "y^2"]).build()?;
    let basis = special_basis(&system, 2)?;
    let lifts = ["1,0", "0,1", "1,1"]
        .iter()
        .map(|t| ProjPoint::parse(t))
        .collect::<greenfield::Result<Vec<_>>>()?;
    for v in [Place::Archimedean, Place::p(2), Place::p(3)] {
        let g = green_value(&system, &basis, &lifts, &v, 1e-12)?;
        let w = dbn_witness(&system, &basis, &lifts, &v, 1e-12)?;
        let env = hadamard_envelope(&system, 2, system.julia_radius_log(&v)?, &v) / 6.0;
        println!("{v:>4}: g = {:+.6}, witness = {:+.6}, envelope = {:.6}", g.value(), w.value(), env);
    }
    Ok(())
}

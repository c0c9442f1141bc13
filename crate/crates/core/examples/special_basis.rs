//! The special basis H(n) with the provenance of each element.

use greenfield::basis::{c_n, special_basis};
use greenfield::config::SystemConfig;

fn main() -> greenfield::Result<()> {
    let system = SystemConfig::new(&["x^2 + x*y", "y^2 - 3*x*y"]).build()?;
    for n in [3, 6] {
        let b = special_basis(&system, n)?;
        println!("n = {n}: c(n) = {}, scanned {} candidates", c_n(&system, n), b.candidates_scanned);
        for e in &b.elements {
            println!("  {:<28} {}", e.provenance.to_string(), e.expanded);
        }
    }
    Ok(())
}

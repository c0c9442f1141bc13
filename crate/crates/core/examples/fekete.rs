//! Fekete search for the power map; the optimum is the roots-of-unity value
//! log(n+1)/(2n).

use greenfield::basis::special_basis;
use greenfield::config::SystemConfig;
use greenfield::fekete::{fekete_search, SphereChart, DEFAULT_RESTARTS};

fn main() -> greenfield::Result<()> {
    let system = SystemConfig::new(&["x^2", "y^2"]).build()?;
    let chart = SphereChart::new(&system)?;
    for n in [1, 2, 4, 8, 12] {
        let basis = special_basis(&system, n)?;
        let r = fekete_search(&basis, &chart, 20_000, 7, DEFAULT_RESTARTS)?;
        let exact = (n as f64 + 1.0).ln() / (2.0 * n as f64);
        println!(
            "n = {n:>2}: witness {:.10} vs {:.10} ({} evaluations, restart {})",
            r.witness, exact, r.evaluations, r.restart
        );
    }
    Ok(())
}

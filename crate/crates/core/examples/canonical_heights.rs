//! Canonical heights with their local profiles.

use greenfield::config::SystemConfig;
use greenfield::heights::{canonical_height, weil_height};
use greenfield::homopoly::ProjPoint;

fn main() -> greenfield::Result<()> {
    let cheb = SystemConfig::new(&["x^2 - 2*y^2", "y^2"]).build()?;
    let half = SystemConfig::new(&["x^2 + 1/2*y^2", "y^2"]).build()?;
    for (name, s) in [("z^2 - 2", &cheb), ("z^2 + 1/2", &half)] {
        for p in ["3,1", "2,1", "1/3,1", "6,4"] {
            let pt = ProjPoint::parse(p)?;
            let h = canonical_height(s, &pt, 1e-10)?;
            let profile: Vec<String> = h
                .local_profile
                .iter()
                .map(|(v, m)| format!("{v}: {:.6}", m.value()))
                .collect();
            println!(
                "{name:<10} [{p}]  h = {:.10}  weil = {:.6}  [{}]",
                h.value,
                weil_height(&pt)?.value,
                profile.join(", ")
            );
        }
    }
    Ok(())
}

//! Local escape rates at a good prime, a bad prime and the archimedean place.

use greenfield::config::SystemConfig;
use greenfield::homopoly::ProjPoint;
use greenfield::pf::Place;

fn main() -> greenfield::Result<()> {
    let system = SystemConfig::new(&["x^2 + 1/2*y^2", "y^2"]).build()?;
    let p = ProjPoint::parse("3/2,1")?;
    for v in [Place::Archimedean, Place::p(2), Place::p(3)] {
        let kind = match v {
            Place::Archimedean => "archimedean".to_string(),
            Place::Prime(_) => format!("{:?} reduction", system.reduction_type(&v)?.kind),
        };
        let h = system.escape_rate(&v, &p, 1e-12)?;
        println!(
            "{v:>4} {kind}: H = {} ~ {:.12} (error {:.1e}, {} steps)",
            h.value.render(),
            h.approx(),
            h.err(),
            h.steps
        );
    }
    Ok(())
}

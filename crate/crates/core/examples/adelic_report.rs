//! Envelope and witnesses at every relevant place, with the fitted constant.

use greenfield::config::SystemConfig;
use greenfield::experiments::adelic_report;

fn main() -> greenfield::Result<()> {
    let system = SystemConfig::new(&["x^2 + 1/2*y^2", "y^2"]).build()?;
    let report = adelic_report(&system, &[4, 8, 16], 4000, 7);
    for row in &report.rows {
        for p in &row.places {
            println!(
                "n = {:>2} {:>4}: witness {:>10} <= envelope {:.4} ({})",
                row.n,
                p.place.to_string(),
                p.witness_logd.map_or("-".into(), |w| format!("{w:.4}")),
                p.envelope_logd,
                p.witness_source
            );
        }
        println!("        sum {:.4} vs C_fit log n / n = {:.4}", row.sum_envelope_logd, row.reference);
    }
    println!("C_fit = {:.4}", report.c_fit);
    Ok(())
}

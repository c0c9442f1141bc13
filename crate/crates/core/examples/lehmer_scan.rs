//! Preimages of x(P) under the Lattès map, their degrees and the
//! Lehmer-type shape h * D^5 * (log D)^2.

use greenfield::arith::int;
use greenfield::experiments::{lehmer_scan, LattesSystem};

fn main() -> greenfield::Result<()> {
    let l = LattesSystem::new(int(0), int(-2), int(3), int(5))?;
    let t = lehmer_scan(&l, &[0, 1, 2, 3], 1e-9)?;
    println!("h(x(P)) = {:.12}", t.base_height.value);
    for r in &t.rows {
        let factor = if r.factor.len() > 48 { format!("{}...", &r.factor[..48]) } else { r.factor.clone() };
        println!("depth {} D = {:>2} x{} h = {:.3e} shape = {:.4e}  {factor}", r.depth, r.degree, r.multiplicity, r.height, r.shape);
    }
    println!("empirical constant {:.4e}", t.min_shape);
    Ok(())
}

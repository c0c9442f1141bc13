//! Greedy selection of multiples x(kP) whose basis evaluations are independent.

use greenfield::arith::{format_rational, int};
use greenfield::experiments::{multiples_bound, multiples_search, LattesSystem};

fn main() -> greenfield::Result<()> {
    let l = LattesSystem::new(int(0), int(-2), int(3), int(5))?;
    for n in 1..=6 {
        let bound = multiples_bound(&l.system, n);
        let r = multiples_search(&l.system, &l.orbit(bound), n)?;
        let det = format_rational(&r.det);
        let shown = if det.len() > 40 { format!("{}... ({} chars)", &det[..40], det.len()) } else { det };
        println!("n = {n}: bound {bound}, k = {:?}, det = {shown}", r.indices);
    }
    Ok(())
}

//! The adelic ledger of a rational number: every place's log-absolute value,
//! summing to zero.

use greenfield::arith::parse_rational;
use greenfield::pf::{abs_log, support};

fn main() -> greenfield::Result<()> {
    let x = parse_rational("-360/77")?;
    let mut total = 0.0;
    for v in support(&x)? {
        let l = abs_log(&v, &x)?;
        println!("{v:>6}  {:<16} = {:+.12}", l.render(), l.value());
        total += l.value();
    }
    println!("sum over places = {total:+.3e}");
    Ok(())
}

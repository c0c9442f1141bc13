//! Exact Macaulay resultants and the scaling law `Res(λF) = λ^((N+1)d^N) Res(F)`.

use greenfield::arith::{format_rational, rat};
use greenfield::homopoly::PolyMap;
use greenfield::macaulay::{macaulay_resultant, resultant_weight};

fn main() -> greenfield::Result<()> {
    let maps: [&[&str]; 4] = [
        &["x^2", "y^2"],
        &["2*x^2", "y^2"],
        &["x^2", "y^2", "z^2"],
        &["x^2 + y*z", "y^2 - x*z", "z^2 + 2*x*y"],
    ];
    for forms in maps {
        let f = PolyMap::parse(forms)?;
        let lambda = rat(3, 2);
        let r = macaulay_resultant(&f)?;
        let scaled = macaulay_resultant(&f.scale(&lambda))?;
        println!(
            "Res{forms:?} = {}; Res(3/2 F) = {} (weight {})",
            format_rational(&r),
            format_rational(&scaled),
            resultant_weight(&f)
        );
    }
    Ok(())
}

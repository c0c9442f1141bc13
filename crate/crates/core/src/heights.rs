//! Weil and canonical heights over `ℚ`, assembled place by place.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ln_abs_rational, ord_rat, rational_primes};
use crate::dynsys::{DynSystem, ReductionKind};
use crate::error::{Error, Result};
use crate::homopoly::ProjPoint;
use crate::pf::{LogMag, Place};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightValue {
    pub value: f64,
    pub error: f64,
    /// Exact sum of the local terms.
    pub total: LogMag,
    pub local_profile: BTreeMap<Place, LogMag>,
}

fn exact_coords(point: &ProjPoint) -> Result<&[BigRational]> {
    let c = point
        .as_exact()
        .ok_or_else(|| Error::Invalid("heights need a rational lift".into()))?;
    if c.iter().all(Zero::is_zero) {
        return Err(Error::Domain("zero lift".into()));
    }
    Ok(c)
}

fn coordinate_primes(coords: &[BigRational]) -> BTreeSet<BigUint> {
    coords
        .iter()
        .filter(|x| !x.is_zero())
        .flat_map(|x| rational_primes(x).into_keys())
        .collect()
}

fn assemble(profile: BTreeMap<Place, LogMag>, tail: f64) -> HeightValue {
    let total: LogMag = profile.values().cloned().sum();
    HeightValue {
        value: total.value(),
        error: total.value_err() + tail,
        total,
        local_profile: profile,
    }
}

/// `Σ_v log max_i |x_i|_v`.
pub fn weil_height(point: &ProjPoint) -> Result<HeightValue> {
    let coords = exact_coords(point)?;
    let mut profile = BTreeMap::new();
    let m = coords.iter().map(Signed::abs).max().expect("nonempty lift");
    let (l, e) = ln_abs_rational(&m);
    profile.insert(Place::Archimedean, LogMag::real(l, e));
    for p in coordinate_primes(coords) {
        let o = coords
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| ord_rat(x, &p))
            .min()
            .expect("nonzero lift");
        if o != 0 {
            profile.insert(
                Place::Prime(p.clone()),
                LogMag::log_prime(p, BigRational::from_integer((-o).into())),
            );
        }
    }
    Ok(assemble(profile, 0.0))
}

/// Places where the local escape rate of this lift can be nonzero.
pub fn contributing_places(system: &DynSystem, point: &ProjPoint) -> Result<Vec<Place>> {
    let coords = exact_coords(point)?;
    let mut ps: BTreeSet<BigUint> = coordinate_primes(coords);
    ps.extend(system.candidate_primes());
    let mut out = vec![Place::Archimedean];
    out.extend(ps.into_iter().map(Place::Prime));
    Ok(out)
}

/// Per-place escape rates of the given lift; their sum is independent of
/// the lift.
pub fn local_height_profile(system: &DynSystem, point: &ProjPoint, tol: f64) -> Result<HeightValue> {
    let places = contributing_places(system, point)?;
    // Exact places take no share of the tolerance.
    let inexact = places
        .iter()
        .filter(|v| match v {
            Place::Archimedean => true,
            Place::Prime(_) => system
                .reduction_type(v)
                .map(|r| r.kind == ReductionKind::Bad)
                .unwrap_or(true),
        })
        .count()
        .max(1);
    let share = tol / inexact as f64;
    let terms: Vec<(Place, LogMag, f64)> = places
        .par_iter()
        .map(|v| {
            let h = system.escape_rate(v, point, share)?;
            Ok((v.clone(), h.value, h.tail))
        })
        .collect::<Result<_>>()?;
    let tail = terms.iter().map(|t| t.2).sum();
    let profile = terms
        .into_iter()
        .filter(|(v, m, _)| matches!(v, Place::Archimedean) || !m.is_exact_zero())
        .map(|(v, m, _)| (v, m))
        .collect();
    Ok(assemble(profile, tail))
}

/// `ĥ_f(P) = Σ_v Ĥ_{F,v}(P̃)`.
pub fn canonical_height(system: &DynSystem, point: &ProjPoint, tol: f64) -> Result<HeightValue> {
    local_height_profile(system, point, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::homopoly::PolyMap;

    fn pt(v: &[BigRational]) -> ProjPoint {
        ProjPoint::exact(v.to_vec()).unwrap()
    }

    #[test]
    fn weil_examples() {
        assert!((weil_height(&pt(&[int(2), int(1)])).unwrap().value - 2f64.ln()).abs() < 1e-15);
        let h = weil_height(&pt(&[rat(2, 3), int(1)])).unwrap();
        assert!((h.value - 3f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height(&pt(&[int(1), int(1)])).unwrap().value, 0.0);
    }

    #[test]
    fn canonical_examples() {
        let sq = DynSystem::new(PolyMap::parse(&["x^2", "y^2"]).unwrap(), None).unwrap();
        let h = canonical_height(&sq, &pt(&[int(2), int(1)]), 1e-12).unwrap();
        assert!((h.value - 2f64.ln()).abs() <= 1e-12);
        let cheb = DynSystem::new(PolyMap::parse(&["x^2 - 2*y^2", "y^2"]).unwrap(), None).unwrap();
        let h = canonical_height(&cheb, &pt(&[int(2), int(1)]), 1e-9).unwrap();
        assert!(h.value.abs() <= 1e-9);
        let h = canonical_height(&cheb, &pt(&[int(3), int(1)]), 1e-9).unwrap();
        assert!((h.value - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() <= 1e-9);
    }

    #[test]
    fn profile_shifts_with_the_lift() {
        let sq = DynSystem::new(PolyMap::parse(&["x^2", "y^2"]).unwrap(), None).unwrap();
        let a = local_height_profile(&sq, &pt(&[int(2), int(1)]), 1e-12).unwrap();
        assert_eq!(a.local_profile.len(), 1);
        let b = local_height_profile(&sq, &pt(&[int(4), int(2)]), 1e-12).unwrap();
        assert_eq!(
            b.local_profile[&Place::p(2)],
            LogMag::log_prime(2u32.into(), int(-1))
        );
        assert!((b.local_profile[&Place::Archimedean].value() - 4f64.ln()).abs() < 1e-15);
        assert!((a.value - b.value).abs() < 1e-15);
    }
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use greenfield::arith::{int, rat};
use greenfield::basis::{monomial_basis, BasisFamily, GenElement};
use greenfield::config::SystemConfig;
use greenfield::dynsys::{DynSystem, ReductionKind};
use greenfield::experiments::{Curve, CurvePoint};
use greenfield::green::{eval_det_log, green_value};
use greenfield::homopoly::{HomoForm, Monomial, PolyMap, ProjPoint};
use greenfield::macaulay::{macaulay_resultant, RConvention};
use greenfield::pf::{abs_log, log_expansion, product_formula_sum, LogAbs, Place};
use greenfield::upoly::{factor, UPoly};

fn binary(d: u32, c: &[i64]) -> HomoForm {
    let terms = c
        .iter()
        .enumerate()
        .map(|(i, &a)| (Monomial(vec![d - i as u32, i as u32]), int(a)));
    HomoForm::from_terms(2, d, terms.collect::<Vec<_>>()).unwrap()
}

fn lift3(f: &HomoForm) -> HomoForm {
    let terms = f.terms().map(|(m, c)| (Monomial(vec![m.0[0], m.0[1], 0]), c.clone()));
    HomoForm::from_terms(3, f.degree(), terms.collect::<Vec<_>>()).unwrap()
}

/// Sylvester determinant by plain Gaussian elimination over `ℚ`.
fn sylvester(a: &[i64], b: &[i64]) -> BigRational {
    let d = a.len() - 1;
    let n = 2 * d;
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for r in 0..d {
        for (i, &x) in a.iter().enumerate() {
            m[r][r + i] = int(x);
        }
        for (i, &x) in b.iter().enumerate() {
            m[d + r][r + i] = int(x);
        }
    }
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= m[col][col].clone();
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for k in col..n {
                let t = &f * &m[col][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

fn coeffs(d: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, d + 1)
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (1i64..2000, 1i64..2000, any::<bool>()).prop_map(|(n, d, s)| rat(if s { n } else { -n }, d))
}

fn point() -> impl Strategy<Value = ProjPoint> {
    (-30i64..=30, 1i64..=30, -30i64..=30, 1i64..=30)
        .prop_filter("nonzero", |(a, _, c, _)| *a != 0 || *c != 0)
        .prop_map(|(a, b, c, d)| ProjPoint::exact(vec![rat(a, b), rat(c, d)]).unwrap())
}

fn power_map() -> DynSystem {
    DynSystem::new(PolyMap::parse(&["x^2", "y^2"]).unwrap(), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_formula_is_exact(x in nonzero_rational()) {
        let s = product_formula_sum(&x).unwrap();
        let want = log_expansion(&x).unwrap().scale(&int(-1));
        prop_assert_eq!(s.padic(), want.padic());
        prop_assert!(s.value().abs() <= 1e-12);
    }

    #[test]
    fn forms_are_homogeneous(c in coeffs(3), x in point(), l in nonzero_rational()) {
        let f = binary(3, &c);
        let v = x.as_exact().unwrap();
        let scaled: Vec<BigRational> = v.iter().map(|t| t * &l).collect();
        prop_assert_eq!(
            f.evaluate(&scaled).unwrap(),
            f.evaluate(v).unwrap() * num_traits::pow(l, 3)
        );
    }

    #[test]
    fn binary_resultant_matches_sylvester(d in 1usize..=3, a in coeffs(3), b in coeffs(3)) {
        let (a, b) = (&a[..=d], &b[..=d]);
        let map = PolyMap::new(vec![binary(d as u32, a), binary(d as u32, b)]).unwrap();
        prop_assert_eq!(macaulay_resultant(&map).unwrap(), sylvester(a, b));
    }

    #[test]
    fn resultant_vanishes_iff_common_factor(a in coeffs(2), b in coeffs(2)) {
        let map = PolyMap::new(vec![binary(2, &a), binary(2, &b)]).unwrap();
        let r = macaulay_resultant(&map).unwrap();
        // Dehomogenise at y = 1; a common root at infinity shows as both
        // leading coefficients vanishing.
        let pa = UPoly::from_i64(&[a[2], a[1], a[0]]);
        let pb = UPoly::from_i64(&[b[2], b[1], b[0]]);
        let common = if pa.is_zero() || pb.is_zero() {
            true
        } else {
            pa.gcd(&pb).degree() > 0 || (a[0] == 0 && b[0] == 0)
        };
        prop_assert_eq!(r.is_zero(), common);
    }

    #[test]
    fn resultant_with_power_of_last_variable(d in 1usize..=2, a in coeffs(2), b in coeffs(2)) {
        let (a, b) = (&a[..=d], &b[..=d]);
        let f0 = binary(d as u32, a);
        let f1 = binary(d as u32, b);
        let mut z = vec![0; 3];
        z[2] = d as u32;
        let zd = HomoForm::monomial(Monomial(z), BigRational::one());
        let big = PolyMap::new(vec![lift3(&f0), lift3(&f1), zd]).unwrap();
        let small = PolyMap::new(vec![f0, f1]).unwrap();
        prop_assert_eq!(
            macaulay_resultant(&big).unwrap(),
            num_traits::pow(macaulay_resultant(&small).unwrap(), d)
        );
    }

    #[test]
    fn resultant_scaling_law(a in coeffs(2), b in coeffs(2), l in nonzero_rational()) {
        let map = PolyMap::new(vec![binary(2, &a), binary(2, &b)]).unwrap();
        prop_assert_eq!(
            macaulay_resultant(&map.scale(&l)).unwrap(),
            macaulay_resultant(&map).unwrap() * num_traits::pow(l, 4)
        );
    }

    #[test]
    fn escape_rate_lift_scaling(x in point(), l in nonzero_rational()) {
        let s = DynSystem::new(PolyMap::parse(&["x^2 - 3/4*y^2", "2*y^2"]).unwrap(), None).unwrap();
        let y = x.scale_exact(&l).unwrap();
        for v in [Place::p(2), Place::p(3), Place::p(5), Place::Archimedean] {
            let a = s.escape_rate(&v, &x, 1e-11).unwrap();
            let b = s.escape_rate(&v, &y, 1e-11).unwrap();
            let shift = abs_log(&v, &l).unwrap();
            if a.value.is_exact() && b.value.is_exact() {
                prop_assert_eq!(b.value.clone(), a.value.clone() + shift);
            } else {
                prop_assert!((b.approx() - a.approx() - shift.value()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn functional_equation_exact_at_good_places(x in point()) {
        let s = DynSystem::new(PolyMap::parse(&["x^2 - 2*y^2", "y^2"]).unwrap(), None).unwrap();
        let fx = ProjPoint::exact(s.map().evaluate(x.as_exact().unwrap()).unwrap()).unwrap();
        for p in [2u64, 3, 7] {
            let v = Place::p(p);
            prop_assert_eq!(s.reduction_type(&v).unwrap().kind, ReductionKind::Good);
            let a = s.escape_rate(&v, &fx, 1e-12).unwrap().value;
            let b = s.escape_rate(&v, &x, 1e-12).unwrap().value;
            prop_assert_eq!(a, b.scale(&int(2)));
        }
    }

    #[test]
    fn map_scaling_shifts_escape_rate(x in point(), l in nonzero_rational()) {
        // Ĥ_{λF} = Ĥ_F + log|λ|/(d−1).
        let f = PolyMap::parse(&["x^2 + 1/2*y^2", "y^2"]).unwrap();
        let s = DynSystem::new(f.clone(), None).unwrap();
        let t = DynSystem::new(f.scale(&l), None).unwrap();
        for v in [Place::p(2), Place::p(3), Place::Archimedean] {
            let a = s.escape_rate(&v, &x, 1e-11).unwrap().approx();
            let b = t.escape_rate(&v, &x, 1e-11).unwrap().approx();
            prop_assert!((b - a - abs_log(&v, &l).unwrap().value()).abs() <= 1e-9);
        }
    }

    #[test]
    fn factorisation_reconstructs(roots in prop::collection::vec(-6i64..=6, 1..5), extra in coeffs(2), k in 1i64..4) {
        let mut f = UPoly::from_i64(&[k]);
        for r in roots {
            f = f.mul(&UPoly::from_i64(&[-r, 1]));
        }
        let q = UPoly::from_i64(&extra);
        if !q.is_zero() {
            f = f.mul(&q);
        }
        let (unit, parts) = factor(&f).unwrap();
        let mut g = UPoly::new(vec![unit]);
        for (h, m) in &parts {
            for _ in 0..*m {
                g = g.mul(h);
            }
        }
        prop_assert_eq!(g, f);
    }

    #[test]
    fn basis_change_is_local_and_global(pts in prop::collection::vec(point(), 3), m in prop::collection::vec(-4i64..=4, 9)) {
        let b = monomial_basis(1, 2);
        let mat: Vec<Vec<BigRational>> = m.chunks(3).map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let det_m = greenfield::linalg::det_rational(&mat).unwrap();
        prop_assume!(!det_m.is_zero());
        let forms: Vec<HomoForm> = b.forms().cloned().collect();
        let changed: Vec<HomoForm> = mat
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&forms)
                    .fold(HomoForm::zero(2, 2), |acc, (c, f)| acc.add(&f.scale(c)).unwrap())
            })
            .collect();
        let b2 = BasisFamily {
            elements: b
                .elements
                .iter()
                .zip(changed)
                .map(|(e, f)| GenElement { provenance: e.provenance.clone(), expanded: f })
                .collect(),
            ..b.clone()
        };
        for v in [Place::p(2), Place::p(3), Place::p(5)] {
            let x = eval_det_log(&b, &pts, &v).unwrap().value;
            let y = eval_det_log(&b2, &pts, &v).unwrap().value;
            match (x, y) {
                (LogAbs::Finite(x), LogAbs::Finite(y)) => prop_assert_eq!(y, x + abs_log(&v, &det_m).unwrap()),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn green_value_ignores_lift_scaling(pts in prop::collection::vec(point(), 3), l in nonzero_rational(), conv in any::<bool>()) {
        let conv = if conv { RConvention::Classical } else { RConvention::Invariant };
        let s = DynSystem::new(PolyMap::parse(&["x^2 + 1/2*y^2", "y^2"]).unwrap(), None)
            .unwrap()
            .with_convention(conv);
        let b = monomial_basis(1, 2);
        let mut scaled = pts.clone();
        scaled[1] = scaled[1].scale_exact(&l).unwrap();
        for v in [Place::p(2), Place::p(3), Place::Archimedean] {
            let a = green_value(&s, &b, &pts, &v, 1e-11).unwrap();
            let c = green_value(&s, &b, &scaled, &v, 1e-11).unwrap();
            if a.value().is_finite() {
                prop_assert!((a.value() - c.value()).abs() <= 2e-9, "{} vs {}", a.value(), c.value());
            } else {
                prop_assert!(!c.value().is_finite());
            }
        }
    }

    #[test]
    fn group_law_is_associative(i in 1u64..6, j in 1u64..6, k in 1u64..6) {
        let e = Curve::new(int(0), int(-2)).unwrap();
        let p = CurvePoint::Affine(int(3), int(5));
        let (a, b, c) = (e.mul(i, &p), e.mul(j, &p), e.mul(k, &p));
        prop_assert_eq!(e.add(&e.add(&a, &b), &c), e.add(&a, &e.add(&b, &c)));
        prop_assert_eq!(e.add(&a, &e.neg(&a)), CurvePoint::Infinity);
        prop_assert_eq!(e.mul(i + j, &p), e.add(&a, &b));
    }

    #[test]
    fn config_round_trips(a in coeffs(2), b in coeffs(2)) {
        let map = PolyMap::new(vec![binary(2, &a), binary(2, &b)]);
        prop_assume!(map.is_ok());
        let Ok(s) = DynSystem::new(map.unwrap(), None) else {
            return Ok(());
        };
        let cfg = SystemConfig::from_system(&s);
        let back = SystemConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        let rebuilt = back.build().unwrap();
        prop_assert_eq!(rebuilt.map(), s.map());
    }
}

#[test]
fn sylvester_oracle_sanity() {
    assert_eq!(sylvester(&[1, 0, 0], &[0, 0, 1]), int(1));
    assert_eq!(sylvester(&[1, 0, -1], &[1, -1, 0]), BigRational::from_integer(BigInt::zero()));
    assert_eq!(power_map().resultant(), &int(1));
}

//! Macaulay matrices, the multivariate resultant and elimination certificates.
//!
//! For `N+1` forms of degree `d` the resultant is `D/D′`: `D` is the
//! determinant of the square Macaulay matrix at degree `e = (N+1)(d−1)+1`,
//! whose row for a monomial `α` is `(x^α / x_i^d)·F_i` with `i` the first
//! index such that `x_i^d | x^α`, and `D′` is the minor on the monomials
//! divisible by at least two of the `x_i^d`. When `N = 1` no monomial is
//! doubly divisible and `D` is the Sylvester determinant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::binomial;
use crate::error::{Error, Result};
use crate::homopoly::{monomials_of_degree, HomoForm, Monomial, PolyMap};
use crate::linalg::{det_rational, solve_minimal};
use crate::pf::{abs_log, LogMag, Place};

/// Normalisation of the resultant term in the Green's function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RConvention {
    /// `+ log|Res|_v / (d(d−1)(N+1))`. Also read as `"paper"`.
    #[serde(alias = "paper")]
    Classical,
    /// `− log|Res|_v / (d^N(d−1)(N+1))`, invariant under `F ↦ λF`.
    #[default]
    Invariant,
}

impl std::str::FromStr for RConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" | "paper" => Ok(RConvention::Classical),
            "invariant" => Ok(RConvention::Invariant),
            other => Err(Error::parse(format!("unknown r convention {other:?}"))),
        }
    }
}

/// Rows `(i, μ)` holding the coefficients of `μ·F_i` in the degree-`e`
/// monomials.
#[derive(Clone, Debug)]
pub struct MacaulayMatrix {
    pub e: u32,
    pub rows: Vec<(usize, Monomial)>,
    pub cols: Vec<Monomial>,
    pub entries: Vec<Vec<BigRational>>,
}

impl MacaulayMatrix {
    /// Every `(i, μ)` with `deg μ = e − d`, ordered by `i` then graded-lex `μ`.
    pub fn full(map: &PolyMap, e: u32) -> Result<MacaulayMatrix> {
        let d = map.degree();
        if e < d {
            return Err(Error::BelowThreshold {
                degree: e as u64,
                threshold: d as u64,
            });
        }
        let nv = map.nvars();
        let cols = monomials_of_degree(nv, e);
        let mus = monomials_of_degree(nv, e - d);
        let index = column_index(&cols);
        let mut rows = Vec::new();
        let mut entries = Vec::new();
        for (i, f) in map.forms().iter().enumerate() {
            for mu in &mus {
                rows.push((i, mu.clone()));
                entries.push(shifted_row(f, mu, &index, cols.len()));
            }
        }
        Ok(MacaulayMatrix {
            e,
            rows,
            cols,
            entries,
        })
    }

    /// The square matrix used for `D`.
    pub fn square(map: &PolyMap) -> MacaulayMatrix {
        let d = map.degree();
        let nv = map.nvars();
        let e = macaulay_degree(map);
        let cols = monomials_of_degree(nv, e);
        let index = column_index(&cols);
        let mut rows = Vec::with_capacity(cols.len());
        let mut entries = Vec::with_capacity(cols.len());
        for alpha in &cols {
            let i = alpha.0.iter().position(|&a| a >= d).expect("degree e forces some α_i ≥ d");
            let mut mu = alpha.clone();
            mu.0[i] -= d;
            entries.push(shifted_row(&map.forms()[i], &mu, &index, cols.len()));
            rows.push((i, mu));
        }
        MacaulayMatrix {
            e,
            rows,
            cols,
            entries,
        }
    }

    /// Indices of monomials divisible by `x_i^d` for at least two `i`.
    fn non_reduced(&self, d: u32) -> Vec<usize> {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, m)| m.0.iter().filter(|&&a| a >= d).count() >= 2)
            .map(|(k, _)| k)
            .collect()
    }
}

fn column_index(cols: &[Monomial]) -> std::collections::HashMap<Monomial, usize> {
    cols.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect()
}

fn shifted_row(
    f: &HomoForm,
    mu: &Monomial,
    index: &std::collections::HashMap<Monomial, usize>,
    width: usize,
) -> Vec<BigRational> {
    let mut row = vec![BigRational::zero(); width];
    for (m, c) in f.terms() {
        row[index[&m.mul(mu)]] = c.clone();
    }
    row
}

/// `e = (N+1)(d−1) + 1`.
pub fn macaulay_degree(map: &PolyMap) -> u32 {
    map.nvars() as u32 * (map.degree() - 1) + 1
}

/// `(N+1)·d^N`, the total degree of the resultant in the coefficients.
pub fn resultant_weight(map: &PolyMap) -> u64 {
    map.nvars() as u64 * (map.degree() as u64).pow(map.dim() as u32)
}

fn quotient(map: &PolyMap) -> Result<Option<BigRational>> {
    let m = MacaulayMatrix::square(map);
    let keep = m.non_reduced(map.degree());
    let minor: Vec<Vec<BigRational>> = keep
        .iter()
        .map(|&r| keep.iter().map(|&c| m.entries[r][c].clone()).collect())
        .collect();
    let dprime = det_rational(&minor)?;
    if dprime.is_zero() {
        return Ok(None);
    }
    let d = det_rational(&m.entries)?;
    Ok(Some(d / dprime))
}

fn linear_map(a: &[Vec<i64>]) -> PolyMap {
    let n = a.len();
    let forms = a
        .iter()
        .map(|row| {
            HomoForm::from_terms(
                n,
                1,
                row.iter().enumerate().map(|(j, &c)| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    (Monomial(e), BigRational::from_integer(c.into()))
                }),
            )
            .expect("well-formed linear form")
        })
        .collect();
    PolyMap::new_rect(forms).expect("nonzero linear map")
}

fn int_det(a: &[Vec<i64>]) -> BigRational {
    let q: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    det_rational(&q).expect("square")
}

/// The Macaulay resultant of the coordinate forms.
pub fn macaulay_resultant(map: &PolyMap) -> Result<BigRational> {
    if map.nvars() != map.nvars_out() {
        return Err(Error::DimensionMismatch {
            expected: map.nvars(),
            found: map.nvars_out(),
        });
    }
    if let Some(r) = quotient(map)? {
        return Ok(r);
    }
    // D′ vanished: Res(B·(F∘A)) = det(B)^{d^N} det(A)^{d^{N+1}} Res(F).
    let n = map.nvars();
    let d = map.degree() as usize;
    let dn = d.pow(map.dim() as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let mut random = || -> Vec<Vec<i64>> {
            loop {
                let a: Vec<Vec<i64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect())
                    .collect();
                if !int_det(&a).is_zero() {
                    return a;
                }
            }
        };
        let a = random();
        let b = random();
        let fa = PolyMap::compose(map, &linear_map(&a))?;
        let bfa = PolyMap::compose(&linear_map(&b), &fa)?;
        if let Some(r) = quotient(&bfa)? {
            let scale = num_traits::pow::pow(int_det(&b), dn)
                * num_traits::pow::pow(int_det(&a), dn * d);
            return Ok(r / scale);
        }
    }
    interpolated_resultant(map)
}

/// Last resort: `Res(F + t·(x_0^d, …, x_N^d))` is a polynomial in `t` of
/// degree `(N+1)d^N`; interpolate it from integer `t` where `D′ ≠ 0`.
fn interpolated_resultant(map: &PolyMap) -> Result<BigRational> {
    let n = map.nvars();
    let d = map.degree();
    let deg = resultant_weight(map) as usize;
    let mut ts: Vec<BigRational> = Vec::new();
    let mut vals: Vec<BigRational> = Vec::new();
    let mut t = 1i64;
    while ts.len() <= deg {
        let tq = BigRational::from_integer(BigInt::from(t));
        let forms = map
            .forms()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut e = vec![0; n];
                e[i] = d;
                f.add(&HomoForm::monomial(Monomial(e), tq.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(r) = quotient(&PolyMap::new(forms)?)? {
            ts.push(tq);
            vals.push(r);
        }
        t += 1;
        if t > 10 * deg as i64 + 100 {
            return Err(Error::Internal("resultant interpolation found too few nodes".into()));
        }
    }
    // Lagrange at t = 0.
    let mut acc = BigRational::zero();
    for j in 0..ts.len() {
        let mut w = vals[j].clone();
        for k in 0..ts.len() {
            if k != j {
                w *= &ts[k] / (&ts[k] - &ts[j]);
            }
        }
        acc += w;
    }
    Ok(acc)
}

/// The normalised resultant term `r(F)` at a place.
pub fn r_normalized(map: &PolyMap, place: &Place, convention: RConvention) -> Result<LogMag> {
    let res = macaulay_resultant(map)?;
    r_from_resultant(map, &res, place, convention)
}

/// [`r_normalized`] with a precomputed resultant.
pub fn r_from_resultant(
    map: &PolyMap,
    res: &BigRational,
    place: &Place,
    convention: RConvention,
) -> Result<LogMag> {
    if res.is_zero() {
        return Err(Error::NotAMorphism);
    }
    let d = map.degree() as i64;
    let n1 = map.nvars() as i64;
    let l = abs_log(place, res)?;
    Ok(match convention {
        RConvention::Classical => l.div_int(d * (d - 1) * n1),
        RConvention::Invariant => {
            let dn = d.pow(map.dim() as u32);
            -l.div_int(dn * (d - 1) * n1)
        }
    })
}

/// Certificates `φ_k = Σ_i η_{k,i}·F_i` at any degree `≥ d`, all sharing one
/// elimination. `None` marks a form outside the ideal in that degree.
pub(crate) fn certificates_at(
    map: &PolyMap,
    phis: &[HomoForm],
) -> Result<Vec<Option<Vec<HomoForm>>>> {
    let Some(first) = phis.first() else {
        return Ok(Vec::new());
    };
    let k = first.degree();
    let d = map.degree();
    let m = MacaulayMatrix::full(map, k)?;
    // Unknowns are the rows of M; equations are its columns.
    let a: Vec<Vec<BigRational>> = (0..m.cols.len())
        .map(|c| m.entries.iter().map(|row| row[c].clone()).collect())
        .collect();
    let rhs: Vec<Vec<BigRational>> = phis
        .iter()
        .map(|p| {
            if p.degree() != k || p.nvars() != map.nvars() {
                Err(Error::DegreeMismatch("certificate targets must share a degree".into()))
            } else {
                Ok(p.dense(&m.cols))
            }
        })
        .collect::<Result<_>>()?;
    let sols = solve_minimal(&a, &rhs)?;
    let nv = map.nvars();
    Ok(sols
        .into_iter()
        .map(|s| {
            s.map(|x| {
                (0..map.nvars_out())
                    .map(|i| {
                        let terms = m
                            .rows
                            .iter()
                            .zip(&x)
                            .filter(|((ri, _), c)| *ri == i && !c.is_zero())
                            .map(|((_, mu), c)| (mu.clone(), c.clone()));
                        HomoForm::from_terms(nv, k - d, terms).expect("row monomials have degree k−d")
                    })
                    .collect()
            })
        })
        .collect())
}

/// Forms `η_i` of degree `deg φ − d` with `φ = Σ η_i·F_i`; the minimal
/// solution in `(i, graded-lex μ)` order.
pub fn elimination_certificate(map: &PolyMap, phi: &HomoForm) -> Result<Vec<HomoForm>> {
    let threshold = map.nvars() as u32 * map.degree();
    if phi.degree() < threshold {
        return Err(Error::BelowThreshold {
            degree: phi.degree() as u64,
            threshold: threshold as u64,
        });
    }
    if macaulay_resultant(map)?.is_zero() {
        return Err(Error::NotAMorphism);
    }
    certificates_at(map, std::slice::from_ref(phi))?
        .pop()
        .flatten()
        .ok_or_else(|| Error::Internal("no certificate above the Macaulay threshold".into()))
}

/// Re-expands `Σ η_i·F_i`.
pub fn expand_certificate(map: &PolyMap, etas: &[HomoForm]) -> Result<HomoForm> {
    let mut acc: Option<HomoForm> = None;
    for (eta, f) in etas.iter().zip(map.forms()) {
        let t = eta.mul(f)?;
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    acc.ok_or_else(|| Error::Invalid("empty certificate".into()))
}

/// Number of columns of the square Macaulay matrix, `binom(e+N, N)`.
pub fn macaulay_size(map: &PolyMap) -> usize {
    binomial(macaulay_degree(map) as usize + map.dim(), map.dim())
}

/// `λ^{(N+1)d^N}` for the scaling law.
pub fn scaling_factor(map: &PolyMap, lambda: &BigRational) -> BigRational {
    num_traits::pow::pow(lambda.clone(), resultant_weight(map) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn map(s: &[&str]) -> PolyMap {
        PolyMap::parse(s).unwrap()
    }

    #[test]
    fn resultant_examples() {
        assert_eq!(macaulay_resultant(&map(&["x^2", "y^2"])).unwrap(), int(1));
        assert_eq!(macaulay_resultant(&map(&["2*x^2", "y^2"])).unwrap(), int(4));
        assert_eq!(
            macaulay_resultant(&map(&["x^2 + 7/3*y^2", "y^2"])).unwrap(),
            int(1)
        );
        assert_eq!(
            macaulay_resultant(&map(&["x^2", "y^2", "z^2"])).unwrap(),
            int(1)
        );
        assert_eq!(macaulay_resultant(&map(&["x^2", "x*y"])).unwrap(), int(0));
    }

    #[test]
    fn r_conventions() {
        let f = map(&["2*x^2", "y^2"]);
        let l2 = 2f64.ln();
        let p = r_normalized(&f, &Place::Archimedean, RConvention::Classical).unwrap();
        assert!((p.value() - 0.5 * l2).abs() < 1e-15);
        let i = r_normalized(&f, &Place::Archimedean, RConvention::Invariant).unwrap();
        assert!((i.value() + 0.5 * l2).abs() < 1e-15);
        let sq = map(&["x^2", "y^2"]);
        assert!(r_normalized(&sq, &Place::p(5), RConvention::Classical)
            .unwrap()
            .is_exact_zero());
        assert_eq!(
            r_normalized(&map(&["x^2", "x*y"]), &Place::Archimedean, RConvention::Classical),
            Err(Error::NotAMorphism)
        );
    }

    #[test]
    fn certificate_examples() {
        let f = map(&["x^2", "y^2"]);
        let phi = HomoForm::parse("x^4", Some(2), None).unwrap();
        let c = elimination_certificate(&f, &phi).unwrap();
        assert_eq!(c[0], HomoForm::parse("x^2", Some(2), None).unwrap());
        assert!(c[1].is_zero());
        let phi = HomoForm::parse("x^2*y^2", Some(2), None).unwrap();
        let c = elimination_certificate(&f, &phi).unwrap();
        assert_eq!(c[0], HomoForm::parse("y^2", Some(2), None).unwrap());
        assert!(c[1].is_zero());
        let cheb = map(&["x^2 - 2*y^2", "y^2"]);
        let phi = HomoForm::parse("x^3*y", Some(2), None).unwrap();
        let c = elimination_certificate(&cheb, &phi).unwrap();
        assert_eq!(expand_certificate(&cheb, &c).unwrap(), phi);
        let low = HomoForm::parse("x^3", Some(2), None).unwrap();
        assert!(matches!(
            elimination_certificate(&f, &low),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn fallback_paths_agree() {
        // x²z² has row z²·(xy + z²), which misses every doubly divisible
        // column, so D′ = 0 and the coordinate change is needed.
        let f = map(&["x*y + z^2", "y^2 + x*z", "x^2 + y*z"]);
        assert!(quotient(&f).unwrap().is_none());
        let direct = macaulay_resultant(&f).unwrap();
        assert!(!direct.is_zero());
        assert_eq!(interpolated_resultant(&f).unwrap(), direct);
        let lam = rat(-2, 3);
        assert_eq!(
            macaulay_resultant(&f.scale(&lam)).unwrap(),
            scaling_factor(&f, &lam) * direct
        );
    }
}

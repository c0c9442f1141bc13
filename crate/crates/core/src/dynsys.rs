//! Polarized dynamical systems on `P^N` (optionally restricted to an invariant
//! hypersurface): escape rates, filled Julia sets and reduction types.
//!
//! Escape rates telescope: with `s_k = log‖F(Q_k)‖ − d·log‖Q_k‖` along the
//! renormalised orbit, `Ĥ(P) = log‖P‖ + Σ_k s_k / d^{k+1}`. Every `s_k` lies in
//! `[−c_lo, c_hi]`, so after `K` steps the remainder lies in an interval of
//! width `(c_lo + c_hi)/(d^K(d−1))`; its midpoint is added and its half-width
//! reported as the tail.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ln_abs_rational, ln_biguint, mod_inverse, ord_int, ord_rat};
use crate::error::{Error, Result};
use crate::homopoly::{HomoForm, Monomial, NumericForm, PolyMap, ProjPoint};
use crate::macaulay::{self, macaulay_degree, resultant_weight, RConvention};
use crate::pf::{LogMag, Place};

/// Outcome of the invariance test `G∘F = Q·G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariance {
    pub invariant: bool,
    /// The quotient `Q` when invariant, otherwise the nonzero remainder.
    pub witness: HomoForm,
}

/// `G∘F` divided by `G`.
pub fn check_invariance(map: &PolyMap, g: &HomoForm) -> Result<Invariance> {
    let gf = g.compose(map)?;
    let (q, r) = gf.divide(g)?;
    Ok(if r.is_zero() {
        Invariance {
            invariant: true,
            witness: q,
        }
    } else {
        Invariance {
            invariant: false,
            witness: r,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionKind {
    Good,
    Bad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub kind: ReductionKind,
    /// The unit-resultant rescaling needs `λ = p^a` with `a ∉ ℤ`.
    pub needs_extension: bool,
    /// `ord_p Res(F)` (0 at the archimedean place).
    pub res_ord: i64,
    /// `min ord_p` over the coefficients of `F`.
    pub coeff_ord: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Undetermined,
}

/// `log‖F(Q)‖ − d·log‖Q‖ ∈ [−c_lo, c_hi]` for all `Q ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub c_lo: f64,
    pub c_hi: f64,
}

impl Growth {
    /// Radius bound for the filled Julia set, `log R = c_lo/(d−1)`.
    pub fn julia_radius_log(&self, d: u32) -> f64 {
        self.c_lo / (d as f64 - 1.0)
    }
}

/// A local escape rate with its telescoping tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRate {
    /// Exact in its p-adic part; the archimedean part carries rounding error.
    pub value: LogMag,
    /// Half-width of the remainder interval after the last step.
    pub tail: f64,
    pub steps: usize,
}

impl EscapeRate {
    pub fn approx(&self) -> f64 {
        self.value.value()
    }

    /// Total error bound.
    pub fn err(&self) -> f64 {
        self.value.value_err() + self.tail
    }
}

const MAX_STEPS: usize = 4000;

/// The pair `(X, f)` with cached derived data.
#[derive(Debug)]
pub struct DynSystem {
    map: PolyMap,
    hypersurface: Option<HomoForm>,
    invariance_quotient: Option<HomoForm>,
    resultant: BigRational,
    convention: RConvention,
    numeric: Vec<NumericForm>,
    certificates: OnceLock<Vec<Vec<HomoForm>>>,
    iterates: Mutex<BTreeMap<u32, Arc<PolyMap>>>,
    growth: Mutex<BTreeMap<Place, Growth>>,
}

impl Clone for DynSystem {
    fn clone(&self) -> Self {
        DynSystem {
            map: self.map.clone(),
            hypersurface: self.hypersurface.clone(),
            invariance_quotient: self.invariance_quotient.clone(),
            resultant: self.resultant.clone(),
            convention: self.convention,
            numeric: self.numeric.clone(),
            certificates: self.certificates.clone(),
            iterates: Mutex::new(self.iterates.lock().unwrap().clone()),
            growth: Mutex::new(self.growth.lock().unwrap().clone()),
        }
    }
}

impl DynSystem {
    /// Requires `d ≥ 2`, `Res(F) ≠ 0` and, with a hypersurface, invariance.
    pub fn new(map: PolyMap, hypersurface: Option<HomoForm>) -> Result<DynSystem> {
        if map.degree() < 2 {
            return Err(Error::Invalid(format!(
                "a dynamical system needs degree at least 2, got {}",
                map.degree()
            )));
        }
        let resultant = macaulay::macaulay_resultant(&map)?;
        if resultant.is_zero() {
            return Err(Error::NotAMorphism);
        }
        let mut invariance_quotient = None;
        if let Some(g) = &hypersurface {
            if g.nvars() != map.nvars() {
                return Err(Error::DimensionMismatch {
                    expected: map.nvars(),
                    found: g.nvars(),
                });
            }
            if g.is_zero() || g.degree() == 0 {
                return Err(Error::Invalid("hypersurface form must be nonconstant".into()));
            }
            let inv = check_invariance(&map, g)?;
            if !inv.invariant {
                return Err(Error::Invalid(format!(
                    "hypersurface is not invariant: remainder {}",
                    inv.witness
                )));
            }
            invariance_quotient = Some(inv.witness);
        }
        let numeric = map.forms().iter().map(NumericForm::new).collect();
        Ok(DynSystem {
            map,
            hypersurface,
            invariance_quotient,
            resultant,
            convention: RConvention::default(),
            numeric,
            certificates: OnceLock::new(),
            iterates: Mutex::new(BTreeMap::new()),
            growth: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn with_convention(mut self, convention: RConvention) -> DynSystem {
        self.convention = convention;
        self
    }

    pub fn map(&self) -> &PolyMap {
        &self.map
    }

    pub fn hypersurface(&self) -> Option<&HomoForm> {
        self.hypersurface.as_ref()
    }

    pub fn invariance_quotient(&self) -> Option<&HomoForm> {
        self.invariance_quotient.as_ref()
    }

    pub fn resultant(&self) -> &BigRational {
        &self.resultant
    }

    pub fn convention(&self) -> RConvention {
        self.convention
    }

    pub fn degree(&self) -> u32 {
        self.map.degree()
    }

    /// Projective dimension `N`.
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn nvars(&self) -> usize {
        self.map.nvars()
    }

    pub fn macaulay_degree(&self) -> u32 {
        macaulay_degree(&self.map)
    }

    /// `r(F)` at a place under the system's convention.
    pub fn r_term(&self, place: &Place) -> Result<LogMag> {
        macaulay::r_from_resultant(&self.map, &self.resultant, place, self.convention)
    }

    /// `F^{(k)}`, memoised.
    pub fn iterate(&self, k: u32) -> Result<Arc<PolyMap>> {
        if k == 0 {
            return Err(Error::Invalid("iterate index must be positive".into()));
        }
        if let Some(m) = self.iterates.lock().unwrap().get(&k) {
            return Ok(m.clone());
        }
        let m = if k == 1 {
            self.map.clone()
        } else {
            let prev = self.iterate(k - 1)?;
            PolyMap::compose(&self.map, &prev)?
        };
        let m = Arc::new(m);
        self.iterates.lock().unwrap().insert(k, m.clone());
        Ok(m)
    }

    /// Certificates `x_j^e = Σ_i η_{j,i} F_i` at the Macaulay degree.
    pub fn certificates(&self) -> Result<&[Vec<HomoForm>]> {
        if let Some(c) = self.certificates.get() {
            return Ok(c);
        }
        let e = self.macaulay_degree();
        let n = self.nvars();
        let targets: Vec<HomoForm> = (0..n)
            .map(|j| {
                let mut ex = vec![0; n];
                ex[j] = e;
                HomoForm::monomial(Monomial(ex), BigRational::one())
            })
            .collect();
        let sols = macaulay::certificates_at(&self.map, &targets)?;
        let certs = sols
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::Internal("x_j^e outside the ideal although Res ≠ 0".into())
            })?;
        let _ = self.certificates.set(certs);
        Ok(self.certificates.get().unwrap())
    }

    /// Primes where the system may have bad reduction: those dividing a
    /// coefficient or the resultant.
    pub fn candidate_primes(&self) -> Vec<BigUint> {
        let mut ps: std::collections::BTreeSet<BigUint> = std::collections::BTreeSet::new();
        for c in self.map.coefficients().chain(std::iter::once(&self.resultant)) {
            ps.extend(crate::arith::rational_primes(c).into_keys());
        }
        ps.into_iter().collect()
    }

    /// Places where escape rates can differ from `log‖·‖`: `∞` and the primes
    /// of bad reduction.
    pub fn bad_places(&self) -> Result<Vec<Place>> {
        let mut out = vec![Place::Archimedean];
        for p in self.candidate_primes() {
            let v = Place::Prime(p);
            if self.reduction_type(&v)?.kind == ReductionKind::Bad {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Good reduction after rescaling `F` by a power of `p`; archimedean
    /// places are bad by convention.
    pub fn reduction_type(&self, place: &Place) -> Result<Reduction> {
        match place {
            Place::Archimedean => Ok(Reduction {
                kind: ReductionKind::Bad,
                needs_extension: false,
                res_ord: 0,
                coeff_ord: 0,
            }),
            Place::Prime(p) => {
                let w = resultant_weight(&self.map) as i64;
                let r = ord_rat(&self.resultant, p);
                let m = self
                    .map
                    .coefficients()
                    .map(|c| ord_rat(c, p))
                    .min()
                    .unwrap_or(0);
                // ord Res ≥ w·m always; equality is good reduction of p^{−m}F.
                let kind = if m * w == r {
                    ReductionKind::Good
                } else {
                    ReductionKind::Bad
                };
                Ok(Reduction {
                    kind,
                    needs_extension: r.rem_euclid(w) != 0,
                    res_ord: r,
                    coeff_ord: m,
                })
            }
        }
    }

    /// Growth constants at a place, cached.
    pub fn growth(&self, place: &Place) -> Result<Growth> {
        if let Some(g) = self.growth.lock().unwrap().get(place) {
            return Ok(*g);
        }
        let certs = self.certificates()?;
        let g = match place {
            Place::Archimedean => {
                let hi = self
                    .map
                    .forms()
                    .iter()
                    .map(HomoForm::coeff_l1)
                    .max()
                    .unwrap_or_else(BigRational::one);
                let lo = certs
                    .iter()
                    .map(|etas| {
                        etas.iter()
                            .map(HomoForm::coeff_l1)
                            .fold(BigRational::zero(), |a, b| a + b)
                    })
                    .max()
                    .unwrap_or_else(BigRational::one);
                let (h, he) = ln_abs_rational(&hi);
                let (l, le) = ln_abs_rational(&lo);
                Growth {
                    c_lo: l + le,
                    c_hi: h + he,
                }
            }
            Place::Prime(p) => {
                let lp = ln_biguint(p);
                let hi = -self
                    .map
                    .coefficients()
                    .map(|c| ord_rat(c, p))
                    .min()
                    .unwrap_or(0);
                let lo = -certs
                    .iter()
                    .flat_map(|etas| etas.iter().flat_map(|f| f.terms().map(|(_, c)| ord_rat(c, p))))
                    .min()
                    .unwrap_or(0);
                Growth {
                    c_lo: lo as f64 * lp,
                    c_hi: hi as f64 * lp,
                }
            }
        };
        self.growth.lock().unwrap().insert(place.clone(), g);
        Ok(g)
    }

    /// `log R` with `𝒦_v ⊆ {log‖P̃‖_v ≤ log R}`: exact at good places, where
    /// `𝒦_v` is the polydisk of log-radius `ord_p Res/((N+1)d^N(d−1))·log p`,
    /// and `c_lo/(d−1)` elsewhere.
    pub fn julia_radius_log(&self, place: &Place) -> Result<f64> {
        let red = self.reduction_type(place)?;
        match place {
            Place::Prime(p) if red.kind == ReductionKind::Good => {
                let w = resultant_weight(&self.map) as f64;
                Ok(red.res_ord as f64 / (w * (self.degree() as f64 - 1.0)) * ln_biguint(p))
            }
            _ => Ok(self.growth(place)?.julia_radius_log(self.degree())),
        }
    }

    /// The local escape rate `Ĥ_{F,v}` of a lift, within `tol`.
    pub fn escape_rate(&self, place: &Place, lift: &ProjPoint, tol: f64) -> Result<EscapeRate> {
        if !(tol > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        if lift.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                found: lift.len(),
            });
        }
        match place {
            Place::Archimedean => self.escape_archimedean(lift, tol),
            Place::Prime(p) => {
                let coords = lift.as_exact().ok_or_else(|| {
                    Error::Invalid("p-adic escape rates need an exact lift".into())
                })?;
                if coords.iter().all(Zero::is_zero) {
                    return Err(Error::Domain("zero lift".into()));
                }
                let red = self.reduction_type(place)?;
                if red.kind == ReductionKind::Good {
                    Ok(self.escape_good(p, coords, &red))
                } else {
                    self.escape_padic(p, coords, tol)
                }
            }
        }
    }

    /// `log‖P‖_p − (ord_p Res / ((N+1)d^N)) · log p / (d−1)`, exact.
    fn escape_good(&self, p: &BigUint, coords: &[BigRational], red: &Reduction) -> EscapeRate {
        let w = resultant_weight(&self.map) as i64;
        let d = self.degree() as i64;
        let o = min_ord(coords, p);
        let q = BigRational::from_integer((-o).into())
            - BigRational::new(red.res_ord.into(), (w * (d - 1)).into());
        EscapeRate {
            value: LogMag::log_prime(p.clone(), q),
            tail: 0.0,
            steps: 0,
        }
    }

    fn escape_padic(&self, p: &BigUint, coords: &[BigRational], tol: f64) -> Result<EscapeRate> {
        let d = self.degree();
        let lp = ln_biguint(p);
        let pi = BigInt::from(p.clone());
        // F' = p^{−m} F is integral with a unit coefficient.
        let m = self
            .map
            .coefficients()
            .map(|c| ord_rat(c, p))
            .min()
            .unwrap_or(0);
        let g = self.growth(&Place::Prime(p.clone()))?;
        // Steps of F' drop ord by at most t_max = c_lo/log p − m.
        let t_max = ((g.c_lo / lp).round() as i64 - m).max(0);
        let half = |k: usize| -> f64 {
            t_max as f64 / 2.0 / ((d as f64).powi(k as i32) * (d as f64 - 1.0)) * lp
        };
        let mut k_needed = 0usize;
        while half(k_needed) >= tol && k_needed < MAX_STEPS {
            k_needed += 1;
        }
        let prec = (k_needed as i64 + 1) * t_max + 2;
        let modulus = num_traits::pow::pow(pi.clone(), prec as usize);
        let scale = BigRational::from_integer(num_traits::pow::pow(pi.clone(), m.unsigned_abs() as usize));
        let scale = if m >= 0 { scale.recip() } else { scale };
        let reduce = |x: &BigRational| -> Result<BigInt> {
            let inv = mod_inverse(x.denom(), &modulus)
                .ok_or_else(|| Error::Internal("non-unit denominator after scaling".into()))?;
            Ok((x.numer() * inv).mod_floor(&modulus))
        };
        let forms: Vec<Vec<(Vec<u32>, BigInt)>> = self
            .map
            .forms()
            .iter()
            .map(|f| {
                f.terms()
                    .map(|(mono, c)| Ok((mono.0.clone(), reduce(&(c * &scale))?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let o = min_ord(coords, p);
        let shift = BigRational::from_integer(num_traits::pow::pow(pi.clone(), o.unsigned_abs() as usize));
        let shift = if o >= 0 { shift.recip() } else { shift };
        let mut q: Vec<BigInt> = coords
            .iter()
            .map(|x| if x.is_zero() { Ok(BigInt::zero()) } else { reduce(&(x * &shift)) })
            .collect::<Result<_>>()?;
        let mut cur_prec = prec;
        let mut acc = BigRational::zero();
        let mut dk = BigInt::one();
        for _ in 0..k_needed {
            dk *= d;
            let cur_mod = num_traits::pow::pow(pi.clone(), cur_prec as usize);
            let y: Vec<BigInt> = forms
                .iter()
                .map(|f| eval_mod(f, &q, &cur_mod))
                .collect();
            let t = y
                .iter()
                .filter(|v| !v.is_zero())
                .map(|v| ord_int(v, p) as i64)
                .min()
                .unwrap_or(cur_prec);
            if t > t_max || t >= cur_prec {
                return Err(Error::Internal(format!(
                    "p-adic precision exhausted (ord {t}, bound {t_max})"
                )));
            }
            acc += BigRational::new(t.into(), dk.clone());
            let div = num_traits::pow::pow(pi.clone(), t as usize);
            cur_prec -= t;
            let next_mod = num_traits::pow::pow(pi.clone(), cur_prec as usize);
            q = y.iter().map(|v| (v / &div).mod_floor(&next_mod)).collect();
        }
        // Ĥ_F = −o − Σ t_k/d^{k+1} − midpoint − m/(d−1), in units of log p.
        let dm1 = BigInt::from(d - 1);
        let mid = BigRational::new(BigInt::from(t_max), &dk * &dm1 * 2);
        let val = BigRational::from_integer((-o).into())
            - acc
            - mid
            - BigRational::new(BigInt::from(m), dm1);
        Ok(EscapeRate {
            value: LogMag::log_prime(p.clone(), val),
            tail: half(k_needed),
            steps: k_needed,
        })
    }

    fn escape_archimedean(&self, lift: &ProjPoint, tol: f64) -> Result<EscapeRate> {
        let d = self.degree() as f64;
        let g = self.growth(&Place::Archimedean)?;
        let width = (g.c_lo + g.c_hi).max(0.0);
        let mid = (g.c_hi - g.c_lo) / 2.0;
        let (log_norm, log_err, mut q) = normalise(lift)?;
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        let mut round = log_err;
        let mut dk = 1.0f64;
        let mut steps = 0;
        while width / 2.0 / (dk * (d - 1.0)) >= tol && steps < MAX_STEPS {
            dk *= d;
            let mut ymax = 0.0f64;
            let mut eval_err = 0.0f64;
            let ys: Vec<Complex64> = self
                .numeric
                .iter()
                .map(|f| {
                    let (v, e) = f.evaluate(&q);
                    eval_err = eval_err.max(e);
                    ymax = ymax.max(v.norm());
                    v
                })
                .collect();
            if ymax == 0.0 || !ymax.is_finite() {
                return Err(Error::Internal("orbit left the representable range".into()));
            }
            let s = ymax.ln();
            let term = s / dk;
            let t = acc + term;
            comp += if acc.abs() >= term.abs() {
                (acc - t) + term
            } else {
                (term - t) + acc
            };
            acc = t;
            round += (eval_err / ymax + 4.0 * f64::EPSILON) / dk + f64::EPSILON * acc.abs();
            q = ys.into_iter().map(|v| v / ymax).collect();
            steps += 1;
        }
        let tail_mid = mid / (dk * (d - 1.0));
        let value = log_norm + (acc + comp) + tail_mid;
        let tail = width / 2.0 / (dk * (d - 1.0));
        Ok(EscapeRate {
            value: LogMag::real(value, round + f64::EPSILON * value.abs()),
            tail,
            steps,
        })
    }

    /// Classifies a lift against the filled Julia set at a place.
    pub fn julia_membership(&self, place: &Place, lift: &ProjPoint, tol: f64) -> Result<Membership> {
        if let Place::Prime(_) = place {
            if self.reduction_type(place)?.kind == ReductionKind::Good {
                let h = self.escape_rate(place, lift, tol)?;
                let q = h.value.padic().values().next().cloned().unwrap_or_else(BigRational::zero);
                return Ok(if q.is_positive() {
                    Membership::Outside
                } else {
                    Membership::Inside
                });
            }
        }
        let h = self.escape_rate(place, lift, tol / 4.0)?;
        let v = h.approx();
        Ok(if v > tol {
            Membership::Outside
        } else if v < -tol {
            Membership::Inside
        } else {
            Membership::Undetermined
        })
    }
}

fn min_ord(coords: &[BigRational], p: &BigUint) -> i64 {
    coords
        .iter()
        .filter(|x| !x.is_zero())
        .map(|x| ord_rat(x, p))
        .min()
        .expect("nonzero lift")
}

fn eval_mod(form: &[(Vec<u32>, BigInt)], q: &[BigInt], modulus: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for (e, c) in form {
        let mut t = c.clone();
        for (x, &a) in q.iter().zip(e) {
            if a > 0 {
                t = (t * x.modpow(&BigInt::from(a), modulus)) % modulus;
            }
        }
        acc += t;
    }
    acc.mod_floor(modulus)
}

/// `log‖P‖` and the normalised complex lift `P/‖P‖`.
fn normalise(lift: &ProjPoint) -> Result<(f64, f64, Vec<Complex64>)> {
    match lift {
        ProjPoint::Exact(v) => {
            let m = v
                .iter()
                .map(|x| x.abs())
                .max()
                .filter(|m| !m.is_zero())
                .ok_or_else(|| Error::Domain("zero lift".into()))?;
            let (l, e) = ln_abs_rational(&m);
            let q = v
                .iter()
                .map(|x| Complex64::new(crate::arith::rational_to_f64(&(x / &m)), 0.0))
                .collect();
            Ok((l, e, q))
        }
        ProjPoint::Numeric(v) => {
            let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if m == 0.0 || !m.is_finite() {
                return Err(Error::Domain("zero or non-finite lift".into()));
            }
            let l = m.ln();
            Ok((l, 2.0 * f64::EPSILON * l.abs().max(1.0), v.iter().map(|z| z / m).collect()))
        }
    }
}

/// Total escape-rate bound `|Ĥ − log‖·‖| ≤ max(c_lo, c_hi)/(d−1)`.
pub fn telescoping_bound(g: &Growth, d: u32) -> f64 {
    g.c_lo.max(g.c_hi).max(0.0) / (d as f64 - 1.0)
}

/// Convenience: parse `"a/b,c/d"` into an exact lift and check its length.
pub fn parse_lift(text: &str, nvars: usize) -> Result<ProjPoint> {
    let p = ProjPoint::parse(text)?;
    if p.len() != nvars {
        return Err(Error::DimensionMismatch {
            expected: nvars,
            found: p.len(),
        });
    }
    Ok(p)
}

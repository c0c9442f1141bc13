//! Drivers: the adelic envelope report, the transfinite-diameter trend, the
//! greedy multiples search on Lattès orbits and the Lehmer-type scan.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, int};
use crate::basis::{c_n, special_basis, BasisFamily};
use crate::config::SystemConfig;
use crate::dynsys::{DynSystem, Membership, ReductionKind};
use crate::error::{Error, Result};
use crate::fekete::{fekete_search, SphereChart, DEFAULT_RESTARTS};
use crate::green::{check_admissible, eval_det_log, hadamard_envelope, NumericBasis};
use crate::heights::{canonical_height, HeightValue};
use crate::homopoly::{HomoForm, Monomial, PolyMap, ProjPoint};
use crate::linalg::{det_rational, IncrementalRank};
use crate::pf::{LogAbs, Place};
use crate::upoly::{factor, UPoly};

pub const SCHEMA: &str = "greenfield-report/1";

/// Deepest preimage level the Lehmer scan will factor.
pub const MAX_LEHMER_DEPTH: u32 = 3;

/// A rational point of `y² = x³ + ax + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurvePoint {
    Infinity,
    Affine(BigRational, BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub a: BigRational,
    pub b: BigRational,
}

impl Curve {
    pub fn new(a: BigRational, b: BigRational) -> Result<Curve> {
        let disc = int(4) * &a * &a * &a + int(27) * &b * &b;
        if disc.is_zero() {
            return Err(Error::Invalid("singular curve: 4a^3 + 27b^2 = 0".into()));
        }
        Ok(Curve { a, b })
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine(x, y) => y * y == x * x * x + &self.a * x + &self.b,
        }
    }

    pub fn neg(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => CurvePoint::Affine(x.clone(), -y),
        }
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let (CurvePoint::Affine(x1, y1), CurvePoint::Affine(x2, y2)) = (p, q) else {
            return if *p == CurvePoint::Infinity { q.clone() } else { p.clone() };
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return CurvePoint::Infinity;
            }
            (int(3) * x1 * x1 + &self.a) / (int(2) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - x1 - x2;
        let y3 = lambda * (x1 - &x3) - y1;
        CurvePoint::Affine(x3, y3)
    }

    pub fn mul(&self, k: u64, p: &CurvePoint) -> CurvePoint {
        let mut acc = CurvePoint::Infinity;
        let mut base = p.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// `[x : 1]`, or `[1 : 0]` for the origin.
    pub fn x_proj(p: &CurvePoint) -> ProjPoint {
        match p {
            CurvePoint::Infinity => ProjPoint::exact(vec![int(1), int(0)]),
            CurvePoint::Affine(x, _) => ProjPoint::exact(vec![x.clone(), int(1)]),
        }
        .expect("nonzero lift")
    }

    /// The Lattès lift of duplication through the x-coordinate.
    pub fn lattes_map(&self) -> Result<PolyMap> {
        let (a, b) = (&self.a, &self.b);
        let m = |i: u32, j: u32| Monomial(vec![i, j]);
        let f0 = HomoForm::from_terms(
            2,
            4,
            [
                (m(4, 0), int(1)),
                (m(2, 2), int(-2) * a),
                (m(1, 3), int(-8) * b),
                (m(0, 4), a * a),
            ],
        )?;
        let f1 = HomoForm::from_terms(
            2,
            4,
            [(m(3, 1), int(4)), (m(1, 3), int(4) * a), (m(0, 4), int(4) * b)],
        )?;
        PolyMap::new(vec![f0, f1])
    }
}

/// A curve, a base point on it and the induced degree-4 system on `P¹`.
#[derive(Clone, Debug)]
pub struct LattesSystem {
    pub curve: Curve,
    pub base: CurvePoint,
    pub system: DynSystem,
}

impl LattesSystem {
    pub fn new(a: BigRational, b: BigRational, x0: BigRational, y0: BigRational) -> Result<LattesSystem> {
        let curve = Curve::new(a, b)?;
        let base = CurvePoint::Affine(x0, y0);
        if !curve.contains(&base) {
            return Err(Error::Invalid("base point is not on the curve".into()));
        }
        let system = DynSystem::new(curve.lattes_map()?, None)?;
        Ok(LattesSystem { curve, base, system })
    }

    /// `x(P), x(2P), …, x(bound·P)`.
    pub fn orbit(&self, bound: usize) -> Vec<ProjPoint> {
        let mut out = Vec::with_capacity(bound);
        let mut q = CurvePoint::Infinity;
        for _ in 0..bound {
            q = self.curve.add(&q, &self.base);
            out.push(Curve::x_proj(&q));
        }
        out
    }

    /// `x(2P) = f(x(P))` as projective points.
    pub fn duplication_agrees(&self, p: &CurvePoint) -> Result<bool> {
        let lhs = Curve::x_proj(&self.curve.add(p, p));
        let x = Curve::x_proj(p);
        let image = self.system.map().evaluate(x.as_exact().expect("exact"))?;
        if image.iter().all(Zero::is_zero) {
            return Ok(false);
        }
        Ok(lhs.proportional(&ProjPoint::exact(image)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplesResult {
    pub n: u32,
    pub c: usize,
    pub bound: usize,
    /// 1-based multiples `k` whose rows were kept.
    pub indices: Vec<usize>,
    #[serde(with = "crate::config::rational")]
    pub det: BigRational,
}

/// Dimension of `X`.
pub fn variety_dim(system: &DynSystem) -> usize {
    system.dim() - usize::from(system.hypersurface().is_some())
}

/// The scan bound `2n^g + c(n)`.
pub fn multiples_bound(system: &DynSystem, n: u32) -> usize {
    2 * (n as usize).pow(variety_dim(system) as u32) + c_n(system, n)
}

/// Greedy scan of `x(kP)`, keeping a multiple iff its evaluation row raises
/// the exact rank, until `c(n)` rows are found.
pub fn multiples_search(system: &DynSystem, orbit: &[ProjPoint], n: u32) -> Result<MultiplesResult> {
    let bound = multiples_bound(system, n);
    if orbit.len() < bound {
        return Err(Error::Invalid(format!(
            "orbit has {} points, the scan bound is {bound}",
            orbit.len()
        )));
    }
    let orbit = &orbit[..bound];
    for (j, q) in orbit.iter().enumerate() {
        if q.as_exact().is_none() {
            return Err(Error::Precondition {
                index: j + 1,
                reason: "orbit points must be exact".into(),
            });
        }
        if let Some(i) = orbit[..j].iter().position(|p| p.proportional(q)) {
            return Err(Error::Precondition {
                index: j + 1,
                reason: format!("x({}P) repeats x({}P): the point looks torsion", j + 1, i + 1),
            });
        }
    }
    let basis = special_basis(system, n)?;
    let c = basis.len();
    let mut rank = IncrementalRank::new(c);
    let mut indices = Vec::new();
    let mut rows = Vec::new();
    for (j, q) in orbit.iter().enumerate() {
        let x = q.as_exact().expect("checked exact");
        let row: Vec<BigRational> = basis.forms().map(|f| f.evaluate(x)).collect::<Result<_>>()?;
        if rank.insert(&row)? {
            indices.push(j + 1);
            rows.push(row);
            if indices.len() == c {
                break;
            }
        }
    }
    if indices.len() < c {
        return Err(Error::RankDeficient {
            rank: indices.len(),
            target: c,
            detail: format!("multiples scan up to {bound}"),
        });
    }
    let det = det_rational(&rows)?;
    if det.is_zero() {
        return Err(Error::Internal("independent rows with zero determinant".into()));
    }
    Ok(MultiplesResult {
        n,
        c,
        bound,
        indices,
        det,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LehmerRow {
    pub depth: u32,
    /// Irreducible factor of the preimage equation, or `"infinity"`.
    pub factor: String,
    /// Degree `D` of the preimages over `ℚ`.
    pub degree: usize,
    pub multiplicity: u32,
    pub height: f64,
    /// `ĥ·4^depth`, equal to the base height exactly.
    pub height_scaled: f64,
    /// `ĥ·D⁵·(log max{D, 2})²`.
    pub shape: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LehmerTable {
    pub schema: String,
    pub base_height: HeightValue,
    pub rows: Vec<LehmerRow>,
    /// Minimum of the shape column; the empirical constant.
    pub min_shape: f64,
}

pub fn lehmer_shape(height: f64, degree: usize) -> f64 {
    let d = degree as f64;
    height * d.powi(5) * d.max(2.0).ln().powi(2)
}

/// Preimages `Q` with `f^k(Q) = x(P)`, grouped into Galois orbits by exact
/// factorisation of `F_0^{(k)}(X,1) − x₀·F_1^{(k)}(X,1)`.
pub fn lehmer_scan(lattes: &LattesSystem, depths: &[u32], tol: f64) -> Result<LehmerTable> {
    let base = Curve::x_proj(&lattes.base);
    let x0 = match &lattes.base {
        CurvePoint::Affine(x, _) => x.clone(),
        CurvePoint::Infinity => return Err(Error::Invalid("base point is the origin".into())),
    };
    let sys = &lattes.system;
    let h = canonical_height(sys, &base, tol)?;
    if h.value - h.error <= tol {
        return Err(Error::Precondition {
            index: 0,
            reason: format!("base height {} is not certified positive", h.value),
        });
    }
    let per_depth: Vec<Result<Vec<LehmerRow>>> = depths
        .par_iter()
        .map(|&k| {
            if k > MAX_LEHMER_DEPTH {
                return Err(Error::ResourceCap {
                    what: "Lehmer preimage depth".into(),
                    limit: MAX_LEHMER_DEPTH as usize,
                    partial: 0,
                });
            }
            let scale = 4f64.powi(k as i32);
            let height = h.value / scale;
            let row = |factor: String, degree: usize, multiplicity: u32| LehmerRow {
                depth: k,
                factor,
                degree,
                multiplicity,
                height,
                height_scaled: height * scale,
                shape: lehmer_shape(height, degree),
            };
            if k == 0 {
                return Ok(vec![row(format!("x - {}", format_rational(&x0)), 1, 1)]);
            }
            let it = sys.iterate(k)?;
            let top = 4usize.pow(k);
            let coeff = |form: &HomoForm| -> Vec<BigRational> {
                (0..=top)
                    .map(|i| form.coeff(&Monomial(vec![i as u32, (top - i) as u32])))
                    .collect()
            };
            let a = coeff(&it.forms()[0]);
            let b = coeff(&it.forms()[1]);
            let poly: Vec<BigRational> = a.iter().zip(&b).map(|(u, v)| u - &x0 * v).collect();
            let up = UPoly::from_rationals(&poly);
            let (_, factors) = factor(&up)?;
            let mut rows: Vec<LehmerRow> = factors
                .iter()
                .map(|(g, m)| row(g.to_string(), g.degree() as usize, *m))
                .collect();
            let deficit = top as isize - up.degree();
            if deficit > 0 {
                rows.push(row("infinity".into(), 1, deficit as u32));
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_depth {
        rows.extend(r?);
    }
    let min_shape = rows.iter().map(|r| r.shape).fold(f64::INFINITY, f64::min);
    Ok(LehmerTable {
        schema: SCHEMA.into(),
        base_height: h,
        rows,
        min_shape,
    })
}

/// Rescales a lift by a rational `λ` with `log|λ|_v ≤ −Ĥ_v(P̃)`, so the result
/// lies in `𝒦_v`.
pub fn scale_into_julia(system: &DynSystem, place: &Place, p: &ProjPoint) -> Result<ProjPoint> {
    let h = system.escape_rate(place, p, 1e-12)?;
    let lambda = match place {
        Place::Prime(q) => {
            let lp = crate::arith::ln_biguint(q);
            let coeff = h.value.coefficient(q);
            // Ceiling of Ĥ/log p, padded by the tail at bad places.
            let pad = BigRational::from_float(h.tail / lp + 1e-12).unwrap_or_else(BigRational::zero);
            let m = (coeff + if h.tail > 0.0 { pad } else { BigRational::zero() }).ceil().to_integer();
            let pq = BigRational::from_integer(BigInt::from(q.clone()));
            let mi: i64 = m.try_into().map_err(|_| Error::Internal("scaling exponent overflow".into()))?;
            if mi >= 0 {
                crate::arith::rational_pow(&pq, mi as u64)
            } else {
                crate::arith::rational_pow(&pq, (-mi) as u64).recip()
            }
        }
        Place::Archimedean => {
            let target = (-(h.approx() + h.err() + 1e-12)).exp() * (1.0 - 1e-12);
            BigRational::from_float(target).ok_or_else(|| Error::Internal("scale underflow".into()))?
        }
    };
    p.scale_exact(&lambda)
}

fn random_point(rng: &mut ChaCha8Rng, nvars: usize) -> ProjPoint {
    loop {
        let v: Vec<BigRational> = (0..nvars)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=5))))
            .collect();
        if let Ok(p) = ProjPoint::exact(v) {
            return p;
        }
    }
}

/// Best `(1/(n·c))·log|det|_v` over `samples` random rational tuples scaled
/// into `𝒦_v`; `X = P^N` only.
pub fn sampled_exact_witness(
    system: &DynSystem,
    basis: &BasisFamily,
    place: &Place,
    samples: usize,
    seed: u64,
) -> Result<Option<(f64, Vec<ProjPoint>)>> {
    if system.hypersurface().is_some() {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = basis.len();
    let nc = (basis.n as usize * c) as i64;
    let mut best: Option<(f64, Vec<ProjPoint>)> = None;
    for _ in 0..samples {
        let mut pts: Vec<ProjPoint> = Vec::with_capacity(c);
        while pts.len() < c {
            let p = random_point(&mut rng, system.nvars());
            if !pts.iter().any(|q| q.proportional(&p)) {
                pts.push(p);
            }
        }
        let lifts = pts
            .iter()
            .map(|p| scale_into_julia(system, place, p))
            .collect::<Result<Vec<_>>>()?;
        let det = eval_det_log(basis, &lifts, place)?;
        if let LogAbs::Finite(m) = det.value {
            let w = m.div_int(nc).value();
            if best.as_ref().is_none_or(|b| w > b.0) {
                best = Some((w, lifts));
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub place: Place,
    /// `None` at the archimedean place.
    pub reduction: Option<ReductionKind>,
    pub r_log: f64,
    /// Upper bound for `log|det|`.
    pub envelope: f64,
    /// `envelope / (n·c)`, an upper bound for `log d_{B_n}`.
    pub envelope_logd: f64,
    /// Best lower bound for `log d_{B_n}` found.
    pub witness_logd: Option<f64>,
    pub witness_source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdelicRow {
    pub n: u32,
    pub c: usize,
    pub places: Vec<PlaceEntry>,
    pub sum_envelope_logd: f64,
    pub sum_witness_logd: f64,
    /// `Σ envelope_logd · n / log n`.
    pub c_n: f64,
    /// `C_fit · log n / n`.
    pub reference: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdelicReport {
    pub schema: String,
    pub system: SystemConfig,
    pub rows: Vec<AdelicRow>,
    pub c_fit: f64,
    pub failures: Vec<(u32, String)>,
}

/// Places the report covers: `∞` and every prime dividing a coefficient or
/// the resultant.
pub fn report_places(system: &DynSystem) -> Vec<Place> {
    let mut out = vec![Place::Archimedean];
    out.extend(system.candidate_primes().into_iter().map(Place::Prime));
    out
}

fn adelic_row(system: &DynSystem, n: u32, budget: usize, seed: u64) -> Result<AdelicRow> {
    if n < 2 {
        return Err(Error::Invalid("report degrees start at 2".into()));
    }
    let basis = special_basis(system, n)?;
    let c = basis.len();
    let nc = (n as usize * c) as f64;
    let mut places = Vec::new();
    for v in report_places(system) {
        let reduction = match v {
            Place::Archimedean => None,
            Place::Prime(_) => Some(system.reduction_type(&v)?.kind),
        };
        let r_log = system.julia_radius_log(&v)?;
        let envelope = hadamard_envelope(system, n, r_log, &v);
        let (witness_logd, witness_source) = match &v {
            Place::Archimedean if system.dim() == 1 && system.hypersurface().is_none() => {
                let chart = SphereChart::new(system)?;
                let r = fekete_search(&basis, &chart, budget, seed, DEFAULT_RESTARTS)?;
                (Some(r.witness), "fekete".to_string())
            }
            _ => match sampled_exact_witness(system, &basis, &v, 2, seed)? {
                Some((w, _)) => (Some(w), "sampled-exact".to_string()),
                None => (None, "none".to_string()),
            },
        };
        places.push(PlaceEntry {
            place: v,
            reduction,
            r_log,
            envelope,
            envelope_logd: envelope / nc,
            witness_logd,
            witness_source,
        });
    }
    let sum_envelope_logd: f64 = places.iter().map(|p| p.envelope_logd).sum();
    let sum_witness_logd = places.iter().filter_map(|p| p.witness_logd).sum();
    let consistent = places
        .iter()
        .all(|p| p.witness_logd.is_none_or(|w| w <= p.envelope_logd + 1e-9));
    Ok(AdelicRow {
        n,
        c,
        places,
        sum_envelope_logd,
        sum_witness_logd,
        c_n: sum_envelope_logd * n as f64 / (n as f64).ln(),
        reference: 0.0,
        consistent,
    })
}

/// Envelopes and witnesses per place for each `n`, with the fitted constant
/// `C_fit = max_n Σ_v envelope_logd · n / log n`.
pub fn adelic_report(system: &DynSystem, n_list: &[u32], budget: usize, seed: u64) -> AdelicReport {
    let results: Vec<(u32, Result<AdelicRow>)> = n_list
        .par_iter()
        .map(|&n| (n, adelic_row(system, n, budget, seed)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    let c_fit = rows.iter().map(|r| r.c_n).fold(f64::NEG_INFINITY, f64::max);
    for r in rows.iter_mut() {
        r.reference = c_fit * (r.n as f64).ln() / r.n as f64;
    }
    AdelicReport {
        schema: SCHEMA.into(),
        system: SystemConfig::from_system(system),
        rows,
        c_fit,
        failures,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: u32,
    pub c: usize,
    pub witness_logd: f64,
    pub envelope_logd: f64,
    pub source: String,
    /// Numerically evaluated witness for cross-checking exact identities.
    pub numeric_check: Option<f64>,
}

/// The basis is, up to order and sign, the monomial basis of `P¹`.
fn is_monomial_p1(basis: &BasisFamily) -> bool {
    if basis.nvars() != 2 {
        return false;
    }
    let mut seen = BTreeSet::new();
    basis.forms().all(|f| {
        f.num_terms() == 1
            && f.terms().all(|(m, c)| c.abs().is_one() && seen.insert(m.clone()))
    })
}

/// Lower and upper bounds for `log d_{H(n)}` at a place where the system
/// has good reduction (or at `∞`).
pub fn transfin_trend(system: &DynSystem, place: &Place, n_list: &[u32]) -> Result<Vec<TrendRow>> {
    if let Place::Prime(_) = place {
        if system.reduction_type(place)?.kind != ReductionKind::Good {
            return Err(Error::Precondition {
                index: 0,
                reason: format!("no unit-resultant rescaling with good reduction at {place}"),
            });
        }
    }
    let r_log = system.julia_radius_log(place)?;
    n_list
        .par_iter()
        .map(|&n| {
            let basis = special_basis(system, n)?;
            let c = basis.len();
            let nc = (n as usize * c) as f64;
            let envelope_logd = hadamard_envelope(system, n, r_log, place) / nc;
            let (witness_logd, source, numeric_check) = match place {
                Place::Archimedean => roots_of_unity_witness(system, &basis)?,
                Place::Prime(p) => {
                    let pu: usize = p.try_into().unwrap_or(usize::MAX);
                    if system.dim() == 1 && system.hypersurface().is_none() && c <= pu.saturating_add(1) {
                        let mut lifts: Vec<ProjPoint> = (0..c.min(pu))
                            .map(|i| ProjPoint::exact(vec![int(i as i64), int(1)]).expect("nonzero"))
                            .collect();
                        if c > pu {
                            lifts.push(ProjPoint::exact(vec![int(1), int(0)]).expect("nonzero"));
                        }
                        let lifts = lifts
                            .iter()
                            .map(|q| scale_into_julia(system, place, q))
                            .collect::<Result<Vec<_>>>()?;
                        let det = eval_det_log(&basis, &lifts, place)?;
                        (det.value.value() / nc, "distinct-residues".to_string(), None)
                    } else {
                        let w = sampled_exact_witness(system, &basis, place, 2, 1)?
                            .map_or(f64::NEG_INFINITY, |b| b.0);
                        (w, "sampled-exact".to_string(), None)
                    }
                }
            };
            Ok(TrendRow {
                n,
                c,
                witness_logd,
                envelope_logd,
                source,
                numeric_check,
            })
        })
        .collect()
}

fn roots_of_unity_witness(system: &DynSystem, basis: &BasisFamily) -> Result<(f64, String, Option<f64>)> {
    let c = basis.len();
    let n = basis.n;
    let nc = (n as usize * c) as f64;
    if system.dim() != 1 || system.hypersurface().is_some() {
        let w = sampled_exact_witness(system, basis, &Place::Archimedean, 2, 1)?
            .map_or(f64::NEG_INFINITY, |b| b.0);
        return Ok((w, "sampled-exact".into(), None));
    }
    let mut lifts = Vec::with_capacity(c);
    for k in 0..c {
        let z = vec![
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / c as f64),
            Complex64::new(1.0, 0.0),
        ];
        let p = ProjPoint::numeric(z.clone())?;
        let h = system.escape_rate(&Place::Archimedean, &p, 1e-13)?;
        let s = (-h.approx()).exp();
        lifts.push(z.into_iter().map(|x| x * s).collect::<Vec<_>>());
    }
    let nb = NumericBasis::new(basis);
    let (ld, _, _) = nb.log_det(&lifts, c)?;
    let numeric = ld / nc;
    let projs: Vec<ProjPoint> = lifts
        .into_iter()
        .map(ProjPoint::numeric)
        .collect::<Result<_>>()?;
    check_admissible(system, &projs, &Place::Archimedean, 1e-9)?;
    let unit_circle = projs.iter().all(|p| {
        system
            .julia_membership(&Place::Archimedean, p, 1e-9)
            .map(|m| m != Membership::Outside)
            .unwrap_or(false)
    });
    if is_monomial_p1(basis) && unit_circle && system.map().forms().iter().all(|f| f.num_terms() == 1) {
        // |V(ζ^0, …, ζ^n)| = (n+1)^{(n+1)/2}.
        let exact = (c as f64).ln() * c as f64 / 2.0 / nc;
        return Ok((exact, "roots-of-unity-exact".into(), Some(numeric)));
    }
    Ok((numeric, "roots-of-unity".into(), Some(numeric)))
}

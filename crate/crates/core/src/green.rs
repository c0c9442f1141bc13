//! Evaluation determinants, the Arakelov–Green function `g_n`, lower-bound
//! witnesses for `log d_{B_n}` and the Hadamard upper envelope.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::basis::{c_n, factor_count_bounds, BasisFamily};
use crate::dynsys::{DynSystem, Membership};
use crate::error::{Error, Result};
use crate::homopoly::{NumericForm, ProjPoint};
use crate::linalg::{det_rational, log_abs_det_complex};
use crate::pf::{abs_log, AbsoluteValue, LogAbs, LogMag, Place};

/// Pivot ratio beyond which a numeric evaluation matrix counts as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalDetLog {
    pub value: LogAbs,
    pub dimension: usize,
    pub degree: u32,
    /// Exact determinant in exact mode.
    #[serde(with = "crate::config::opt_rational")]
    pub det: Option<BigRational>,
    /// Numeric rank deficiency was declared from the pivot ratio.
    pub flagged: bool,
}

/// Basis forms compiled for fast complex evaluation.
#[derive(Clone, Debug)]
pub struct NumericBasis {
    forms: Vec<NumericForm>,
    nvars: usize,
}

impl NumericBasis {
    pub fn new(basis: &BasisFamily) -> NumericBasis {
        NumericBasis {
            forms: basis.forms().map(NumericForm::new).collect(),
            nvars: basis.nvars(),
        }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn row(&self, point: &[Complex64]) -> (Vec<Complex64>, f64) {
        let mut err: f64 = 0.0;
        let row = self
            .forms
            .iter()
            .map(|f| {
                let (v, e) = f.evaluate(point);
                err = err.max(e);
                v
            })
            .collect();
        (row, err)
    }

    /// `log|det|` of the leading `k×k` block for the first `k` points.
    pub fn log_det(&self, points: &[Vec<Complex64>], k: usize) -> Result<(f64, f64, f64)> {
        let mut entry_err: f64 = 0.0;
        let rows: Vec<Vec<Complex64>> = points[..k]
            .iter()
            .map(|p| {
                if p.len() != self.nvars {
                    return Err(Error::DimensionMismatch {
                        expected: self.nvars,
                        found: p.len(),
                    });
                }
                let (mut r, e) = self.row(p);
                entry_err = entry_err.max(e);
                r.truncate(k);
                Ok(r)
            })
            .collect::<Result<_>>()?;
        NumericBasis::log_det_rows(rows, entry_err)
    }

    /// `log|det|` of square rows with entry error `entry_err`.
    pub fn log_det_rows(rows: Vec<Vec<Complex64>>, entry_err: f64) -> Result<(f64, f64, f64)> {
        let k = rows.len();
        let ld = log_abs_det_complex(rows)?;
        // Perturbation of the entries moves log|det| by about κ·k·δ/scale.
        Ok((ld.log_abs, ld.err + entry_err * k as f64 * ld.pivot_ratio, ld.pivot_ratio))
    }
}

/// `log|det(η_j(P̃_i))|_v`.
pub fn eval_det_log(basis: &BasisFamily, lifts: &[ProjPoint], place: &Place) -> Result<EvalDetLog> {
    let c = basis.len();
    if lifts.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: lifts.len(),
        });
    }
    let exact = lifts.iter().all(ProjPoint::is_exact);
    if !exact && lifts.iter().any(ProjPoint::is_exact) {
        return Err(Error::Invalid("lifts mix exact and numeric modes".into()));
    }
    if let Some((i, p)) = lifts.iter().enumerate().find(|(_, p)| p.len() != basis.nvars()) {
        return Err(Error::Precondition {
            index: i,
            reason: format!("lift has {} coordinates, expected {}", p.len(), basis.nvars()),
        });
    }
    if exact {
        let rows: Vec<Vec<BigRational>> = lifts
            .iter()
            .map(|p| {
                let x = p.as_exact().expect("exact lift");
                basis.forms().map(|f| f.evaluate(x)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let det = det_rational(&rows)?;
        let value = if det.is_zero() {
            LogAbs::MinusInfinity
        } else {
            LogAbs::Finite(abs_log(place, &det)?)
        };
        return Ok(EvalDetLog {
            value,
            dimension: c,
            degree: basis.n,
            det: Some(det),
            flagged: false,
        });
    }
    if !place.is_archimedean() {
        return Err(Error::Invalid("numeric lifts only make sense at the archimedean place".into()));
    }
    let nb = NumericBasis::new(basis);
    let pts: Vec<Vec<Complex64>> = lifts.iter().map(ProjPoint::to_complex).collect();
    let (log_abs, err, ratio) = nb.log_det(&pts, c)?;
    let flagged = ratio > SINGULAR_PIVOT_RATIO;
    let value = if log_abs == f64::NEG_INFINITY || flagged {
        LogAbs::MinusInfinity
    } else {
        LogAbs::Finite(LogMag::real(log_abs, err))
    };
    Ok(EvalDetLog {
        value,
        dimension: c,
        degree: basis.n,
        det: None,
        flagged,
    })
}

/// `g_n`, or `+∞` for a singular evaluation matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GreenValue {
    PlusInfinity,
    Finite { value: LogMag, tail: f64 },
}

impl GreenValue {
    pub fn value(&self) -> f64 {
        match self {
            GreenValue::PlusInfinity => f64::INFINITY,
            GreenValue::Finite { value, .. } => value.value(),
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            GreenValue::PlusInfinity => 0.0,
            GreenValue::Finite { value, tail } => value.value_err() + tail,
        }
    }
}

/// `(1/c)·Σ Ĥ_F(P̃_i) − (1/(n·c))·log|det| + r(F)`.
pub fn green_value(
    system: &DynSystem,
    basis: &BasisFamily,
    lifts: &[ProjPoint],
    place: &Place,
    tol: f64,
) -> Result<GreenValue> {
    let det = eval_det_log(basis, lifts, place)?;
    let LogAbs::Finite(logdet) = det.value else {
        return Ok(GreenValue::PlusInfinity);
    };
    let c = basis.len() as i64;
    let mut sum = LogMag::zero();
    let mut tail = 0.0;
    for p in lifts {
        let h = system.escape_rate(place, p, tol)?;
        tail += h.tail;
        sum = sum + h.value;
    }
    let value = sum.div_int(c) - logdet.div_int(basis.n as i64 * c) + system.r_term(place)?;
    Ok(GreenValue::Finite {
        value,
        tail: tail / c as f64,
    })
}

/// Checks that every lift lies in `𝒦_v ∩ π⁻¹(X)`.
pub fn check_admissible(system: &DynSystem, lifts: &[ProjPoint], place: &Place, tol: f64) -> Result<()> {
    for (i, p) in lifts.iter().enumerate() {
        if system.julia_membership(place, p, tol)? == Membership::Outside {
            return Err(Error::Precondition {
                index: i,
                reason: "lift lies outside the filled Julia set".into(),
            });
        }
        if let Some(g) = system.hypersurface() {
            let on = match p {
                ProjPoint::Exact(v) => g.evaluate(v)?.is_zero(),
                ProjPoint::Numeric(v) => {
                    let (val, err) = g.evaluate_complex(v)?;
                    val.norm() <= err.max(tol)
                }
            };
            if !on {
                return Err(Error::Precondition {
                    index: i,
                    reason: "lift does not lie on the hypersurface".into(),
                });
            }
        }
    }
    Ok(())
}

/// `(1/(n·c))·log|det|` for an admissible tuple.
pub fn dbn_witness(
    system: &DynSystem,
    basis: &BasisFamily,
    lifts: &[ProjPoint],
    place: &Place,
    tol: f64,
) -> Result<LogAbs> {
    check_admissible(system, lifts, place, tol)?;
    let det = eval_det_log(basis, lifts, place)?;
    let nc = basis.n as i64 * basis.len() as i64;
    Ok(match det.value {
        LogAbs::MinusInfinity => LogAbs::MinusInfinity,
        LogAbs::Finite(m) => LogAbs::Finite(m.div_int(nc)),
    })
}

/// Upper bound for `log|det|` over tuples in `𝒦_v ∩ π⁻¹(X)` when every lift
/// has `log‖P̃‖ ≤ r_log`: each entry is at most
/// `max{R,1}^{d(N+1)−1+⌊t₂⌋(d−1)}` and archimedean columns gain `√c`.
pub fn hadamard_envelope_for(d: u32, dim: usize, c: usize, n: u32, r_log: f64, archimedean: bool) -> f64 {
    let (_, t2) = factor_count_bounds(d, dim, n as u64);
    let exponent = (d as f64) * (dim as f64 + 1.0) - 1.0 + t2 as f64 * (d as f64 - 1.0);
    let c = c as f64;
    let base = c * exponent * r_log.max(0.0);
    if archimedean {
        base + c / 2.0 * c.ln()
    } else {
        base
    }
}

pub fn hadamard_envelope(system: &DynSystem, n: u32, r_log: f64, place: &Place) -> f64 {
    hadamard_envelope_for(
        system.degree(),
        system.dim(),
        c_n(system, n),
        n,
        r_log,
        place.is_archimedean(),
    )
}

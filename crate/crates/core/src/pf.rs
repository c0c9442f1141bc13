//! Places of the rational field and exact ledgers of log-absolute-values.
//!
//! A [`LogMag`] keeps the nonarchimedean part of `log|x|_v` symbolically as
//! rational multiples of `log p`, so sums over all places cancel exactly on
//! that part and only the archimedean binary64 term carries rounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, format_rational, ln_abs_rational, ln_biguint, ord_rat};
use crate::error::{Error, Result};

/// A normalized absolute value on the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Archimedean,
    Prime(BigUint),
}

impl Place {
    /// The `p`-adic place; `p` must be prime.
    pub fn prime(p: impl Into<BigUint>) -> Result<Place> {
        let p = p.into();
        if !arith::is_prime(&p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        Ok(Place::Prime(p))
    }

    pub fn p(p: u64) -> Place {
        Place::prime(p).expect("prime")
    }
}

/// The interface consumers use; a function-field place type can implement it
/// without touching callers.
pub trait AbsoluteValue {
    fn is_archimedean(&self) -> bool;
    /// Residue characteristic of a nonarchimedean place.
    fn residue_characteristic(&self) -> Option<&BigUint>;
    /// Normalized valuation `ord_v(x)` at a nonarchimedean place.
    fn valuation(&self, x: &BigRational) -> Option<i64>;
    fn abs_log(&self, x: &BigRational) -> Result<LogMag>;
}

impl AbsoluteValue for Place {
    fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }

    fn residue_characteristic(&self) -> Option<&BigUint> {
        match self {
            Place::Archimedean => None,
            Place::Prime(p) => Some(p),
        }
    }

    fn valuation(&self, x: &BigRational) -> Option<i64> {
        match self {
            Place::Prime(p) if !x.is_zero() => Some(ord_rat(x, p)),
            _ => None,
        }
    }

    fn abs_log(&self, x: &BigRational) -> Result<LogMag> {
        abs_log(self, x)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Prime(p) => write!(f, "p={p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s == "inf" || s == "infinity" || s == "oo" {
            return Ok(Place::Archimedean);
        }
        let digits = s.strip_prefix("p=").unwrap_or(s);
        let p: BigUint = digits
            .parse()
            .map_err(|_| Error::parse(format!("bad place {s:?}")))?;
        Place::prime(p)
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Σ_p q_p · log p + arch`, with `|arch − true arch| ≤ arch_err`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LogMag {
    padic: BTreeMap<BigUint, BigRational>,
    arch: f64,
    arch_err: f64,
}

impl LogMag {
    pub fn zero() -> LogMag {
        LogMag::default()
    }

    /// `q · log p`.
    pub fn log_prime(p: BigUint, q: BigRational) -> LogMag {
        let mut padic = BTreeMap::new();
        if !q.is_zero() {
            padic.insert(p, q);
        }
        LogMag {
            padic,
            arch: 0.0,
            arch_err: 0.0,
        }
    }

    pub fn real(value: f64, err: f64) -> LogMag {
        debug_assert!(err >= 0.0);
        LogMag {
            padic: BTreeMap::new(),
            arch: value,
            arch_err: err,
        }
    }

    pub fn padic(&self) -> &BTreeMap<BigUint, BigRational> {
        &self.padic
    }

    pub fn arch(&self) -> f64 {
        self.arch
    }

    pub fn arch_err(&self) -> f64 {
        self.arch_err
    }

    /// True when the ledger carries no rounding at all.
    pub fn is_exact(&self) -> bool {
        self.arch_err == 0.0
    }

    pub fn is_exact_zero(&self) -> bool {
        self.padic.is_empty() && self.arch == 0.0 && self.arch_err == 0.0
    }

    /// Widens the archimedean error bound.
    pub fn with_extra_err(mut self, err: f64) -> LogMag {
        self.arch_err += err;
        self
    }

    /// Coefficient of `log p`.
    pub fn coefficient(&self, p: &BigUint) -> BigRational {
        self.padic.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Evaluates the ledger in binary64.
    pub fn value(&self) -> f64 {
        self.arch
            + self
                .padic
                .iter()
                .map(|(p, q)| arith::rational_to_f64(q) * ln_biguint(p))
                .sum::<f64>()
    }

    /// Error bound for [`LogMag::value`], including evaluation of the symbolic part.
    pub fn value_err(&self) -> f64 {
        let sym: f64 = self
            .padic
            .iter()
            .map(|(p, q)| (arith::rational_to_f64(q) * ln_biguint(p)).abs())
            .sum();
        self.arch_err + 4.0 * f64::EPSILON * sym
    }

    pub fn scale(&self, q: &BigRational) -> LogMag {
        if q.is_zero() {
            return LogMag::zero();
        }
        let qf = arith::rational_to_f64(q);
        let padic = self
            .padic
            .iter()
            .map(|(p, c)| (p.clone(), c * q))
            .collect();
        let arch = self.arch * qf;
        let arch_err = self.arch_err * qf.abs()
            + if self.arch == 0.0 {
                0.0
            } else {
                2.0 * f64::EPSILON * arch.abs()
            };
        LogMag {
            padic,
            arch,
            arch_err,
        }
    }

    /// Scales by `1/k`.
    pub fn div_int(&self, k: i64) -> LogMag {
        self.scale(&arith::rat(1, k))
    }

    fn add_ref(&self, other: &LogMag) -> LogMag {
        let mut padic = self.padic.clone();
        for (p, q) in &other.padic {
            let entry = padic.entry(p.clone()).or_insert_with(BigRational::zero);
            *entry += q;
            if entry.is_zero() {
                padic.remove(p);
            }
        }
        let arch = self.arch + other.arch;
        let rounding = if self.arch != 0.0 && other.arch != 0.0 {
            f64::EPSILON * arch.abs()
        } else {
            0.0
        };
        LogMag {
            padic,
            arch,
            arch_err: self.arch_err + other.arch_err + rounding,
        }
    }

    /// Human-readable rendering, e.g. `-2*log(2) + 0.5`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .padic
            .iter()
            .map(|(p, q)| format!("{}*log({p})", format_rational(q)))
            .collect();
        if self.arch != 0.0 || parts.is_empty() {
            parts.push(format!("{}", self.arch));
        }
        parts.join(" + ")
    }
}

impl Add for LogMag {
    type Output = LogMag;
    fn add(self, rhs: LogMag) -> LogMag {
        self.add_ref(&rhs)
    }
}

impl<'a> Add<&'a LogMag> for &'a LogMag {
    type Output = LogMag;
    fn add(self, rhs: &LogMag) -> LogMag {
        self.add_ref(rhs)
    }
}

impl AddAssign<&LogMag> for LogMag {
    fn add_assign(&mut self, rhs: &LogMag) {
        *self = self.add_ref(rhs);
    }
}

impl Neg for LogMag {
    type Output = LogMag;
    fn neg(self) -> LogMag {
        LogMag {
            padic: self.padic.into_iter().map(|(p, q)| (p, -q)).collect(),
            arch: -self.arch,
            arch_err: self.arch_err,
        }
    }
}

impl Sub for LogMag {
    type Output = LogMag;
    fn sub(self, rhs: LogMag) -> LogMag {
        self + (-rhs)
    }
}

impl std::iter::Sum for LogMag {
    fn sum<I: Iterator<Item = LogMag>>(iter: I) -> LogMag {
        iter.fold(LogMag::zero(), |a, b| a + b)
    }
}

impl fmt::Display for LogMag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Serialize, Deserialize)]
struct LogMagRepr {
    padic: BTreeMap<String, String>,
    arch: f64,
    arch_err: f64,
}

impl Serialize for LogMag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LogMagRepr {
            padic: self
                .padic
                .iter()
                .map(|(p, q)| (p.to_string(), format_rational(q)))
                .collect(),
            arch: self.arch,
            arch_err: self.arch_err,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogMag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<LogMag, D::Error> {
        let r = LogMagRepr::deserialize(d)?;
        let mut padic = BTreeMap::new();
        for (p, q) in r.padic {
            let p: BigUint = p.parse().map_err(serde::de::Error::custom)?;
            let q = arith::parse_rational(&q).map_err(serde::de::Error::custom)?;
            if !q.is_zero() {
                padic.insert(p, q);
            }
        }
        Ok(LogMag {
            padic,
            arch: r.arch,
            arch_err: r.arch_err,
        })
    }
}

/// `log|x|_v`; zero has no logarithm here (callers use a separate sentinel).
pub fn abs_log(place: &Place, x: &BigRational) -> Result<LogMag> {
    if x.is_zero() {
        return Err(Error::Domain("log of zero magnitude".into()));
    }
    Ok(match place {
        Place::Prime(p) => {
            let k = ord_rat(x, p);
            LogMag::log_prime(p.clone(), BigRational::from_integer((-k).into()))
        }
        Place::Archimedean => {
            let (v, e) = ln_abs_rational(x);
            LogMag::real(v, e)
        }
    })
}

/// Places at which `|x|_v ≠ 1`.
pub fn support(x: &BigRational) -> Result<BTreeSet<Place>> {
    if x.is_zero() {
        return Err(Error::Domain("support of zero".into()));
    }
    let mut out: BTreeSet<Place> = arith::rational_primes(x)
        .into_keys()
        .map(Place::Prime)
        .collect();
    if x.abs() != BigRational::from_integer(1.into()) {
        out.insert(Place::Archimedean);
    }
    Ok(out)
}

/// Union of supports of several nonzero rationals.
pub fn joint_support<'a>(xs: impl IntoIterator<Item = &'a BigRational>) -> BTreeSet<Place> {
    let mut primes = BTreeSet::new();
    for x in xs {
        if x.is_zero() {
            continue;
        }
        primes.extend(arith::rational_primes(x).into_keys());
    }
    let mut out: BTreeSet<Place> = primes.into_iter().map(Place::Prime).collect();
    out.insert(Place::Archimedean);
    out
}

/// The exact expansion `log|x| = Σ_p ord_p(x) · log p` of the archimedean log.
pub fn log_expansion(x: &BigRational) -> Result<LogMag> {
    if x.is_zero() {
        return Err(Error::Domain("log of zero magnitude".into()));
    }
    Ok(arith::rational_primes(x)
        .into_iter()
        .map(|(p, e)| LogMag::log_prime(p, BigRational::from_integer(e.into())))
        .sum())
}

/// `Σ_v log|x|_v` over `support(x) ∪ {∞}`; vanishes by the product formula.
pub fn product_formula_sum(x: &BigRational) -> Result<LogMag> {
    let mut places = support(x)?;
    places.insert(Place::Archimedean);
    places
        .iter()
        .map(|v| abs_log(v, x))
        .try_fold(LogMag::zero(), |acc, t| Ok(acc + t?))
}

/// Rounds a ledger value for comparisons; `None` if the value does not fit.
pub fn approx(x: &LogMag) -> Option<f64> {
    let v = x.value();
    v.is_finite().then_some(v)
}

/// A log-magnitude that may be `−∞` (the log of an exact zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LogAbs {
    MinusInfinity,
    Finite(LogMag),
}

impl LogAbs {
    pub fn finite(&self) -> Option<&LogMag> {
        match self {
            LogAbs::Finite(m) => Some(m),
            LogAbs::MinusInfinity => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            LogAbs::Finite(m) => m.value(),
            LogAbs::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn abs_log_examples() {
        let l = abs_log(&Place::p(2), &int(12)).unwrap();
        assert_eq!(l.coefficient(&BigUint::from(2u32)), int(-2));
        assert_eq!(l.arch(), 0.0);
        assert!(l.is_exact());

        let l = abs_log(&Place::Archimedean, &rat(-3, 2)).unwrap();
        assert!((l.arch() - 0.4054651081081644).abs() < 1e-15);

        assert!(abs_log(&Place::p(5), &int(12)).unwrap().is_exact_zero());
        assert!(abs_log(&Place::p(5), &int(0)).is_err());
    }

    #[test]
    fn support_examples() {
        let s = support(&int(12)).unwrap();
        assert_eq!(
            s,
            [Place::Archimedean, Place::p(2), Place::p(3)].into_iter().collect()
        );
        assert!(support(&int(1)).unwrap().is_empty());
        assert!(support(&int(-1)).unwrap().is_empty());
        assert!(support(&int(0)).is_err());
    }

    #[test]
    fn product_formula_examples() {
        for x in [int(12), rat(-7, 9)] {
            let s = product_formula_sum(&x).unwrap();
            assert!(s.value().abs() <= 1e-12);
            assert_eq!(
                LogMag::real(0.0, 0.0) + s.clone(),
                s.clone(),
                "adding exact zero is the identity"
            );
            let expansion = log_expansion(&x).unwrap();
            assert_eq!(s.padic(), (-expansion).padic());
        }
        assert!(product_formula_sum(&int(1)).unwrap().is_exact_zero());
    }

    #[test]
    fn places_render_and_parse() {
        assert_eq!(Place::Archimedean.to_string(), "inf");
        assert_eq!(Place::p(7).to_string(), "p=7");
        assert_eq!("p=7".parse::<Place>().unwrap(), Place::p(7));
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Archimedean);
        assert!("p=8".parse::<Place>().is_err());
        assert!(Place::prime(9u32).is_err());
    }

    #[test]
    fn ledger_serde_round_trip() {
        let l = abs_log(&Place::p(3), &rat(2, 9)).unwrap() + LogMag::real(0.25, 1e-17);
        let s = serde_json::to_string(&l).unwrap();
        let back: LogMag = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }
}

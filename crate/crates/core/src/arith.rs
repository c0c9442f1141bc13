//! Integer and rational helpers shared by the exact modules.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"a/b"` or `"a"` in base 10 with an optional leading minus sign.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::parse("empty rational"));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::parse(format!("bad numerator in {t:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::parse(format!("bad denominator in {t:?}")))?;
    if d.is_zero() {
        return Err(Error::parse(format!("zero denominator in {t:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Canonical text form: `a` for integers, `a/b` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Multiplicity of the prime `p` in the nonzero integer `n`.
pub fn ord_int(n: &BigInt, p: &BigUint) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    let mut m = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        m = q;
        k += 1;
    }
}

/// `ord_p` of a nonzero rational.
pub fn ord_rat(x: &BigRational, p: &BigUint) -> i64 {
    ord_int(x.numer(), p) as i64 - ord_int(x.denom(), p) as i64
}

/// Prime factorisation of a positive integer.
pub fn factor(n: &BigUint) -> BTreeMap<BigUint, u64> {
    let mut out = BTreeMap::new();
    if n.is_zero() || n.is_one() {
        return out;
    }
    if let Some(small) = n.to_u128().filter(|&v| v < (1u128 << 127)) {
        for (p, e) in crate::factor::factor_u128(small) {
            out.insert(BigUint::from(p), e);
        }
        return out;
    }
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), None);
    for (p, e) in found {
        *out.entry(p).or_insert(0) += e as u64;
    }
    if let Some(rest) = rest {
        // Fall back to splitting whatever the default configuration left over.
        for r in rest {
            for (p, e) in factor_stubborn(&r) {
                *out.entry(p).or_insert(0) += e;
            }
        }
    }
    out
}

fn factor_stubborn(n: &BigUint) -> BTreeMap<BigUint, u64> {
    let mut out = BTreeMap::new();
    if n.is_one() {
        return out;
    }
    if num_prime::nt_funcs::is_prime(n, None).probably() {
        out.insert(n.clone(), 1);
        return out;
    }
    let mut cfg = num_prime::FactorizationConfig::default();
    cfg.rho_trials = 200;
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), Some(cfg));
    for (p, e) in found {
        *out.entry(p).or_insert(0) += e as u64;
    }
    if let Some(rest) = rest {
        for r in rest {
            // Unsplittable within the configured effort; record it as a
            // pseudo-prime factor so callers still see every valuation.
            *out.entry(r).or_insert(0) += 1;
        }
    }
    out
}

/// Primes dividing the numerator or denominator of a nonzero rational.
pub fn rational_primes(x: &BigRational) -> BTreeMap<BigUint, i64> {
    let mut out: BTreeMap<BigUint, i64> = BTreeMap::new();
    for (p, e) in factor(x.numer().magnitude()) {
        *out.entry(p).or_insert(0) += e as i64;
    }
    for (p, e) in factor(x.denom().magnitude()) {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    out
}

pub fn is_prime(p: &BigUint) -> bool {
    if let Some(small) = p.to_u128().filter(|&v| v < (1u128 << 127)) {
        return crate::factor::is_prime_u128(small);
    }
    num_prime::nt_funcs::is_prime(p, None).probably()
}

/// Natural log of a positive integer, accurate to a few ulps for any size.
pub fn ln_biguint(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log|x|` for a nonzero rational together with an absolute error bound.
pub fn ln_abs_rational(x: &BigRational) -> (f64, f64) {
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    if a == b {
        return (0.0, 0.0);
    }
    let eps = f64::EPSILON;
    if a.bits() <= 53 && b.bits() <= 53 {
        let q = a.to_f64().unwrap() / b.to_f64().unwrap();
        let v = q.ln();
        return (v, 2.0 * eps * v.abs().max(f64::MIN_POSITIVE));
    }
    let la = ln_biguint(a);
    let lb = ln_biguint(b);
    (la - lb, 4.0 * eps * (la.abs() + lb.abs()))
}

/// Converts a rational to binary64 without intermediate overflow.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    if x.is_zero() {
        return 0.0;
    }
    let (l, _) = ln_abs_rational(x);
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * l.exp()
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(xs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn rational_pow(x: &BigRational, e: u64) -> BigRational {
    num_traits::pow::pow(x.clone(), e as usize)
}

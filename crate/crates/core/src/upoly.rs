//! Univariate polynomials over `ℤ` and their factorisation over `ℚ`
//! (square-free decomposition, then Zassenhaus: Cantor–Zassenhaus modulo a
//! small prime, linear Hensel lifting and subset recombination).

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::denominator_lcm;
use crate::error::{Error, Result};

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly {
    c: Vec<BigInt>,
}

impl UPoly {
    pub fn new(mut c: Vec<BigInt>) -> UPoly {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Clears denominators: returns `m·f` with `m > 0` minimal.
    pub fn from_rationals(c: &[BigRational]) -> UPoly {
        let l = denominator_lcm(c.iter());
        UPoly::new(c.iter().map(|q| (q * &l).to_integer()).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `−1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.c.len() as isize - 1
    }

    pub fn lc(&self) -> BigInt {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        self.c.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        UPoly::new(self.c.iter().map(|x| x / &g).collect())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, x)| x * BigInt::from(i))
                .collect(),
        )
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::new(vec![]);
        }
        let mut r = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        UPoly::new(r)
    }

    pub fn evaluate(&self, x: &BigRational) -> BigRational {
        self.c
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    /// `self / d` when the quotient is integral and the remainder is zero.
    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        if d.is_zero() {
            return None;
        }
        if self.degree() < d.degree() {
            return self.is_zero().then(|| self.clone());
        }
        let mut r = self.c.clone();
        let dl = d.lc();
        let dd = d.c.len() - 1;
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = &r[k + dd];
            if top.is_zero() {
                continue;
            }
            let (qk, rem) = top.div_rem(&dl);
            if !rem.is_zero() {
                return None;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[k + j] -= &qk * dj;
            }
            q[k] = qk;
        }
        r.iter().all(Zero::is_zero).then(|| UPoly::new(q))
    }

    /// Pseudo-remainder `prem(self, d)`.
    fn prem(&self, d: &UPoly) -> UPoly {
        let mut r = self.c.clone();
        let dl = d.lc();
        let dd = d.c.len() - 1;
        while r.len() > dd && !r.is_empty() {
            let top = r.last().cloned().expect("nonempty");
            let shift = r.len() - 1 - dd;
            for x in r.iter_mut() {
                *x *= &dl;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[shift + j] -= &top * dj;
            }
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    /// Primitive gcd with positive leading coefficient.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.primitive(), o.primitive());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    fn l1(&self) -> BigInt {
        self.c.iter().map(|x| x.abs()).sum()
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*x")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `(unit·content, [(irreducible primitive factor, multiplicity)])`, factors
/// sorted by degree then coefficients.
pub fn factor(f: &UPoly) -> Result<(BigInt, Vec<(UPoly, u32)>)> {
    if f.is_zero() {
        return Err(Error::Domain("cannot factor the zero polynomial".into()));
    }
    let mut unit = f.content();
    if f.lc().is_negative() {
        unit = -unit;
    }
    let mut out = Vec::new();
    for (g, m) in squarefree(&f.primitive()) {
        for h in factor_squarefree(&g)? {
            out.push((h, m));
        }
    }
    out.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.c.cmp(&b.0.c)));
    Ok((unit, out))
}

/// Yun's square-free decomposition of a primitive polynomial.
pub fn squarefree(f: &UPoly) -> Vec<(UPoly, u32)> {
    let mut out = Vec::new();
    if f.degree() < 1 {
        return out;
    }
    let a = f.primitive();
    let mut c = a.gcd(&a.derivative());
    let mut w = a.div_exact(&c).expect("gcd divides");
    let mut i = 1;
    while c.degree() > 0 {
        let y = w.gcd(&c);
        let z = w.div_exact(&y).expect("gcd divides");
        if z.degree() > 0 {
            out.push((z.primitive(), i));
        }
        i += 1;
        c = c.div_exact(&y).expect("gcd divides");
        w = y;
    }
    if w.degree() > 0 {
        out.push((w.primitive(), i));
    }
    out
}

// Polynomials over F_p with p < 2^31, constant term first, no trailing zeros.
type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn reduce(f: &UPoly, p: u64) -> Fp {
    let pb = BigInt::from(p);
    trim(
        f.c.iter()
            .map(|x| x.mod_floor(&pb).to_u64().expect("reduced mod p"))
            .collect(),
    )
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    trim(r)
}

fn fp_add(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect(),
    )
}

fn fp_divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let mut r = a.clone();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let inv = inv_mod(*b.last().expect("nonzero divisor"), p);
    let db = b.len() - 1;
    let mut q = vec![0u64; r.len() - db];
    for k in (0..q.len()).rev() {
        let t = r[k + db] * inv % p;
        q[k] = t;
        if t != 0 {
            for (j, &bj) in b.iter().enumerate() {
                r[k + j] = (r[k + j] + p - t * bj % p) % p;
            }
        }
    }
    (trim(q), trim(r))
}

fn fp_monic(a: &Fp, p: u64) -> Fp {
    match a.last() {
        None => vec![],
        Some(&l) => {
            let inv = inv_mod(l, p);
            a.iter().map(|x| x * inv % p).collect()
        }
    }
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = fp_divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    fp_monic(&a, p)
}

/// `(g, s, t)` with `s·a + t·b = g` monic.
fn fp_xgcd(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], vec![]);
    let (mut t0, mut t1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = inv_mod(*r0.last().expect("nonzero gcd"), p);
    let sc = |v: &Fp| trim(v.iter().map(|x| x * inv % p).collect());
    (sc(&r0), sc(&s0), sc(&t0))
}

fn fp_powmod(base: &Fp, e: &BigUint, m: &Fp, p: u64) -> Fp {
    let mut r: Fp = vec![1];
    let b = fp_divrem(base, m, p).1;
    for i in (0..e.bits()).rev() {
        r = fp_divrem(&fp_mul(&r, &r, p), m, p).1;
        if e.bit(i) {
            r = fp_divrem(&fp_mul(&r, &b, p), m, p).1;
        }
    }
    r
}

/// Distinct-degree then equal-degree factorisation of a monic square-free
/// polynomial; factors are monic.
fn fp_factor(f: &Fp, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let pb = BigUint::from(p);
    let mut i = 1usize;
    while f.len() > 2 * i {
        h = fp_powmod(&h, &pb, &f, p);
        let g = fp_gcd(&f, &fp_sub(&h, &x, p), p);
        if g.len() > 1 {
            out.extend(equal_degree(&g, i, p, rng));
            f = fp_divrem(&f, &g, p).0;
            h = fp_divrem(&h, &f, p).1;
        }
        i += 1;
    }
    if f.len() > 1 {
        out.push(fp_monic(&f, p));
    }
    out
}

fn equal_degree(g: &Fp, i: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let n = g.len() - 1;
    if n == i {
        return vec![g.clone()];
    }
    let e = (BigUint::from(p).pow(i as u32) - 1u32) / 2u32;
    loop {
        let a: Fp = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.len() < 2 {
            continue;
        }
        let b = fp_sub(&fp_powmod(&a, &e, g, p), &vec![1], p);
        let d = fp_gcd(g, &b, p);
        if d.len() > 1 && d.len() < g.len() {
            let rest = fp_monic(&fp_divrem(g, &d, p).0, p);
            let mut out = equal_degree(&d, i, p, rng);
            out.extend(equal_degree(&rest, i, p, rng));
            return out;
        }
    }
}

fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn to_z(a: &Fp) -> UPoly {
    UPoly::new(a.iter().map(|&x| BigInt::from(x)).collect())
}

fn mod_poly(f: &UPoly, m: &BigInt) -> UPoly {
    UPoly::new(f.c.iter().map(|x| x.mod_floor(m)).collect())
}

fn add_scaled(a: &UPoly, b: &UPoly, s: &BigInt, m: &BigInt) -> UPoly {
    let n = a.c.len().max(b.c.len());
    UPoly::new(
        (0..n)
            .map(|i| {
                let x = a.c.get(i).cloned().unwrap_or_default();
                let y = b.c.get(i).cloned().unwrap_or_default();
                (x + y * s).mod_floor(m)
            })
            .collect(),
    )
}

/// Lifts `f ≡ lc(f)·∏ factors (mod p)` to monic factors modulo `p^k`.
fn hensel(f: &UPoly, factors: &[Fp], p: u64, k: u32) -> Vec<UPoly> {
    let pb = BigInt::from(p);
    let pk = pb.pow(k);
    if factors.len() == 1 {
        let inv = crate::arith::mod_inverse(&f.lc(), &pk).expect("lc is a unit");
        return vec![UPoly::new(f.c.iter().map(|x| (x * &inv).mod_floor(&pk)).collect())];
    }
    let (left, right) = factors.split_at(factors.len() / 2);
    let prod = |fs: &[Fp]| fs.iter().fold(vec![1u64], |acc, g| fp_mul(&acc, g, p));
    let g0 = prod(left);
    let lcp = f.lc().mod_floor(&pb).to_u64().expect("small");
    let h0: Fp = prod(right).iter().map(|x| x * lcp % p).collect();
    let (_, s, t) = fp_xgcd(&g0, &h0, p);
    let mut g = to_z(&g0);
    let mut h = to_z(&h0);
    // Keep lc(h) = lc(f) exactly.
    let hd = h.c.len() - 1;
    h.c[hd] = f.lc();
    let mut pj = pb.clone();
    for _ in 1..k {
        let gh = g.mul(&h);
        let diff: Vec<BigInt> = (0..f.c.len().max(gh.c.len()))
            .map(|i| {
                let a = f.c.get(i).cloned().unwrap_or_default();
                let b = gh.c.get(i).cloned().unwrap_or_default();
                let d = a - b;
                debug_assert!((&d % &pj).is_zero());
                (d / &pj).mod_floor(&pb)
            })
            .collect();
        let e = reduce(&UPoly::new(diff), p);
        // g·H + h·G ≡ e with s·g + t·h ≡ 1: G = t·e mod g, H = s·e + q·h.
        let (q, big_g) = fp_divrem(&fp_mul(&t, &e, p), &g0, p);
        let big_h = fp_add(&fp_mul(&s, &e, p), &fp_mul(&q, &h0, p), p);
        let next = &pj * &pb;
        g = add_scaled(&g, &to_z(&big_g), &pj, &next);
        h = add_scaled(&h, &to_z(&big_h), &pj, &next);
        pj = next;
    }
    let g = mod_poly(&g, &pk);
    let h = mod_poly(&h, &pk);
    let mut out = hensel(&g, left, p, k);
    out.extend(hensel(&h, right, p, k));
    out
}

fn small_primes() -> impl Iterator<Item = u64> {
    (3u64..).filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
}

/// Irreducible factors of a primitive square-free polynomial.
fn factor_squarefree(f: &UPoly) -> Result<Vec<UPoly>> {
    let f = f.primitive();
    if f.degree() <= 1 {
        return Ok(vec![f]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let df = f.derivative();
    let mut best: Option<(u64, Vec<Fp>)> = None;
    let mut tried = 0;
    for p in small_primes().take(200) {
        if (f.lc() % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = reduce(&f, p);
        if fp_gcd(&fp, &reduce(&df, p), p).len() > 1 {
            continue;
        }
        let fs = fp_factor(&fp_monic(&fp, p), p, &mut rng);
        if fs.len() == 1 {
            return Ok(vec![f]);
        }
        if best.as_ref().is_none_or(|b| fs.len() < b.1.len()) {
            best = Some((p, fs));
        }
        tried += 1;
        if tried == 5 {
            break;
        }
    }
    let (p, fs) = best.ok_or_else(|| Error::Internal("no suitable prime for factoring".into()))?;
    // Factors of lc(f)·g have coefficients below |lc|·2^deg·‖f‖₁.
    let bound = f.lc().abs() * (BigInt::one() << f.degree() as usize) * f.l1();
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut pk = pb.clone();
    while pk <= &bound * 2 {
        pk *= &pb;
        k += 1;
    }
    let mut lifted = hensel(&f, &fs, p, k);
    let mut rest = f.clone();
    let mut found = Vec::new();
    let mut s = 1;
    while 2 * s <= lifted.len() {
        let mut hit = None;
        for subset in combinations(lifted.len(), s) {
            let lc = rest.lc();
            let mut g = UPoly::new(vec![lc.clone()]);
            for &i in &subset {
                g = mod_poly(&g.mul(&lifted[i]), &pk);
            }
            let g = UPoly::new(g.c.iter().map(|x| symmetric(x, &pk)).collect()).primitive();
            if let Some(q) = rest.div_exact(&g) {
                hit = Some((subset, g, q));
                break;
            }
        }
        match hit {
            Some((subset, g, q)) => {
                found.push(g);
                rest = q.primitive();
                lifted = lifted
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, x)| x)
                    .collect();
            }
            None => s += 1,
        }
    }
    if rest.degree() > 0 {
        found.push(rest);
    }
    Ok(found)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

//! Integer factorisation for numbers below 2^127: trial division, Pollard–Brent
//! in Montgomery form and ECM for balanced cofactors. Larger inputs go to
//! `num-prime`.

use std::collections::BTreeMap;

const SMALL_PRIME_LIMIT: u64 = 1 << 12;

fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SMALL_PRIME_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

#[inline(always)]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a0, a1) = (a as u64, (a >> 64) as u64);
    let (b0, b1) = (b as u64, (b >> 64) as u64);
    let p00 = (a0 as u128).wrapping_mul(b0 as u128);
    let p01 = (a0 as u128).wrapping_mul(b1 as u128);
    let p10 = (a1 as u128).wrapping_mul(b0 as u128);
    let p11 = (a1 as u128).wrapping_mul(b1 as u128);
    let mid = (p00 >> 64)
        .wrapping_add(p01 as u64 as u128)
        .wrapping_add(p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | (mid << 64);
    let hi = p11
        .wrapping_add(p01 >> 64)
        .wrapping_add(p10 >> 64)
        .wrapping_add(mid >> 64);
    (hi, lo)
}

/// Montgomery arithmetic modulo an odd `n < 2^127`.
struct Mont {
    n: u128,
    ninv: u128,
    r2: u128,
}

impl Mont {
    fn new(n: u128) -> Mont {
        debug_assert!(n & 1 == 1 && n < (1u128 << 127));
        // Newton iteration for n^{-1} mod 2^128.
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        let ninv = inv.wrapping_neg();
        // r mod n, then r^2 mod n by doubling.
        let r1 = (u128::MAX % n + 1) % n;
        let mut r2 = r1;
        for _ in 0..128 {
            r2 = add_mod(r2, r2, n);
        }
        Mont { n, ninv, r2 }
    }

    #[inline(always)]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let m = lo.wrapping_mul(self.ninv);
        let (mh, ml) = mul_wide(m, self.n);
        let (_, carry) = lo.overflowing_add(ml);
        let t = hi.wrapping_add(mh).wrapping_add(carry as u128);
        if t >= self.n {
            t - self.n
        } else {
            t
        }
    }

    #[inline(always)]
    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    fn to_mont(&self, a: u128) -> u128 {
        self.mul(a % self.n, self.r2)
    }

    fn one(&self) -> u128 {
        self.to_mont(1)
    }

    fn pow(&self, base: u128, mut e: u128) -> u128 {
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

#[inline(always)]
fn add_mod(a: u128, b: u128, n: u128) -> u128 {
    let s = a.wrapping_add(b);
    if s >= n {
        s - n
    } else {
        s
    }
}

#[inline(always)]
fn sub_mod(a: u128, b: u128, n: u128) -> u128 {
    if a >= b {
        a.wrapping_sub(b)
    } else {
        a.wrapping_add(n).wrapping_sub(b)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Miller–Rabin with the first 24 prime bases (deterministic far beyond 2^100
/// for all known counterexamples; BPSW from `num-prime` confirms large cases).
pub fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &small_primes()[..24] {
        if n == p as u128 {
            return true;
        }
        if n.is_multiple_of(p as u128) {
            return false;
        }
    }
    if n < (1u128 << 64) {
        return num_prime::nt_funcs::is_prime64(n as u64);
    }
    let mont = Mont::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let one = mont.one();
    let minus_one = sub_mod(0, one, n);
    'bases: for &a in &small_primes()[..24] {
        let mut x = mont.pow(mont.to_mont(a as u128), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..s {
            x = mont.mul(x, x);
            if x == minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn brent(n: u128, c: u128, r_max: u64) -> Option<u128> {
    let mont = Mont::new(n);
    let c = mont.to_mont(c);
    let f = |x: u128| add_mod(mont.mul(x, x), c, n);
    let m = 128;
    let mut y = mont.to_mont(2);
    let mut r: u64 = 1;
    let mut q = mont.one();
    let mut x;
    let mut ys;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        loop {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mont.mul(q, sub_mod(x, y, n));
            }
            let g = gcd(q, n);
            k += m;
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                // Backtrack one step at a time.
                loop {
                    ys = f(ys);
                    let g = gcd(sub_mod(x, ys, n), n);
                    if g != 1 {
                        return if g == n { None } else { Some(g) };
                    }
                }
            }
            if k >= r {
                break;
            }
        }
        r *= 2;
        if r > r_max {
            return None;
        }
    }
}

/// Pollard–Brent modulo `n < 2^63` with 64-bit Montgomery arithmetic.
fn brent64(n: u64, c: u64) -> Option<u64> {
    let mut inv: u64 = 1;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
    }
    let ninv = inv.wrapping_neg();
    let redc = |t: u128| -> u64 {
        let m = (t as u64).wrapping_mul(ninv);
        let s = t.wrapping_add((m as u128).wrapping_mul(n as u128)) >> 64;
        let s = s as u64;
        if s >= n {
            s - n
        } else {
            s
        }
    };
    let mul = |a: u64, b: u64| redc((a as u128).wrapping_mul(b as u128));
    let add = |a: u64, b: u64| {
        let s = a.wrapping_add(b);
        if s >= n {
            s - n
        } else {
            s
        }
    };
    let sub = |a: u64, b: u64| if a >= b { a - b } else { a.wrapping_add(n).wrapping_sub(b) };
    let r2 = ((1u128 << 64) % n as u128 * ((1u128 << 64) % n as u128) % n as u128) as u64;
    let to_mont = |a: u64| mul(a % n, r2);
    let c = to_mont(c);
    let f = |x: u64| add(mul(x, x), c);
    let g64 = |a: u64, b: u64| gcd(a as u128, b as u128) as u64;
    let m = 128;
    let mut y = to_mont(2);
    let mut r: u64 = 1;
    let mut q = to_mont(1);
    let mut x;
    let mut ys;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        loop {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul(q, sub(x, y));
            }
            let g = g64(q, n);
            k += m;
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                loop {
                    ys = f(ys);
                    let g = g64(sub(x, ys), n);
                    if g != 1 {
                        return if g == n { None } else { Some(g) };
                    }
                }
            }
            if k >= r {
                break;
            }
        }
        r *= 2;
        if r > (1 << 40) {
            return None;
        }
    }
}

/// Modular inverse of `a` modulo odd `n`, or a nontrivial gcd on failure.
fn inverse_or_factor(a: u128, n: u128) -> Result<u128, u128> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(r0 as u128);
    }
    Ok(s0.rem_euclid(n as i128) as u128)
}

/// Lenstra's elliptic curve method on Montgomery curves `By^2 = x^3 + Ax^2 + x`
/// with Suyama's parametrisation, using x-only arithmetic.
fn ecm(n: u128) -> Option<u128> {
    // (B1, curves) schedule; each B2 is 100·B1.
    const SCHEDULE: [(u64, u32); 6] = [
        (500, 8),
        (1_000, 16),
        (2_000, 30),
        (5_000, 60),
        (11_000, 90),
        (50_000, 200),
    ];
    let mont = Mont::new(n);
    let mut sigma: u128 = 6;
    for &(b1, curves) in &SCHEDULE {
        for _ in 0..curves {
            sigma += 1;
            match ecm_curve(&mont, sigma, b1, 100 * b1) {
                Some(g) if g != n => return Some(g),
                _ => {}
            }
        }
    }
    None
}

struct Curve<'a> {
    m: &'a Mont,
    a24: u128,
}

impl Curve<'_> {
    #[inline(always)]
    fn dbl(&self, (x, z): (u128, u128)) -> (u128, u128) {
        let n = self.m.n;
        let s = add_mod(x, z, n);
        let d = sub_mod(x, z, n);
        let t1 = self.m.mul(s, s);
        let t2 = self.m.mul(d, d);
        let t3 = sub_mod(t1, t2, n);
        (
            self.m.mul(t1, t2),
            self.m.mul(t3, add_mod(t2, self.m.mul(self.a24, t3), n)),
        )
    }

    #[inline(always)]
    fn add(&self, p: (u128, u128), q: (u128, u128), diff: (u128, u128)) -> (u128, u128) {
        let n = self.m.n;
        let u = self.m.mul(sub_mod(p.0, p.1, n), add_mod(q.0, q.1, n));
        let v = self.m.mul(add_mod(p.0, p.1, n), sub_mod(q.0, q.1, n));
        let s = add_mod(u, v, n);
        let d = sub_mod(u, v, n);
        (
            self.m.mul(diff.1, self.m.mul(s, s)),
            self.m.mul(diff.0, self.m.mul(d, d)),
        )
    }

    fn ladder(&self, k: u128, p: (u128, u128)) -> (u128, u128) {
        if k == 1 {
            return p;
        }
        let mut r0 = p;
        let mut r1 = self.dbl(p);
        for bit in (0..(127 - k.leading_zeros())).rev() {
            if (k >> bit) & 1 == 1 {
                r0 = self.add(r0, r1, p);
                r1 = self.dbl(r1);
            } else {
                r1 = self.add(r0, r1, p);
                r0 = self.dbl(r0);
            }
        }
        r0
    }
}

fn ecm_curve(m: &Mont, sigma: u128, b1: u64, b2: u64) -> Option<u128> {
    let n = m.n;
    let from_mont = |a: u128| m.redc(0, a);
    let s = m.to_mont(sigma);
    let five = m.to_mont(5);
    let u = sub_mod(m.mul(s, s), five, n);
    let v = add_mod(add_mod(s, s, n), add_mod(s, s, n), n);
    let u3 = m.mul(m.mul(u, u), u);
    let v3 = m.mul(m.mul(v, v), v);
    let vu = sub_mod(v, u, n);
    let num = m.mul(
        m.mul(m.mul(vu, vu), vu),
        add_mod(add_mod(add_mod(u, u, n), u, n), v, n),
    );
    let den = m.mul(m.mul(u3, v), m.to_mont(16));
    let den_inv = match inverse_or_factor(from_mont(den), n) {
        Ok(i) => m.to_mont(i),
        Err(g) => return (g > 1 && g < n).then_some(g),
    };
    let curve = Curve { m, a24: m.mul(num, den_inv) };
    let mut q = (u3, v3);

    // Stage 1: multiply by every prime power up to B1, batched into u128 scalars.
    let mut k: u128 = 1;
    for p in primes_upto(b1) {
        let mut pe = p as u128;
        while pe * (p as u128) <= b1 as u128 {
            pe *= p as u128;
        }
        if k.leading_zeros() < 128 - pe.leading_zeros() + 2 {
            q = curve.ladder(k, q);
            k = 1;
        }
        k *= pe;
    }
    q = curve.ladder(k, q);
    let g = gcd(from_mont(q.1), n);
    if g != 1 {
        return Some(g);
    }

    // Stage 2: baby steps j·Q for odd j < D/2 coprime to D, giant steps m·D·Q.
    const D: u64 = 210;
    let q2 = curve.dbl(q);
    let mut baby = Vec::new();
    let (mut prev, mut cur) = (q, curve.add(q2, q, q));
    baby.push((1u64, q));
    let mut j = 3;
    while j < D / 2 {
        if gcd(j as u128, D as u128) == 1 {
            baby.push((j, cur));
        }
        let next = curve.add(cur, q2, prev);
        prev = cur;
        cur = next;
        j += 2;
    }
    let dq = curve.ladder(D as u128, q);
    let m0 = (b1 / D).max(1);
    let mut giant_prev = curve.ladder((m0 - 1).max(1) as u128 * D as u128, q);
    let mut giant = curve.ladder(m0 as u128 * D as u128, q);
    if m0 == 1 {
        giant_prev = dq;
        giant = curve.dbl(dq);
    }
    let mut acc = m.one();
    let mut step = 0u32;
    let mut mm = m0;
    while mm * D <= b2 {
        for &(_, (xj, zj)) in &baby {
            let t = sub_mod(m.mul(giant.0, zj), m.mul(xj, giant.1), n);
            acc = m.mul(acc, t);
        }
        let next = curve.add(giant, dq, giant_prev);
        giant_prev = giant;
        giant = next;
        mm += 1;
        step += 1;
        if step.is_multiple_of(64) {
            let g = gcd(from_mont(acc), n);
            if g != 1 {
                return Some(g);
            }
        }
    }
    let g = gcd(from_mont(acc), n);
    (g != 1).then_some(g)
}

fn primes_upto(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

fn split(n: u128, out: &mut BTreeMap<u128, u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u128(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    // Perfect squares defeat rho with x^2 + c only rarely, but check cheaply.
    let r = isqrt(n);
    if r * r == n {
        split(r, out);
        split(r, out);
        return;
    }
    if n >= (1u128 << 63) {
        // Short rho pass for small factors, then ECM for balanced cofactors.
        let found = brent(n, 1, 1 << 14).or_else(|| ecm(n));
        if let Some(d) = found {
            split(d, out);
            split(n / d, out);
            return;
        }
    }
    for c in 1u128.. {
        let found = if n < (1u128 << 63) {
            brent64(n as u64, c as u64).map(u128::from)
        } else {
            brent(n, c, 1 << 40)
        };
        if let Some(d) = found {
            split(d, out);
            split(n / d, out);
            return;
        }
    }
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Factorisation of `n < 2^127` as prime ↦ multiplicity.
pub fn factor_u128(mut n: u128) -> BTreeMap<u128, u64> {
    assert!(n < (1u128 << 127), "factor_u128 takes inputs below 2^127");
    let mut out = BTreeMap::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    if n > 1 {
        split(n, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery_matches_plain() {
        let n = (1u128 << 100) - 15;
        let m = Mont::new(n);
        let a = 123456789012345678901234567u128 % n;
        let b = 987654321098765432109876543u128 % n;
        let am = m.to_mont(a);
        let bm = m.to_mont(b);
        let prod = m.redc(0, m.mul(am, bm));
        // Compare against schoolbook modular multiplication by doubling.
        let mut acc = 0u128;
        let mut x = a;
        let mut y = b;
        while y > 0 {
            if y & 1 == 1 {
                acc = add_mod(acc, x, n);
            }
            x = add_mod(x, x, n);
            y >>= 1;
        }
        assert_eq!(prod, acc);
    }

    #[test]
    fn factors_semiprimes() {
        let p: u128 = 1_000_000_007;
        let q: u128 = 998_244_353;
        let f = factor_u128(p * q * 12);
        assert_eq!(f.get(&p), Some(&1));
        assert_eq!(f.get(&q), Some(&1));
        assert_eq!(f.get(&2), Some(&2));
        assert_eq!(f.get(&3), Some(&1));
    }

    #[test]
    fn factors_products_of_large_primes() {
        // 2^61 - 1 and 2^31 - 1 are prime.
        let a: u128 = (1 << 61) - 1;
        let b: u128 = (1 << 31) - 1;
        let f = factor_u128(a * b);
        assert_eq!(f.len(), 2);
        assert!(f.contains_key(&a) && f.contains_key(&b));
        assert!(is_prime_u128(a));
        assert!(!is_prime_u128(a * b));
    }

    #[test]
    fn ecm_splits_balanced_semiprime() {
        // Two 48-bit primes: out of reach for the short rho pass.
        let p: u128 = 281_474_976_710_597;
        let q: u128 = 281_474_976_710_591;
        assert!(is_prime_u128(p) && is_prime_u128(q));
        let g = ecm(p * q).expect("ecm should split");
        assert!(g == p || g == q);
    }

    #[test]
    fn reconstructs_input() {
        for n in [1u128, 2, 97, 1 << 40, 600851475143, 10u128.pow(30) - 1] {
            let f = factor_u128(n);
            let back: u128 = f.iter().map(|(p, e)| p.pow(*e as u32)).product();
            assert_eq!(back, n);
            assert!(f.keys().all(|&p| is_prime_u128(p)));
        }
    }
}

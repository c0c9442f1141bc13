//! Exact and numeric dense linear algebra.
//!
//! Exact routines are fraction-free: rational rows are scaled to integer rows
//! first, determinants use Bareiss elimination and solves use Gauss–Jordan
//! with content reduction.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::denominator_lcm;
use crate::error::{Error, Result};

/// Scales a rational row by the lcm of its denominators; returns the integer
/// row and the scale.
pub fn integer_row(row: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let l = denominator_lcm(row);
    let out = row
        .iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect();
    (out, l)
}

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn det_bigint(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        // Pivot on the smallest nonzero entry to limit growth.
        let pivot = (k..n)
            .filter(|&i| !a[i][k].is_zero())
            .min_by_key(|&i| a[i][k].bits());
        let Some(p) = pivot else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = !sign;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let akk = &pivot_row[k];
        for row in rest.iter_mut() {
            let aik = row[k].clone();
            for j in (k + 1)..n {
                let mut v = &row[j] * akk;
                if !aik.is_zero() && !pivot_row[j].is_zero() {
                    v -= &aik * &pivot_row[j];
                }
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
            row[k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Determinant of a square rational matrix.
pub fn det_rational(rows: &[Vec<BigRational>]) -> Result<BigRational> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let mut scale = BigInt::one();
    let mut ints = Vec::with_capacity(n);
    for r in rows {
        let (ir, l) = integer_row(r);
        scale *= l;
        ints.push(ir);
    }
    Ok(BigRational::new(det_bigint(ints), scale))
}

fn primitive(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in row.iter_mut() {
        if !x.is_zero() {
            *x = &*x / &g;
        }
    }
}

/// Row `r ← a·r − b·s`, skipping zero products.
fn combine(r: &mut [BigInt], a: &BigInt, b: &BigInt, s: &[BigInt], from: usize) {
    for j in from..r.len() {
        let sj = &s[j];
        let rj = &mut r[j];
        if rj.is_zero() {
            if !sj.is_zero() {
                *rj = -(b * sj);
            }
        } else {
            *rj *= a;
            if !sj.is_zero() {
                *rj -= b * sj;
            }
        }
    }
}

/// Solves `A x = b_k` for each right-hand side with free variables set to
/// zero and pivots taken greedily from the left, so the answer is the
/// minimal solution in the column order of `A`.
///
/// `a` is row-major `m × u`; each entry of `rhs` has length `m`. Returns
/// `None` for a right-hand side outside the column span.
pub fn solve_minimal(
    a: &[Vec<BigRational>],
    rhs: &[Vec<BigRational>],
) -> Result<Vec<Option<Vec<BigRational>>>> {
    let m = a.len();
    let u = a.first().map_or(0, Vec::len);
    for r in a {
        if r.len() != u {
            return Err(Error::DimensionMismatch {
                expected: u,
                found: r.len(),
            });
        }
    }
    for b in rhs {
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
    }
    let nr = rhs.len();
    let mut rows: Vec<Vec<BigInt>> = (0..m)
        .map(|i| {
            let mut full: Vec<BigRational> = a[i].clone();
            full.extend(rhs.iter().map(|b| b[i].clone()));
            let (mut ir, _) = integer_row(&full);
            primitive(&mut ir);
            ir
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for c in 0..u {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m)
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].bits())
        else {
            continue;
        };
        rows.swap(p, rank);
        let pivot_row = rows[rank].clone();
        let pv = &pivot_row[c];
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let g = pv.gcd(&row[c]);
            let a_mul = pv / &g;
            let b_mul = &row[c] / &g;
            combine(row, &a_mul, &b_mul, &pivot_row, 0);
            primitive(row);
        }
        pivots.push(c);
        rank += 1;
    }
    let mut out = Vec::with_capacity(nr);
    for k in 0..nr {
        let col = u + k;
        if rows[rank..].iter().any(|r| !r[col].is_zero()) {
            out.push(None);
            continue;
        }
        let mut x = vec![BigRational::zero(); u];
        for (r, &c) in pivots.iter().enumerate() {
            if !rows[r][col].is_zero() {
                x[c] = BigRational::new(rows[r][col].clone(), rows[r][c].clone());
            }
        }
        out.push(Some(x));
    }
    Ok(out)
}

/// Echelon basis that grows one vector at a time; answers "does this vector
/// increase the rank?" exactly.
#[derive(Clone, Debug, Default)]
pub struct IncrementalRank {
    width: usize,
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl IncrementalRank {
    pub fn new(width: usize) -> IncrementalRank {
        IncrementalRank {
            width,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Reduces `v` against the stored rows; the remainder is zero iff `v`
    /// lies in their span.
    fn reduce(&self, v: &[BigRational]) -> Result<Vec<BigInt>> {
        if v.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                found: v.len(),
            });
        }
        let (mut w, _) = integer_row(v);
        primitive(&mut w);
        for (c, row) in &self.rows {
            if w[*c].is_zero() {
                continue;
            }
            let g = row[*c].gcd(&w[*c]);
            let a = &row[*c] / &g;
            let b = &w[*c] / &g;
            combine(&mut w, &a, &b, row, *c);
            primitive(&mut w);
        }
        Ok(w)
    }

    pub fn is_independent(&self, v: &[BigRational]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().any(|x| !x.is_zero()))
    }

    /// Adds `v` if it increases the rank; returns whether it did.
    pub fn insert(&mut self, v: &[BigRational]) -> Result<bool> {
        let w = self.reduce(v)?;
        match w.iter().position(|x| !x.is_zero()) {
            None => Ok(false),
            Some(c) => {
                self.rows.push((c, w));
                Ok(true)
            }
        }
    }
}

/// Rank of a rational matrix.
pub fn rank(rows: &[Vec<BigRational>]) -> Result<usize> {
    let width = rows.first().map_or(0, Vec::len);
    let mut acc = IncrementalRank::new(width);
    for r in rows {
        acc.insert(r)?;
    }
    Ok(acc.rank())
}

/// `log|det|` of a complex matrix by partially pivoted LU.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexLogDet {
    /// `−∞` when a pivot vanishes exactly.
    pub log_abs: f64,
    /// Rounding bound on `log_abs`, inflated by a growth estimate.
    pub err: f64,
    /// Ratio of largest to smallest pivot modulus; a cheap conditioning proxy.
    pub pivot_ratio: f64,
}

pub fn log_abs_det_complex(mut a: Vec<Vec<Complex64>>) -> Result<ComplexLogDet> {
    let n = a.len();
    if let Some(bad) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let mut log_abs = 0.0;
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[i][k].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return Ok(ComplexLogDet {
                log_abs: f64::NEG_INFINITY,
                err: 0.0,
                pivot_ratio: f64::INFINITY,
            });
        }
        a.swap(p, k);
        max_piv = max_piv.max(best);
        min_piv = min_piv.min(best);
        log_abs += best.ln();
        let (top, rest) = a.split_at_mut(k + 1);
        let prow = &top[k];
        let inv = prow[k].inv();
        for row in rest.iter_mut() {
            let f = row[k] * inv;
            if f == Complex64::zero() {
                continue;
            }
            for j in (k + 1)..n {
                row[j] -= f * prow[j];
            }
        }
    }
    let pivot_ratio = max_piv / min_piv;
    // Backward-stable LU: relative perturbation ≈ n·ε·growth; first-order
    // change in log|det| is bounded by n·(that)·(scale/min pivot).
    let eps = f64::EPSILON;
    let nf = n as f64;
    let err = nf * nf * eps * (scale / min_piv).max(1.0) * 4.0 + nf * eps;
    Ok(ComplexLogDet {
        log_abs,
        err,
        pivot_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det_rational(&m(&[&[1, 2], &[3, 4]])).unwrap(), int(-2));
        assert_eq!(det_rational(&m(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert_eq!(
            det_rational(&m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]])).unwrap(),
            int(0)
        );
        let q = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 4), rat(1, 5)]];
        assert_eq!(det_rational(&q).unwrap(), rat(1, 10) - rat(1, 12));
        assert_eq!(det_rational(&[]).unwrap(), int(1));
    }

    #[test]
    fn minimal_solution_prefers_left_columns() {
        // x0 + x1 = 1 with both columns equal: pivot on x0, x1 free.
        let a = m(&[&[1, 1]]);
        let sol = solve_minimal(&a, &[vec![int(1)]]).unwrap();
        assert_eq!(sol[0].as_ref().unwrap(), &vec![int(1), int(0)]);
        let inconsistent = solve_minimal(&m(&[&[1], &[1]]), &[vec![int(1), int(2)]]).unwrap();
        assert!(inconsistent[0].is_none());
    }

    #[test]
    fn incremental_rank_tracks_span() {
        let mut r = IncrementalRank::new(3);
        assert!(r.insert(&[int(1), int(2), int(3)]).unwrap());
        assert!(!r.insert(&[int(2), int(4), int(6)]).unwrap());
        assert!(r.insert(&[int(0), int(1), int(0)]).unwrap());
        assert!(!r.is_independent(&[int(1), int(5), int(3)]).unwrap());
        assert_eq!(r.rank(), 2);
    }

    #[test]
    fn complex_det_matches_exact() {
        let a = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let d = log_abs_det_complex(a).unwrap();
        assert!((d.log_abs - 2f64.ln()).abs() <= d.err.max(1e-15));
    }
}

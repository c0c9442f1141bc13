//! Sparse homogeneous forms with exact rational coefficients, polynomial maps
//! between projective spaces, and projective points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{format_rational, ln_abs_rational, ord_rat, rational_to_f64};
use crate::error::{Error, Result};
use crate::pf::{LogMag, Place};

/// Largest number of terms any intermediate expansion may hold.
pub const TERM_CAP: usize = 10_000_000;

/// An exponent vector. Ordered by total degree, then lexicographically with
/// `x0` largest, so `x0^n` comes first among degree-`n` monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn evaluate(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::one();
        for (x, &a) in point.iter().zip(&self.0) {
            if a > 0 {
                acc *= num_traits::pow::pow(x.clone(), a as usize);
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All degree-`n` monomials in `nvars` variables, graded-lex (`x0^n` first).
pub fn monomials_of_degree(nvars: usize, n: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            rec(nvars, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(nvars, n, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// A homogeneous form. The zero form keeps a nominal degree so that maps with
/// a vanishing coordinate still know their degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomoForm {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, BigRational>,
}

impl HomoForm {
    pub fn zero(nvars: usize, degree: u32) -> HomoForm {
        HomoForm {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> HomoForm {
        HomoForm::monomial(Monomial(vec![0; nvars]), c)
    }

    pub fn monomial(m: Monomial, c: BigRational) -> HomoForm {
        let mut f = HomoForm::zero(m.nvars(), m.degree());
        if !c.is_zero() {
            f.terms.insert(m, c);
        }
        f
    }

    /// The coordinate `x_i`.
    pub fn variable(nvars: usize, i: usize) -> HomoForm {
        let mut e = vec![0; nvars];
        e[i] = 1;
        HomoForm::monomial(Monomial(e), BigRational::one())
    }

    /// Builds a form from terms, merging duplicates and dropping zeros.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<HomoForm> {
        let mut f = HomoForm::zero(nvars, degree);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: m.nvars(),
                });
            }
            if m.degree() != degree {
                return Err(Error::DegreeMismatch(format!(
                    "term of degree {} in a form of degree {degree}",
                    m.degree()
                )));
            }
            f.add_term(m, c);
        }
        Ok(f)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Dense coefficient vector over `monomials_of_degree(nvars, degree)`.
    pub fn dense(&self, basis: &[Monomial]) -> Vec<BigRational> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    fn check_same_shape(&self, other: &HomoForm) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "cannot add forms of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &HomoForm) -> Result<HomoForm> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &HomoForm) -> Result<HomoForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> HomoForm {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, q: &BigRational) -> HomoForm {
        if q.is_zero() {
            return HomoForm::zero(self.nvars, self.degree);
        }
        HomoForm {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul(&self, other: &HomoForm) -> Result<HomoForm> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        let degree = self.degree + other.degree;
        if self.is_zero() || other.is_zero() {
            return Ok(HomoForm::zero(self.nvars, degree));
        }
        let pairs = self.terms.len().saturating_mul(other.terms.len());
        let mut acc: HashMap<Vec<u32>, BigRational> =
            HashMap::with_capacity(pairs.min(1 << 16));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                let prod = ca * cb;
                match acc.get_mut(&e) {
                    Some(v) => *v += prod,
                    None => {
                        if acc.len() >= TERM_CAP {
                            return Err(Error::ResourceCap {
                                what: "terms in a polynomial product".into(),
                                limit: TERM_CAP,
                                partial: acc.len(),
                            });
                        }
                        acc.insert(e, prod);
                    }
                }
            }
        }
        Ok(HomoForm {
            nvars: self.nvars,
            degree,
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (Monomial(e), c))
                .collect(),
        })
    }

    pub fn pow(&self, k: u32) -> Result<HomoForm> {
        let mut acc = HomoForm::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Exact evaluation.
    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let powers = PowerTable::exact(point, self.degree);
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| c * powers.monomial(m))
            .fold(BigRational::zero(), |a, b| a + b))
    }

    /// Numeric evaluation with compensated summation; returns the value and
    /// a bound on its rounding error.
    pub fn evaluate_complex(&self, point: &[Complex64]) -> Result<(Complex64, f64)> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(NumericForm::new(self).evaluate(point))
    }

    /// Substitutes `inner` for the variables.
    pub fn compose(&self, inner: &PolyMap) -> Result<HomoForm> {
        if inner.nvars_out() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: inner.nvars_out(),
            });
        }
        let n_in = inner.nvars();
        let degree = self.degree * inner.degree();
        let mut cache: Vec<Vec<HomoForm>> = inner
            .forms()
            .iter()
            .map(|f| vec![HomoForm::constant(n_in, BigRational::one()), f.clone()])
            .collect();
        let mut out = HomoForm::zero(n_in, degree);
        for (m, c) in &self.terms {
            let mut t = HomoForm::constant(n_in, c.clone());
            for (j, &a) in m.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while cache[j].len() <= a as usize {
                    let next = cache[j].last().unwrap().mul(&inner.forms()[j])?;
                    cache[j].push(next);
                }
                t = t.mul(&cache[j][a as usize])?;
                if t.is_zero() {
                    break;
                }
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
            if out.terms.len() > TERM_CAP {
                return Err(Error::ResourceCap {
                    what: "terms in a composition".into(),
                    limit: TERM_CAP,
                    partial: out.terms.len(),
                });
            }
        }
        Ok(out)
    }

    /// Division by a single form: returns `(q, r)` with `self = q·g + r` and
    /// no term of `r` divisible by the lex-leading monomial of `g`. Since
    /// `{g}` is a Gröbner basis of `(g)`, `r = 0` iff `g` divides `self`.
    pub fn divide(&self, g: &HomoForm) -> Result<(HomoForm, HomoForm)> {
        if g.is_zero() {
            return Err(Error::Domain("division by the zero form".into()));
        }
        if g.nvars != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: g.nvars,
            });
        }
        let (lm, lc) = g.leading_term().unwrap();
        let (lm, lc) = (lm.clone(), lc.clone());
        let qdeg = self.degree.checked_sub(g.degree);
        let mut q = HomoForm::zero(self.nvars, qdeg.unwrap_or(0));
        let mut r = HomoForm::zero(self.nvars, self.degree);
        let mut p = self.clone();
        while let Some((m, c)) = p.leading_term() {
            let (m, c) = (m.clone(), c.clone());
            if qdeg.is_some() && lm.divides(&m) {
                let t = HomoForm::monomial(lm.quotient_of(&m), c / &lc);
                p = p.sub(&t.mul(g)?)?;
                q = q.add(&t)?;
            } else {
                p.terms.remove(&m);
                r.add_term(m, c);
            }
        }
        Ok((q, r))
    }

    /// Lexicographically largest monomial with its coefficient.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next()
    }

    /// Sum of absolute values of the coefficients.
    pub fn coeff_l1(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Largest absolute value of a coefficient.
    pub fn coeff_max_abs(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Parses the text format, e.g. `"x0^2 - 2*x1^2"` or `"3/2*x*y"`.
    ///
    /// Variables are `x0, x1, …` or the aliases `x, y, z, w`. With
    /// `nvars = None` the count is the largest index used plus one (at
    /// least 2). `degree` fixes the degree of a zero form.
    pub fn parse(text: &str, nvars: Option<usize>, degree: Option<u32>) -> Result<HomoForm> {
        let raw = parse_terms(text)?;
        let used = raw
            .iter()
            .flat_map(|(_, e)| e.keys().copied())
            .max()
            .map_or(0, |m| m + 1);
        let nv = nvars.unwrap_or(used.max(2));
        if used > nv {
            return Err(Error::parse(format!(
                "variable x{} out of range for {nv} variables",
                used - 1
            )));
        }
        let mut terms = Vec::new();
        let mut deg: Option<u32> = degree;
        for (c, e) in raw {
            let mut v = vec![0u32; nv];
            for (i, a) in e {
                v[i] += a;
            }
            let m = Monomial(v);
            match deg {
                None => deg = Some(m.degree()),
                Some(d) if d != m.degree() && !c.is_zero() => {
                    return Err(Error::DegreeMismatch(format!(
                        "form {text:?} is not homogeneous: found degrees {d} and {}",
                        m.degree()
                    )))
                }
                _ => {}
            }
            terms.push((m, c));
        }
        let deg = deg.unwrap_or(0);
        let terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        HomoForm::from_terms(nv, deg, terms)
    }
}

impl fmt::Display for HomoForm {
    /// Canonical text: terms in graded-lex order, every exponent written out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mag = format_rational(&c.abs());
            match (k, c.is_negative()) {
                (0, true) => write!(f, "-{mag}")?,
                (0, false) => write!(f, "{mag}")?,
                (_, true) => write!(f, " - {mag}")?,
                (_, false) => write!(f, " + {mag}")?,
            }
            for (i, a) in m.0.iter().enumerate() {
                write!(f, "*x{i}^{a}")?;
            }
        }
        Ok(())
    }
}

type RawTerm = (BigRational, BTreeMap<usize, u32>);

fn parse_terms(text: &str) -> Result<Vec<RawTerm>> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let err = |pos: usize, msg: &str| Error::Parse {
        line: 1,
        column: pos + 1,
        message: msg.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let read_digits = |pos: &mut usize| -> String {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        chars[start..*pos].iter().collect()
    };
    let mut out = Vec::new();
    skip_ws(&mut pos);
    if pos == chars.len() {
        return Err(err(pos, "empty form"));
    }
    let mut first = true;
    loop {
        skip_ws(&mut pos);
        let mut sign = BigRational::one();
        if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
            if chars[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        } else if !first {
            return Err(err(pos, "expected '+' or '-'"));
        }
        first = false;
        let mut coeff = sign;
        let mut exps: BTreeMap<usize, u32> = BTreeMap::new();
        loop {
            skip_ws(&mut pos);
            if pos >= chars.len() {
                return Err(err(pos, "expected a factor"));
            }
            let ch = chars[pos];
            if ch.is_ascii_digit() {
                let num = read_digits(&mut pos);
                let mut q = BigRational::from_integer(num.parse::<BigInt>().unwrap());
                skip_ws(&mut pos);
                if pos < chars.len() && chars[pos] == '/' {
                    pos += 1;
                    skip_ws(&mut pos);
                    let den = read_digits(&mut pos);
                    if den.is_empty() {
                        return Err(err(pos, "expected a denominator"));
                    }
                    let d: BigInt = den.parse().unwrap();
                    if d.is_zero() {
                        return Err(err(pos, "zero denominator"));
                    }
                    q /= BigRational::from_integer(d);
                }
                coeff *= q;
            } else if ch.is_ascii_alphabetic() {
                let idx = match ch {
                    'x' if pos + 1 < chars.len() && chars[pos + 1].is_ascii_digit() => {
                        pos += 1;
                        read_digits(&mut pos)
                            .parse::<usize>()
                            .map_err(|_| err(pos, "bad variable index"))?
                    }
                    'x' => {
                        pos += 1;
                        0
                    }
                    'y' => {
                        pos += 1;
                        1
                    }
                    'z' => {
                        pos += 1;
                        2
                    }
                    'w' => {
                        pos += 1;
                        3
                    }
                    _ => return Err(err(pos, "unknown variable")),
                };
                skip_ws(&mut pos);
                let mut a = 1u32;
                if pos < chars.len() && chars[pos] == '^' {
                    pos += 1;
                    skip_ws(&mut pos);
                    let at = pos;
                    let digits = read_digits(&mut pos);
                    a = digits.parse().map_err(|_| err(at, "expected an exponent"))?;
                }
                *exps.entry(idx).or_insert(0) += a;
            } else {
                return Err(err(pos, "unexpected character"));
            }
            skip_ws(&mut pos);
            if pos < chars.len() && chars[pos] == '*' {
                pos += 1;
                continue;
            }
            break;
        }
        out.push((coeff, exps));
        skip_ws(&mut pos);
        if pos >= chars.len() {
            break;
        }
    }
    Ok(out)
}

/// Powers `x_j^a` for `a ≤ degree`, shared across terms.
struct PowerTable {
    pows: Vec<Vec<BigRational>>,
}

impl PowerTable {
    fn exact(point: &[BigRational], degree: u32) -> PowerTable {
        let pows = point
            .iter()
            .map(|x| {
                let mut v = Vec::with_capacity(degree as usize + 1);
                v.push(BigRational::one());
                for a in 1..=degree as usize {
                    let next = &v[a - 1] * x;
                    v.push(next);
                }
                v
            })
            .collect();
        PowerTable { pows }
    }

    fn monomial(&self, m: &Monomial) -> BigRational {
        let mut acc = BigRational::one();
        for (j, &a) in m.0.iter().enumerate() {
            if a > 0 {
                acc *= &self.pows[j][a as usize];
            }
        }
        acc
    }
}

/// A form compiled for repeated binary64 evaluation.
#[derive(Clone, Debug)]
pub struct NumericForm {
    nvars: usize,
    degree: u32,
    terms: Vec<(Vec<u32>, f64)>,
}

impl NumericForm {
    pub fn new(f: &HomoForm) -> NumericForm {
        NumericForm {
            nvars: f.nvars,
            degree: f.degree,
            terms: f
                .terms
                .iter()
                .map(|(m, c)| (m.0.clone(), rational_to_f64(c)))
                .collect(),
        }
    }

    /// Value and rounding-error bound at `point`.
    pub fn evaluate(&self, point: &[Complex64]) -> (Complex64, f64) {
        debug_assert_eq!(point.len(), self.nvars);
        let d = self.degree as usize;
        let pows: Vec<Vec<Complex64>> = point
            .iter()
            .map(|z| {
                let mut v = Vec::with_capacity(d + 1);
                v.push(Complex64::new(1.0, 0.0));
                for a in 1..=d {
                    v.push(v[a - 1] * z);
                }
                v
            })
            .collect();
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        let mut mag = 0.0;
        for (e, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (j, &a) in e.iter().enumerate() {
                if a > 0 {
                    t *= pows[j][a as usize];
                }
            }
            mag += t.norm();
            re.add(t.re);
            im.add(t.im);
        }
        let v = Complex64::new(re.sum(), im.sum());
        let err = 8.0 * (self.terms.len() + d + 1) as f64 * f64::EPSILON * mag;
        (v, err)
    }
}

#[derive(Default)]
struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn sum(&self) -> f64 {
        self.s + self.c
    }
}

/// `N+1` forms of a common degree in `N+1` variables (or, for substitution
/// purposes, any number of forms in a common variable set).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    forms: Vec<HomoForm>,
}

impl PolyMap {
    /// Validates shape: at least two forms, square (`nvars` equals the number
    /// of forms), common degree `d ≥ 1`, not identically zero.
    pub fn new(forms: Vec<HomoForm>) -> Result<PolyMap> {
        let m = PolyMap::new_rect(forms)?;
        if m.nvars() != m.forms.len() {
            return Err(Error::DimensionMismatch {
                expected: m.forms.len(),
                found: m.nvars(),
            });
        }
        if m.forms.len() < 2 {
            return Err(Error::Invalid("a map needs at least two forms".into()));
        }
        Ok(m)
    }

    /// Like [`PolyMap::new`] without requiring as many forms as variables.
    pub fn new_rect(forms: Vec<HomoForm>) -> Result<PolyMap> {
        let first = forms
            .first()
            .ok_or_else(|| Error::Invalid("a map needs at least one form".into()))?;
        let (nv, d) = (first.nvars, first.degree);
        for f in &forms {
            if f.nvars != nv {
                return Err(Error::DimensionMismatch {
                    expected: nv,
                    found: f.nvars,
                });
            }
            if f.degree != d {
                return Err(Error::DegreeMismatch(format!(
                    "forms of degrees {d} and {} in one map",
                    f.degree
                )));
            }
        }
        if d == 0 {
            return Err(Error::Invalid("map degree must be at least 1".into()));
        }
        if forms.iter().all(HomoForm::is_zero) {
            return Err(Error::Invalid("all forms vanish".into()));
        }
        Ok(PolyMap { forms })
    }

    /// Parses one string per form; the number of variables is the number of
    /// forms.
    pub fn parse<S: AsRef<str>>(forms: &[S]) -> Result<PolyMap> {
        let nv = forms.len();
        let mut parsed: Vec<HomoForm> = Vec::with_capacity(nv);
        let mut deg = None;
        for s in forms {
            let f = HomoForm::parse(s.as_ref(), Some(nv), None)?;
            if !f.is_zero() {
                deg.get_or_insert(f.degree);
            }
            parsed.push(f);
        }
        if let Some(d) = deg {
            for f in parsed.iter_mut() {
                if f.is_zero() {
                    f.degree = d;
                }
            }
        }
        PolyMap::new(parsed)
    }

    pub fn identity(nvars: usize) -> PolyMap {
        PolyMap {
            forms: (0..nvars).map(|i| HomoForm::variable(nvars, i)).collect(),
        }
    }

    pub fn forms(&self) -> &[HomoForm] {
        &self.forms
    }

    /// Number of variables `N+1`.
    pub fn nvars(&self) -> usize {
        self.forms[0].nvars
    }

    /// Number of output coordinates.
    pub fn nvars_out(&self) -> usize {
        self.forms.len()
    }

    /// `N`, the projective dimension.
    pub fn dim(&self) -> usize {
        self.nvars() - 1
    }

    pub fn degree(&self) -> u32 {
        self.forms[0].degree
    }

    pub fn scale(&self, q: &BigRational) -> PolyMap {
        PolyMap {
            forms: self.forms.iter().map(|f| f.scale(q)).collect(),
        }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigRational> {
        self.forms.iter().flat_map(|f| f.terms.values())
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &PolyMap, inner: &PolyMap) -> Result<PolyMap> {
        let forms = outer
            .forms
            .iter()
            .map(|f| f.compose(inner))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyMap { forms })
    }

    /// The `k`-th iterate by repeated squaring.
    pub fn iterate(&self, k: u32) -> Result<PolyMap> {
        if k == 0 {
            return Err(Error::Invalid("iterate index must be positive".into()));
        }
        let mut acc: Option<PolyMap> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => PolyMap::compose(&a, &base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = PolyMap::compose(&base, &base)?;
        }
        Ok(acc.unwrap())
    }

    pub fn evaluate(&self, point: &[BigRational]) -> Result<Vec<BigRational>> {
        self.forms.iter().map(|f| f.evaluate(point)).collect()
    }

    /// `log max |c|_v` over all coefficients.
    pub fn coeff_sup_log(&self, place: &Place) -> LogMag {
        match place {
            Place::Prime(p) => {
                let min_ord = self.coefficients().map(|c| ord_rat(c, p)).min();
                match min_ord {
                    Some(k) => LogMag::log_prime(p.clone(), BigRational::from_integer((-k).into())),
                    None => LogMag::zero(),
                }
            }
            Place::Archimedean => {
                let m = self
                    .coefficients()
                    .map(|c| c.abs())
                    .max()
                    .unwrap_or_else(BigRational::one);
                let (v, e) = ln_abs_rational(&m);
                LogMag::real(v, e)
            }
        }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.forms.iter().map(ToString::to_string).collect()
    }
}

impl Serialize for PolyMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        PolyMap::parse(&v).map_err(serde::de::Error::custom)
    }
}

/// A lift of a projective point: exact rationals or complex binary64, never
/// mixed and never the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjPoint {
    Exact(Vec<BigRational>),
    Numeric(Vec<Complex64>),
}

impl ProjPoint {
    pub fn exact(coords: Vec<BigRational>) -> Result<ProjPoint> {
        if coords.iter().all(Zero::is_zero) {
            return Err(Error::Domain("the zero vector is not a lift".into()));
        }
        Ok(ProjPoint::Exact(coords))
    }

    pub fn numeric(coords: Vec<Complex64>) -> Result<ProjPoint> {
        if coords.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::Domain("the zero vector is not a lift".into()));
        }
        Ok(ProjPoint::Numeric(coords))
    }

    /// Parses `"a/b,c/d,…"`.
    pub fn parse(text: &str) -> Result<ProjPoint> {
        let coords = text
            .split(',')
            .map(crate::arith::parse_rational)
            .collect::<Result<Vec<_>>>()?;
        ProjPoint::exact(coords)
    }

    pub fn len(&self) -> usize {
        match self {
            ProjPoint::Exact(v) => v.len(),
            ProjPoint::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ProjPoint::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&[BigRational]> {
        match self {
            ProjPoint::Exact(v) => Some(v),
            ProjPoint::Numeric(_) => None,
        }
    }

    /// Complex coordinates (exact lifts are rounded).
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            ProjPoint::Exact(v) => v
                .iter()
                .map(|x| Complex64::new(rational_to_f64(x), 0.0))
                .collect(),
            ProjPoint::Numeric(v) => v.clone(),
        }
    }

    pub fn scale_exact(&self, q: &BigRational) -> Result<ProjPoint> {
        match self {
            ProjPoint::Exact(v) => ProjPoint::exact(v.iter().map(|x| x * q).collect()),
            ProjPoint::Numeric(_) => Err(Error::Invalid("exact scaling of a numeric lift".into())),
        }
    }

    /// Projective equality: the lifts are proportional.
    pub fn proportional(&self, other: &ProjPoint) -> bool {
        match (self, other) {
            (ProjPoint::Exact(a), ProjPoint::Exact(b)) if a.len() == b.len() => {
                (0..a.len()).all(|i| (i + 1..a.len()).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
            }
            _ => false,
        }
    }
}

/// Evaluates every form of `map` at a lift in the lift's own mode.
pub enum MapValue {
    Exact(Vec<BigRational>),
    Numeric(Vec<Complex64>, f64),
}

pub fn apply(map: &PolyMap, p: &ProjPoint) -> Result<MapValue> {
    if p.len() != map.nvars() {
        return Err(Error::DimensionMismatch {
            expected: map.nvars(),
            found: p.len(),
        });
    }
    match p {
        ProjPoint::Exact(v) => Ok(MapValue::Exact(map.evaluate(v)?)),
        ProjPoint::Numeric(v) => {
            let mut err: f64 = 0.0;
            let mut out = Vec::with_capacity(map.forms.len());
            for f in &map.forms {
                let (z, e) = NumericForm::new(f).evaluate(v);
                err = err.max(e);
                out.push(z);
            }
            Ok(MapValue::Numeric(out, err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn map(s: &[&str]) -> PolyMap {
        PolyMap::parse(s).unwrap()
    }

    #[test]
    fn evaluates_examples() {
        let f = HomoForm::parse("x^2 + 3*y^2", None, None).unwrap();
        assert_eq!(f.evaluate(&[int(1), int(2)]).unwrap(), int(13));
        assert_eq!(f.evaluate(&[int(0), int(0)]).unwrap(), int(0));
        let g = HomoForm::parse("x*y", None, None).unwrap();
        assert_eq!(g.evaluate(&[int(3), rat(1, 3)]).unwrap(), int(1));
    }

    #[test]
    fn composes_examples() {
        let sq = map(&["x^2", "y^2"]);
        assert_eq!(PolyMap::compose(&sq, &sq).unwrap(), map(&["x^4", "y^4"]));
        assert_eq!(PolyMap::compose(&sq, &PolyMap::identity(2)).unwrap(), sq);
        let cheb = map(&["x^2 - 2*y^2", "y^2"]);
        assert_eq!(
            PolyMap::compose(&cheb, &cheb).unwrap(),
            map(&["x^4 - 4*x^2*y^2 + 2*y^4", "y^4"])
        );
        assert_eq!(sq.iterate(3).unwrap(), map(&["x^8", "y^8"]));
        assert!(sq.iterate(0).is_err());
    }

    #[test]
    fn sup_norms() {
        let sq = map(&["x^2", "y^2"]);
        assert!(sq.coeff_sup_log(&Place::p(7)).is_exact_zero());
        let half = map(&["x^2 + 1/2*y^2", "y^2"]);
        assert_eq!(
            half.coeff_sup_log(&Place::p(2)),
            LogMag::log_prime(2u32.into(), int(1))
        );
        let three = map(&["3*x^2", "y^2"]);
        assert!((three.coeff_sup_log(&Place::Archimedean).value() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn canonical_text() {
        let f = HomoForm::parse("-2*y^2 + x^2 - 1/3 * x*y", None, None).unwrap();
        let s = f.to_string();
        assert_eq!(s, "1*x0^2*x1^0 - 1/3*x0^1*x1^1 - 2*x0^0*x1^2");
        assert_eq!(HomoForm::parse(&s, Some(2), None).unwrap().to_string(), s);
        assert!(matches!(
            HomoForm::parse("x^2 + y", None, None),
            Err(Error::DegreeMismatch(_))
        ));
        assert!(matches!(
            HomoForm::parse("x^2 + $", None, None),
            Err(Error::Parse { column: 7, .. })
        ));
    }

    #[test]
    fn division() {
        let g = HomoForm::parse("x - y", None, None).unwrap();
        let f = HomoForm::parse("x^2 - y^2", None, None).unwrap();
        let (q, r) = f.divide(&g).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, HomoForm::parse("x + y", None, None).unwrap());
        let g2 = HomoForm::parse("x - 2*y", None, None).unwrap();
        assert!(!f.divide(&g2).unwrap().1.is_zero());
    }

    #[test]
    fn graded_lex_enumeration() {
        let m = monomials_of_degree(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0].0, vec![2, 0, 0]);
        assert_eq!(m[1].0, vec![1, 1, 0]);
        assert_eq!(m[5].0, vec![0, 0, 2]);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }
}

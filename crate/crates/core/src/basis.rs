//! The collection 𝒢 of powers of coordinate forms of iterates, the degree
//! bookkeeping `⌊n⌋_𝒢`, the spanning family of products `η·G_1⋯G_J`, and
//! greedy extraction of a special basis `H(n)` modulo the ideal of `X`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::binomial;
use crate::dynsys::DynSystem;
use crate::error::{Error, Result};
use crate::homopoly::{monomials_of_degree, HomoForm, Monomial};
use crate::linalg::IncrementalRank;

/// `(F_i^{(k)})^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub i: usize,
    pub k: u32,
    pub j: u32,
}

impl Factor {
    pub fn degree(&self, d: u32) -> u64 {
        self.j as u64 * (d as u64).pow(self.k)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(F{}^({}))^{}", self.i, self.k, self.j)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Monomial(Monomial),
    Product { eta: Monomial, factors: Vec<Factor> },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mono = |m: &Monomial| {
            let parts: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        };
        match self {
            Provenance::Monomial(m) => write!(f, "{}", mono(m)),
            Provenance::Product { eta, factors } => {
                write!(f, "{}", mono(eta))?;
                for fc in factors {
                    write!(f, "*{fc}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenElement {
    pub provenance: Provenance,
    pub expanded: HomoForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisFamily {
    pub n: u32,
    /// `c(n) = h^0(X, O(n))`.
    pub c: usize,
    pub elements: Vec<GenElement>,
    /// Enumeration positions of the kept elements.
    pub rank_profile: Vec<usize>,
    pub candidates_scanned: usize,
    /// Factor counts below `⌊t₁⌋` were needed.
    pub relaxed: bool,
}

impl BasisFamily {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &HomoForm> {
        self.elements.iter().map(|e| &e.expanded)
    }

    pub fn nvars(&self) -> usize {
        self.elements
            .first()
            .map(|e| e.expanded.nvars())
            .unwrap_or(0)
    }
}

/// `{ j·d^k : k ≥ 1, 1 ≤ j ≤ d−1 } ∩ [1, nmax]`.
pub fn gen_degrees_for(d: u32, nmax: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let d = d as u64;
    if d < 2 {
        return out;
    }
    let mut p = d;
    while p <= nmax {
        for j in 1..d {
            if j * p <= nmax {
                out.insert(j * p);
            }
        }
        p = match p.checked_mul(d) {
            Some(q) => q,
            None => break,
        };
    }
    out
}

pub fn gen_degrees(system: &DynSystem, nmax: u64) -> BTreeSet<u64> {
    gen_degrees_for(system.degree(), nmax)
}

/// The largest `n' ∈ deg(𝒢)` with `(N+1)·n' ≤ n`.
pub fn floor_g_for(d: u32, dim: usize, n: u64) -> Result<u64> {
    let threshold = d as u64 * (dim as u64 + 1);
    if n < threshold {
        return Err(Error::BelowThreshold {
            degree: n,
            threshold,
        });
    }
    gen_degrees_for(d, n / (dim as u64 + 1))
        .into_iter()
        .next_back()
        .ok_or_else(|| Error::Internal("empty degree set above threshold".into()))
}

pub fn floor_g(system: &DynSystem, n: u64) -> Result<u64> {
    floor_g_for(system.degree(), system.dim(), n)
}

/// Largest `J ≥ 0` with `(num/den)^J ≤ x`, for `x ≥ 1`.
fn floor_log_ratio(num: u64, den: u64, x: u64) -> u32 {
    let (num, den, x) = (BigUint::from(num), BigUint::from(den), BigUint::from(x.max(1)));
    let mut j = 0u32;
    let mut a = num.clone();
    let mut b = den.clone();
    while a <= &x * &b {
        j += 1;
        a *= &num;
        b *= &den;
    }
    j
}

/// `(⌊t₁⌋, ⌊t₂⌋)` bounding the factor count in the spanning family.
pub fn factor_count_bounds(d: u32, dim: usize, n: u64) -> (u32, u32) {
    let nn = dim as u64;
    let base = d as u64 * (nn + 1);
    let t1 = floor_log_ratio(nn + 1, nn, n.saturating_sub(base).max(1));
    let t2 = floor_log_ratio(2 * nn + 2, 2 * nn + 1, n);
    (t1, t2)
}

/// Scan of the sandwich `N·n/(N+1) ≤ n − ⌊n⌋_𝒢 ≤ (2N+1)·n/(2N+2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyRatioScan {
    /// Smallest `n₀` with the sandwich holding on `[n₀, nmax]`.
    pub n0: u64,
    /// All violating `n` in the scanned range.
    pub violations: Vec<u64>,
}

pub fn keyratio_scan(d: u32, dim: usize, nmax: u64) -> Result<KeyRatioScan> {
    let start = d as u64 * (dim as u64 + 1);
    let nn = dim as u64;
    let mut violations = Vec::new();
    for n in start..=nmax {
        let rest = n - floor_g_for(d, dim, n)?;
        // Cross-multiplied to stay exact.
        let lower = nn * n <= (nn + 1) * rest;
        let upper = (2 * nn + 2) * rest <= (2 * nn + 1) * n;
        if !(lower && upper) {
            violations.push(n);
        }
    }
    let n0 = violations.last().map_or(start, |v| v + 1);
    Ok(KeyRatioScan { n0, violations })
}

/// `c(n)`: the number of degree-`n` forms independent modulo `G`.
pub fn c_of(dim: usize, n: u32, hyper_degree: Option<u32>) -> usize {
    let total = binomial(n as usize + dim, dim);
    match hyper_degree {
        Some(g) if g <= n => total - binomial((n - g) as usize + dim, dim),
        _ => total,
    }
}

pub fn c_n(system: &DynSystem, n: u32) -> usize {
    c_of(system.dim(), n, system.hypersurface().map(HomoForm::degree))
}

/// Lazy enumeration of the spanning family for `J ∈ [lo, hi]`: ascending `J`,
/// then graded-lex `η`, then lex on sorted factor triples.
pub struct SpanningFamily<'a> {
    system: &'a DynSystem,
    n: u32,
    etas: Vec<Monomial>,
    triples: Vec<Factor>,
    hi: u32,
    j: u32,
    eta_pos: usize,
    pending: std::vec::IntoIter<Vec<Factor>>,
    current_eta: Option<Monomial>,
    multisets: HashMap<(u32, u64), Vec<Vec<Factor>>>,
    expansions: HashMap<Factor, HomoForm>,
}

impl<'a> SpanningFamily<'a> {
    pub fn new(system: &'a DynSystem, n: u32, lo: u32, hi: u32) -> SpanningFamily<'a> {
        let d = system.degree();
        let nv = system.nvars();
        let cap = d * nv as u32;
        let etas: Vec<Monomial> = (0..cap.min(n + 1))
            .flat_map(|k| monomials_of_degree(nv, k))
            .collect();
        let mut triples = Vec::new();
        for i in 0..nv {
            let mut k = 1u32;
            while (d as u64).pow(k) <= n as u64 {
                for j in 1..d {
                    let f = Factor { i, k, j };
                    if f.degree(d) <= n as u64 {
                        triples.push(f);
                    }
                }
                k += 1;
            }
        }
        triples.sort();
        SpanningFamily {
            system,
            n,
            etas,
            triples,
            hi,
            j: lo,
            eta_pos: 0,
            pending: Vec::new().into_iter(),
            current_eta: None,
            multisets: HashMap::new(),
            expansions: HashMap::new(),
        }
    }

    /// Nondecreasing sequences of `count` triples with degrees summing to `total`.
    fn multisets(&mut self, count: u32, total: u64) -> Vec<Vec<Factor>> {
        if let Some(v) = self.multisets.get(&(count, total)) {
            return v.clone();
        }
        let d = self.system.degree();
        let degs: Vec<u64> = self.triples.iter().map(|t| t.degree(d)).collect();
        let min_deg = degs.iter().copied().min().unwrap_or(u64::MAX);
        let mut out = Vec::new();
        let mut stack = Vec::new();
        fn rec(
            start: usize,
            left: u32,
            rem: u64,
            triples: &[Factor],
            degs: &[u64],
            min_deg: u64,
            stack: &mut Vec<Factor>,
            out: &mut Vec<Vec<Factor>>,
        ) {
            if left == 0 {
                if rem == 0 {
                    out.push(stack.clone());
                }
                return;
            }
            if (left as u64).saturating_mul(min_deg) > rem {
                return;
            }
            for t in start..triples.len() {
                if degs[t] <= rem {
                    stack.push(triples[t]);
                    rec(t, left - 1, rem - degs[t], triples, degs, min_deg, stack, out);
                    stack.pop();
                }
            }
        }
        rec(0, count, total, &self.triples, &degs, min_deg, &mut stack, &mut out);
        self.multisets.insert((count, total), out.clone());
        out
    }

    fn expansion(&mut self, f: Factor) -> Result<HomoForm> {
        if let Some(e) = self.expansions.get(&f) {
            return Ok(e.clone());
        }
        let it = self.system.iterate(f.k)?;
        let e = it.forms()[f.i].pow(f.j)?;
        self.expansions.insert(f, e.clone());
        Ok(e)
    }

    fn build(&mut self, eta: &Monomial, factors: Vec<Factor>) -> Result<GenElement> {
        let mut acc = HomoForm::monomial(eta.clone(), BigRational::one());
        for f in &factors {
            let e = self.expansion(*f)?;
            acc = acc.mul(&e)?;
        }
        Ok(GenElement {
            provenance: Provenance::Product {
                eta: eta.clone(),
                factors,
            },
            expanded: acc,
        })
    }
}

impl Iterator for SpanningFamily<'_> {
    type Item = Result<GenElement>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(fs) = self.pending.next() {
                let eta = self.current_eta.clone().expect("eta set with pending factors");
                return Some(self.build(&eta, fs));
            }
            if self.j > self.hi {
                return None;
            }
            if self.eta_pos >= self.etas.len() {
                self.j += 1;
                self.eta_pos = 0;
                continue;
            }
            let eta = self.etas[self.eta_pos].clone();
            self.eta_pos += 1;
            if self.j == 0 {
                continue;
            }
            let total = self.n as u64 - eta.degree() as u64;
            let ms = self.multisets(self.j, total);
            self.pending = ms.into_iter();
            self.current_eta = Some(eta);
        }
    }
}

/// The spanning family over the unrelaxed factor-count range.
pub fn spanning_family(system: &DynSystem, n: u32) -> Result<SpanningFamily<'_>> {
    let threshold = system.degree() as u64 * system.nvars() as u64;
    if (n as u64) < threshold {
        return Err(Error::BelowThreshold {
            degree: n as u64,
            threshold,
        });
    }
    let (t1, t2) = factor_count_bounds(system.degree(), system.dim(), n as u64);
    Ok(SpanningFamily::new(system, n, t1, t2))
}

/// Rank tracker modulo the principal ideal `(G)` in degree `n`.
struct QuotientRank {
    cols: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    rank: IncrementalRank,
    base: usize,
}

impl QuotientRank {
    fn new(nvars: usize, n: u32, g: Option<&HomoForm>) -> Result<QuotientRank> {
        let cols = monomials_of_degree(nvars, n);
        let index = cols.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut q = QuotientRank {
            rank: IncrementalRank::new(cols.len()),
            cols,
            index,
            base: 0,
        };
        if let Some(g) = g {
            if g.degree() <= n {
                for mu in monomials_of_degree(nvars, n - g.degree()) {
                    let row = g.mul(&HomoForm::monomial(mu, BigRational::one()))?;
                    q.rank.insert(&q.dense(&row))?;
                }
            }
        }
        q.base = q.rank.rank();
        Ok(q)
    }

    fn dense(&self, f: &HomoForm) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.cols.len()];
        for (m, c) in f.terms() {
            v[self.index[m]] = c.clone();
        }
        v
    }

    fn insert(&mut self, f: &HomoForm) -> Result<bool> {
        let v = self.dense(f);
        self.rank.insert(&v)
    }

    fn quotient_rank(&self) -> usize {
        self.rank.rank() - self.base
    }
}

/// All degree-`n` monomials in graded-lex order.
pub fn monomial_basis(dim: usize, n: u32) -> BasisFamily {
    let elements: Vec<GenElement> = monomials_of_degree(dim + 1, n)
        .into_iter()
        .map(|m| GenElement {
            expanded: HomoForm::monomial(m.clone(), BigRational::one()),
            provenance: Provenance::Monomial(m),
        })
        .collect();
    let c = elements.len();
    BasisFamily {
        n,
        c,
        rank_profile: (0..c).collect(),
        candidates_scanned: c,
        elements,
        relaxed: false,
    }
}

/// Greedy extraction of `H(n)`; monomials below the threshold `d(N+1)`.
pub fn special_basis(system: &DynSystem, n: u32) -> Result<BasisFamily> {
    if n == 0 {
        return Err(Error::Invalid("basis degree must be positive".into()));
    }
    let nv = system.nvars();
    let target = c_n(system, n);
    let mut q = QuotientRank::new(nv, n, system.hypersurface())?;
    let mut elements = Vec::new();
    let mut profile = Vec::new();
    let mut scanned = 0usize;
    let threshold = system.degree() * nv as u32;
    if n < threshold {
        for m in monomials_of_degree(nv, n) {
            let el = GenElement {
                expanded: HomoForm::monomial(m.clone(), BigRational::one()),
                provenance: Provenance::Monomial(m),
            };
            if q.insert(&el.expanded)? {
                elements.push(el);
                profile.push(scanned);
            }
            scanned += 1;
            if elements.len() == target {
                break;
            }
        }
        return finish(system, n, target, elements, profile, scanned, false);
    }
    let cap = 50 * binomial(n as usize + system.dim(), system.dim());
    let (t1, t2) = factor_count_bounds(system.degree(), system.dim(), n as u64);
    let passes = [(t1, t2, false), (0, t1.saturating_sub(1), true)];
    let mut relaxed = false;
    for (lo, hi, is_relaxed) in passes {
        if elements.len() == target || (is_relaxed && t1 == 0) {
            break;
        }
        for cand in SpanningFamily::new(system, n, lo, hi) {
            if scanned >= cap {
                return Err(Error::ResourceCap {
                    what: "spanning-family candidates".into(),
                    limit: cap,
                    partial: q.quotient_rank(),
                });
            }
            let cand = cand?;
            if q.insert(&cand.expanded)? {
                elements.push(cand);
                profile.push(scanned);
                relaxed |= is_relaxed;
            }
            scanned += 1;
            if elements.len() == target {
                break;
            }
        }
    }
    finish(system, n, target, elements, profile, scanned, relaxed)
}

fn finish(
    system: &DynSystem,
    n: u32,
    target: usize,
    elements: Vec<GenElement>,
    rank_profile: Vec<usize>,
    scanned: usize,
    relaxed: bool,
) -> Result<BasisFamily> {
    if elements.len() < target {
        let detail = format!(
            "degree {n}: {} of {target} after {scanned} candidates",
            elements.len()
        );
        return Err(if system.hypersurface().is_none() {
            Error::Internal(format!("spanning family failed to span: {detail}"))
        } else {
            Error::RankDeficient {
                rank: elements.len(),
                target,
                detail,
            }
        });
    }
    Ok(BasisFamily {
        n,
        c: target,
        elements,
        rank_profile,
        candidates_scanned: scanned,
        relaxed,
    })
}

/// Re-expands a provenance record exactly.
pub fn expand_provenance(system: &DynSystem, p: &Provenance) -> Result<HomoForm> {
    match p {
        Provenance::Monomial(m) => Ok(HomoForm::monomial(m.clone(), BigRational::one())),
        Provenance::Product { eta, factors } => {
            let mut acc = HomoForm::monomial(eta.clone(), BigRational::one());
            for f in factors {
                if f.i >= system.nvars() || f.k == 0 || f.j == 0 || f.j >= system.degree() {
                    return Err(Error::Invalid(format!("invalid factor {f}")));
                }
                acc = acc.mul(&system.iterate(f.k)?.forms()[f.i].pow(f.j)?)?;
            }
            Ok(acc)
        }
    }
}

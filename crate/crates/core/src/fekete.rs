//! Archimedean Fekete search: maximise `|det(η_j(P̃_i))|` over lifts on the
//! boundary `Ĥ = 0` of the filled Julia set.
//!
//! Each restart runs a Leja-type greedy initialisation over a candidate pool
//! and then cyclic coordinate ascent with step halving. Restarts get seeds
//! `seed + i` and an equal share of the budget; the best restart wins, ties
//! going to the lowest index. A restart's trajectory with budget `B` is a
//! prefix of its trajectory with budget `B' > B`, so the result is monotone in
//! the budget.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::dynsys::DynSystem;
use crate::error::{Error, Result};
use crate::green::NumericBasis;
use crate::homopoly::ProjPoint;
use crate::pf::Place;

pub const DEFAULT_RESTARTS: usize = 4;
const POOL: usize = 64;
const MIN_STEP: f64 = 1e-9;

/// A real parametrisation of lifts with `Ĥ = 0`.
pub trait Chart: Sync {
    fn params_per_point(&self) -> usize;
    fn lift(&self, params: &[f64]) -> Result<Vec<Complex64>>;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// `θ ↦ (e^{iθ}, 1)`: the torus, which is `∂𝒦` for power maps.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitCircleChart;

impl Chart for UnitCircleChart {
    fn params_per_point(&self) -> usize {
        1
    }

    fn lift(&self, params: &[f64]) -> Result<Vec<Complex64>> {
        Ok(vec![Complex64::from_polar(1.0, params[0]), Complex64::new(1.0, 0.0)])
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![rng.gen_range(0.0..2.0 * PI)]
    }
}

/// Riemann-sphere coordinates `(θ, φ)` on `P¹`, rescaled to `Ĥ = 0` at `∞`.
#[derive(Clone, Copy, Debug)]
pub struct SphereChart<'a> {
    system: &'a DynSystem,
}

impl<'a> SphereChart<'a> {
    pub fn new(system: &'a DynSystem) -> Result<SphereChart<'a>> {
        if system.dim() != 1 || system.hypersurface().is_some() {
            return Err(Error::Invalid("the sphere chart needs a system on P^1".into()));
        }
        Ok(SphereChart { system })
    }
}

impl Chart for SphereChart<'_> {
    fn params_per_point(&self) -> usize {
        2
    }

    fn lift(&self, params: &[f64]) -> Result<Vec<Complex64>> {
        let (theta, phi) = (params[0], params[1]);
        let z = vec![
            Complex64::from_polar((theta / 2.0).cos(), phi),
            Complex64::new((theta / 2.0).sin(), 0.0),
        ];
        let p = ProjPoint::numeric(z.clone())?;
        let h = self.system.escape_rate(&Place::Archimedean, &p, 1e-13)?;
        let s = (-h.approx()).exp();
        Ok(z.into_iter().map(|c| c * s).collect())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // Uniform on the sphere.
        let u: f64 = rng.gen_range(-1.0..1.0);
        vec![u.acos(), rng.gen_range(0.0..2.0 * PI)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeResult {
    pub n: u32,
    /// Best lifts, as `[re, im]` pairs per coordinate.
    pub lifts: Vec<Vec<[f64; 2]>>,
    pub params: Vec<Vec<f64>>,
    pub log_det: f64,
    /// `log|det| / (n·c)`.
    pub witness: f64,
    pub evaluations: usize,
    pub restart: usize,
}

impl FeketeResult {
    pub fn projpoints(&self) -> Vec<ProjPoint> {
        self.lifts
            .iter()
            .map(|l| {
                ProjPoint::numeric(l.iter().map(|z| Complex64::new(z[0], z[1])).collect())
                    .expect("nonzero lift")
            })
            .collect()
    }
}

struct State<'a, C: Chart> {
    chart: &'a C,
    basis: &'a NumericBasis,
    params: Vec<Vec<f64>>,
    lifts: Vec<Vec<Complex64>>,
    rows: Vec<Vec<Complex64>>,
    value: f64,
    evaluations: usize,
    budget: usize,
}

impl<C: Chart> State<'_, C> {
    fn eval(&mut self) -> Result<f64> {
        self.evaluations += 1;
        let (v, _, _) = NumericBasis::log_det_rows(self.rows.clone(), 0.0)?;
        Ok(v)
    }

    fn ascend(&mut self) -> Result<()> {
        let c = self.params.len();
        let q = self.chart.params_per_point();
        let mut step = 0.5;
        while step >= MIN_STEP {
            let mut improved = false;
            for i in 0..c {
                for k in 0..q {
                    for dir in [1.0, -1.0] {
                        if self.evaluations >= self.budget {
                            return Ok(());
                        }
                        let mut p = self.params[i].clone();
                        p[k] += dir * step;
                        let lift = self.chart.lift(&p)?;
                        let row = self.basis.row(&lift).0;
                        let old_row = std::mem::replace(&mut self.rows[i], row);
                        let v = self.eval()?;
                        if v > self.value {
                            self.value = v;
                            self.params[i] = p;
                            self.lifts[i] = lift;
                            improved = true;
                            break;
                        }
                        self.rows[i] = old_row;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        Ok(())
    }
}

fn leja<C: Chart>(chart: &C, basis: &NumericBasis, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<f64>>, Vec<Vec<Complex64>>)> {
    let c = basis.len();
    let pool_size = POOL.max(2 * c);
    let mut pool: Vec<(Vec<f64>, Vec<Complex64>)> = (0..pool_size)
        .map(|_| {
            let p = chart.sample(rng);
            chart.lift(&p).map(|l| (p, l))
        })
        .collect::<Result<_>>()?;
    let mut params = Vec::with_capacity(c);
    let mut lifts: Vec<Vec<Complex64>> = Vec::with_capacity(c);
    for k in 1..=c {
        let mut best: Option<(usize, f64)> = None;
        for (idx, (_, l)) in pool.iter().enumerate() {
            lifts.push(l.clone());
            let (v, _, _) = basis.log_det(&lifts, k)?;
            lifts.pop();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((idx, v));
            }
        }
        let (idx, _) = best.expect("pool is nonempty");
        let (p, l) = pool.swap_remove(idx);
        params.push(p);
        lifts.push(l);
    }
    Ok((params, lifts))
}

fn restart<'a, C: Chart>(
    chart: &'a C,
    basis: &'a NumericBasis,
    budget: usize,
    seed: u64,
) -> Result<State<'a, C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (params, lifts) = leja(chart, basis, &mut rng)?;
    let rows = lifts.iter().map(|l| basis.row(l).0).collect();
    let mut st = State {
        chart,
        basis,
        params,
        lifts,
        rows,
        value: f64::NEG_INFINITY,
        evaluations: 0,
        budget,
    };
    if budget == 0 {
        return Ok(st);
    }
    st.value = st.eval()?;
    st.ascend()?;
    Ok(st)
}

/// Best tuple found within `budget` determinant evaluations (the Leja phase
/// is not counted).
pub fn fekete_search<C: Chart>(
    basis: &BasisFamily,
    chart: &C,
    budget: usize,
    seed: u64,
    restarts: usize,
) -> Result<FeketeResult> {
    let nb = NumericBasis::new(basis);
    let restarts = restarts.max(1);
    let share = budget / restarts;
    let runs: Vec<Result<State<'_, C>>> = (0..restarts)
        .into_par_iter()
        .map(|i| restart(chart, &nb, share, seed.wrapping_add(i as u64)))
        .collect();
    let mut best: Option<(usize, State<'_, C>)> = None;
    let mut evaluations = 0;
    for (i, r) in runs.into_iter().enumerate() {
        let st = r?;
        evaluations += st.evaluations;
        if best.as_ref().is_none_or(|(_, b)| st.value > b.value) {
            best = Some((i, st));
        }
    }
    let (idx, st) = best.expect("at least one restart");
    if !st.value.is_finite() {
        return Err(Error::ResourceCap {
            what: "Fekete budget before any nonsingular tuple".into(),
            limit: budget,
            partial: 0,
        });
    }
    let nc = (basis.n as usize * basis.len()) as f64;
    Ok(FeketeResult {
        n: basis.n,
        lifts: st
            .lifts
            .iter()
            .map(|l| l.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
        params: st.params,
        log_det: st.value,
        witness: st.value / nc,
        evaluations,
        restart: idx,
    })
}

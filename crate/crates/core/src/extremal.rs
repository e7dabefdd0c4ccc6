//! Upper bounds (exact minima where enumeration is feasible) for the least
//! solution density `m_Λ(α, ·)` of `[0,1]`-valued functions with mean at
//! least `α`, on `Z_p` and on filtered tori.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cyclic::FormTable;
use crate::linsys::LinearFormSystem;
use crate::torus::{build_model, mc_average, FilteredTorusSpec, GridFunction, LeibmanTorusModel};
use crate::{par, Error, Result};

/// Cap on the number of sets (or value vectors) an exhaustive scan visits.
pub const EXHAUSTIVE_BUDGET: u64 = 10_000_000;

/// `⌈αp⌉`, tolerant of `α` given as a rounded decimal.
pub fn min_size(alpha: f64, p: usize) -> usize {
    ((alpha * p as f64 - 1e-9).ceil().max(0.0) as usize).min(p)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("α = {alpha} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    LocalSearch,
    Interval,
    Fractional,
    Annealing,
    Constant,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::LocalSearch => "local-search",
            Method::Interval => "interval",
            Method::Fractional => "fractional",
            Method::Annealing => "annealing",
            Method::Constant => "constant",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Method::Exhaustive,
            Method::LocalSearch,
            Method::Interval,
            Method::Fractional,
            Method::Annealing,
            Method::Constant,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown method `{s}`")))
    }
}

/// A subset of `Z_p` and its solution density.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCandidate {
    pub set: Vec<bool>,
    pub value: f64,
    pub method: Method,
    /// The value is an upper bound on the minimum rather than the minimum.
    pub upper_bound: bool,
}

impl DiscreteCandidate {
    pub fn elements(&self) -> Vec<usize> {
        self.set.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn size(&self) -> usize {
        self.set.iter().filter(|&&b| b).count()
    }
}

/// Solution counts for subsets of `Z_p`, with per-value incidence lists so a
/// one-in-one-out swap can be scored without a full pass.
struct SetObjective {
    table: FormTable,
    t: usize,
    rows: Vec<u32>,
    /// Points whose form values include `x`, each listed once.
    incidence: Vec<Vec<u32>>,
}

impl SetObjective {
    fn new(system: &LinearFormSystem, p: usize) -> Result<Self> {
        let table = FormTable::new(system, p)?;
        let t = system.forms();
        let rows: Vec<u32> = table.rows().flatten().copied().collect();
        let mut incidence = vec![Vec::new(); p];
        for (i, row) in rows.chunks_exact(t).enumerate() {
            for (a, &x) in row.iter().enumerate() {
                if !row[..a].contains(&x) {
                    incidence[x as usize].push(i as u32);
                }
            }
        }
        Ok(Self { table, t, rows, incidence })
    }

    fn points(&self) -> usize {
        self.table.points()
    }

    fn count(&self, set: &[bool]) -> u64 {
        self.table.count(set)
    }

    fn value(&self, count: u64) -> f64 {
        count as f64 / self.points() as f64
    }

    fn row(&self, i: u32) -> &[u32] {
        &self.rows[i as usize * self.t..(i as usize + 1) * self.t]
    }

    /// Solutions inside `set` that use `x`.
    fn through(&self, set: &[bool], x: usize) -> u64 {
        self.incidence[x].iter().filter(|&&i| self.row(i).iter().all(|&v| set[v as usize])).count() as u64
    }

    /// Solutions inside `set − {out} + {inn}` that use `inn`.
    fn through_after_swap(&self, set: &[bool], out: usize, inn: usize) -> u64 {
        self.incidence[inn]
            .iter()
            .filter(|&&i| {
                self.row(i).iter().all(|&v| {
                    let v = v as usize;
                    v == inn || (v != out && set[v])
                })
            })
            .count() as u64
    }
}

fn trivial_candidate(p: usize, s: usize) -> Option<DiscreteCandidate> {
    if s == 0 {
        return Some(DiscreteCandidate { set: vec![false; p], value: 0.0, method: Method::Exhaustive, upper_bound: false });
    }
    if s == p {
        return Some(DiscreteCandidate { set: vec![true; p], value: 1.0, method: Method::Exhaustive, upper_bound: false });
    }
    None
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Least count over all `s`-subsets, first in lexicographic order on ties.
fn best_of_size(obj: &SetObjective, p: usize, s: usize) -> (u64, Vec<usize>) {
    let firsts: Vec<usize> = (0..=p - s).collect();
    let per_first = par::map_items(firsts, |first| {
        let mut set = vec![false; p];
        let mut best: Option<(u64, Vec<usize>)> = None;
        for rest in (first + 1..p).combinations(s - 1) {
            set.iter_mut().for_each(|b| *b = false);
            set[first] = true;
            for &x in &rest {
                set[x] = true;
            }
            let c = obj.count(&set);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                let mut elems = vec![first];
                elems.extend(rest);
                best = Some((c, elems));
            }
        }
        best
    });
    per_first
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one subset")
}

/// Exact minimum of the solution density over subsets of size `⌈αp⌉`,
/// continuing to larger sizes while the per-size minimum keeps decreasing.
pub fn m_discrete_exhaustive(system: &LinearFormSystem, p: usize, alpha: f64) -> Result<DiscreteCandidate> {
    check_alpha(alpha)?;
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    let s0 = min_size(alpha, p);
    if let Some(c) = trivial_candidate(p, s0) {
        return Ok(c);
    }
    let sets = binomial_u128(p, s0);
    if sets > EXHAUSTIVE_BUDGET as u128 {
        return Err(Error::Budget {
            needed: sets,
            budget: EXHAUSTIVE_BUDGET,
            hint: Some("use m-discrete search instead".into()),
        });
    }
    let obj = SetObjective::new(system, p)?;
    let (mut best, mut elems) = best_of_size(&obj, p, s0);
    let mut last = best;
    for s in s0 + 1..p {
        if binomial_u128(p, s) > EXHAUSTIVE_BUDGET as u128 {
            break;
        }
        let (c, e) = best_of_size(&obj, p, s);
        if c < best {
            best = c;
            elems = e;
        }
        if c >= last {
            break;
        }
        last = c;
    }
    let mut set = vec![false; p];
    elems.iter().for_each(|&x| set[x] = true);
    Ok(DiscreteCandidate { set, value: obj.value(best), method: Method::Exhaustive, upper_bound: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalCandidate {
    /// Values in `{0, 1/q, …, 1}`.
    pub values: Vec<f64>,
    pub value: f64,
}

/// Exact minimum over functions `Z_p → {0, 1/q, …, 1}` with mean `≥ α`.
pub fn m_discrete_fractional(system: &LinearFormSystem, p: usize, alpha: f64, q: u32) -> Result<FractionalCandidate> {
    check_alpha(alpha)?;
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter("p and q must be ≥ 1".into()));
    }
    let levels = q as u64 + 1;
    let total = (levels as u128).saturating_pow(p as u32);
    if total > EXHAUSTIVE_BUDGET as u128 {
        return Err(Error::budget(total, EXHAUSTIVE_BUDGET));
    }
    let table = FormTable::new(system, p)?;
    let need = alpha * p as f64 * q as f64 - 1e-9;
    let chunks = par::map_chunks(total as u64, 4096, |range| {
        let mut best: Option<(f64, u64)> = None;
        let mut f = vec![0.0; p];
        for idx in range {
            let mut rest = idx;
            let mut mass = 0u64;
            for v in f.iter_mut().rev() {
                let level = rest % levels;
                rest /= levels;
                mass += level;
                *v = level as f64 / q as f64;
            }
            if (mass as f64) < need {
                continue;
            }
            let val = table.average(&f);
            if best.is_none_or(|(b, _)| val < b) {
                best = Some((val, idx));
            }
        }
        best
    });
    let (value, idx) = chunks
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::Precondition("no admissible function".into()))?;
    let mut values = vec![0.0; p];
    let mut rest = idx;
    for v in values.iter_mut().rev() {
        *v = (rest % levels) as f64 / q as f64;
        rest /= levels;
    }
    Ok(FractionalCandidate { values, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub restarts: u32,
    /// Maximum improving swaps per restart.
    pub steps: u32,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { restarts: 8, steps: 200, seed: 0 }
    }
}

/// Best single swap from `set` at count `current`; `None` when no swap
/// lowers the count. Ties go to the lexicographically first `(out, in)`.
fn best_swap(obj: &SetObjective, set: &[bool], current: u64) -> Option<(usize, usize, u64)> {
    let outs: Vec<usize> = (0..set.len()).filter(|&x| set[x]).collect();
    let per_out = par::map_items(outs, |out| {
        let loss = obj.through(set, out);
        let mut best: Option<(usize, usize, u64)> = None;
        for inn in (0..set.len()).filter(|&x| !set[x]) {
            let c = current - loss + obj.through_after_swap(set, out, inn);
            if best.is_none_or(|(_, _, b)| c < b) {
                best = Some((out, inn, c));
            }
        }
        best
    });
    per_out
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .filter(|&(_, _, c)| c < current)
}

fn local_search(obj: &SetObjective, mut set: Vec<bool>, steps: u32) -> (u64, Vec<bool>) {
    let mut current = obj.count(&set);
    for _ in 0..steps {
        match best_swap(obj, &set, current) {
            Some((out, inn, c)) => {
                set[out] = false;
                set[inn] = true;
                current = c;
            }
            None => break,
        }
    }
    (current, set)
}

/// Heuristic upper bound: the best of the initial interval, the centred
/// interval, and best-swap local search from random `⌈αp⌉`-subsets.
pub fn m_discrete_search(
    system: &LinearFormSystem,
    p: usize,
    alpha: f64,
    opts: &SearchOptions,
) -> Result<DiscreteCandidate> {
    check_alpha(alpha)?;
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    let s0 = min_size(alpha, p);
    if let Some(c) = trivial_candidate(p, s0) {
        return Ok(DiscreteCandidate { upper_bound: true, ..c });
    }
    let obj = SetObjective::new(system, p)?;
    let interval = |start: usize| {
        let mut set = vec![false; p];
        (start..start + s0).for_each(|x| set[x % p] = true);
        set
    };
    let mut seeded = vec![(Method::Interval, interval(0)), (Method::Interval, interval((p - s0).div_ceil(2)))];
    let restarts: Vec<u64> = (0..opts.restarts as u64).collect();
    let searched = par::map_items(restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r);
        let mut set = vec![false; p];
        sample(&mut rng, p, s0).into_iter().for_each(|x| set[x] = true);
        local_search(&obj, set, opts.steps).1
    });
    seeded.extend(searched.into_iter().map(|s| (Method::LocalSearch, s)));
    let (method, set, count) = seeded
        .into_iter()
        .map(|(m, s)| {
            let c = obj.count(&s);
            (m, s, c)
        })
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .expect("seeded candidates");
    Ok(DiscreteCandidate { set, value: obj.value(count), method, upper_bound: true })
}

/// Grid step function on the torus with its solution density estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusCandidate {
    pub grid: GridFunction,
    pub mean: f64,
    pub estimate: f64,
    /// Zero when `estimate` is exact.
    pub stderr: f64,
    pub method: Method,
    pub upper_bound: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealSchedule {
    pub temperatures: u32,
    pub proposals: u32,
    /// Standard deviation of the single-cell Gaussian bump.
    pub sigma: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self { temperatures: 40, proposals: 200, sigma: 0.2, t_start: 1e-3, t_end: 1e-6 }
    }
}

impl AnnealSchedule {
    fn temperature(&self, step: u32) -> f64 {
        if self.temperatures <= 1 {
            return self.t_start;
        }
        let r = step as f64 / (self.temperatures - 1) as f64;
        self.t_start * (self.t_end / self.t_start).powf(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusSearchOptions {
    /// Cells per axis.
    pub q: usize,
    /// Samples for both the common-random-number objective and the final
    /// fresh re-evaluation.
    pub samples: u64,
    pub seed: u64,
    pub schedule: AnnealSchedule,
}

impl Default for TorusSearchOptions {
    fn default() -> Self {
        Self { q: 16, samples: 20_000, seed: 0, schedule: AnnealSchedule::default() }
    }
}

const MAX_CELLS: usize = 1 << 20;

/// Monte-Carlo objective on a fixed sample set, updatable one cell at a time.
struct CrnObjective {
    t: usize,
    /// Cell index of slot `a` of sample `i` at `i * t + a`.
    cells: Vec<u32>,
    /// Samples touching each cell, each listed once.
    by_cell: Vec<Vec<u32>>,
}

impl CrnObjective {
    fn new(model: &LeibmanTorusModel, grid: &GridFunction, samples: u64, seed: u64) -> Self {
        let (t, m) = (model.forms(), model.coords());
        let mut sampler = model.sampler(seed);
        let mut x = vec![0.0; t * m];
        let mut cells = Vec::with_capacity(samples as usize * t);
        let mut by_cell = vec![Vec::new(); grid.values().len()];
        for i in 0..samples {
            sampler.point(i, &mut x);
            let start = cells.len();
            for a in 0..t {
                let c = grid.cell_of(&x[a * m..(a + 1) * m]) as u32;
                if !cells[start..].contains(&c) {
                    by_cell[c as usize].push(i as u32);
                }
                cells.push(c);
            }
        }
        Self { t, cells, by_cell }
    }

    fn product(&self, values: &[f64], i: usize) -> f64 {
        self.cells[i * self.t..(i + 1) * self.t].iter().map(|&c| values[c as usize]).product()
    }

    fn products(&self, values: &[f64]) -> Vec<f64> {
        (0..self.cells.len() / self.t).map(|i| self.product(values, i)).collect()
    }
}

/// Projection onto `{mean ≥ α} ∩ [0,1]^cells`: `v ↦ clip(v + λ)` with the
/// least `λ ≥ 0` reaching mean `α`.
fn project(values: &mut [f64], alpha: f64) {
    let mean = |lambda: f64, v: &[f64]| v.iter().map(|x| (x + lambda).clamp(0.0, 1.0)).sum::<f64>() / v.len() as f64;
    if mean(0.0, values) >= alpha {
        return;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mean(mid, values) >= alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    values.iter_mut().for_each(|x| *x = (*x + hi).clamp(0.0, 1.0));
}

fn grid_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn constant_candidate(m: usize, q: usize, alpha: f64, t: usize) -> Result<TorusCandidate> {
    Ok(TorusCandidate {
        grid: GridFunction::constant(m, q, alpha)?,
        mean: alpha,
        estimate: alpha.powi(t as i32),
        stderr: 0.0,
        method: Method::Constant,
        upper_bound: true,
    })
}

/// Simulated annealing over grid step functions `T^m → [0,1]` with mean
/// `≥ α`, scored on a fixed sample set; the best grid found is re-scored on
/// fresh samples and returned only if it beats the constant `α`, whose
/// density `α^t` is exact.
pub fn m_torus_search(
    system: &LinearFormSystem,
    spec: &FilteredTorusSpec,
    alpha: f64,
    opts: &TorusSearchOptions,
) -> Result<TorusCandidate> {
    check_alpha(alpha)?;
    if opts.q < 2 {
        return Err(Error::InvalidParameter("grid needs q ≥ 2".into()));
    }
    if opts.samples < 2 {
        return Err(Error::InvalidParameter("samples must be ≥ 2".into()));
    }
    if !(opts.schedule.sigma > 0.0 && opts.schedule.t_start > 0.0 && opts.schedule.t_end > 0.0) {
        return Err(Error::InvalidParameter("σ and temperatures must be positive".into()));
    }
    let model = build_model(spec, system)?;
    let (t, m) = (model.forms(), model.coords());
    let cells = (opts.q as u128).saturating_pow(m as u32);
    if cells > MAX_CELLS as u128 {
        return Err(Error::budget(cells, MAX_CELLS as u64));
    }
    let constant = constant_candidate(m, opts.q, alpha, t)?;
    if alpha == 0.0 || alpha == 1.0 {
        return Ok(constant);
    }

    let mut values = vec![alpha; cells as usize];
    let crn = CrnObjective::new(&model, &constant.grid, opts.samples, opts.seed);
    let n = opts.samples as f64;
    let mut prods = crn.products(&values);
    let mut sum: f64 = prods.iter().sum();
    let mut best = (sum, values.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(u64::MAX);
    let bump = Normal::new(0.0, opts.schedule.sigma).expect("σ > 0");
    for step in 0..opts.schedule.temperatures {
        let temp = opts.schedule.temperature(step);
        for _ in 0..opts.schedule.proposals {
            let c = rng.gen_range(0..values.len());
            let old = values[c];
            let new = (old + bump.sample(&mut rng)).clamp(0.0, 1.0);
            let u: f64 = rng.gen();
            values[c] = new;
            if grid_mean(&values) >= alpha {
                let touched = &crn.by_cell[c];
                let fresh: Vec<f64> = touched.iter().map(|&i| crn.product(&values, i as usize)).collect();
                let delta: f64 = touched.iter().zip(&fresh).map(|(&i, f)| f - prods[i as usize]).sum();
                if delta <= 0.0 || u < (-delta / n / temp).exp() {
                    touched.iter().zip(fresh).for_each(|(&i, f)| prods[i as usize] = f);
                    sum += delta;
                } else {
                    values[c] = old;
                }
            } else {
                let mut trial = values.clone();
                project(&mut trial, alpha);
                let trial_prods = crn.products(&trial);
                let trial_sum: f64 = trial_prods.iter().sum();
                let delta = trial_sum - sum;
                if delta <= 0.0 || u < (-delta / n / temp).exp() {
                    values = trial;
                    prods = trial_prods;
                    sum = trial_sum;
                } else {
                    values[c] = old;
                }
            }
            if sum < best.0 {
                best = (sum, values.clone());
            }
        }
        // drop accumulated rounding from incremental updates
        sum = prods.iter().sum();
    }

    let grid = GridFunction::from_real(m, opts.q, best.1)?;
    let fresh = mc_average(&grid, &model, None, opts.samples, opts.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    if fresh.estimate.re < constant.estimate {
        let mean = grid.mean().re;
        Ok(TorusCandidate {
            grid,
            mean,
            estimate: fresh.estimate.re,
            stderr: fresh.stderr,
            method: Method::Annealing,
            upper_bound: true,
        })
    } else {
        Ok(constant)
    }
}

/// One line of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// The prime `p`, or `torus`.
    pub group: String,
    pub alpha: f64,
    pub system: String,
    pub method: Method,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: bool,
    pub seed: u64,
    pub seconds: f64,
}

impl ConvergenceRow {
    /// Equal in every column except wall time.
    pub fn same_result(&self, other: &Self) -> bool {
        Self { seconds: 0.0, ..self.clone() } == Self { seconds: 0.0, ..other.clone() }
    }
}

/// Append-only table of discrete and torus estimates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ConvergenceRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[ConvergenceRow] {
        &self.rows
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.into()))?;
        }
        if self.rows.is_empty() {
            w.write_record(["group", "alpha", "system", "method", "estimate", "stderr", "exact", "seed", "seconds"])
                .map_err(|e| Error::Io(e.into()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ConvergenceRow>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self { rows })
    }

    /// Equal row by row, ignoring wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        self.rows.len() == other.rows.len() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.same_result(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceOptions {
    pub search: SearchOptions,
    pub torus: TorusSearchOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { search: SearchOptions::default(), torus: TorusSearchOptions::default() }
    }
}

/// One row per prime (exhaustive when it fits the budget, local search
/// otherwise) followed by one torus row.
pub fn convergence_experiment(
    system: &LinearFormSystem,
    alpha: f64,
    primes: &[usize],
    spec: &FilteredTorusSpec,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceTable> {
    check_alpha(alpha)?;
    let name = system.label();
    let discrete = par::map_items(primes.to_vec(), |p| -> Result<ConvergenceRow> {
        let start = Instant::now();
        let cand = match m_discrete_exhaustive(system, p, alpha) {
            Err(Error::Budget { .. }) => m_discrete_search(system, p, alpha, &opts.search)?,
            other => other?,
        };
        Ok(ConvergenceRow {
            group: p.to_string(),
            alpha,
            system: name.clone(),
            method: cand.method,
            estimate: cand.value,
            stderr: 0.0,
            exact: !cand.upper_bound,
            seed: opts.search.seed,
            seconds: start.elapsed().as_secs_f64(),
        })
    });
    let mut table = ConvergenceTable::new();
    for row in discrete {
        table.push(row?);
    }
    let start = Instant::now();
    let torus = m_torus_search(system, spec, alpha, &opts.torus)?;
    table.push(ConvergenceRow {
        group: "torus".into(),
        alpha,
        system: name,
        method: torus.method,
        estimate: torus.estimate,
        stderr: torus.stderr,
        exact: torus.stderr == 0.0,
        seed: opts.torus.seed,
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{sol_discrete, sumfree_interval};
    use crate::DEFAULT_BUDGET;

    fn ap(k: usize) -> LinearFormSystem {
        LinearFormSystem::ap(k).unwrap()
    }

    #[test]
    fn exhaustive_three_ap_p5() {
        let c = m_discrete_exhaustive(&ap(3), 5, 0.4).unwrap();
        assert!((c.value - 0.08).abs() < 1e-15);
        assert_eq!(c.elements(), vec![0, 1]);
        assert!(!c.upper_bound);
    }

    #[test]
    fn exhaustive_extremes() {
        for sys in [ap(3), LinearFormSystem::schur()] {
            assert_eq!(m_discrete_exhaustive(&sys, 7, 1.0).unwrap().value, 1.0);
            let z = m_discrete_exhaustive(&sys, 7, 0.0).unwrap();
            assert_eq!((z.value, z.size()), (0.0, 0));
        }
    }

    #[test]
    fn exhaustive_budget_suggests_search() {
        match m_discrete_exhaustive(&ap(3), 41, 0.4) {
            Err(Error::Budget { hint: Some(h), .. }) => assert!(h.contains("search")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let sys = ap(3);
        let c = m_discrete_exhaustive(&sys, 7, 3.0 / 7.0).unwrap();
        let brute = (0..7usize)
            .combinations(3)
            .map(|s| {
                let f = crate::cyclic::CyclicFunction::indicator(7, s).unwrap();
                sol_discrete(&f, &sys, None, DEFAULT_BUDGET).unwrap().re
            })
            .fold(f64::INFINITY, f64::min);
        assert!((c.value - brute).abs() < 1e-12);
    }

    #[test]
    fn search_matches_exhaustive_small() {
        let c = m_discrete_search(&ap(3), 5, 0.4, &SearchOptions::default()).unwrap();
        assert!((c.value - 0.08).abs() < 1e-15);
        assert!(c.upper_bound);
        assert_eq!(m_discrete_search(&ap(3), 101, 1.0, &SearchOptions::default()).unwrap().value, 1.0);
    }

    #[test]
    fn search_beats_sumfree_interval() {
        let sys = LinearFormSystem::schur();
        let p = 101;
        let opts = SearchOptions { restarts: 2, steps: 20, seed: 3 };
        let c = m_discrete_search(&sys, p, 34.0 / 101.0, &opts).unwrap();
        let interval = sol_discrete(&sumfree_interval(p as u64).unwrap(), &sys, None, DEFAULT_BUDGET).unwrap().re;
        assert!(c.value <= interval + 1e-15, "{} > {interval}", c.value);
        assert_eq!(c.size(), 34);
    }

    #[test]
    fn swap_scores_are_exact() {
        let obj = SetObjective::new(&ap(3), 11).unwrap();
        let mut set = vec![false; 11];
        [0, 2, 3, 7, 8].iter().for_each(|&x| set[x] = true);
        let cur = obj.count(&set);
        for out in [0, 3, 8] {
            for inn in [1, 5, 10] {
                let mut s = set.clone();
                s[out] = false;
                s[inn] = true;
                let predicted = cur - obj.through(&set, out) + obj.through_after_swap(&set, out, inn);
                assert_eq!(predicted, obj.count(&s));
            }
        }
    }

    #[test]
    fn fractional_grid() {
        let f = m_discrete_fractional(&ap(3), 5, 0.4, 2).unwrap();
        assert!(f.value <= 0.08 + 1e-15);
        assert!(f.values.iter().sum::<f64>() >= 2.0 - 1e-9);
    }

    #[test]
    fn torus_trivial_alphas() {
        let spec = FilteredTorusSpec::new(vec![1]).unwrap();
        let opts = TorusSearchOptions { q: 4, samples: 100, ..Default::default() };
        assert_eq!(m_torus_search(&ap(3), &spec, 1.0, &opts).unwrap().estimate, 1.0);
        assert_eq!(m_torus_search(&ap(3), &spec, 0.0, &opts).unwrap().estimate, 0.0);
    }

    #[test]
    fn torus_half_beats_constant() {
        let spec = FilteredTorusSpec::new(vec![1]).unwrap();
        let opts = TorusSearchOptions {
            q: 32,
            samples: 4000,
            seed: 5,
            schedule: AnnealSchedule { temperatures: 10, proposals: 100, ..Default::default() },
        };
        let c = m_torus_search(&ap(3), &spec, 0.5, &opts).unwrap();
        assert!(c.estimate <= 0.125 + 2.0 * c.stderr);
        assert!(c.mean >= 0.5 - 1e-12);
        assert!(c.grid.is_unit_interval_valued());
    }

    #[test]
    fn projection_reaches_mean() {
        let mut v = vec![0.0, 0.1, 0.9, 1.0];
        project(&mut v, 0.6);
        assert!(grid_mean(&v) >= 0.6 - 1e-12);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn convergence_alpha_one() {
        let opts = ConvergenceOptions {
            torus: TorusSearchOptions { q: 4, samples: 100, ..Default::default() },
            ..Default::default()
        };
        let t = convergence_experiment(&ap(3), 1.0, &[5, 7], &FilteredTorusSpec::new(vec![1]).unwrap(), &opts).unwrap();
        assert_eq!(t.rows().len(), 3);
        assert!(t.rows().iter().all(|r| r.estimate == 1.0));
        let back = ConvergenceTable::from_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn method_round_trip() {
        for m in ["exhaustive", "local-search", "interval", "fractional", "annealing", "constant"] {
            assert_eq!(m.parse::<Method>().unwrap().as_str(), m);
        }
    }
}

//! Filtered tori, their Leibman subtori, and integration on them.
//!
//! Coordinate `j` of `T^m` carries the maximal degree-`d_j` filtration, so
//! the Leibman subtorus of a system `Λ` is the product over `j` of the real
//! spans `T·v_1 + … + T·v_r` of the basis vectors of `Λ^[d_j]`. A point of
//! `(T^m)^t` is stored flat, slot-major: coordinate `j` of slot `a` lives
//! at index `a * m + j`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::KahanSum;
use crate::lattice::{leibman_lattice, IntegerLattice};
use crate::linsys::{ConjugationPattern, LinearFormSystem};
use crate::{e, par, Error, Result};

/// Fixed-point resolution of sampled coordinates: a coordinate is
/// `u / 2^FRAC_BITS` for an integer `u`.
pub const FRAC_BITS: u32 = 53;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;
const FRAC_SCALE: f64 = (1u64 << FRAC_BITS) as f64;

/// Default cap on the number of term tuples in [`exact_trig_average`].
pub const DEFAULT_TERM_BUDGET: u64 = 10_000_000;

const MC_CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FilteredTorusSpec {
    degrees: Vec<u32>,
}

impl FilteredTorusSpec {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() || degrees.contains(&0) {
            return Err(Error::InvalidParameter("torus spec needs m ≥ 1 degrees, all ≥ 1".into()));
        }
        Ok(Self { degrees })
    }

    /// `X_s = (T^s, R_(1) × … × R_(s))`.
    pub fn x_s(s: u32) -> Result<Self> {
        Self::new((1..=s).collect())
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }
}

impl FromStr for FilteredTorusSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let degrees = s
            .split(',')
            .map(|w| w.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad degree `{w}` in spec `{s}`"))))
            .collect::<Result<_>>()?;
        Self::new(degrees)
    }
}

impl std::fmt::Display for FilteredTorusSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
        f.write_str(&d.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct LeibmanTorusModel {
    spec: FilteredTorusSpec,
    system: LinearFormSystem,
    blocks: Vec<IntegerLattice>,
    // machine-integer copies of the block bases, used for sampling
    gens: Vec<Vec<Vec<i64>>>,
}

/// Builds the Leibman subtorus of `system` inside `(T^m)^t`.
pub fn build_model(spec: &FilteredTorusSpec, system: &LinearFormSystem) -> Result<LeibmanTorusModel> {
    if system.has_zero_form() {
        return Err(Error::Degenerate("zero form: coordinate projection would not be surjective".into()));
    }
    let mut cache: BTreeMap<u32, IntegerLattice> = BTreeMap::new();
    let blocks: Vec<IntegerLattice> = spec
        .degrees
        .iter()
        .map(|&d| cache.entry(d).or_insert_with(|| leibman_lattice(system, d)).clone())
        .collect();
    let gens = blocks.iter().map(|b| b.basis_i64()).collect::<Result<_>>()?;
    Ok(LeibmanTorusModel { spec: spec.clone(), system: system.clone(), blocks, gens })
}

impl LeibmanTorusModel {
    pub fn spec(&self) -> &FilteredTorusSpec {
        &self.spec
    }

    pub fn system(&self) -> &LinearFormSystem {
        &self.system
    }

    pub fn blocks(&self) -> &[IntegerLattice] {
        &self.blocks
    }

    /// Number of tuple slots `t`.
    pub fn forms(&self) -> usize {
        self.system.forms()
    }

    /// Torus dimension `m`.
    pub fn coords(&self) -> usize {
        self.spec.dim()
    }

    /// Dimension of the subtorus, `Σ_j rank Λ^[d_j]`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(IntegerLattice::rank).sum()
    }

    pub fn sampler(&self, seed: u64) -> HaarSampler<'_> {
        HaarSampler { model: self, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

/// Counter-based Haar sampler: sample `i` is drawn from ChaCha stream `i`,
/// so any sample can be regenerated independently of the others.
pub struct HaarSampler<'a> {
    model: &'a LeibmanTorusModel,
    rng: ChaCha8Rng,
}

impl HaarSampler<'_> {
    /// Writes sample `index` in fixed point (`t * m` numerators of `2^53`).
    pub fn point_fixed(&mut self, index: u64, out: &mut [u64]) {
        let (t, m) = (self.model.forms(), self.model.coords());
        debug_assert_eq!(out.len(), t * m);
        self.rng.set_stream(index);
        self.rng.set_word_pos(0);
        out.fill(0);
        for (j, gens) in self.model.gens.iter().enumerate() {
            for row in gens {
                let theta = self.rng.next_u64() & FRAC_MASK;
                for (a, &v) in row.iter().enumerate() {
                    let slot = &mut out[a * m + j];
                    *slot = slot.wrapping_add(theta.wrapping_mul(v as u64));
                }
            }
        }
        for x in out.iter_mut() {
            *x &= FRAC_MASK;
        }
    }

    /// Writes sample `index` as coordinates in `[0, 1)`.
    pub fn point(&mut self, index: u64, out: &mut [f64]) {
        let mut fixed = vec![0u64; out.len()];
        self.point_fixed(index, &mut fixed);
        for (x, u) in out.iter_mut().zip(&fixed) {
            *x = fixed_to_f64(*u);
        }
    }
}

#[inline]
pub fn fixed_to_f64(u: u64) -> f64 {
    (u & FRAC_MASK) as f64 / FRAC_SCALE
}

/// Distance from a fixed-point circle element to 0.
#[inline]
pub fn fixed_circle_dist(u: u64) -> f64 {
    let u = u & FRAC_MASK;
    u.min((1u64 << FRAC_BITS) - u) as f64 / FRAC_SCALE
}

/// `count` Haar-distributed points of the subtorus, deterministic in `seed`.
pub fn sample_haar(model: &LeibmanTorusModel, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let width = model.forms() * model.coords();
    let mut sampler = model.sampler(seed);
    (0..count as u64)
        .map(|i| {
            let mut p = vec![0.0; width];
            sampler.point(i, &mut p);
            p
        })
        .collect()
}

/// Character `x ↦ e(Σ_{a,j} M[a,j] x_a(j))` on `(T^m)^t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TupleCharacter {
    t: usize,
    m: usize,
    freq: Vec<i64>,
}

impl TupleCharacter {
    /// `freq` is row-major `t × m`.
    pub fn new(t: usize, m: usize, freq: Vec<i64>) -> Result<Self> {
        if freq.len() != t * m {
            return Err(Error::Dimension { expected: t * m, got: freq.len() });
        }
        Ok(Self { t, m, freq })
    }

    pub fn forms(&self) -> usize {
        self.t
    }

    pub fn coords(&self) -> usize {
        self.m
    }

    pub fn freq(&self) -> &[i64] {
        &self.freq
    }

    pub fn entry(&self, a: usize, j: usize) -> i64 {
        self.freq[a * self.m + j]
    }

    /// Column `j`: the frequencies seen by coordinate `j` of every slot.
    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.t).map(|a| self.entry(a, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.freq.iter().all(|&x| x == 0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let phase: f64 = self.freq.iter().zip(x).map(|(&n, &y)| n as f64 * y).sum();
        e(phase)
    }

    /// Exact phase `Σ M[a,j] x_a(j)` of a fixed-point point, mod 1.
    pub fn phase_fixed(&self, x: &[u64]) -> u64 {
        self.freq
            .iter()
            .zip(x)
            .fold(0u64, |acc, (&n, &u)| acc.wrapping_add((n as u64).wrapping_mul(u)))
            & FRAC_MASK
    }
}

impl std::fmt::Display for TupleCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self
            .freq
            .chunks(self.m)
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// Whether `chi` is principal on the subtorus: every column of its
/// frequency matrix must be orthogonal to the corresponding block lattice.
/// `true` means `∫ χ dμ = 1`, `false` means `∫ χ dμ = 0`.
pub fn character_trivial_on_model(chi: &TupleCharacter, model: &LeibmanTorusModel) -> Result<bool> {
    if chi.t != model.forms() {
        return Err(Error::Dimension { expected: model.forms(), got: chi.t });
    }
    if chi.m != model.coords() {
        return Err(Error::Dimension { expected: model.coords(), got: chi.m });
    }
    Ok(trivial_unchecked(chi, &model.gens))
}

fn trivial_unchecked(chi: &TupleCharacter, gens: &[Vec<Vec<i64>>]) -> bool {
    gens.iter().enumerate().all(|(j, rows)| {
        rows.iter().all(|v| {
            v.iter().enumerate().map(|(a, &va)| chi.entry(a, j) as i128 * va as i128).sum::<i128>() == 0
        })
    })
}

/// Finite character sum `Σ c_n e(n · x)` on `T^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    m: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPolynomial {
    pub fn new(m: usize) -> Self {
        Self { m, terms: BTreeMap::new() }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        let mut p = Self::new(m);
        p.add_term(vec![0; m], Complex64::new(c, 0.0)).expect("length m");
        p
    }

    /// `(1 + cos 2πx_j)/2` on coordinate `j` of `T^m`.
    pub fn raised_cosine(m: usize, j: usize) -> Self {
        let mut p = Self::constant(m, 0.5);
        for s in [1, -1] {
            let mut n = vec![0; m];
            n[j] = s;
            p.add_term(n, Complex64::new(0.25, 0.0)).expect("length m");
        }
        p
    }

    pub fn add_term(&mut self, freq: Vec<i64>, c: Complex64) -> Result<()> {
        if freq.len() != self.m {
            return Err(Error::Dimension { expected: self.m, got: freq.len() });
        }
        *self.terms.entry(freq).or_default() += c;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, freq: &[i64]) -> Complex64 {
        self.terms.get(freq).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(n, c)| c * e(n.iter().zip(x).map(|(&k, &y)| k as f64 * y).sum()))
            .sum()
    }

    /// One term per line: `n_1 … n_m  re im`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut p: Option<Self> = None;
        for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
            let words: Vec<&str> = line.split_whitespace().collect();
            if words.len() < 3 {
                return Err(Error::Parse(format!("term line `{line}` needs n_1..n_m re im")));
            }
            let m = words.len() - 2;
            let poly = p.get_or_insert_with(|| Self::new(m));
            if poly.m != m {
                return Err(Error::Parse(format!("term line `{line}` has dimension {m}, expected {}", poly.m)));
            }
            let freq = words[..m]
                .iter()
                .map(|w| w.parse::<i64>().map_err(|_| Error::Parse(format!("bad frequency `{w}`"))))
                .collect::<Result<Vec<_>>>()?;
            let num = |w: &str| w.parse::<f64>().map_err(|_| Error::Parse(format!("bad coefficient `{w}`")));
            poly.add_term(freq, Complex64::new(num(words[m])?, num(words[m + 1])?))?;
        }
        p.ok_or_else(|| Error::Parse("no terms".into()))
    }

    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|(n, c)| {
                let f: Vec<String> = n.iter().map(|k| k.to_string()).collect();
                format!("{}  {:e} {:e}\n", f.join(" "), c.re, c.im)
            })
            .collect()
    }
}

/// Step function on `T^m`: constant on each of the `q^m` half-open cells.
/// The cell containing `x` is `(⌊q x_1⌋, …, ⌊q x_m⌋)`, stored row-major
/// with `x_1` slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    m: usize,
    q: usize,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(m: usize, q: usize, values: Vec<Complex64>) -> Result<Self> {
        if m == 0 || q == 0 {
            return Err(Error::InvalidParameter("grid needs m ≥ 1 and q ≥ 1".into()));
        }
        let cells = cell_count(m, q)?;
        if values.len() != cells {
            return Err(Error::Dimension { expected: cells, got: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numeric("grid values must be finite".into()));
        }
        Ok(Self { m, q, values })
    }

    pub fn from_real(m: usize, q: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(m, q, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(m: usize, q: usize, c: f64) -> Result<Self> {
        Self::from_real(m, q, vec![c; cell_count(m, q)?])
    }

    /// Cell values taken from `f` at the cell corners `i / q`.
    pub fn from_corners(m: usize, q: usize, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let cells = cell_count(m, q)?;
        let mut x = vec![0.0; m];
        let values = (0..cells)
            .map(|idx| {
                let mut rest = idx;
                for j in (0..m).rev() {
                    x[j] = (rest % q) as f64 / q as f64;
                    rest /= q;
                }
                f(&x)
            })
            .collect();
        Self::new(m, q, values)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn cells_per_axis(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn cell_of(&self, x: &[f64]) -> usize {
        x.iter().fold(0, |acc, &y| acc * self.q + cell_index(y, self.q))
    }

    pub fn mean(&self) -> Complex64 {
        let mut k = KahanSum::default();
        for &v in &self.values {
            k.add(v);
        }
        k.total() / self.values.len() as f64
    }

    pub fn is_unit_interval_valued(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0 && (0.0..=1.0).contains(&v.re))
    }

    /// Largest jump between neighbouring cells times `q`: the Lipschitz
    /// constant of the piecewise-linear interpolant in the `ℓ∞` torus metric.
    pub fn lipschitz_estimate(&self) -> f64 {
        let mut best: f64 = 0.0;
        let mut stride = 1;
        for _ in 0..self.m {
            for idx in 0..self.values.len() {
                let coord = (idx / stride) % self.q;
                let next = if coord + 1 == self.q { idx - coord * stride } else { idx + stride };
                best = best.max((self.values[idx] - self.values[next]).norm());
            }
            stride *= self.q;
        }
        best * self.q as f64
    }

    /// Text form: header `m q`, then the `q^m` real cell values row-major.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut words = text.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            words
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad {what}")))
        };
        let m = next_usize("m")?;
        let q = next_usize("q")?;
        let values = words
            .map(|w| w.parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value `{w}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_real(m, q, values)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.m, self.q);
        for row in self.values.chunks(self.q) {
            let line: Vec<String> = row.iter().map(|v| v.re.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

fn cell_count(m: usize, q: usize) -> Result<usize> {
    u32::try_from(m)
        .ok()
        .and_then(|m| q.checked_pow(m))
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| Error::InvalidParameter(format!("grid {q}^{m} too large")))
}

#[inline]
fn cell_index(y: f64, q: usize) -> usize {
    let r = y - y.floor();
    ((r * q as f64) as usize).min(q - 1)
}

/// A complex-valued function on `T^m`.
pub trait TorusFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Complex64;
}

impl TorusFunction for GridFunction {
    fn dim(&self) -> usize {
        self.m
    }
    fn eval(&self, x: &[f64]) -> Complex64 {
        self.values[self.cell_of(x)]
    }
}

impl TorusFunction for TrigPolynomial {
    fn dim(&self) -> usize {
        self.m
    }
    fn eval(&self, x: &[f64]) -> Complex64 {
        TrigPolynomial::eval(self, x)
    }
}

/// Adapts a closure into a [`TorusFunction`].
pub struct FnTorus<F> {
    pub m: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Complex64 + Sync> TorusFunction for FnTorus<F> {
    fn dim(&self) -> usize {
        self.m
    }
    fn eval(&self, x: &[f64]) -> Complex64 {
        (self.f)(x)
    }
}

fn check_pattern(pattern: Option<&ConjugationPattern>, t: usize) -> Result<()> {
    pattern.map_or(Ok(()), |p| p.check_len(t))
}

/// `∫_{X^Λ} Π_a f(y_a) dμ` for a trigonometric polynomial, exactly up to
/// floating-point coefficient arithmetic.
///
/// Expanding the product gives one character per tuple of terms; it
/// integrates to 1 when it is principal on the subtorus and to 0 otherwise.
/// Principality is linear in the frequencies, so tuples are accumulated
/// slot by slot keyed by their partial pairings with the block bases.
pub fn exact_trig_average(
    f: &TrigPolynomial,
    model: &LeibmanTorusModel,
    pattern: Option<&ConjugationPattern>,
    budget: u64,
) -> Result<Complex64> {
    let (t, m) = (model.forms(), model.coords());
    if f.m != m {
        return Err(Error::Dimension { expected: m, got: f.m });
    }
    check_pattern(pattern, t)?;
    let tuples = (f.len() as u128).saturating_pow(t as u32);
    if tuples > budget as u128 {
        return Err(Error::budget(tuples, budget));
    }

    // pairing of term n in slot a with basis row v of block j: n_j * v(a)
    let pairing = |n: &[i64], a: usize| -> Vec<i64> {
        model
            .gens
            .iter()
            .enumerate()
            .flat_map(|(j, rows)| rows.iter().map(move |v| n[j] * v[a]))
            .collect()
    };
    let width: usize = model.gens.iter().map(Vec::len).sum();
    let mut states: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    states.insert(vec![0; width], Complex64::new(1.0, 0.0));
    for a in 0..t {
        let conj = pattern.is_some_and(|p| p.conjugates(a));
        let slot_terms: Vec<(Vec<i64>, Complex64)> = f
            .terms
            .iter()
            .map(|(n, &c)| {
                if conj {
                    let neg: Vec<i64> = n.iter().map(|k| -k).collect();
                    (pairing(&neg, a), c.conj())
                } else {
                    (pairing(n, a), c)
                }
            })
            .collect();
        let mut next: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (key, weight) in &states {
            for (delta, c) in &slot_terms {
                let k: Vec<i64> = key.iter().zip(delta).map(|(x, y)| x + y).collect();
                *next.entry(k).or_default() += weight * c;
            }
        }
        states = next;
    }
    Ok(states.get(&vec![0; width]).copied().unwrap_or_default())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: Complex64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
    pub samples: u64,
}

/// Monte-Carlo estimate of `∫_{X^Λ} Π_a f(y_a) dμ` over Haar samples.
/// Sample `i` is always drawn from the same stream and chunk sums are
/// merged in chunk order, so results do not depend on the thread count.
pub fn mc_average<F: TorusFunction + ?Sized>(
    f: &F,
    model: &LeibmanTorusModel,
    pattern: Option<&ConjugationPattern>,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let (t, m) = (model.forms(), model.coords());
    if f.dim() != m {
        return Err(Error::Dimension { expected: m, got: f.dim() });
    }
    check_pattern(pattern, t)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be ≥ 1".into()));
    }
    let partials = par::map_chunks(samples, MC_CHUNK, |range| {
        let mut sampler = model.sampler(seed);
        let mut x = vec![0.0; t * m];
        let (mut sum, mut sq) = (KahanSum::default(), KahanSum::default());
        for i in range {
            sampler.point(i, &mut x);
            let mut prod = Complex64::new(1.0, 0.0);
            for a in 0..t {
                let v = f.eval(&x[a * m..(a + 1) * m]);
                prod *= if pattern.is_some_and(|p| p.conjugates(a)) { v.conj() } else { v };
            }
            sum.add(prod);
            sq.add(Complex64::new(prod.norm_sqr(), 0.0));
        }
        (sum, sq)
    });
    let (mut sum, mut sq) = (KahanSum::default(), KahanSum::default());
    for (s, q) in &partials {
        sum.merge(s);
        sq.merge(q);
    }
    let n = samples as f64;
    let mean = sum.total() / n;
    let stderr = if samples > 1 {
        let var = ((sq.total().re - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { estimate: mean, stderr, samples })
}

#[derive(Clone, Debug)]
pub struct FejerTruncation {
    pub poly: TrigPolynomial,
    /// `max |f − truncation|` over the cell corners `i / q`.
    pub sup_error: f64,
    /// Grid-difference Lipschitz estimate of `f`.
    pub lipschitz: f64,
    /// `lipschitz · (1 + ln N) / N`, the shape of the Fourier approximation
    /// rate for Lipschitz functions.
    pub rate_bound: f64,
}

/// Fejér-weighted truncation of the discrete Fourier series of the grid
/// values to frequencies in `[−N, N]^m`. Coefficient of `n` is
/// `Π_j (1 − |n_j|/(N+1)) · q^{−m} Σ_i v_i e(−n·i/q)`.
pub fn fourier_truncate(f: &GridFunction, n: usize) -> Result<FejerTruncation> {
    let (m, q) = (f.m, f.q);
    if n == 0 {
        return Err(Error::InvalidParameter("truncation order must be ≥ 1".into()));
    }
    if 2 * n > q {
        return Err(Error::Resolution(format!("N = {n} exceeds q/2 = {}", q / 2)));
    }
    let width = 2 * n + 1;
    // separable DFT: transform axis by axis, x_1 slowest
    let mut data = f.values.clone();
    let mut shape = vec![q; m];
    for axis in 0..m {
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut out = vec![Complex64::default(); outer * width * inner];
        for o in 0..outer {
            for (fi, k) in (-(n as i64)..=n as i64).enumerate() {
                let weight = 1.0 - k.unsigned_abs() as f64 / (n + 1) as f64;
                let twiddle: Vec<Complex64> = (0..q).map(|i| e(-(k * i as i64) as f64 / q as f64)).collect();
                for inn in 0..inner {
                    let mut acc = KahanSum::default();
                    for (i, tw) in twiddle.iter().enumerate() {
                        acc.add(data[(o * q + i) * inner + inn] * tw);
                    }
                    out[(o * width + fi) * inner + inn] = acc.total() * (weight / q as f64);
                }
            }
        }
        data = out;
        shape[axis] = width;
    }

    let mut poly = TrigPolynomial::new(m);
    for (idx, &c) in data.iter().enumerate() {
        if c.norm() <= 1e-12 {
            continue;
        }
        let mut rest = idx;
        let mut freq = vec![0i64; m];
        for j in (0..m).rev() {
            freq[j] = (rest % width) as i64 - n as i64;
            rest /= width;
        }
        poly.add_term(freq, c)?;
    }

    let corners = GridFunction::from_corners(m, q, |x| poly.eval(x))?;
    let sup_error = corners
        .values
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let lipschitz = f.lipschitz_estimate();
    let nf = n as f64;
    Ok(FejerTruncation { poly, sup_error, lipschitz, rate_bound: lipschitz * (1.0 + nf.ln()) / nf })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(spec: &[u32], sys: &LinearFormSystem) -> LeibmanTorusModel {
        build_model(&FilteredTorusSpec::new(spec.to_vec()).unwrap(), sys).unwrap()
    }

    fn ap(k: usize) -> LinearFormSystem {
        LinearFormSystem::ap(k).unwrap()
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("1,2".parse::<FilteredTorusSpec>().unwrap().degrees(), &[1, 2]);
        assert!("1,0".parse::<FilteredTorusSpec>().is_err());
        assert!("".parse::<FilteredTorusSpec>().is_err());
        assert_eq!(FilteredTorusSpec::x_s(3).unwrap().degrees(), &[1, 2, 3]);
    }

    #[test]
    fn model_dimensions_for_ap4() {
        assert_eq!(model(&[1, 2], &ap(4)).dimension(), 5);
        assert_eq!(model(&[1], &ap(4)).dimension(), 2);
        assert_eq!(model(&[2], &ap(4)).dimension(), 3);
    }

    #[test]
    fn zero_form_rejected() {
        let sys = LinearFormSystem::new_relaxed(vec![vec![1, 0], vec![0, 0]]).unwrap();
        assert!(matches!(build_model(&FilteredTorusSpec::new(vec![1]).unwrap(), &sys), Err(Error::Degenerate(_))));
    }

    #[test]
    fn trivial_model_samples_are_uniform() {
        let md = model(&[1], &LinearFormSystem::trivial());
        let pts = sample_haar(&md, 11, 100_000);
        let mean: Complex64 = pts.iter().map(|p| e(p[0])).sum::<Complex64>() / pts.len() as f64;
        assert!(mean.norm() <= 0.02, "{mean}");
    }

    #[test]
    fn ap4_samples_satisfy_second_differences() {
        let md = model(&[1], &ap(4));
        for p in sample_haar(&md, 3, 2000) {
            for w in [[1.0, -2.0, 1.0, 0.0], [0.0, 1.0, -2.0, 1.0]] {
                let s: f64 = w.iter().zip(&p).map(|(a, b)| a * b).sum();
                assert!((s - s.round()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn sampling_is_counter_based() {
        let md = model(&[1, 2], &ap(4));
        let all = sample_haar(&md, 99, 50);
        let mut s = md.sampler(99);
        let mut p = vec![0.0; 8];
        s.point(37, &mut p);
        assert_eq!(p, all[37]);
    }

    #[test]
    fn character_triviality() {
        let md = model(&[1], &ap(3));
        let chi = |v: Vec<i64>| TupleCharacter::new(3, 1, v).unwrap();
        assert!(character_trivial_on_model(&chi(vec![0, 0, 0]), &md).unwrap());
        assert!(character_trivial_on_model(&chi(vec![1, -2, 1]), &md).unwrap());
        assert!(!character_trivial_on_model(&chi(vec![1, 1, 1]), &md).unwrap());
        assert!(character_trivial_on_model(&TupleCharacter::new(2, 1, vec![0, 0]).unwrap(), &md).is_err());
    }

    #[test]
    fn exact_average_of_constant_is_one() {
        let md = model(&[1, 2], &ap(4));
        let one = TrigPolynomial::constant(2, 1.0);
        let v = exact_trig_average(&one, &md, None, DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugated_character_on_u2() {
        let md = model(&[2], &LinearFormSystem::cube(2).unwrap());
        let mut f = TrigPolynomial::new(1);
        f.add_term(vec![1], Complex64::new(1.0, 0.0)).unwrap();
        let pat = ConjugationPattern::alternating(2);
        let v = exact_trig_average(&f, &md, Some(&pat), DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(v, Complex64::default());
        // on the degree-1 subtorus the same combination is principal
        let md1 = model(&[1], &LinearFormSystem::cube(2).unwrap());
        let v1 = exact_trig_average(&f, &md1, Some(&pat), DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(v1, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn term_budget_enforced() {
        let md = model(&[1], &ap(4));
        let f = TrigPolynomial::raised_cosine(1, 0);
        assert!(matches!(exact_trig_average(&f, &md, None, 80), Err(Error::Budget { .. })));
        assert!(exact_trig_average(&f, &md, None, 81).is_ok());
    }

    #[test]
    fn mc_of_constant_has_zero_stderr() {
        let md = model(&[1, 2], &ap(4));
        let r = mc_average(&TrigPolynomial::constant(2, 1.0), &md, None, 1000, 1).unwrap();
        assert!((r.estimate - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn mc_of_half_indicator() {
        let md = model(&[1, 2], &LinearFormSystem::trivial());
        let f = GridFunction::from_real(2, 2, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let r = mc_average(&f, &md, None, 20_000, 5).unwrap();
        assert!((r.estimate.re - 0.5).abs() <= 3.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn grid_lookup_convention() {
        let f = GridFunction::from_real(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.eval(&[0.1, 0.7]).re, 1.0);
        assert_eq!(f.eval(&[0.6, 0.2]).re, 2.0);
        assert_eq!(f.eval(&[0.5, 0.5]).re, 3.0);
        assert_eq!(f.eval(&[-0.25, 1.25]).re, 2.0);
        assert!(GridFunction::from_real(2, 2, vec![0.0; 3]).is_err());
        let round = GridFunction::from_text(&f.to_text()).unwrap();
        assert_eq!(round, f);
    }

    #[test]
    fn fejer_of_single_character() {
        let f = GridFunction::from_corners(1, 64, |x| e(x[0])).unwrap();
        let tr = fourier_truncate(&f, 4).unwrap();
        assert!((tr.poly.coefficient(&[1]) - Complex64::new(0.8, 0.0)).norm() <= 1e-6);
        assert_eq!(tr.poly.len(), 1);
        assert!(tr.sup_error <= 0.25);
    }

    #[test]
    fn fejer_of_constant() {
        let f = GridFunction::constant(2, 8, 0.3).unwrap();
        let tr = fourier_truncate(&f, 2).unwrap();
        assert_eq!(tr.poly.len(), 1);
        assert!((tr.poly.coefficient(&[0, 0]).re - 0.3).abs() < 1e-15);
        assert!(tr.sup_error < 1e-12);
    }

    #[test]
    fn fejer_of_half_indicator() {
        let f = GridFunction::from_corners(1, 64, |x| Complex64::new(if x[0] < 0.5 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let tr = fourier_truncate(&f, 8).unwrap();
        assert!(tr.sup_error <= 0.6, "{}", tr.sup_error);
        assert!((tr.poly.coefficient(&[0]).re - 0.5).abs() <= 1e-6);
        assert!(matches!(fourier_truncate(&f, 33), Err(Error::Resolution(_))));
    }

    #[test]
    fn trig_text_round_trip() {
        let p = TrigPolynomial::raised_cosine(2, 0);
        let back = TrigPolynomial::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
        assert!(TrigPolynomial::from_text("1 2\n").is_err());
    }
}

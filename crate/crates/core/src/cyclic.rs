//! Exact averages over `Z_N`, Gowers `U^2`/`U^3` norms, and the standard
//! discrete test functions.

use num_complex::Complex64;

use crate::exact::{is_prime, KahanSum};
use crate::linsys::{ConjugationPattern, LinearFormSystem};
use crate::{e, par, Error, Result};

const SUM_CHUNK: u64 = 1 << 15;

/// A function `Z_N → C`, `N = values.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicFunction {
    values: Vec<Complex64>,
    bounded: bool,
}

impl CyclicFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("modulus must be ≥ 1".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numeric("function values must be finite".into()));
        }
        let bounded = values.iter().all(|v| v.norm() <= 1.0 + 1e-12);
        Ok(Self { values, bounded })
    }

    pub fn from_real(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_real(vec![c; n])
    }

    pub fn indicator(n: usize, set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = vec![0.0; n];
        for x in set {
            v[x % n.max(1)] = 1.0;
        }
        Self::from_real(v)
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `|f(x)| ≤ 1` everywhere.
    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn mean(&self) -> Complex64 {
        let mut k = KahanSum::default();
        for &v in &self.values {
            k.add(v);
        }
        k.total() / self.values.len() as f64
    }

    /// `x ↦ f(x + c)`.
    pub fn translate(&self, c: usize) -> Self {
        let n = self.modulus();
        let values = (0..n).map(|x| self.values[(x + c) % n]).collect();
        Self { values, bounded: self.bounded }
    }

    /// `x ↦ f(x) e(ξx/N)`.
    pub fn modulate(&self, xi: u64) -> Self {
        let n = self.modulus() as u64;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| v * e(((xi % n) * x as u64 % n) as f64 / n as f64))
            .collect();
        Self { values, bounded: self.bounded }
    }

    /// Header `N`, then one value per line: `re im` or a single real `v`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty function file".into()))?;
        let n: usize = header.parse().map_err(|_| Error::Parse(format!("bad modulus `{header}`")))?;
        let num = |w: &str| w.parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{w}`")));
        let values = lines
            .map(|l| {
                let w: Vec<&str> = l.split_whitespace().collect();
                match w[..] {
                    [v] => Ok(Complex64::new(num(v)?, 0.0)),
                    [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
                    _ => Err(Error::Parse(format!("value line `{l}` must be `v` or `re im`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(Error::Parse(format!("expected {n} values, found {}", values.len())));
        }
        Self::new(values)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.modulus());
        let real = self.is_real();
        for v in &self.values {
            if real {
                s.push_str(&format!("{}\n", v.re));
            } else {
                s.push_str(&format!("{} {}\n", v.re, v.im));
            }
        }
        s
    }
}

/// `x ↦ e(x²/p)` on `Z_p`.
pub fn quadratic_phase(p: u64) -> Result<CyclicFunction> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let values = (0..p).map(|x| e(((x as u128 * x as u128) % p as u128) as f64 / p as f64)).collect();
    CyclicFunction::new(values)
}

/// Indicator of the open interval `(p/3, 2p/3)` in `Z_p`.
pub fn sumfree_interval(p: u64) -> Result<CyclicFunction> {
    if p < 5 {
        return Err(Error::InvalidParameter(format!("p = {p} < 5")));
    }
    let n = usize::try_from(p).map_err(|_| Error::InvalidParameter("p too large".into()))?;
    CyclicFunction::indicator(n, (0..n).filter(|&x| 3 * x > n && 3 * x < 2 * n))
}

/// `∫ f(x) dx` under the single trivial form, i.e. the density.
pub fn density(f: &CyclicFunction) -> Complex64 {
    f.mean()
}

fn is_cube_system(system: &LinearFormSystem) -> bool {
    [2, 3].iter().any(|&d| LinearFormSystem::cube(d).map(|c| c.rows() == system.rows()).unwrap_or(false))
}

/// `(1/N^D) Σ_{n ∈ Z_N^D} Π_a f(ℓ_a(n))`, conjugating slot `a` when the
/// pattern says so. Brute force, compensated summation.
pub fn sol_discrete(
    f: &CyclicFunction,
    system: &LinearFormSystem,
    pattern: Option<&ConjugationPattern>,
    budget: u64,
) -> Result<Complex64> {
    if let Some(p) = pattern {
        p.check_len(system.forms())?;
    }
    let n = f.modulus() as u64;
    let d = system.vars();
    let total = (n as u128).saturating_pow(d as u32);
    if total > budget as u128 {
        let hint = is_cube_system(system).then(|| "cube system: use the gowers recursion instead".to_string());
        return Err(Error::Budget { needed: total, budget, hint });
    }
    let total = total as u64;
    let coeffs: Vec<Vec<u64>> = system
        .rows()
        .iter()
        .map(|r| r.iter().map(|&c| c.rem_euclid(n as i64) as u64).collect())
        .collect();
    let vals: Vec<Vec<Complex64>> = (0..system.forms())
        .map(|a| {
            if pattern.is_some_and(|p| p.conjugates(a)) {
                f.values.iter().map(|v| v.conj()).collect()
            } else {
                f.values.clone()
            }
        })
        .collect();

    let partials = par::map_chunks(total, SUM_CHUNK, |range| {
        let mut point = decode(range.start, n, d);
        let mut forms: Vec<u64> = coeffs
            .iter()
            .map(|c| c.iter().zip(&point).fold(0, |acc, (a, x)| (acc + a * x) % n))
            .collect();
        let mut acc = KahanSum::default();
        for _ in range {
            let mut prod = Complex64::new(1.0, 0.0);
            for (a, &x) in forms.iter().enumerate() {
                prod *= vals[a][x as usize];
            }
            acc.add(prod);
            // odometer step, last variable fastest
            for k in (0..d).rev() {
                point[k] += 1;
                for (fv, c) in forms.iter_mut().zip(&coeffs) {
                    *fv = (*fv + c[k]) % n;
                }
                if point[k] < n {
                    break;
                }
                point[k] = 0;
            }
        }
        acc
    });
    let mut acc = KahanSum::default();
    for p in &partials {
        acc.merge(p);
    }
    Ok(acc.total() / total as f64)
}

fn decode(mut idx: u64, n: u64, d: usize) -> Vec<u64> {
    let mut point = vec![0; d];
    for k in (0..d).rev() {
        point[k] = idx % n;
        idx /= n;
    }
    point
}

/// `‖f‖_{U^d}^{2^d}` via `E_h ‖Δ_h f‖_{U^{d−1}}^{2^{d−1}}` with
/// `Δ_h f(x) = f(x+h) conj(f(x))` and base case `‖g‖_{U^1}^2 = |E g|^2`.
/// Costs `O(N^d)`.
pub fn gowers_norm_pow(f: &CyclicFunction, d: u32) -> Result<f64> {
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("Gowers degree {d} not in {{2,3}}")));
    }
    let n = f.modulus();
    let partials = par::map_chunks(n as u64, 1, |range| {
        let mut acc = KahanSum::default();
        for h in range {
            let g = derivative(&f.values, h as usize);
            acc.add(Complex64::new(uniformity_pow(&g, d - 1), 0.0));
        }
        acc
    });
    let mut acc = KahanSum::default();
    for p in &partials {
        acc.merge(p);
    }
    // every summand is a squared modulus, so the total is nonnegative
    Ok((acc.total().re / n as f64).max(0.0))
}

fn derivative(f: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = f.len();
    (0..n).map(|x| f[(x + h) % n] * f[x].conj()).collect()
}

fn uniformity_pow(g: &[Complex64], d: u32) -> f64 {
    let n = g.len();
    if d == 1 {
        let mut k = KahanSum::default();
        for &v in g {
            k.add(v);
        }
        return (k.total() / n as f64).norm_sqr();
    }
    let mut acc = 0.0;
    let mut comp = 0.0;
    for h in 0..n {
        let term = uniformity_pow(&derivative(g, h), d - 1);
        let y = term - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc / n as f64
}

/// Precomputed form values `ℓ_a(n) mod N` for every `n ∈ Z_N^D`, for fast
/// repeated evaluation of real-valued averages (used by extremal searches).
#[derive(Clone, Debug)]
pub struct FormTable {
    n: usize,
    t: usize,
    points: usize,
    table: Vec<u32>,
}

/// Largest `N^D` a [`FormTable`] will hold.
pub const FORM_TABLE_LIMIT: u64 = 50_000_000;

impl FormTable {
    pub fn new(system: &LinearFormSystem, n: usize) -> Result<Self> {
        let d = system.vars();
        let t = system.forms();
        let points = (n as u128).saturating_pow(d as u32);
        if points * t as u128 > FORM_TABLE_LIMIT as u128 {
            return Err(Error::budget(points * t as u128, FORM_TABLE_LIMIT));
        }
        let points = points as usize;
        let mut table = Vec::with_capacity(points * t);
        for idx in 0..points as u64 {
            let x: Vec<i64> = decode(idx, n as u64, d).into_iter().map(|v| v as i64).collect();
            for r in system.rows() {
                let v: i64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();
                table.push(v.rem_euclid(n as i64) as u32);
            }
        }
        Ok(Self { n, t, points, table })
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `(ℓ_1(n), …, ℓ_t(n)) mod N` for each `n`, in odometer order.
    pub fn rows(&self) -> std::slice::ChunksExact<'_, u32> {
        self.table.chunks_exact(self.t)
    }

    /// Number of `n` with every `ℓ_a(n)` in the set.
    pub fn count(&self, member: &[bool]) -> u64 {
        self.table
            .chunks_exact(self.t)
            .filter(|vals| vals.iter().all(|&v| member[v as usize]))
            .count() as u64
    }

    /// `(1/N^D) Σ_n Π_a f(ℓ_a(n))` for real `f`.
    pub fn average(&self, f: &[f64]) -> f64 {
        let mut sum = 0.0;
        for vals in self.table.chunks_exact(self.t) {
            let mut prod = 1.0;
            for &v in vals {
                prod *= f[v as usize];
                if prod == 0.0 {
                    break;
                }
            }
            sum += prod;
        }
        sum / self.points as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_one_averages_to_one() {
        let f = CyclicFunction::constant(7, 1.0).unwrap();
        for sys in [LinearFormSystem::ap(4).unwrap(), LinearFormSystem::schur(), LinearFormSystem::cube(3).unwrap()] {
            let v = sol_discrete(&f, &sys, None, DEFAULT_BUDGET).unwrap();
            assert!((v - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn three_ap_count_on_z5() {
        let f = CyclicFunction::indicator(5, [3, 4]).unwrap();
        let v = sol_discrete(&f, &LinearFormSystem::ap(3).unwrap(), None, DEFAULT_BUDGET).unwrap();
        assert!((v.re - 0.08).abs() < 1e-15);
    }

    #[test]
    fn sumfree_intervals() {
        let f7 = sumfree_interval(7).unwrap();
        assert_eq!(f7, CyclicFunction::indicator(7, [3, 4]).unwrap());
        let f101 = sumfree_interval(101).unwrap();
        let support: Vec<usize> = (0..101).filter(|&x| f101.values()[x].re == 1.0).collect();
        assert_eq!(support, (34..=67).collect::<Vec<_>>());
        assert!((density(&f101).re - 34.0 / 101.0).abs() < 1e-15);
        for f in [f7, f101] {
            assert_eq!(sol_discrete(&f, &LinearFormSystem::schur(), None, DEFAULT_BUDGET).unwrap(), c(0.0));
        }
        assert!(sumfree_interval(4).is_err());
    }

    #[test]
    fn quadratic_phase_values() {
        let f2 = quadratic_phase(2).unwrap();
        assert!((f2.values()[0] - c(1.0)).norm() < 1e-15);
        assert!((f2.values()[1] - c(-1.0)).norm() < 1e-15);
        let f5 = quadratic_phase(5).unwrap();
        assert!((f5.values()[2] - e(4.0 / 5.0)).norm() < 1e-15);
        assert!(matches!(quadratic_phase(15), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn gowers_of_quadratic_phase() {
        let f = quadratic_phase(13).unwrap();
        assert!((gowers_norm_pow(&f, 3).unwrap() - 1.0).abs() < 1e-9);
        assert!((gowers_norm_pow(&f, 2).unwrap() - 1.0 / 13.0).abs() < 1e-9);
        assert!((gowers_norm_pow(&CyclicFunction::constant(9, 1.0).unwrap(), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(gowers_norm_pow(&f, 4).is_err());
    }

    #[test]
    fn budget_hint_for_cube_systems() {
        let f = quadratic_phase(31).unwrap();
        match sol_discrete(&f, &LinearFormSystem::cube(3).unwrap(), None, 1000) {
            Err(Error::Budget { hint: Some(h), .. }) => assert!(h.contains("gowers")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn form_table_matches_sol_discrete() {
        let sys = LinearFormSystem::ap(4).unwrap();
        let vals = vec![0.3, 1.0, 0.0, 0.7, 0.9, 0.2, 0.5];
        let table = FormTable::new(&sys, 7).unwrap();
        let f = CyclicFunction::from_real(vals.clone()).unwrap();
        let brute = sol_discrete(&f, &sys, None, DEFAULT_BUDGET).unwrap().re;
        assert!((table.average(&vals) - brute).abs() < 1e-14);
        let member: Vec<bool> = vals.iter().map(|&v| v > 0.6).collect();
        let ind = CyclicFunction::indicator(7, (0..7).filter(|&x| member[x])).unwrap();
        let count = table.count(&member) as f64 / 49.0;
        assert!((sol_discrete(&ind, &sys, None, DEFAULT_BUDGET).unwrap().re - count).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let f = quadratic_phase(5).unwrap();
        let back = CyclicFunction::from_text(&f.to_text()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(CyclicFunction::from_text("3\n1\n2\n").is_err());
        assert!(CyclicFunction::from_text("1\n1 2 3\n").is_err());
    }
}

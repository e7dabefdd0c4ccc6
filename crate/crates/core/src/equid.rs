//! Balanced maps between filtered tori, checked at the level of characters.
//!
//! Two families are covered. The homomorphisms `φ_k: T → T^d`,
//! `x ↦ (x, kx, …, k^{d−1}x)`, whose pullback of a character `χ` on
//! `(T^d)^t` has integer frequency `n(k)_a = Σ_j M[a,j] k^j`; whether `χ`
//! integrates to zero on the domain subtorus is then an exact question about
//! integer polynomials in `k`. And `p`-periodic polynomial orbits
//! `Z_p → T^m` with rational coefficients, whose character sums over
//! `Λ(Z_p^D)` are computed exactly in residue arithmetic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cyclic::FormTable;
use crate::exact::KahanSum;
use crate::lattice::leibman_lattice;
use crate::linsys::LinearFormSystem;
use crate::poly::RationalPoly;
use crate::torus::{build_model, character_trivial_on_model, fixed_circle_dist, FilteredTorusSpec, TupleCharacter};
use crate::{e, par, Error, Result};

/// Cap on the number of enumerated characters.
pub const CHARACTER_BUDGET: u64 = 100_000_000;

/// `φ_k: T → T^d`, `x ↦ (x, kx, …, k^{d−1}x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiKMap {
    k: u64,
    d: usize,
}

impl PhiKMap {
    pub fn new(k: u64, d: usize) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::InvalidParameter("φ_k needs k ≥ 1 and d ≥ 1".into()));
        }
        Ok(Self { k, d })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `k^j mod 2^64`, enough for fixed-point arithmetic on the circle.
    fn powers_wrapping(&self) -> Vec<u64> {
        let mut p = Vec::with_capacity(self.d);
        let mut acc = 1u64;
        for _ in 0..self.d {
            p.push(acc);
            acc = acc.wrapping_mul(self.k);
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KThreshold {
    /// The pullback integrates to zero for every `k ≥` this value, and
    /// (when larger than 1) not at the value just below it.
    From(u64),
    /// The pullback is principal for every `k`.
    NeverVanishes,
}

/// Pairings `Σ_a M[a,j] v(a)` of every column of `chi` with every domain
/// basis vector `v`: coefficient `j` of the integer polynomial `n(k)·v`.
fn pullback_polys(chi: &TupleCharacter, domain: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    domain
        .iter()
        .map(|v| {
            (0..chi.coords())
                .map(|j| (0..chi.forms()).map(|a| BigInt::from(chi.entry(a, j)) * &v[a]).sum())
                .collect()
        })
        .collect()
}

fn eval_poly(coeffs: &[BigInt], k: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * k + c)
}

/// Positive integer roots of a nonzero integer polynomial.
fn positive_integer_roots(coeffs: &[BigInt]) -> BTreeSet<u64> {
    let low = coeffs.iter().position(|c| !c.is_zero()).expect("nonzero polynomial");
    let reduced = &coeffs[low..];
    let mut roots = BTreeSet::new();
    if reduced.len() == 1 {
        return roots;
    }
    // any integer root divides the lowest nonzero coefficient
    let c0 = reduced[0].abs();
    let mut d = BigInt::one();
    while &d * &d <= c0 {
        if c0.is_multiple_of(&d) {
            for cand in [d.clone(), &c0 / &d] {
                if eval_poly(reduced, &cand).is_zero() {
                    if let Some(k) = cand.to_u64() {
                        roots.insert(k);
                    }
                }
            }
        }
        d += 1;
    }
    roots
}

/// Least `k₀ ≥ 1` such that for every `k ≥ k₀` the pullback of `chi`
/// through `φ_k` integrates to zero on the degree-`domain_degree` subtorus
/// of `Λ`.
///
/// `chi` lives on `(T^d)^t` with `d = chi.coords()`, and must be
/// non-principal on the target subtorus where every coordinate carries the
/// degree-`target_degree` filtration.
pub fn min_k_threshold(
    chi: &TupleCharacter,
    system: &LinearFormSystem,
    domain_degree: u32,
    target_degree: u32,
) -> Result<KThreshold> {
    let d = chi.coords();
    let target = build_model(&FilteredTorusSpec::new(vec![target_degree; d])?, system)?;
    if character_trivial_on_model(chi, &target)? {
        return Err(Error::Precondition("character is principal on the target subtorus".into()));
    }
    let domain = leibman_lattice(system, domain_degree);
    let polys = pullback_polys(chi, domain.basis());
    let nonzero: Vec<&Vec<BigInt>> = polys.iter().filter(|p| p.iter().any(|c| !c.is_zero())).collect();
    if nonzero.is_empty() {
        return Ok(KThreshold::NeverVanishes);
    }
    // k is bad iff every pairing polynomial vanishes at k
    let mut bad = positive_integer_roots(nonzero[0]);
    for p in &nonzero[1..] {
        let roots = positive_integer_roots(p);
        bad.retain(|k| roots.contains(k));
    }
    Ok(KThreshold::From(bad.last().map_or(1, |k| k + 1)))
}

/// Maximum circle distance from 0 of `w · φ_k^t(x)` over Haar samples `x`
/// of the degree-`domain_degree` subtorus, `w` ranging over the orthogonal
/// complements of the target blocks. Zero (up to float noise) means every
/// image point lies in the target subtorus.
pub fn phi_k_image_check(
    map: &PhiKMap,
    system: &LinearFormSystem,
    domain_degree: u32,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    let t = system.forms();
    let d = map.d;
    let domain = build_model(&FilteredTorusSpec::new(vec![domain_degree])?, system)?;
    let target = build_model(&FilteredTorusSpec::new(vec![domain_degree; d])?, system)?;
    let complements: Vec<Vec<Vec<i64>>> = target
        .blocks()
        .iter()
        .map(|b| b.orthogonal_complement().basis_i64())
        .collect::<Result<_>>()?;
    let powers = map.powers_wrapping();
    let worst = par::map_chunks(samples, 4096, |range| {
        let mut sampler = domain.sampler(seed);
        let mut x = vec![0u64; t];
        let mut worst: f64 = 0.0;
        for i in range {
            sampler.point_fixed(i, &mut x);
            for (j, comp) in complements.iter().enumerate() {
                for w in comp {
                    let phase = w.iter().zip(&x).fold(0u64, |acc, (&wa, &xa)| {
                        acc.wrapping_add((wa as u64).wrapping_mul(powers[j].wrapping_mul(xa)))
                    });
                    worst = worst.max(fixed_circle_dist(phase));
                }
            }
        }
        worst
    });
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceReport {
    pub k: u64,
    pub enumerated: u64,
    /// Principal on the target subtorus (both integrals are 1).
    pub trivial: u64,
    /// Non-principal on the target and pulled back to a non-principal
    /// character (both integrals are 0).
    pub vanishing: u64,
    /// Characters whose two integrals differ.
    pub violated: Vec<TupleCharacter>,
    /// `max |∫_target χ − ∫_domain χ∘φ_k|`, 0 or 1.
    pub max_discrepancy: f64,
}

impl BalanceReport {
    pub fn certifies(&self) -> bool {
        self.violated.is_empty()
    }
}

fn enumeration_size(freq_bound: u32, entries: usize) -> Result<u64> {
    if freq_bound == 0 {
        return Err(Error::InvalidParameter("frequency bound must be ≥ 1".into()));
    }
    let count = (2 * freq_bound as u128 + 1).saturating_pow(entries as u32);
    if count > CHARACTER_BUDGET as u128 {
        return Err(Error::budget(count, CHARACTER_BUDGET));
    }
    Ok(count as u64)
}

fn decode_character(mut idx: u64, freq_bound: u32, t: usize, m: usize) -> Vec<i64> {
    let base = 2 * freq_bound as u64 + 1;
    let mut freq = vec![0i64; t * m];
    for slot in freq.iter_mut().rev() {
        *slot = (idx % base) as i64 - freq_bound as i64;
        idx /= base;
    }
    freq
}

/// Indices `i` with `Σ_j c_j ks[i]^j` possibly zero; exact for at most two
/// nonzero coefficients, otherwise every index is returned for checking.
fn candidate_roots(coeffs: &[i128], kpows: &[Vec<i128>]) -> Vec<usize> {
    let nz: Vec<usize> = (0..coeffs.len()).filter(|&j| coeffs[j] != 0).collect();
    match nz.as_slice() {
        [] => (0..kpows.len()).collect(),
        [_] => Vec::new(),
        [lo, hi] if *lo == 0 && *hi == 1 => {
            // c0 + c1 k = 0
            let (c0, c1) = (coeffs[0], coeffs[1]);
            if c0 % c1 != 0 {
                return Vec::new();
            }
            let k = -c0 / c1;
            (0..kpows.len()).filter(|&i| kpows[i][1] == k).collect()
        }
        _ => (0..kpows.len()).collect(),
    }
}

/// Classifies every character with entries in `[−freq_bound, freq_bound]`
/// on `(T^d)^t` by comparing its integral over the target subtorus
/// (degree-`target_degree` on each coordinate) with the integral of its
/// `φ_k` pullback over the degree-`domain_degree` domain subtorus. Exact
/// integer tests only.
pub fn phi_k_balance_report(
    map: &PhiKMap,
    system: &LinearFormSystem,
    domain_degree: u32,
    target_degree: u32,
    freq_bound: u32,
) -> Result<BalanceReport> {
    let mut reports = phi_k_balance_sweep(system, map.d, domain_degree, target_degree, freq_bound, &[map.k])?;
    Ok(reports.pop().expect("one report per k"))
}

/// [`phi_k_balance_report`] for several `k` at once. Target principality
/// does not depend on `k` and each domain pairing is a polynomial in `k`,
/// so every character is decoded once.
pub fn phi_k_balance_sweep(
    system: &LinearFormSystem,
    d: usize,
    domain_degree: u32,
    target_degree: u32,
    freq_bound: u32,
    ks: &[u64],
) -> Result<Vec<BalanceReport>> {
    let maps = ks.iter().map(|&k| PhiKMap::new(k, d)).collect::<Result<Vec<_>>>()?;
    let t = system.forms();
    let count = enumeration_size(freq_bound, d * t)?;
    let target = leibman_lattice(system, target_degree).basis_i64()?;
    let domain = leibman_lattice(system, domain_degree).basis_i64()?;
    let kpows = maps
        .iter()
        .map(|m| {
            let mut kpow = vec![1i128; d];
            for j in 1..d {
                kpow[j] = kpow[j - 1]
                    .checked_mul(m.k as i128)
                    .ok_or_else(|| Error::Numeric("k^(d-1) overflows 128 bits".into()))?;
            }
            Ok(kpow)
        })
        .collect::<Result<Vec<_>>>()?;

    let chunks = par::map_chunks(count, 1 << 14, |range| {
        let mut trivial = vec![0u64; ks.len()];
        let mut vanishing = vec![0u64; ks.len()];
        let mut violated = vec![Vec::new(); ks.len()];
        let mut vanishing_all = 0u64;
        let mut freq = decode_character(range.start, freq_bound, t, d);
        // pairings M[:,j] · w with target basis rows and domain basis rows,
        // kept current as the odometer moves one entry at a time
        let pair = |basis: &[Vec<i64>], freq: &[i64]| -> Vec<Vec<i128>> {
            basis
                .iter()
                .map(|v| (0..d).map(|j| (0..t).map(|a| freq[a * d + j] as i128 * v[a] as i128).sum()).collect())
                .collect()
        };
        let mut tpair = pair(&target, &freq);
        let mut dpair = pair(&domain, &freq);
        let b = freq_bound as i64;
        for _ in range {
            let target_trivial = tpair.iter().all(|row| row.iter().all(|&c| c == 0));
            // k for which the pullback is principal on the domain: every
            // pairing polynomial vanishes, so only roots of the first
            // nonzero one need checking
            let principal_at: Option<Vec<usize>> = match dpair.iter().position(|row| row.iter().any(|&c| c != 0)) {
                None => None,
                Some(l) => Some(
                    candidate_roots(&dpair[l], &kpows)
                        .into_iter()
                        .filter(|&i| {
                            dpair.iter().all(|row| row.iter().zip(&kpows[i]).map(|(c, k)| c * k).sum::<i128>() == 0)
                        })
                        .collect(),
                ),
            };
            let mut record = |i: usize, domain_trivial: bool| match (target_trivial, domain_trivial) {
                (true, true) => trivial[i] += 1,
                (false, false) => vanishing[i] += 1,
                _ => violated[i].push(TupleCharacter::new(t, d, freq.clone()).expect("t × d entries")),
            };
            match principal_at {
                None => (0..ks.len()).for_each(|i| record(i, true)),
                Some(roots) if roots.is_empty() && !target_trivial => vanishing_all += 1,
                Some(roots) => (0..ks.len()).for_each(|i| record(i, roots.contains(&i))),
            }
            for s in (0..t * d).rev() {
                let (a, j) = (s / d, s % d);
                let delta = if freq[s] < b { 1 } else { -2 * b };
                freq[s] += delta;
                for (rows, basis) in [(&mut tpair, &target), (&mut dpair, &domain)] {
                    for (row, v) in rows.iter_mut().zip(basis) {
                        row[j] += delta as i128 * v[a] as i128;
                    }
                }
                if delta == 1 {
                    break;
                }
            }
        }
        vanishing.iter_mut().for_each(|v| *v += vanishing_all);
        (trivial, vanishing, violated)
    });
    let mut reports: Vec<BalanceReport> = ks
        .iter()
        .map(|&k| BalanceReport {
            k,
            enumerated: count,
            trivial: 0,
            vanishing: 0,
            violated: Vec::new(),
            max_discrepancy: 0.0,
        })
        .collect();
    for (tr, va, vi) in chunks {
        for (i, r) in reports.iter_mut().enumerate() {
            r.trivial += tr[i];
            r.vanishing += va[i];
            r.violated.extend(vi[i].iter().cloned());
        }
    }
    for r in &mut reports {
        if !r.violated.is_empty() {
            r.max_discrepancy = 1.0;
        }
    }
    Ok(reports)
}

/// Polynomial map `Z → T^m`, `n ↦ (g_1(n), …, g_m(n)) mod 1`, intended to
/// descend to `Z_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialOrbit {
    p: u64,
    coords: Vec<RationalPoly>,
}

impl PolynomialOrbit {
    /// Requires `g_j(0) = 0` for every coordinate.
    pub fn new(p: u64, coords: Vec<RationalPoly>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("modulus must be ≥ 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::InvalidParameter("orbit needs at least one coordinate".into()));
        }
        if let Some(j) = coords.iter().position(|g| !g.constant_term().is_zero()) {
            return Err(Error::InvalidParameter(format!("coordinate {} has g(0) ≠ 0", j + 1)));
        }
        Ok(Self { p, coords })
    }

    /// Parses `;`-separated coordinate polynomials, e.g. `n/101; (n^2)/101`.
    pub fn parse(p: u64, coords: &str) -> Result<Self> {
        let polys = coords.split(';').map(|s| s.trim().parse()).collect::<Result<Vec<RationalPoly>>>()?;
        Self::new(p, polys)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coords(&self) -> &[RationalPoly] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `g(n) mod 1` as floats.
    pub fn eval_mod1(&self, n: i64) -> Vec<f64> {
        self.coords
            .iter()
            .map(|g| {
                let v = g.eval_int(n);
                let frac = &v - v.floor();
                frac.to_f64().unwrap_or(0.0)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyCertificate {
    pub consistent: bool,
    /// `g_j(n + p) − g_j(n)` per coordinate.
    pub differences: Vec<RationalPoly>,
    /// First non-integral coefficient: `(coordinate, power, value)`.
    pub offending: Option<(usize, usize, BigRational)>,
}

/// Whether `g(n + p) − g(n) ∈ Z^m` for all integers `n`, decided by
/// requiring every coefficient of the expanded difference to be an integer.
pub fn verify_consistency(orbit: &PolynomialOrbit) -> ConsistencyCertificate {
    let shift = BigRational::from_integer(BigInt::from(orbit.p));
    let differences: Vec<RationalPoly> = orbit.coords.iter().map(|g| &g.shift(&shift) - g).collect();
    let offending = differences.iter().enumerate().find_map(|(j, diff)| {
        diff.coeffs()
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_integer())
            .map(|(e, c)| (j, e, c.clone()))
    });
    ConsistencyCertificate { consistent: offending.is_none(), differences, offending }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylBalance {
    /// `max |E_{n ∈ Z_p^D} χ(g(ℓ_1(n)), …, g(ℓ_t(n)))|` over the
    /// non-principal characters enumerated.
    pub max_abs: f64,
    pub argmax: Option<TupleCharacter>,
    pub characters: u64,
    /// `(1 + ln N)/N` at `N = freq_bound`: the rate, per unit Lipschitz
    /// norm, at which Fejér truncation to this frequency box approximates a
    /// Lipschitz test function.
    pub fourier_rate: f64,
}

/// Character-level balance test of a `p`-periodic orbit against the
/// Leibman subtorus of `system` on the filtered torus `spec`.
pub fn weyl_balance_test(
    orbit: &PolynomialOrbit,
    spec: &FilteredTorusSpec,
    system: &LinearFormSystem,
    freq_bound: u32,
    budget: u64,
) -> Result<WeylBalance> {
    let m = orbit.dim();
    if spec.dim() != m {
        return Err(Error::Dimension { expected: spec.dim(), got: m });
    }
    let cert = verify_consistency(orbit);
    if !cert.consistent {
        return Err(Error::Precondition("orbit is not p-periodic mod 1".into()));
    }
    for (j, (g, &dj)) in orbit.coords.iter().zip(spec.degrees()).enumerate() {
        if g.degree() > dj as usize {
            return Err(Error::Precondition(format!("coordinate {} has degree {} > {dj}", j + 1, g.degree())));
        }
    }
    let p = orbit.p;
    let points = (p as u128).saturating_pow(system.vars() as u32);
    if points > budget as u128 {
        return Err(Error::budget(points, budget));
    }
    let t = system.forms();
    let count = enumeration_size(freq_bound, t * m)?;
    let model = build_model(spec, system)?;

    // common denominator: g_j(x)·L is an integer for every integer x
    let lcm = orbit.coords.iter().fold(BigInt::one(), |acc, g| acc.lcm(&g.denominator_lcm()));
    let l = lcm
        .to_u64()
        .filter(|&l| l <= 1 << 40)
        .ok_or_else(|| Error::Numeric(format!("common denominator {lcm} too large")))?;
    let lbig = BigRational::from_integer(lcm.clone());
    let residues: Vec<Vec<u64>> = orbit
        .coords
        .iter()
        .map(|g| {
            (0..p as i64)
                .map(|x| {
                    let v = g.eval_int(x) * &lbig;
                    debug_assert!(v.is_integer());
                    v.to_integer().mod_floor(&lcm).to_u64().expect("residue < L")
                })
                .collect()
        })
        .collect();

    let table = FormTable::new(system, p as usize)?;
    let n_points = table.points();
    let use_histogram = l <= n_points as u64;
    let roots: Option<Vec<Complex64>> = (l <= 1 << 22).then(|| (0..l).map(|r| e(r as f64 / l as f64)).collect());

    let chunks = par::map_chunks(count, 64, |range| {
        let mut best: (f64, Option<u64>) = (-1.0, None);
        let mut nontrivial = 0u64;
        let mut slot_tables = vec![vec![0u64; p as usize]; t];
        for idx in range {
            let freq = decode_character(idx, freq_bound, t, m);
            let chi = TupleCharacter::new(t, m, freq).expect("t × m entries");
            if character_trivial_on_model(&chi, &model).expect("dimensions agree") {
                continue;
            }
            nontrivial += 1;
            for (a, tab) in slot_tables.iter_mut().enumerate() {
                for (x, out) in tab.iter_mut().enumerate() {
                    let s: i128 = (0..m).map(|j| chi.entry(a, j) as i128 * residues[j][x] as i128).sum();
                    *out = s.rem_euclid(l as i128) as u64;
                }
            }
            let value = if use_histogram {
                let mut hist = vec![0u64; l as usize];
                table.rows().for_each(|forms| {
                    let r = forms.iter().enumerate().fold(0u64, |acc, (a, &x)| (acc + slot_tables[a][x as usize]) % l);
                    hist[r as usize] += 1;
                });
                if hist.iter().all(|&h| h == hist[0]) && l > 1 {
                    0.0
                } else {
                    let mut acc = KahanSum::default();
                    for (r, &h) in hist.iter().enumerate() {
                        if h > 0 {
                            let root = roots.as_ref().map_or_else(|| e(r as f64 / l as f64), |z| z[r]);
                            acc.add(root * h as f64);
                        }
                    }
                    acc.total().norm() / n_points as f64
                }
            } else {
                let mut acc = KahanSum::default();
                table.rows().for_each(|forms| {
                    let r = forms.iter().enumerate().fold(0u64, |acc, (a, &x)| (acc + slot_tables[a][x as usize]) % l);
                    acc.add(roots.as_ref().map_or_else(|| e(r as f64 / l as f64), |z| z[r as usize]));
                });
                acc.total().norm() / n_points as f64
            };
            if value > best.0 {
                best = (value, Some(idx));
            }
        }
        (best, nontrivial)
    });

    let mut best: (f64, Option<u64>) = (0.0, None);
    let mut characters = 0;
    for ((v, idx), n) in chunks {
        characters += n;
        if idx.is_some() && (best.1.is_none() || v > best.0) {
            best = (v, idx);
        }
    }
    let nf = freq_bound as f64;
    Ok(WeylBalance {
        max_abs: best.0,
        argmax: best.1.map(|i| TupleCharacter::new(t, m, decode_character(i, freq_bound, t, m)).expect("t × m")),
        characters,
        fourier_rate: (1.0 + nf.ln()) / nf,
    })
}

//! Subgroups of `Z^t` in Hermite normal form, and the Leibman lattices
//! `Λ^[i]` of a system of forms.
//!
//! Canonical form: basis rows are in row echelon form, each pivot (first
//! nonzero entry of a row) is positive, and every entry sitting above a
//! pivot is reduced into `[0, pivot)`. Two generating sets of the same
//! subgroup produce bit-identical bases.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact;
use crate::linsys::LinearFormSystem;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerLattice {
    ambient_dim: usize,
    basis: Vec<Vec<BigInt>>,
}

/// Componentwise `C(v(a), k)`.
pub fn vector_binomial(v: &[BigInt], k: u32) -> Vec<BigInt> {
    v.iter().map(|x| exact::binomial(x, k)).collect()
}

/// Generators `Π_j C(v_j, k_j)` of `Λ^[i]`, over multi-indices with
/// `1 ≤ Σ k_j ≤ i` in lexicographic order, `v_j` the columns of the
/// system. Vanishing products are dropped.
pub fn leibman_generators(system: &LinearFormSystem, i: u32) -> Vec<Vec<BigInt>> {
    let t = system.forms();
    let columns: Vec<Vec<BigInt>> = (0..system.vars())
        .map(|j| system.column(j).into_iter().map(BigInt::from).collect())
        .collect();
    // binomials[j][k] = C(v_j, k)
    let binomials: Vec<Vec<Vec<BigInt>>> = columns
        .iter()
        .map(|c| (0..=i).map(|k| vector_binomial(c, k)).collect())
        .collect();

    let mut out = Vec::new();
    let mut idx = vec![0u32; system.vars()];
    loop {
        let total: u32 = idx.iter().sum();
        if total >= 1 && total <= i {
            let mut prod = vec![BigInt::one(); t];
            for (j, &k) in idx.iter().enumerate() {
                for (p, b) in prod.iter_mut().zip(&binomials[j][k as usize]) {
                    *p *= b;
                }
            }
            if prod.iter().any(|x| !x.is_zero()) {
                out.push(prod);
            }
        }
        // lexicographic odometer over {0..=i}^D, last index fastest
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < i {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `Λ^[i]` in canonical form.
pub fn leibman_lattice(system: &LinearFormSystem, i: u32) -> IntegerLattice {
    IntegerLattice::from_generators(&leibman_generators(system, i), system.forms())
        .expect("generators have length t")
}

impl IntegerLattice {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| (0..ambient_dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn from_generators(gens: &[Vec<BigInt>], ambient_dim: usize) -> Result<Self> {
        if let Some(bad) = gens.iter().find(|g| g.len() != ambient_dim) {
            return Err(Error::Dimension { expected: ambient_dim, got: bad.len() });
        }
        let rows: Vec<Vec<BigInt>> = gens.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
        Ok(Self { ambient_dim, basis: hermite_normal_form(rows, ambient_dim) })
    }

    pub fn from_i64(gens: &[Vec<i64>], ambient_dim: usize) -> Result<Self> {
        let big: Vec<Vec<BigInt>> = gens.iter().map(|g| g.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_generators(&big, ambient_dim)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Basis as machine integers; fails if an entry does not fit.
    pub fn basis_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.basis.iter().map(|r| r.iter().map(exact::big_to_i64).collect()).collect()
    }

    fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("basis rows are nonzero"))
            .collect()
    }

    /// Exact membership by back-substitution against the echelon basis.
    pub fn contains(&self, v: &[BigInt]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::Dimension { expected: self.ambient_dim, got: v.len() });
        }
        let mut rest = v.to_vec();
        for (row, &c) in self.basis.iter().zip(&self.pivots()) {
            if rest[..c].iter().any(|x| !x.is_zero()) {
                return Ok(false);
            }
            let (q, r) = rest[c].div_rem(&row[c]);
            if !r.is_zero() {
                return Ok(false);
            }
            if !q.is_zero() {
                for (x, b) in rest.iter_mut().zip(row) {
                    *x -= &q * b;
                }
            }
        }
        Ok(rest.iter().all(|x| x.is_zero()))
    }

    pub fn contains_i64(&self, v: &[i64]) -> Result<bool> {
        let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.contains(&big)
    }

    /// `{w ∈ Z^t : w · b = 0 for every basis vector b}`.
    ///
    /// Computed as the integer kernel of the basis matrix: row-reduce
    /// `[B^T | I_t]` and keep the identity part of the rows whose `B^T` part
    /// vanished. The transform is unimodular, so the result is saturated.
    pub fn orthogonal_complement(&self) -> IntegerLattice {
        let t = self.ambient_dim;
        let r = self.rank();
        let rows: Vec<Vec<BigInt>> = (0..t)
            .map(|a| {
                let mut row: Vec<BigInt> = self.basis.iter().map(|b| b[a].clone()).collect();
                row.extend((0..t).map(|k| if k == a { BigInt::one() } else { BigInt::zero() }));
                row
            })
            .collect();
        let reduced = echelon(rows, r);
        let kernel: Vec<Vec<BigInt>> = reduced
            .into_iter()
            .filter(|row| row[..r].iter().all(|x| x.is_zero()))
            .map(|row| row[r..].to_vec())
            .collect();
        IntegerLattice::from_generators(&kernel, t).expect("kernel rows have length t")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rank(), self.ambient_dim);
        for row in &self.basis {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty lattice file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
            .collect::<Result<_>>()?;
        let [r, t] = dims[..] else {
            return Err(Error::Parse(format!("header must be `r t`, got `{header}`")));
        };
        let rows: Vec<Vec<BigInt>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|w| w.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad entry `{w}`"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        if rows.len() != r {
            return Err(Error::Parse(format!("expected {r} rows, found {}", rows.len())));
        }
        Self::from_generators(&rows, t)
    }
}

impl fmt::Display for IntegerLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Integer row echelon form over the first `cols` columns via gcd steps.
/// Returns all rows (including those zero on the first `cols` columns).
fn echelon(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        loop {
            // smallest nonzero |entry| in column c among rows r..
            let Some(p) = (r..n)
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()))
            else {
                break;
            };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..n {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let (head, tail) = rows.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                    *x -= &q * y;
                }
                if !tail[0][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < n && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -&*x;
                }
            }
            r += 1;
        }
    }
    rows
}

fn hermite_normal_form(rows: Vec<Vec<BigInt>>, t: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = echelon(rows, t).into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    // reduce entries above each pivot into [0, pivot)
    for k in 0..rows.len() {
        let c = rows[k].iter().position(|x| !x.is_zero()).expect("nonzero row");
        let pivot = rows[k][c].clone();
        for i in 0..k {
            let q = rows[i][c].div_floor(&pivot);
            if !q.is_zero() {
                let (head, tail) = rows.split_at_mut(k);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= &q * y;
                }
            }
        }
    }
    rows
}

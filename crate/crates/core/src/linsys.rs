//! Systems of integer linear forms `Λ = (ℓ_1, …, ℓ_t)`, `ℓ_i: Z^D → Z`.
//!
//! A system is stored as its `t × D` coefficient matrix, row `i` holding
//! the coefficients of `ℓ_i`. The text form is a `t D` header line followed
//! by `t` lines of `D` signed integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::exact;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearFormSystem {
    rows: Vec<Vec<i64>>,
    label: Option<String>,
}

/// Default search bound for [`complexity`].
pub const DEFAULT_S_MAX: u32 = 4;

impl LinearFormSystem {
    /// Strict constructor: rows must be nonzero and pairwise distinct.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let sys = Self::new_relaxed(rows)?;
        sys.check_valid()?;
        Ok(sys)
    }

    /// Accepts zero and repeated rows. Classification operations still
    /// reject such systems.
    pub fn new_relaxed(rows: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter("a system needs at least one form".into()));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidParameter("forms need at least one variable".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension { expected: d, got: bad.len() });
        }
        Ok(Self { rows, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn check_valid(&self) -> Result<()> {
        if let Some(i) = self.rows.iter().position(|r| r.iter().all(|&c| c == 0)) {
            return Err(Error::Degenerate(format!("form {} is zero", i + 1)));
        }
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                if self.rows[i] == self.rows[j] {
                    return Err(Error::Degenerate(format!("forms {} and {} coincide", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// `k`-term arithmetic progressions: row `i` is `(1, i-1)`.
    pub fn ap(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("progression length {k} < 3")));
        }
        let rows = (0..k as i64).map(|i| vec![1, i]).collect();
        Ok(Self::new(rows)?.with_label(format!("ap:{k}")))
    }

    /// Gowers cube system: rows `(1, v)` for `v ∈ {0,1}^d`, `v` in
    /// lexicographic order (so for `d = 2` the forms are `n1`, `n1+n3`,
    /// `n1+n2`, `n1+n2+n3`).
    pub fn cube(d: usize) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!("cube dimension {d} not in {{2,3}}")));
        }
        let rows = (0..1usize << d)
            .map(|bits| {
                let mut row = vec![1];
                row.extend((0..d).rev().map(|b| ((bits >> b) & 1) as i64));
                row
            })
            .collect();
        Ok(Self::new(rows)?.with_label(format!("cube:{d}")))
    }

    /// `ap:k`, `cube:d`, `trivial` or `schur`.
    pub fn named(name: &str) -> Result<Self> {
        let arg = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad size in `{name}`")));
        match name.trim().split_once(':') {
            Some(("ap", k)) => Self::ap(arg(k)?),
            Some(("cube", d)) => Self::cube(arg(d)?),
            None if name.trim() == "trivial" => Ok(Self::trivial()),
            None if name.trim() == "schur" => Ok(Self::schur()),
            _ => Err(Error::Parse(format!("unknown system `{name}` (ap:k, cube:d, trivial, schur)"))),
        }
    }

    /// The single form `n ↦ n`.
    pub fn trivial() -> Self {
        Self { rows: vec![vec![1]], label: Some("trivial".into()) }
    }

    /// Schur triples `(n1, n2, n1 + n2)`.
    pub fn schur() -> Self {
        Self {
            rows: vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            label: Some("schur".into()),
        }
    }

    pub fn forms(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.rows[i]
    }

    /// Column `j`, i.e. `(ℓ_1(e_j), …, ℓ_t(e_j))`.
    pub fn column(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let forms: Vec<String> = self
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            format!("[{}]", forms.join("; "))
        })
    }

    pub fn has_zero_form(&self) -> bool {
        self.rows.iter().any(|r| r.iter().all(|&c| c == 0))
    }

    /// Evaluates every form at `n`.
    pub fn eval(&self, n: &[i64]) -> Vec<i64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(n).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.forms(), self.vars());
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text form. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty system file".into()))?;
        let dims = parse_ints(header)?;
        let [t, d] = dims[..] else {
            return Err(Error::Parse(format!("header must be `t D`, got `{header}`")));
        };
        if t < 1 || d < 1 {
            return Err(Error::Parse("t and D must be positive".into()));
        }
        let mut rows = Vec::with_capacity(t as usize);
        for line in lines {
            let row = parse_ints(line)?;
            if row.len() != d as usize {
                return Err(Error::Parse(format!("row `{line}` does not have {d} entries")));
            }
            rows.push(row);
        }
        if rows.len() != t as usize {
            return Err(Error::Parse(format!("expected {t} rows, found {}", rows.len())));
        }
        Self::new_relaxed(rows)
    }
}

fn parse_ints(line: &str) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|w| w.parse::<i64>().map_err(|e| Error::Parse(format!("`{w}`: {e}"))))
        .collect()
}

impl fmt::Display for LinearFormSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Least `L` such that the system has size at most `L`:
/// `max(t, D, max |coefficient|)`.
pub fn size(system: &LinearFormSystem) -> u64 {
    let coeff = system.rows.iter().flatten().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    coeff.max(system.forms() as u64).max(system.vars() as u64)
}

/// Least `s ≤ s_max` such that the powers `ℓ_i^{s+1}` are linearly
/// independent over `Q`, or `None` when no such `s` exists in range.
pub fn complexity(system: &LinearFormSystem, s_max: u32) -> Result<Option<u32>> {
    system.check_valid()?;
    for s in 0..=s_max {
        if powers_independent(system, s + 1) {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn powers_independent(system: &LinearFormSystem, power: u32) -> bool {
    let rows: Vec<Vec<BigInt>> = system.rows.iter().map(|r| exact::power_of_form(r, power)).collect();
    exact::rank(rows) == system.forms()
}

/// Signs `±1` per form; `-1` conjugates the corresponding factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugationPattern {
    signs: Vec<i8>,
}

impl ConjugationPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("pattern signs must be +1 or -1".into()));
        }
        Ok(Self { signs })
    }

    pub fn plain(t: usize) -> Self {
        Self { signs: vec![1; t] }
    }

    /// `(-1)^{|v|}` for the cube system of dimension `d`, matching the row
    /// order of [`LinearFormSystem::cube`].
    pub fn alternating(d: usize) -> Self {
        let signs = (0..1u32 << d)
            .map(|bits| if bits.count_ones() % 2 == 0 { 1 } else { -1 })
            .collect();
        Self { signs }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn conjugates(&self, slot: usize) -> bool {
        self.signs[slot] < 0
    }

    pub(crate) fn check_len(&self, t: usize) -> Result<()> {
        if self.signs.len() != t {
            return Err(Error::Dimension { expected: t, got: self.signs.len() });
        }
        Ok(())
    }
}

impl FromStr for ConjugationPattern {
    type Err = Error;

    /// Accepts `+,-,-,+` (also `+1,-1`) or `alt:d`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(d) = s.strip_prefix("alt:") {
            let d: usize = d.parse().map_err(|_| Error::Parse(format!("bad pattern `{s}`")))?;
            return Ok(Self::alternating(d));
        }
        let signs = s
            .split(',')
            .map(|w| match w.trim() {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad pattern sign `{other}`"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(signs)
    }
}

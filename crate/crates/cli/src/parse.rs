//! Shorthands for systems, functions and parameters given on the command line.

use std::fs;

use formavg_core::cyclic::{quadratic_phase, sumfree_interval, CyclicFunction};
use formavg_core::linsys::{ConjugationPattern, LinearFormSystem};
use formavg_core::torus::{FilteredTorusSpec, TrigPolynomial, TupleCharacter};
use formavg_core::{Error, Result};

fn read_file(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))
}

fn number<T: std::str::FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} `{s}`")))
}

/// A named system or `@file`.
pub fn system(s: &str) -> Result<LinearFormSystem> {
    if let Some(path) = s.strip_prefix('@') {
        return LinearFormSystem::from_text(&read_file(path)?);
    }
    LinearFormSystem::named(s)
}

/// Function on `Z_n`: `quadphase`, `sumfree`, `const:a`, `indicator:i,j,…` or `@file`.
pub fn cyclic(s: &str, n: usize) -> Result<CyclicFunction> {
    let f = if let Some(path) = s.strip_prefix('@') {
        CyclicFunction::from_text(&read_file(path)?)?
    } else {
        match s.split_once(':') {
            None if s == "quadphase" => quadratic_phase(n as u64)?,
            None if s == "sumfree" => sumfree_interval(n as u64)?,
            Some(("const", a)) => CyclicFunction::constant(n, number("constant", a)?)?,
            Some(("indicator", set)) => CyclicFunction::indicator(n, list::<usize>("element", set)?)?,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown function `{s}` (quadphase, sumfree, const:a, indicator:i,j, @file)"
                )))
            }
        }
    };
    if f.modulus() != n {
        return Err(Error::Dimension { expected: n, got: f.modulus() });
    }
    Ok(f)
}

/// Function on `T^m`: `raised-cosine:j`, `const:a` or `@file`.
pub fn trig(s: &str, m: usize) -> Result<TrigPolynomial> {
    let f = if let Some(path) = s.strip_prefix('@') {
        TrigPolynomial::from_text(&read_file(path)?)?
    } else {
        match s.split_once(':') {
            Some(("raised-cosine", j)) => {
                let j: usize = number("coordinate", j)?;
                if j >= m {
                    return Err(Error::InvalidParameter(format!("coordinate {j} outside T^{m}")));
                }
                TrigPolynomial::raised_cosine(m, j)
            }
            Some(("const", a)) => TrigPolynomial::constant(m, number("constant", a)?),
            _ => return Err(Error::Parse(format!("unknown torus function `{s}` (raised-cosine:j, const:a, @file)"))),
        }
    };
    if f.dim() != m {
        return Err(Error::Dimension { expected: m, got: f.dim() });
    }
    Ok(f)
}

pub fn spec(s: &str) -> Result<FilteredTorusSpec> {
    s.parse()
}

pub fn pattern(s: Option<&str>) -> Result<Option<ConjugationPattern>> {
    s.map(str::parse).transpose()
}

/// `0.4` or `2/5`, in `(0, 1]`.
pub fn alpha(s: &str) -> Result<f64> {
    let a = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (f64, f64) = (number("alpha", p)?, number("alpha", q)?);
            if q == 0.0 {
                return Err(Error::InvalidParameter("alpha has zero denominator".into()));
            }
            p / q
        }
        None => number("alpha", s)?,
    };
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {a} outside (0, 1]")));
    }
    Ok(a)
}

pub fn list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| number(what, x)).collect()
}

/// Row-major `t × d` frequency matrix.
pub fn character(s: &str, t: usize, d: usize) -> Result<TupleCharacter> {
    let freq: Vec<i64> = list("frequency", s)?;
    if freq.len() != t * d {
        return Err(Error::Dimension { expected: t * d, got: freq.len() });
    }
    TupleCharacter::new(t, d, freq)
}

//! Univariate polynomials with exact rational coefficients, plus a small
//! parser for expressions such as `(2n^2 + n)/7`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// `Σ_e c_e n^e`; `coeffs[e] = c_e`, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `n`.
    pub fn var() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    /// Builds from `(numerator, denominator)` pairs.
    pub fn from_ratios(coeffs: &[(i64, i64)]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, e: usize) -> BigRational {
        self.coeffs.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(0)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_int(&self, x: i64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `n ↦ g(n + s)`.
    pub fn shift(&self, s: &BigRational) -> Self {
        // Horner in polynomial arithmetic: g(n+s) = (...(c_d (n+s) + c_{d-1})(n+s) ...)
        let lin = RationalPoly::new(vec![s.clone(), BigRational::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(RationalPoly::zero(), |acc, c| &(&acc * &lin) + &RationalPoly::constant(c.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(RationalPoly::constant(BigRational::one()), |acc, _| &acc * self)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }
}

impl std::ops::Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|e| self.coeff(e) + rhs.coeff(e)).collect())
    }
}

impl std::ops::Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|e| self.coeff(e) - rhs.coeff(e)).collect())
    }
}

impl std::ops::Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let mono = match e {
                0 => String::new(),
                1 => "n".into(),
                _ => format!("n^{e}"),
            };
            if e == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else if a.is_integer() {
                write!(f, "{a}{mono}")?;
            } else {
                write!(f, "({}/{}){mono}", a.numer(), a.denom())?;
            }
        }
        Ok(())
    }
}

impl FromStr for RationalPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s)?;
        let mut p = Parser { tokens: &tokens, pos: 0 };
        let poly = p.expr()?;
        if p.pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input in `{s}`")));
        }
        Ok(poly)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Var,
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                out.push(Token::Num(lit.parse().expect("digits")));
            }
            'n' | 'x' => {
                out.push(Token::Var);
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push(Token::Op(c));
                i += 1;
            }
            _ => return Err(Error::Parse(format!("unexpected `{c}` in polynomial `{s}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RationalPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalPoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.degree() > 0 || d.is_zero() {
                    return Err(Error::Parse("division only by nonzero constants".into()));
                }
                acc = acc.scale(&d.constant_term().recip());
            } else if matches!(self.peek(), Some(Token::Num(_) | Token::Var | Token::Op('('))) {
                // implicit multiplication: 3n, 2(n+1)
                acc = &acc * &self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalPoly> {
        if self.eat('-') {
            return Ok(self.unary()?.scale(&-BigRational::one()));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let Some(Token::Num(e)) = self.peek().cloned() else {
                return Err(Error::Parse("exponent must be a nonnegative integer".into()));
            };
            self.pos += 1;
            let e = e.to_u32().filter(|&e| e <= 64).ok_or_else(|| Error::Parse("exponent too large".into()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RationalPoly> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(RationalPoly::constant(BigRational::from_integer(v)))
            }
            Some(Token::Var) => {
                self.pos += 1;
                Ok(RationalPoly::var())
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_expressions() {
        let p: RationalPoly = "(2n^2+n)/7".parse().unwrap();
        assert_eq!(p, RationalPoly::from_ratios(&[(0, 1), (1, 7), (2, 7)]));
        let p: RationalPoly = "3n/7".parse().unwrap();
        assert_eq!(p, RationalPoly::from_ratios(&[(0, 1), (3, 7)]));
        let p: RationalPoly = "(n^2)/101".parse().unwrap();
        assert_eq!(p.coeff(2), q(1, 101));
        let p: RationalPoly = "-n^2/14 + 2(n - 1)".parse().unwrap();
        assert_eq!(p, RationalPoly::from_ratios(&[(-2, 1), (2, 1), (-1, 14)]));
        assert!("n/n".parse::<RationalPoly>().is_err());
        assert!("n/0".parse::<RationalPoly>().is_err());
        assert!("n^".parse::<RationalPoly>().is_err());
        assert!("(n".parse::<RationalPoly>().is_err());
        assert!("n $".parse::<RationalPoly>().is_err());
    }

    #[test]
    fn shift_expands_exactly() {
        // (n+7)^2/14 - n^2/14 = n + 7/2
        let g = RationalPoly::from_ratios(&[(0, 1), (0, 1), (1, 14)]);
        let diff = &g.shift(&q(7, 1)) - &g;
        assert_eq!(diff, RationalPoly::from_ratios(&[(7, 2), (1, 1)]));
    }

    #[test]
    fn display() {
        let p = RationalPoly::from_ratios(&[(0, 1), (1, 7), (-2, 7)]);
        assert_eq!(p.to_string(), "-(2/7)n^2 + (1/7)n");
        assert_eq!(RationalPoly::zero().to_string(), "0");
        assert_eq!(p.to_string().parse::<RationalPoly>().unwrap(), p);
    }
}

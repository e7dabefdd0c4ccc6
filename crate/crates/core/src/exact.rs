//! Exact integer helpers: fraction-free elimination, binomials, multinomial
//! expansion of powers of linear forms, primality, and compensated sums.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

/// Rank of an integer matrix over the rationals, by Bareiss fraction-free
/// elimination. Every intermediate entry stays an integer (a minor of the
/// input), so no rational arithmetic is needed.
pub fn rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let n_rows = rows.len();
    if n_rows == 0 {
        return 0;
    }
    let n_cols = rows[0].len();
    let mut prev_pivot = BigInt::one();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in r + 1..n_rows {
            let factor = rows[i][c].clone();
            for j in c..n_cols {
                let v = &pivot * &rows[i][j] - &factor * &rows[r][j];
                // exact by Sylvester's identity
                rows[i][j] = v / &prev_pivot;
            }
        }
        prev_pivot = pivot;
        r += 1;
    }
    r
}

/// `C(x, k) = x(x-1)...(x-k+1)/k!`, valid for negative `x`.
pub fn binomial(x: &BigInt, k: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= x - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Exponent vectors of all monomials of total degree `n` in `vars` variables,
/// in lexicographically decreasing order (`x_1^n` first).
pub fn monomials(vars: usize, n: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if vars == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=n).rev() {
            prefix.push(e);
            rec(vars - 1, n - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars > 0 {
        rec(vars, n, &mut Vec::with_capacity(vars), &mut out);
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients of `(c · x)^n` in the basis returned by [`monomials`]:
/// the multinomial `n!/α! · Π c_j^{α_j}` for each exponent vector `α`.
pub fn power_of_form(coeffs: &[i64], n: u32) -> Vec<BigInt> {
    let nf = factorial(n);
    monomials(coeffs.len(), n)
        .into_iter()
        .map(|alpha| {
            let mut term = nf.clone();
            for (&c, &a) in coeffs.iter().zip(&alpha) {
                term /= factorial(a);
                term *= num_traits::pow(BigInt::from(c), a as usize);
            }
            term
        })
        .collect()
}

/// Deterministic Miller–Rabin; exact for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    'bases: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Kahan–Babuška compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

pub(crate) fn big_to_i64(x: &BigInt) -> crate::Result<i64> {
    i64::try_from(x).map_err(|_| crate::Error::Numeric(format!("integer {x} does not fit in 64 bits")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn bareiss_rank() {
        assert_eq!(rank(big(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(big(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(big(&[&[1, 0, 0], &[1, 2, 1], &[1, 4, 4]])), 3);
        assert_eq!(rank(big(&[&[0, 1, 4], &[0, 2, 8], &[3, 0, 1]])), 2);
        assert_eq!(rank(vec![]), 0);
    }

    #[test]
    fn binomial_negative_argument() {
        assert_eq!(binomial(&BigInt::from(-2), 2), BigInt::from(3));
        assert_eq!(binomial(&BigInt::from(4), 2), BigInt::from(6));
        assert_eq!(binomial(&BigInt::from(-3), 3), BigInt::from(-10));
        assert_eq!(binomial(&BigInt::from(7), 0), BigInt::one());
        assert_eq!(binomial(&BigInt::from(2), 5), BigInt::zero());
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(4, 3).len(), 20);
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn power_of_form_matches_binomial_theorem() {
        // (x + 2y)^2 = x^2 + 4xy + 4y^2
        let c = power_of_form(&[1, 2], 2);
        assert_eq!(c, vec![BigInt::from(1), BigInt::from(4), BigInt::from(4)]);
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(Complex64::new(1e16, 0.0));
        for _ in 0..1000 {
            k.add(Complex64::new(1.0, 0.0));
        }
        k.add(Complex64::new(-1e16, 0.0));
        assert_eq!(k.total().re, 1000.0);
    }
}

//! Base-p digit combinatorics.
//!
//! Everything here is elementary number theory over a small prime base:
//! digit expansions, digit sums and their iteration, binomial coefficients
//! modulo p via the digit-wise product rule, and two small constructions the
//! integration pipeline relies on — the largest power-of-p shift keeping a
//! product below a bound, and the weight system with unit sum whose m-th
//! powers sum to zero.

use thiserror::Error;

use crate::zpfield::{is_prime, primitive_root, FpElem};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DigitsError {
    #[error("no shift exists: {m} * p^0 already reaches {e} * {p}^{s}")]
    EmptyShiftSet { m: u64, e: u64, s: u32, p: u64 },
    #[error("exponent {m} must satisfy 1 < m < p = {p}")]
    BadExponent { m: u64, p: u64 },
}

fn assert_prime(p: u64) {
    assert!(is_prime(p), "base {p} must be prime");
}

/// Base-p digits of a natural number, least significant first.
///
/// Zero has an empty digit vector; otherwise there is no trailing zero digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePDigits {
    base: u64,
    digits: Vec<u64>,
}

impl BasePDigits {
    pub fn new(mut n: u64, base: u64) -> Self {
        assert_prime(base);
        let mut digits = Vec::new();
        while n > 0 {
            digits.push(n % base);
            n /= base;
        }
        BasePDigits { base, digits }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn value(&self) -> u64 {
        self.digits
            .iter()
            .rev()
            .fold(0, |acc, &d| acc * self.base + d)
    }

    /// Index of the lowest nonzero digit; `None` for zero.
    pub fn lowest_nonzero(&self) -> Option<u32> {
        self.digits.iter().position(|&d| d != 0).map(|i| i as u32)
    }

    /// Index of the highest digit; `None` for zero.
    pub fn highest(&self) -> Option<u32> {
        if self.digits.is_empty() {
            None
        } else {
            Some((self.digits.len() - 1) as u32)
        }
    }

    pub fn sum(&self) -> u64 {
        self.digits.iter().sum()
    }
}

/// Sum of the base-p digits of `n`.
pub fn digit_sum(n: u64, p: u64) -> u64 {
    BasePDigits::new(n, p).sum()
}

/// Iterated digit sum: applies [`digit_sum`] until the value is a single
/// nonzero digit (the fixed point). Requires `n >= 1`.
///
/// For `n >= 1` the result lies in `[1, p-1]` and is congruent to `n`
/// modulo `p - 1` (for p > 2; for p = 2 it is always 1).
pub fn digital_root(mut n: u64, p: u64) -> u64 {
    assert!(n >= 1, "digital root needs n >= 1");
    assert_prime(p);
    while n >= p {
        n = digit_sum(n, p);
    }
    n
}

/// Binomial coefficient modulo p via the digit-wise product rule: the
/// coefficient of `n` choose `m` reduces to the product of the digit-level
/// binomials, and vanishes exactly when some digit of `m` exceeds the
/// corresponding digit of `n`.
pub fn binomial_mod_p(n: u64, m: u64, p: u64) -> FpElem {
    assert_prime(p);
    if m > n {
        return FpElem::raw(0, p);
    }
    let nd = BasePDigits::new(n, p);
    let md = BasePDigits::new(m, p);
    let mut acc = FpElem::raw(1 % p, p);
    for i in 0..nd.digits().len().max(md.digits().len()) {
        let a = nd.digits().get(i).copied().unwrap_or(0);
        let b = md.digits().get(i).copied().unwrap_or(0);
        if b > a {
            return FpElem::raw(0, p);
        }
        acc = acc * small_binomial(a, b, p);
    }
    acc
}

/// Binomial of two single digits, computed by the additive recurrence.
fn small_binomial(a: u64, b: u64, p: u64) -> FpElem {
    let mut row = vec![FpElem::raw(1 % p, p)];
    for _ in 0..a {
        let mut next = vec![FpElem::raw(1 % p, p)];
        for i in 1..row.len() {
            next.push(row[i - 1] + row[i]);
        }
        next.push(FpElem::raw(1 % p, p));
        row = next;
    }
    row[b as usize]
}

/// Smallest `m >= 1` with `n` choose `m` nonzero modulo p.
///
/// By the digit-wise product rule this is `p^t` where `t` is the index of the
/// lowest nonzero base-p digit of `n`. Requires `n >= 1`.
pub fn min_nonzero_binomial(n: u64, p: u64) -> u64 {
    assert!(n >= 1, "need n >= 1");
    let t = BasePDigits::new(n, p).lowest_nonzero().expect("n >= 1");
    p.pow(t)
}

/// Largest `j >= 0` with `m * p^j < e * p^s`, found by direct enumeration
/// (the inequality is monotone in `j`).
///
/// Errors when the set is empty, i.e. when already `m >= e * p^s`. When
/// additionally `e <= m`, the result is strictly below `s`.
pub fn max_shift(m: u64, e: u64, s: u32, p: u64) -> Result<u32, DigitsError> {
    assert_prime(p);
    assert!(m >= 1 && e >= 1);
    let bound = (e as u128) * (p as u128).pow(s);
    if (m as u128) >= bound {
        return Err(DigitsError::EmptyShiftSet { m, e, s, p });
    }
    let mut j = 0u32;
    while (m as u128) * (p as u128).pow(j + 1) < bound {
        j += 1;
    }
    Ok(j)
}

/// Weights `(a_1, ..., a_k)` in F_p with `sum a_i = 1` and `sum a_i^m = 0`,
/// for `1 < m < p`.
///
/// Construction: let `g` generate the multiplicative group and `h = g^m`.
/// The list `(g, 1, 1, ..., 1)` with `p - h` ones has m-th powers summing to
/// `h + (p - h) = 0` and entries summing to `g + p - h = g - h`, which is a
/// unit because `g` generates and `1 < m < p`; dividing every entry by
/// `g - h` normalises the plain sum to 1 while keeping the power sum zero.
pub fn averaging_system(m: u64, p: u64) -> Result<Vec<FpElem>, DigitsError> {
    assert_prime(p);
    if m <= 1 || m >= p {
        return Err(DigitsError::BadExponent { m, p });
    }
    let g = primitive_root(p).expect("validated prime");
    let h = g.pow(m);
    let scale = (g - h).inv().expect("g^m != g for 1 < m < p");
    let mut weights = vec![g * scale];
    let ones = (p - h.value()) as usize;
    weights.extend(std::iter::repeat_n(FpElem::raw(1 % p, p) * scale, ones));
    Ok(weights)
}

//! Arithmetic in the prime field F_p and deterministic affine solving.
//!
//! Moduli are restricted to primes below 2^16 so every product fits a `u64`
//! without overflow. Elements carry their modulus; mixing moduli in an
//! arithmetic operation is a programming error and panics.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest admissible modulus (exclusive). Keeps `u64` products exact.
pub const MAX_MODULUS: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime below 2^16")]
    NonPrimeModulus(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Deterministic trial-division primality check, adequate for p < 2^16.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn check_modulus(p: u64) -> Result<(), FieldError> {
    if p >= MAX_MODULUS || !is_prime(p) {
        Err(FieldError::NonPrimeModulus(p))
    } else {
        Ok(())
    }
}

/// An element of F_p. The representative is always reduced to `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpElem {
    value: u64,
    modulus: u64,
}

impl FpElem {
    /// Builds an element, validating that the modulus is a small prime.
    pub fn new(value: u64, modulus: u64) -> Result<Self, FieldError> {
        check_modulus(modulus)?;
        Ok(Self::raw(value % modulus, modulus))
    }

    /// Builds an element from a possibly negative representative.
    pub fn from_i64(value: i64, modulus: u64) -> Result<Self, FieldError> {
        check_modulus(modulus)?;
        let m = modulus as i64;
        Ok(Self::raw(value.rem_euclid(m) as u64, modulus))
    }

    /// Internal constructor: `value` must already be reduced and the modulus
    /// already validated.
    pub(crate) fn raw(value: u64, modulus: u64) -> Self {
        debug_assert!(value < modulus);
        FpElem { value, modulus }
    }

    pub fn zero(modulus: u64) -> Result<Self, FieldError> {
        Self::new(0, modulus)
    }

    pub fn one(modulus: u64) -> Result<Self, FieldError> {
        Self::new(1, modulus)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.value == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(self.modulus - 2))
    }

    /// Fast exponentiation by squaring.
    pub fn pow(&self, mut exp: u64) -> Self {
        let mut base = self.value;
        let mut acc = 1u64 % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.modulus;
            }
            base = base * base % self.modulus;
            exp >>= 1;
        }
        Self::raw(acc, self.modulus)
    }

    fn expect_same_modulus(&self, other: &Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed moduli: {} vs {}",
            self.modulus, other.modulus
        );
    }
}

impl fmt::Display for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FpElem {
    type Output = FpElem;
    fn add(self, rhs: FpElem) -> FpElem {
        self.expect_same_modulus(&rhs);
        FpElem::raw((self.value + rhs.value) % self.modulus, self.modulus)
    }
}

impl Sub for FpElem {
    type Output = FpElem;
    fn sub(self, rhs: FpElem) -> FpElem {
        self.expect_same_modulus(&rhs);
        FpElem::raw(
            (self.value + self.modulus - rhs.value) % self.modulus,
            self.modulus,
        )
    }
}

impl Mul for FpElem {
    type Output = FpElem;
    fn mul(self, rhs: FpElem) -> FpElem {
        self.expect_same_modulus(&rhs);
        FpElem::raw(self.value * rhs.value % self.modulus, self.modulus)
    }
}

impl Neg for FpElem {
    type Output = FpElem;
    fn neg(self) -> FpElem {
        FpElem::raw((self.modulus - self.value) % self.modulus, self.modulus)
    }
}

/// Smallest generator of the multiplicative group of F_p.
///
/// For p = 2 the group is trivial; by convention the function returns 1
/// rather than erroring, so callers can treat the result uniformly.
pub fn primitive_root(p: u64) -> Result<FpElem, FieldError> {
    check_modulus(p)?;
    if p == 2 {
        return FpElem::one(2);
    }
    let group = p - 1;
    let mut prime_factors = Vec::new();
    let mut n = group;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            prime_factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        prime_factors.push(n);
    }
    for g in 2..p {
        let cand = FpElem::raw(g, p);
        if prime_factors
            .iter()
            .all(|&q| cand.pow(group / q).value() != 1)
        {
            return Ok(cand);
        }
    }
    unreachable!("every prime field has a generator");
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    entries: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: u64) -> Result<Self, FieldError> {
        check_modulus(modulus)?;
        Ok(FpMatrix {
            rows,
            cols,
            modulus,
            entries: vec![0; rows * cols],
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, r: usize, c: usize) -> FpElem {
        assert!(r < self.rows && c < self.cols, "index out of range");
        FpElem::raw(self.entries[r * self.cols + c], self.modulus)
    }

    pub fn set(&mut self, r: usize, c: usize, v: FpElem) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        assert_eq!(v.modulus(), self.modulus, "mixed moduli");
        self.entries[r * self.cols + c] = v.value();
    }

    fn raw(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    /// Solves `M x = b`, returning a particular solution (if one exists)
    /// together with a basis of the kernel of `M`.
    ///
    /// The elimination is deterministic: pivots are chosen leftmost-first,
    /// and within a column the smallest remaining row index wins. The
    /// particular solution sets every free variable to zero, and the kernel
    /// basis vectors each set one free variable to one (in increasing column
    /// order), so repeated runs on equal inputs produce identical output.
    pub fn solve_affine(&self, b: &[FpElem]) -> (Option<Vec<FpElem>>, Vec<Vec<FpElem>>) {
        assert_eq!(b.len(), self.rows, "rhs length must equal the row count");
        for x in b {
            assert_eq!(x.modulus(), self.modulus, "mixed moduli");
        }
        let p = self.modulus;
        let cols = self.cols;
        // Augmented working copy.
        let mut work: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| {
                let mut row: Vec<u64> = (0..cols).map(|c| self.raw(r, c)).collect();
                row.push(b[r].value());
                row
            })
            .collect();

        let mut pivot_cols = Vec::new();
        let mut next_row = 0;
        for col in 0..cols {
            let Some(pivot) = (next_row..work.len()).find(|&r| work[r][col] != 0) else {
                continue;
            };
            work.swap(next_row, pivot);
            let inv = FpElem::raw(work[next_row][col], p)
                .inv()
                .expect("pivot nonzero");
            for x in work[next_row].iter_mut() {
                *x = *x * inv.value() % p;
            }
            let pivot_row = work[next_row].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r != next_row && row[col] != 0 {
                    let factor = row[col];
                    for (x, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        let sub = factor * pv % p;
                        *x = (*x + p - sub) % p;
                    }
                }
            }
            pivot_cols.push(col);
            next_row += 1;
            if next_row == work.len() {
                break;
            }
        }

        // Inconsistent row: all-zero coefficients with nonzero rhs.
        let consistent = work
            .iter()
            .all(|row| row[..cols].iter().any(|&x| x != 0) || *row.last().unwrap() == 0);

        let particular = consistent.then(|| {
            let mut x = vec![FpElem::raw(0, p); cols];
            for (r, &col) in pivot_cols.iter().enumerate() {
                x[col] = FpElem::raw(work[r][cols], p);
            }
            x
        });

        let is_pivot: Vec<bool> = {
            let mut v = vec![false; cols];
            for &c in &pivot_cols {
                v[c] = true;
            }
            v
        };
        let mut kernel = Vec::new();
        for free in 0..cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![FpElem::raw(0, p); cols];
            v[free] = FpElem::raw(1 % p, p);
            for (r, &col) in pivot_cols.iter().enumerate() {
                // Pivot variable = -coefficient of the free variable.
                v[col] = FpElem::raw((p - work[r][free]) % p, p);
            }
            kernel.push(v);
        }
        (particular, kernel)
    }
}

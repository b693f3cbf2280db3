//! Truncated power series with polynomial coefficients.
//!
//! A `TruncSeries` of length `m` models an element of `R[mu]/(mu^{m+1})`
//! with `R = F_p[x_1..x_k]`: exactly `m + 1` coefficients, all arithmetic
//! discarding orders above `m`.

use crate::poly::Poly;
use crate::zpfield::FpElem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    p: u64,
    nvars: usize,
    coeffs: Vec<Poly>,
}

impl TruncSeries {
    pub fn zero(p: u64, nvars: usize, length: usize) -> Self {
        TruncSeries {
            p,
            nvars,
            coeffs: vec![Poly::zero(p, nvars); length + 1],
        }
    }

    pub fn constant(f: Poly, length: usize) -> Self {
        let mut s = TruncSeries::zero(f.modulus(), f.nvars(), length);
        s.set_coeff(0, f);
        s
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Truncation order: coefficients run from 0 to `length()` inclusive.
    pub fn length(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Poly {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, f: Poly) {
        assert_eq!(f.modulus(), self.p, "mixed moduli");
        assert_eq!(f.nvars(), self.nvars, "mixed variable counts");
        self.coeffs[n] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Index of the first nonzero coefficient; `None` if zero.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncated(&self, n: usize) -> TruncSeries {
        assert!(n <= self.length());
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    pub fn padded(&self, n: usize) -> TruncSeries {
        assert!(n >= self.length());
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Poly::zero(self.p, self.nvars));
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs,
        }
    }

    fn expect_compatible(&self, other: &TruncSeries) {
        assert_eq!(self.p, other.p, "mixed moduli");
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        assert_eq!(self.length(), other.length(), "mixed lengths");
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.expect_compatible(other);
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Adds `other * mu^shift` in place, discarding overflowing orders.
    pub fn add_shifted(&mut self, other: &TruncSeries, shift: usize) {
        assert_eq!(self.p, other.p, "mixed moduli");
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        let len = self.length();
        for j in 0..=other.length() {
            let target = j + shift;
            if target > len {
                break;
            }
            if !other.coeffs[j].is_zero() {
                self.coeffs[target] = self.coeffs[target].add(&other.coeffs[j]);
            }
        }
    }

    /// Truncated convolution product.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.expect_compatible(other);
        let len = self.length();
        let mut out = TruncSeries::zero(self.p, self.nvars, len);
        for i in 0..=len {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=len - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        out
    }

    pub fn mul_poly(&self, f: &Poly) -> TruncSeries {
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn scale(&self, c: FpElem) -> TruncSeries {
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries {
            p: self.p,
            nvars: self.nvars,
            coeffs: self.coeffs.iter().map(Poly::neg).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> TruncSeries {
        let one = Poly::constant(FpElem::raw(1 % self.p, self.p), self.nvars);
        let mut acc = TruncSeries::constant(one, self.length());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Evaluates `f` at the given series (one per variable), truncated to
    /// `length`. Powers of each substituted series are cached per call.
    pub fn eval_poly(f: &Poly, images: &[TruncSeries], length: usize) -> TruncSeries {
        let p = f.modulus();
        let nvars = f.nvars();
        assert_eq!(images.len(), nvars, "one series per variable");
        let mut out = TruncSeries::zero(p, nvars, length);
        // Cache of powers: powers[i][e] = images[i]^e truncated to `length`.
        let mut powers: Vec<Vec<TruncSeries>> = (0..nvars)
            .map(|i| {
                vec![
                    TruncSeries::constant(Poly::constant(FpElem::raw(1 % p, p), nvars), length),
                    images[i].truncated_or_padded(length),
                ]
            })
            .collect();
        for (mono, coeff) in f.terms() {
            let mut term = TruncSeries::constant(Poly::constant(coeff, nvars), length);
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&powers[i][1]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    fn truncated_or_padded(&self, n: usize) -> TruncSeries {
        if n <= self.length() {
            self.truncated(n)
        } else {
            self.padded(n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn convolution_truncates() {
        let vars = names(&["x"]);
        let mut a = TruncSeries::zero(5, 1, 2);
        a.set_coeff(0, Poly::parse("x", 5, &vars).unwrap());
        a.set_coeff(1, Poly::parse("1", 5, &vars).unwrap());
        let sq = a.mul(&a);
        assert_eq!(sq.coeff(0), &Poly::parse("x^2", 5, &vars).unwrap());
        assert_eq!(sq.coeff(1), &Poly::parse("2*x", 5, &vars).unwrap());
        assert_eq!(sq.coeff(2), &Poly::parse("1", 5, &vars).unwrap());
        let cube = sq.mul(&a);
        assert_eq!(cube.coeff(2), &Poly::parse("3*x", 5, &vars).unwrap());
    }

    #[test]
    fn eval_poly_binomial() {
        let vars = names(&["x", "y"]);
        let f = Poly::parse("x^2+y^3", 2, &vars).unwrap();
        // x -> x + mu, y -> y.
        let mut sx = TruncSeries::zero(2, 2, 2);
        sx.set_coeff(0, Poly::variable(2, 2, 0));
        sx.set_coeff(1, Poly::parse("1", 2, &vars).unwrap());
        let sy = TruncSeries::constant(Poly::variable(2, 2, 1), 2);
        let val = TruncSeries::eval_poly(&f, &[sx, sy], 2);
        assert_eq!(val.coeff(0), &f);
        assert!(val.coeff(1).is_zero(), "2*x vanishes in char 2");
        assert_eq!(val.coeff(2), &Poly::parse("1", 2, &vars).unwrap());
    }

    #[test]
    fn order_and_shift() {
        let vars = names(&["x"]);
        let mut a = TruncSeries::zero(3, 1, 3);
        assert_eq!(a.order(), None);
        a.set_coeff(2, Poly::parse("x", 3, &vars).unwrap());
        assert_eq!(a.order(), Some(2));
        let mut b = TruncSeries::zero(3, 1, 3);
        b.add_shifted(&a, 2); // lands at order 4 > 3: discarded
        assert!(b.is_zero());
        b.add_shifted(&a, 1);
        assert_eq!(b.order(), Some(3));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let vars = names(&["x"]);
        let mut a = TruncSeries::zero(7, 1, 4);
        a.set_coeff(0, Poly::parse("1", 7, &vars).unwrap());
        a.set_coeff(1, Poly::parse("x", 7, &vars).unwrap());
        let direct = a.mul(&a).mul(&a).mul(&a).mul(&a);
        assert_eq!(a.pow(5), direct);
        // Binomial check: coefficient of mu^2 in (1 + x mu)^5 is 10 x^2 = 3 x^2.
        assert_eq!(a.pow(5).coeff(2), &Poly::parse("3*x^2", 7, &vars).unwrap());
    }
}

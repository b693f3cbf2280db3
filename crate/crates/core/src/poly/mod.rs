//! Sparse multivariate polynomials over F_p.
//!
//! A polynomial stores only its nonzero terms, keyed by exponent vector in
//! graded reverse lexicographic order (total degree first; ties broken by
//! the rightmost differing exponent, smaller exponent winning). All
//! arithmetic is exact. Weighted gradings are handled by [`WeightVector`];
//! parsing and printing live in [`text`]; Groebner bases and normal forms
//! live in [`ideal`].

mod ideal;
mod text;

pub use ideal::{
    groebner_basis, groebner_basis_with_budget, IdealError, IdealPresentation,
    DEFAULT_GROEBNER_BUDGET,
};
pub use text::PolyParseError;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::zpfield::{is_prime, FpElem};

/// Exponent vector of a monomial. Ordered by graded reverse lexicographic
/// comparison, so the maximum of a set of monomials is its leading monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars);
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn weighted_degree(&self, w: &WeightVector) -> u64 {
        assert_eq!(self.0.len(), w.0.len(), "weight count mismatch");
        self.0
            .iter()
            .zip(&w.0)
            .map(|(&e, &wi)| e as u64 * wi as u64)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a <= b)
    }

    /// Componentwise quotient; caller must ensure divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Reverse lexicographic tie-break: at the rightmost differing
        // variable index, the monomial with the smaller exponent is larger.
        for i in (0..self.0.len().max(other.0.len())).rev() {
            let a = self.0.get(i).copied().unwrap_or(0);
            let b = other.0.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Positive weights for the variables, defining a weighted grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector(pub Vec<u32>);

impl WeightVector {
    pub fn new(weights: Vec<u32>) -> Self {
        assert!(weights.iter().all(|&w| w > 0), "weights must be positive");
        WeightVector(weights)
    }

    pub fn uniform(nvars: usize) -> Self {
        WeightVector(vec![1; nvars])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_weight(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(1)
    }
}

/// Sparse polynomial over F_p. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    p: u64,
    nvars: usize,
    terms: BTreeMap<Monomial, u64>,
}

impl Poly {
    pub fn zero(p: u64, nvars: usize) -> Self {
        assert!(is_prime(p), "modulus must be prime");
        Poly {
            p,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FpElem, nvars: usize) -> Self {
        let mut f = Poly::zero(c.modulus(), nvars);
        f.add_term(Monomial::one(nvars), c.value());
        f
    }

    pub fn variable(p: u64, nvars: usize, index: usize) -> Self {
        let mut f = Poly::zero(p, nvars);
        f.add_term(Monomial::variable(nvars, index), 1);
        f
    }

    pub fn term(c: FpElem, m: Monomial) -> Self {
        let nvars = m.0.len();
        let mut f = Poly::zero(c.modulus(), nvars);
        f.add_term(m, c.value());
        f
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, FpElem)> {
        self.terms.iter().map(|(m, &c)| (m, FpElem::raw(c, self.p)))
    }

    pub fn coeff(&self, m: &Monomial) -> FpElem {
        FpElem::raw(self.terms.get(m).copied().unwrap_or(0), self.p)
    }

    /// In-place accumulation of a single term (reduces and drops zeros).
    pub(crate) fn add_term(&mut self, m: Monomial, c: u64) {
        debug_assert_eq!(m.0.len(), self.nvars);
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = (o.get() + c) % self.p;
                if v == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn expect_compatible(&self, other: &Poly) {
        assert_eq!(self.p, other.p, "mixed moduli");
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.expect_compatible(other);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero(self.p, self.nvars);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), self.p - c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.expect_compatible(other);
        let mut out = Poly::zero(self.p, self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: FpElem) -> Poly {
        assert_eq!(c.modulus(), self.p, "mixed moduli");
        let mut out = Poly::zero(self.p, self.nvars);
        for (m, &a) in &self.terms {
            out.add_term(m.clone(), a * c.value());
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: FpElem) -> Poly {
        assert_eq!(c.modulus(), self.p, "mixed moduli");
        let mut out = Poly::zero(self.p, self.nvars);
        for (mm, &a) in &self.terms {
            out.add_term(mm.mul(m), a * c.value());
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut acc = Poly::constant(FpElem::raw(1 % self.p, self.p), self.nvars);
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

    /// Leading term (largest monomial) or `None` for zero.
    pub fn leading(&self) -> Option<(&Monomial, FpElem)> {
        self.terms
            .iter()
            .next_back()
            .map(|(m, &c)| (m, FpElem::raw(c, self.p)))
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Formal partial derivative with respect to variable `index`
    /// (exponents act mod p, so p-th powers differentiate to zero).
    pub fn partial(&self, index: usize) -> Poly {
        assert!(index < self.nvars);
        let mut out = Poly::zero(self.p, self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut lower = m.clone();
            lower.0[index] -= 1;
            out.add_term(lower, c * (e as u64 % self.p));
        }
        out
    }

    /// Splits into weighted-homogeneous parts, keyed by weighted degree.
    pub fn weighted_parts(&self, w: &WeightVector) -> BTreeMap<u64, Poly> {
        let mut parts: BTreeMap<u64, Poly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let d = m.weighted_degree(w);
            parts
                .entry(d)
                .or_insert_with(|| Poly::zero(self.p, self.nvars))
                .add_term(m.clone(), c);
        }
        parts
    }

    /// Weighted degree of a nonzero weighted-homogeneous polynomial;
    /// `None` if zero or inhomogeneous.
    pub fn homogeneous_weighted_degree(&self, w: &WeightVector) -> Option<u64> {
        let mut degrees = self.terms.keys().map(|m| m.weighted_degree(w));
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn is_weighted_homogeneous(&self, w: &WeightVector) -> bool {
        self.is_zero() || self.homogeneous_weighted_degree(w).is_some()
    }

    /// Largest weighted degree over the terms; `None` for zero.
    pub fn max_weighted_degree(&self, w: &WeightVector) -> Option<u64> {
        self.terms.keys().map(|m| m.weighted_degree(w)).max()
    }

    /// Parses the additive grammar `term (+ term)*` where a term is either a
    /// coefficient, a product of variable powers, or both. See [`text`].
    pub fn parse(input: &str, p: u64, vars: &[String]) -> Result<Poly, PolyParseError> {
        text::parse_poly(input, p, vars)
    }

    /// Canonical rendering: terms in descending monomial order, coefficient 1
    /// omitted on non-constant terms, exponent 1 omitted.
    pub fn to_text(&self, vars: &[String]) -> String {
        text::print_poly(self, vars)
    }
}

/// Enumerates all monomials in `nvars` variables with the given exact
/// weighted degree, in ascending monomial order.
pub fn monomials_of_weighted_degree(nvars: usize, w: &WeightVector, degree: u64) -> Vec<Monomial> {
    assert_eq!(w.len(), nvars);
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(
        w: &WeightVector,
        pos: usize,
        remaining: u64,
        current: &mut Vec<u32>,
        out: &mut Vec<Monomial>,
    ) {
        if pos == current.len() {
            if remaining == 0 {
                out.push(Monomial(current.clone()));
            }
            return;
        }
        let wi = w.0[pos] as u64;
        let max_e = remaining / wi;
        for e in 0..=max_e {
            current[pos] = e as u32;
            rec(w, pos + 1, remaining - e * wi, current, out);
        }
        current[pos] = 0;
    }
    rec(w, 0, degree, &mut current, &mut out);
    out.sort();
    out
}

/// Enumerates all monomials of weighted degree at most `cap`, ascending.
pub fn monomials_up_to_weighted_degree(nvars: usize, w: &WeightVector, cap: u64) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=cap {
        out.extend(monomials_of_weighted_degree(nvars, w, d));
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn grevlex_order_two_vars() {
        let x2 = Monomial(vec![2, 0]);
        let xy = Monomial(vec![1, 1]);
        let y2 = Monomial(vec![0, 2]);
        let y3 = Monomial(vec![0, 3]);
        assert!(x2 > xy && xy > y2);
        assert!(y3 > x2, "higher total degree dominates");
    }

    #[test]
    fn grevlex_order_three_vars() {
        // Degree-2 monomials in x, y, z, descending:
        // x^2 > xy > y^2 > xz > yz > z^2.
        let order = [
            Monomial(vec![2, 0, 0]),
            Monomial(vec![1, 1, 0]),
            Monomial(vec![0, 2, 0]),
            Monomial(vec![1, 0, 1]),
            Monomial(vec![0, 1, 1]),
            Monomial(vec![0, 0, 2]),
        ];
        for w in order.windows(2) {
            assert!(w[0] > w[1], "{:?} should precede {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn arithmetic_basics() {
        let vars = names(&["x", "y"]);
        let f = Poly::parse("x^2+y^3", 2, &vars).unwrap();
        let g = Poly::parse("x^2+y^3", 2, &vars).unwrap();
        assert!(f.add(&g).is_zero(), "char 2: f + f = 0");
        let h = f.mul(&g);
        let expect = Poly::parse("x^4+y^6", 2, &vars).unwrap();
        assert_eq!(h, expect, "squaring is digit-wise in char 2");
        assert_eq!(f.sub(&g), Poly::zero(2, 2));
    }

    #[test]
    fn partial_derivatives() {
        let vars = names(&["x", "y"]);
        let f = Poly::parse("x^2+y^3", 5, &vars).unwrap();
        assert_eq!(f.partial(0), Poly::parse("2*x", 5, &vars).unwrap());
        assert_eq!(f.partial(1), Poly::parse("3*y^2", 5, &vars).unwrap());
        // p-th powers vanish under the formal derivative.
        let g = Poly::parse("x^5", 5, &vars).unwrap();
        assert!(g.partial(0).is_zero());
    }

    #[test]
    fn weighted_parts_split() {
        let w = WeightVector::new(vec![3, 2]);
        let vars = names(&["x", "y"]);
        let f = Poly::parse("x^2+y^3+x*y", 7, &vars).unwrap();
        let parts = f.weighted_parts(&w);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&6], Poly::parse("x^2+y^3", 7, &vars).unwrap());
        assert_eq!(parts[&5], Poly::parse("x*y", 7, &vars).unwrap());
        assert!(!f.is_weighted_homogeneous(&w));
        assert!(parts[&6].is_weighted_homogeneous(&w));
        assert_eq!(parts[&6].homogeneous_weighted_degree(&w), Some(6));
    }

    #[test]
    fn monomial_enumeration() {
        let w = WeightVector::new(vec![3, 2]);
        let ms = monomials_of_weighted_degree(2, &w, 6);
        assert_eq!(ms.len(), 2); // x^2 and y^3
        assert!(ms.contains(&Monomial(vec![2, 0])));
        assert!(ms.contains(&Monomial(vec![0, 3])));
        assert_eq!(monomials_of_weighted_degree(2, &w, 1).len(), 0);
        let all = monomials_up_to_weighted_degree(2, &w, 4);
        // 1, y (2), x (3), y^2 (4).
        assert_eq!(all.len(), 4);
    }

    #[test]
    fn power_and_scale() {
        let vars = names(&["x"]);
        let f = Poly::parse("x+1", 3, &vars).unwrap();
        let cube = f.pow(3);
        assert_eq!(cube, Poly::parse("x^3+1", 3, &vars).unwrap());
        let two = FpElem::new(2, 3).unwrap();
        assert_eq!(f.scale(two), Poly::parse("2*x+2", 3, &vars).unwrap());
    }
}

//! Two-parameter Hasse-Schmidt derivations on weighted truncation regions.
//!
//! The series here live in `A[[mu1, mu2]]` truncated to a region
//! `Delta = {(i,j) | w1*i + w2*j <= N}` that is downward closed, so all
//! arithmetic may discard coefficients outside it. A two-parameter
//! derivation is again stored through its variable images (constant
//! coefficient the variable itself), and its component family satisfies the
//! two-index convolution product rule by construction.
//!
//! On top of the group structure (compose, inverse) the module provides the
//! diagonal spreading of a one-parameter derivation, external products,
//! the component extractor built from them, and monomial substitutions back
//! into one parameter — the ingredients the integration pipeline uses to
//! isolate a single component of a derivation up to logarithmic error.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::digits::{binomial_mod_p, BasePDigits};
use crate::hsd::{HsDeriv, TruncSeries};
use crate::poly::Poly;
use crate::zpfield::FpElem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BivariateError {
    #[error("pair ({0}, {1}) lies outside the truncation region")]
    OutsideCoideal(u32, u32),
    #[error("operands mix moduli, variable counts, or regions incompatibly")]
    ShapeMismatch,
    #[error("source derivation has length {actual} but the region needs {needed}")]
    SourceTooShort { needed: usize, actual: usize },
    #[error("region misses pair ({0}, {1}) although it lands at or below the target order")]
    InsufficientSupport(u32, u32),
    #[error("order {0} must be a multiple of the characteristic but not a power of it")]
    UnsupportedOrder(usize),
}

/// Downward-closed truncation region `{(i,j) | w1*i + w2*j <= bound}` for
/// positive weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoIdeal2 {
    w1: u32,
    w2: u32,
    bound: u32,
}

impl CoIdeal2 {
    pub fn new(w1: u32, w2: u32, bound: u32) -> Self {
        assert!(w1 >= 1 && w2 >= 1, "weights must be positive");
        CoIdeal2 { w1, w2, bound }
    }

    /// The total-degree region `i + j <= bound`.
    pub fn total_degree(bound: u32) -> Self {
        CoIdeal2::new(1, 1, bound)
    }

    pub fn weights(&self) -> (u32, u32) {
        (self.w1, self.w2)
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        (self.w1 as u64) * (i as u64) + (self.w2 as u64) * (j as u64) <= self.bound as u64
    }

    /// Largest first index occurring in the region.
    pub fn max_first(&self) -> u32 {
        self.bound / self.w1
    }

    /// Largest second index occurring in the region.
    pub fn max_second(&self) -> u32 {
        self.bound / self.w2
    }

    /// Largest `i + j` over the region.
    pub fn max_sum(&self) -> u32 {
        self.bound / self.w1.min(self.w2)
    }

    /// All pairs of the region, sorted by `i + j`, then lexicographically.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..=self.max_first() {
            for j in 0..=self.max_second() {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out.sort_by_key(|&(i, j)| (i + j, i, j));
        out
    }
}

/// An element of `A[[mu1, mu2]]` truncated to a region; only nonzero
/// coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSeries {
    p: u64,
    nvars: usize,
    delta: CoIdeal2,
    coeffs: BTreeMap<(u32, u32), Poly>,
}

impl BiSeries {
    pub fn zero(p: u64, nvars: usize, delta: CoIdeal2) -> Self {
        BiSeries {
            p,
            nvars,
            delta,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(f: Poly, delta: CoIdeal2) -> Self {
        let mut s = BiSeries::zero(f.modulus(), f.nvars(), delta);
        s.set_coeff((0, 0), f);
        s
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn delta(&self) -> &CoIdeal2 {
        &self.delta
    }

    pub fn get(&self, pair: (u32, u32)) -> Option<&Poly> {
        self.coeffs.get(&pair)
    }

    /// Coefficient at `pair`, materializing zero for absent entries.
    pub fn coeff(&self, pair: (u32, u32)) -> Poly {
        assert!(self.delta.contains(pair.0, pair.1), "pair outside region");
        self.coeffs
            .get(&pair)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.p, self.nvars))
    }

    pub fn set_coeff(&mut self, pair: (u32, u32), f: Poly) {
        assert!(self.delta.contains(pair.0, pair.1), "pair outside region");
        assert_eq!(f.modulus(), self.p, "mixed moduli");
        assert_eq!(f.nvars(), self.nvars, "mixed variable counts");
        if f.is_zero() {
            self.coeffs.remove(&pair);
        } else {
            self.coeffs.insert(pair, f);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), &Poly)> {
        self.coeffs.iter().map(|(&k, v)| (k, v))
    }

    fn expect_compatible(&self, other: &BiSeries) {
        assert_eq!(self.p, other.p, "mixed moduli");
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        assert_eq!(self.delta, other.delta, "mixed regions");
    }

    pub fn add(&self, other: &BiSeries) -> BiSeries {
        self.expect_compatible(other);
        let mut out = self.clone();
        for (pair, f) in other.iter() {
            out.set_coeff(pair, out.coeff(pair).add(f));
        }
        out
    }

    pub fn neg(&self) -> BiSeries {
        BiSeries {
            p: self.p,
            nvars: self.nvars,
            delta: self.delta,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, v.neg())).collect(),
        }
    }

    /// Adds `other * mu1^shift.0 * mu2^shift.1`, discarding terms that leave
    /// the region. Discarding is sound because the region is downward closed.
    pub fn add_shifted(&mut self, other: &BiSeries, shift: (u32, u32)) {
        assert_eq!(self.p, other.p, "mixed moduli");
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        for ((i, j), f) in other.iter() {
            let target = (i + shift.0, j + shift.1);
            if self.delta.contains(target.0, target.1) {
                self.set_coeff(target, self.coeff(target).add(f));
            }
        }
    }

    /// Truncated convolution product.
    pub fn mul(&self, other: &BiSeries) -> BiSeries {
        self.expect_compatible(other);
        let mut out = BiSeries::zero(self.p, self.nvars, self.delta);
        for ((a, b), f) in self.iter() {
            for ((c, d), g) in other.iter() {
                let pair = (a + c, b + d);
                if out.delta.contains(pair.0, pair.1) {
                    out.set_coeff(pair, out.coeff(pair).add(&f.mul(g)));
                }
            }
        }
        out
    }

    /// Evaluates `f` at the given series (one per variable), truncated to the
    /// region. Powers of each substituted series are cached per call.
    pub fn eval_poly(f: &Poly, images: &[BiSeries], delta: CoIdeal2) -> BiSeries {
        let p = f.modulus();
        let nvars = f.nvars();
        assert_eq!(images.len(), nvars, "one series per variable");
        let one = Poly::constant(FpElem::raw(1 % p, p), nvars);
        let mut out = BiSeries::zero(p, nvars, delta);
        let mut powers: Vec<Vec<BiSeries>> = images
            .iter()
            .map(|s| {
                assert_eq!(s.delta, delta, "mixed regions");
                vec![BiSeries::constant(one.clone(), delta), s.clone()]
            })
            .collect();
        for (mono, coeff) in f.terms() {
            let mut term = BiSeries::constant(Poly::constant(coeff, nvars), delta);
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
}

/// A two-parameter Hasse-Schmidt derivation truncated to a region, stored
/// through its variable images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiHsDeriv {
    p: u64,
    nvars: usize,
    delta: CoIdeal2,
    images: Vec<BiSeries>,
}

impl BiHsDeriv {
    pub fn identity(p: u64, nvars: usize, delta: CoIdeal2) -> Self {
        let images = (0..nvars)
            .map(|i| BiSeries::constant(Poly::variable(p, nvars, i), delta))
            .collect();
        BiHsDeriv {
            p,
            nvars,
            delta,
            images,
        }
    }

    /// Builds from explicit variable images; each must use the same region
    /// and carry the matching variable at (0, 0).
    pub fn from_images(images: Vec<BiSeries>) -> Result<Self, BivariateError> {
        if images.is_empty() {
            return Err(BivariateError::ShapeMismatch);
        }
        let p = images[0].modulus();
        let nvars = images.len();
        let delta = images[0].delta;
        for (i, s) in images.iter().enumerate() {
            if s.modulus() != p || s.nvars() != nvars || s.delta != delta {
                return Err(BivariateError::ShapeMismatch);
            }
            if s.coeff((0, 0)) != Poly::variable(p, nvars, i) {
                return Err(BivariateError::ShapeMismatch);
            }
        }
        Ok(BiHsDeriv {
            p,
            nvars,
            delta,
            images,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn delta(&self) -> &CoIdeal2 {
        &self.delta
    }

    pub fn images(&self) -> &[BiSeries] {
        &self.images
    }

    /// The coefficient of `mu1^i mu2^j` in the image of `var`.
    pub fn component_image(&self, pair: (u32, u32), var: usize) -> Poly {
        self.images[var].coeff(pair)
    }

    pub fn component_is_zero(&self, pair: (u32, u32)) -> bool {
        self.images.iter().all(|s| s.get(pair).is_none())
    }

    /// Evaluates the homomorphism on `f`, returning the truncated series of
    /// all component values.
    pub fn eval(&self, f: &Poly) -> BiSeries {
        assert_eq!(f.modulus(), self.p, "mixed moduli");
        assert_eq!(f.nvars(), self.nvars, "mixed variable counts");
        BiSeries::eval_poly(f, &self.images, self.delta)
    }

    /// Value of the component at `pair` on `f`.
    pub fn apply(&self, pair: (u32, u32), f: &Poly) -> Result<Poly, BivariateError> {
        if !self.delta.contains(pair.0, pair.1) {
            return Err(BivariateError::OutsideCoideal(pair.0, pair.1));
        }
        Ok(self.eval(f).coeff(pair))
    }

    /// Group composition: applies `self` coefficientwise to the series of
    /// `other`, so the component at `a` is the convolution
    /// `sum over b+c=a of self_b (other_c (..))`.
    pub fn compose(&self, other: &BiHsDeriv) -> Result<BiHsDeriv, BivariateError> {
        if self.p != other.p || self.nvars != other.nvars || self.delta != other.delta {
            return Err(BivariateError::ShapeMismatch);
        }
        let images = (0..self.nvars)
            .map(|x| {
                let mut acc = BiSeries::zero(self.p, self.nvars, self.delta);
                for (pair, c) in other.images[x].iter() {
                    let lifted = BiSeries::eval_poly(c, &self.images, self.delta);
                    acc.add_shifted(&lifted, pair);
                }
                acc
            })
            .collect();
        BiHsDeriv::from_images(images)
    }

    /// Group inverse, solved coefficientwise in increasing `i + j` (then
    /// lexicographic) order so that composing `self` with the result gives
    /// the identity.
    pub fn inverse(&self) -> BiHsDeriv {
        let pairs = self.delta.pairs();
        let images: Vec<BiSeries> = (0..self.nvars)
            .map(|x| {
                let mut inv = BiSeries::zero(self.p, self.nvars, self.delta);
                inv.set_coeff((0, 0), Poly::variable(self.p, self.nvars, x));
                for &(i, j) in &pairs {
                    if (i, j) == (0, 0) {
                        continue;
                    }
                    // The coefficient at (i, j) of self applied
                    // coefficientwise to inv must vanish; the (i, j)-shift of
                    // the unknown enters through the constant term only.
                    let mut acc = Poly::zero(self.p, self.nvars);
                    for ((a, b), c) in inv.iter() {
                        if (a, b) == (i, j) || a > i || b > j {
                            continue;
                        }
                        let lifted = BiSeries::eval_poly(c, &self.images, self.delta);
                        acc = acc.add(&lifted.coeff((i - a, j - b)));
                    }
                    inv.set_coeff((i, j), acc.neg());
                }
                inv
            })
            .collect();
        BiHsDeriv::from_images(images).expect("inverse preserves shape")
    }
}

fn source_length_check(d: &HsDeriv, needed: usize) -> Result<(), BivariateError> {
    if d.length() < needed {
        Err(BivariateError::SourceTooShort {
            needed,
            actual: d.length(),
        })
    } else {
        Ok(())
    }
}

/// Spreads a one-parameter derivation over the diagonal (`mu` becomes
/// `mu1 + mu2`): the component at `(i, j)` is `binom(i+j, i)` times the
/// source component at `i + j`.
pub fn spread(d: &HsDeriv, delta: CoIdeal2) -> Result<BiHsDeriv, BivariateError> {
    source_length_check(d, delta.max_sum() as usize)?;
    let p = d.modulus();
    let images = (0..d.nvars())
        .map(|x| {
            let mut s = BiSeries::zero(p, d.nvars(), delta);
            for (i, j) in delta.pairs() {
                let src = d.component_image((i + j) as usize, x);
                if src.is_zero() {
                    continue;
                }
                let c = binomial_mod_p((i + j) as u64, i as u64, p);
                s.set_coeff((i, j), src.scale(c));
            }
            s
        })
        .collect();
    BiHsDeriv::from_images(images)
}

/// External product: the component at `(i, j)` acts as the `i`-th component
/// of `d` after the `j`-th component of `e`. The image of a variable is the
/// image under `e`, with `d`'s homomorphism applied to each coefficient.
pub fn external_product(
    d: &HsDeriv,
    e: &HsDeriv,
    delta: CoIdeal2,
) -> Result<BiHsDeriv, BivariateError> {
    source_length_check(d, delta.max_first() as usize)?;
    source_length_check(e, delta.max_second() as usize)?;
    let p = d.modulus();
    if e.modulus() != p || e.nvars() != d.nvars() {
        return Err(BivariateError::ShapeMismatch);
    }
    let images = (0..d.nvars())
        .map(|x| {
            let mut s = BiSeries::zero(p, d.nvars(), delta);
            for j in 0..=delta.max_second() {
                if !delta.contains(0, j) {
                    break;
                }
                let coeff = e.component_image(j as usize, x);
                if coeff.is_zero() {
                    continue;
                }
                // Largest first index paired with this j.
                let max_i = ((delta.bound - delta.w2 * j) / delta.w1) as usize;
                let truncated: Vec<TruncSeries> =
                    d.images().iter().map(|t| t.truncated(max_i)).collect();
                let lifted = TruncSeries::eval_poly(coeff, &truncated, max_i);
                for i in 0..=max_i {
                    if !lifted.coeff(i).is_zero() {
                        s.set_coeff((i as u32, j), lifted.coeff(i).clone());
                    }
                }
            }
            s
        })
        .collect();
    BiHsDeriv::from_images(images)
}

/// Inverse of the external square of `d`, built directly: the component at
/// `(i, j)` acts as the `j`-th component of the inverse of `d` after its
/// `i`-th component. Equal to the group inverse of
/// `external_product(d, d, delta)`; the equality is exercised by tests.
pub fn external_square_inv(d: &HsDeriv, delta: CoIdeal2) -> Result<BiHsDeriv, BivariateError> {
    let needed = delta.max_first().max(delta.max_second()) as usize;
    source_length_check(d, needed)?;
    let p = d.modulus();
    let inv = d.inverse();
    let images = (0..d.nvars())
        .map(|x| {
            let mut s = BiSeries::zero(p, d.nvars(), delta);
            for i in 0..=delta.max_first() {
                if !delta.contains(i, 0) {
                    break;
                }
                let coeff = inv.component_image(i as usize, x);
                if coeff.is_zero() {
                    continue;
                }
                let max_j = ((delta.bound - delta.w1 * i) / delta.w2) as usize;
                let truncated: Vec<TruncSeries> =
                    inv.images().iter().map(|t| t.truncated(max_j)).collect();
                let lifted = TruncSeries::eval_poly(coeff, &truncated, max_j);
                for j in 0..=max_j {
                    if !lifted.coeff(j).is_zero() {
                        s.set_coeff((i, j as u32), lifted.coeff(j).clone());
                    }
                }
            }
            s
        })
        .collect();
    BiHsDeriv::from_images(images)
}

/// Component extractor: the spread of `d` composed with the inverse of its
/// external square. Its components vanish on both axes, its `(1, 1)`
/// component is twice the second component of `d` minus the square of the
/// first, and more generally the off-axis components isolate single source
/// components up to compositions of lower ones.
pub fn extractor(d: &HsDeriv, delta: CoIdeal2) -> Result<BiHsDeriv, BivariateError> {
    let b = spread(d, delta)?;
    let fs = external_square_inv(d, delta)?;
    b.compose(&fs)
}

/// Substitutes `mu1 = mu^d1, mu2 = mu^d2`, producing a one-parameter
/// derivation of length `target`: its component at `a` is the sum of the
/// components at all pairs `(i, j)` with `d1*i + d2*j = a`. Every such pair
/// with value at most `target` must lie in the region, otherwise the
/// truncation would have discarded coefficients the result needs.
pub fn substitute(
    d: &BiHsDeriv,
    d1: usize,
    d2: usize,
    target: usize,
) -> Result<HsDeriv, BivariateError> {
    assert!(
        d1 >= 1 && d2 >= 1,
        "substitution exponents must be positive"
    );
    for i in 0..=(target / d1) as u32 {
        for j in 0..=((target - d1 * i as usize) / d2) as u32 {
            if !d.delta.contains(i, j) {
                return Err(BivariateError::InsufficientSupport(i, j));
            }
        }
    }
    let images = (0..d.nvars)
        .map(|x| {
            let mut s = TruncSeries::zero(d.p, d.nvars, target);
            for ((i, j), f) in d.images[x].iter() {
                let a = d1 * i as usize + d2 * j as usize;
                if a <= target {
                    s.set_coeff(a, s.coeff(a).add(f));
                }
            }
            s
        })
        .collect();
    HsDeriv::from_images(images).map_err(|_| BivariateError::ShapeMismatch)
}

/// Rescaled extractor for a target order `n` that is a multiple of the
/// characteristic but not a power of it. Writing `t` for the position of the
/// lowest nonzero base-p digit of `n`, this builds the extractor of `d` on
/// the region with weights `(p^t + 1, p^t)` and bound `(n+1)p^t`, then
/// substitutes `mu1 = mu^{p^t+1}, mu2 = mu^{p^t}`.
///
/// The result has length `(n+1)p^t` and its components below `2p^t + 1`
/// vanish: pairs with a smaller weighted value lie on an axis, where the
/// extractor is identically zero.
pub fn rescaled_extractor(d: &HsDeriv, n: usize) -> Result<HsDeriv, BivariateError> {
    let p = d.modulus();
    let digits = BasePDigits::new(n as u64, p);
    let t = match digits.lowest_nonzero() {
        Some(t) if t >= 1 && digits.sum() > 1 => t,
        _ => return Err(BivariateError::UnsupportedOrder(n)),
    };
    let pt = (p as u32).pow(t);
    let bound = (n as u32 + 1) * pt;
    let delta = CoIdeal2::new(pt + 1, pt, bound);
    // The region reaches pair sums up to n + 1; extending the source there
    // with a zero component is harmless because the extractor vanishes on
    // the axes — the only pairs whose value involves the extension.
    let padded = d.resized(delta.max_sum() as usize);
    let g = extractor(&padded, delta)?;
    substitute(&g, pt as usize + 1, pt as usize, bound as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    /// Univariate derivation on F_p[x] with the given nonzero images.
    fn univariate(p: u64, coeffs: &[&str], vars: &[String]) -> HsDeriv {
        let length = coeffs.len();
        let mut s = TruncSeries::zero(p, 1, length);
        s.set_coeff(0, Poly::variable(p, 1, 0));
        for (n, c) in coeffs.iter().enumerate() {
            s.set_coeff(n + 1, Poly::parse(c, p, vars).unwrap());
        }
        HsDeriv::from_images(vec![s]).unwrap()
    }

    #[test]
    fn region_enumeration() {
        let delta = CoIdeal2::new(3, 2, 8);
        assert!(delta.contains(0, 0) && delta.contains(2, 1) && delta.contains(0, 4));
        assert!(!delta.contains(3, 0) && !delta.contains(1, 3));
        assert_eq!(delta.max_first(), 2);
        assert_eq!(delta.max_second(), 4);
        assert_eq!(delta.max_sum(), 4);
        let pairs = delta.pairs();
        assert_eq!(pairs[0], (0, 0));
        // Downward closed: every coordinatewise predecessor is present.
        for &(i, j) in &pairs {
            if i > 0 {
                assert!(pairs.contains(&(i - 1, j)));
            }
            if j > 0 {
                assert!(pairs.contains(&(i, j - 1)));
            }
        }
        // Sorted by |pair| then lexicographic.
        for w in pairs.windows(2) {
            let key = |(i, j): (u32, u32)| (i + j, i, j);
            assert!(key(w[0]) < key(w[1]));
        }
    }

    #[test]
    fn spread_has_binomial_components() {
        let vars = names(&["x"]);
        let d = univariate(5, &["x", "x^2", "1", "x^3"], &vars);
        let delta = CoIdeal2::total_degree(4);
        let b = spread(&d, delta).unwrap();
        for (i, j) in delta.pairs() {
            let expect = d.component_image((i + j) as usize, 0).scale(binomial_mod_p(
                (i + j) as u64,
                i as u64,
                5,
            ));
            assert_eq!(b.component_image((i, j), 0), expect);
        }
        // As maps, not only on the variable images.
        let f = Poly::parse("x^3+2*x", 5, &vars).unwrap();
        for (i, j) in delta.pairs() {
            let expect = d.apply((i + j) as usize, &f).unwrap().scale(binomial_mod_p(
                (i + j) as u64,
                i as u64,
                5,
            ));
            assert_eq!(b.apply((i, j), &f).unwrap(), expect);
        }
        assert!(matches!(
            spread(&d, CoIdeal2::total_degree(5)),
            Err(BivariateError::SourceTooShort {
                needed: 5,
                actual: 4
            })
        ));
    }

    #[test]
    fn spread_diagonal_vanishes_in_char_2() {
        let vars = names(&["x"]);
        let d = univariate(2, &["x", "x^2"], &vars);
        let b = spread(&d, CoIdeal2::total_degree(2)).unwrap();
        // binom(2, 1) = 2 = 0.
        assert!(b.component_is_zero((1, 1)));
        assert_eq!(b.component_image((0, 2), 0), *d.component_image(2, 0));
    }

    #[test]
    fn external_product_components_compose() {
        let vars = names(&["x"]);
        let d = univariate(3, &["x^2", "x", "1"], &vars);
        let e = univariate(3, &["1", "x", "x^2"], &vars);
        let delta = CoIdeal2::total_degree(3);
        let prod = external_product(&d, &e, delta).unwrap();
        let f = Poly::parse("x^2+x", 3, &vars).unwrap();
        for (i, j) in delta.pairs() {
            let expect = d
                .apply(i as usize, &e.apply(j as usize, &f).unwrap())
                .unwrap();
            assert_eq!(prod.apply((i, j), &f).unwrap(), expect, "at ({i}, {j})");
        }
        // Axis components are the factors themselves.
        for i in 1..=3u32 {
            assert_eq!(
                prod.component_image((i, 0), 0),
                *d.component_image(i as usize, 0)
            );
            assert_eq!(
                prod.component_image((0, i), 0),
                *e.component_image(i as usize, 0)
            );
        }
        let id = HsDeriv::identity(3, 1, 3);
        assert_eq!(
            external_product(&id, &id, delta).unwrap(),
            BiHsDeriv::identity(3, 1, delta)
        );
    }

    #[test]
    fn external_square_inverse_matches_group_inverse() {
        let vars = names(&["x"]);
        let d = univariate(3, &["x", "x^2", "2"], &vars);
        let delta = CoIdeal2::total_degree(3);
        let direct = external_square_inv(&d, delta).unwrap();
        let via_group = external_product(&d, &d, delta).unwrap().inverse();
        assert_eq!(direct, via_group);
        // Two-sided inverse of the external square.
        let square = external_product(&d, &d, delta).unwrap();
        assert_eq!(
            square.compose(&direct).unwrap(),
            BiHsDeriv::identity(3, 1, delta)
        );
        assert_eq!(
            direct.compose(&square).unwrap(),
            BiHsDeriv::identity(3, 1, delta)
        );
    }

    #[test]
    fn bivariate_inverse_round_trip() {
        let vars = names(&["x", "y"]);
        let mut sx = BiSeries::zero(5, 2, CoIdeal2::new(2, 1, 4));
        sx.set_coeff((0, 0), Poly::variable(5, 2, 0));
        sx.set_coeff((1, 0), Poly::parse("y", 5, &vars).unwrap());
        sx.set_coeff((0, 2), Poly::parse("x*y", 5, &vars).unwrap());
        let mut sy = BiSeries::zero(5, 2, CoIdeal2::new(2, 1, 4));
        sy.set_coeff((0, 0), Poly::variable(5, 2, 1));
        sy.set_coeff((0, 1), Poly::parse("x^2", 5, &vars).unwrap());
        let d = BiHsDeriv::from_images(vec![sx, sy]).unwrap();
        let inv = d.inverse();
        let id = BiHsDeriv::identity(5, 2, *d.delta());
        assert_eq!(d.compose(&inv).unwrap(), id);
        assert_eq!(inv.compose(&d).unwrap(), id);
    }

    #[test]
    fn product_rule_on_components() {
        let vars = names(&["x"]);
        let d = univariate(3, &["x", "1", "x^2"], &vars);
        let delta = CoIdeal2::total_degree(3);
        let g = extractor(&d, delta).unwrap();
        let f1 = Poly::parse("x^2", 3, &vars).unwrap();
        let f2 = Poly::parse("x+2", 3, &vars).unwrap();
        let product = f1.mul(&f2);
        for (i, j) in delta.pairs() {
            let mut expect = Poly::zero(3, 1);
            for a in 0..=i {
                for b in 0..=j {
                    let left = g.apply((a, b), &f1).unwrap();
                    let right = g.apply((i - a, j - b), &f2).unwrap();
                    expect = expect.add(&left.mul(&right));
                }
            }
            assert_eq!(g.apply((i, j), &product).unwrap(), expect);
        }
    }

    #[test]
    fn extractor_vanishes_on_axes() {
        let vars = names(&["x"]);
        let d = univariate(5, &["x", "x^2", "1", "2*x"], &vars);
        let delta = CoIdeal2::total_degree(4);
        let g = extractor(&d, delta).unwrap();
        for m in 1..=4u32 {
            assert!(g.component_is_zero((m, 0)), "axis ({m}, 0)");
            assert!(g.component_is_zero((0, m)), "axis (0, {m})");
        }
    }

    #[test]
    fn extractor_diagonal_component() {
        let vars = names(&["x"]);
        let d = univariate(5, &["x^2", "x^3", "1"], &vars);
        let g = extractor(&d, CoIdeal2::total_degree(3)).unwrap();
        // Component (1, 1) acts as 2*D_2 - D_1 after D_1.
        let f = Poly::parse("x^2+3*x", 5, &vars).unwrap();
        let two = FpElem::new(2, 5).unwrap();
        let expect = d
            .apply(2, &f)
            .unwrap()
            .scale(two)
            .sub(&d.apply(1, &d.apply(1, &f).unwrap()).unwrap());
        assert_eq!(g.apply((1, 1), &f).unwrap(), expect);
    }

    #[test]
    fn substitute_diagonal_collapses_binomials() {
        let vars = names(&["x"]);
        let d = univariate(5, &["x", "x^2", "1", "x^3"], &vars);
        let b = spread(&d, CoIdeal2::total_degree(4)).unwrap();
        let back = substitute(&b, 1, 1, 4).unwrap();
        // Coefficientwise: sum over i+j=a of binom(a, i) = 2^a.
        for a in 1..=4usize {
            let two_pow = FpElem::new(2, 5).unwrap().pow(a as u64);
            assert_eq!(
                back.component_image(a, 0),
                &d.component_image(a, 0).scale(two_pow)
            );
        }
    }

    #[test]
    fn substitute_needs_full_support() {
        let vars = names(&["x"]);
        let d = univariate(5, &["x", "x^2", "1", "x"], &vars);
        let b = spread(&d, CoIdeal2::new(2, 1, 4)).unwrap();
        // (4, 0) has value 4 under (1, 1)-substitution but weight 8 > 4.
        assert!(matches!(
            substitute(&b, 1, 1, 4),
            Err(BivariateError::InsufficientSupport(_, _))
        ));
        // Matching the region's own weights always works.
        let ok = substitute(&b, 2, 1, 4).unwrap();
        assert_eq!(ok.length(), 4);
    }

    #[test]
    fn substitute_into_identity() {
        let delta = CoIdeal2::total_degree(4);
        let id = BiHsDeriv::identity(7, 1, delta);
        let out = substitute(&id, 1, 2, 4).unwrap();
        assert_eq!(out, HsDeriv::identity(7, 1, 4));
    }

    #[test]
    fn rescaled_extractor_shape() {
        let vars = names(&["x"]);
        // n = 6 = 2 * 3 over F_2: t = 1, length (6+1)*2 = 14.
        let d = univariate(2, &["x", "x^2", "1", "x", "0", "x^3"], &vars);
        let g = rescaled_extractor(&d, 6).unwrap();
        assert_eq!(g.length(), 14);
        // Components below 2*p^t + 1 = 5 vanish for any source.
        for a in 1..5 {
            assert!(g.component_is_zero(a), "component {a}");
        }
        assert_eq!(HsDeriv::identity(2, 1, 6).length(), 6);
        assert_eq!(
            rescaled_extractor(&HsDeriv::identity(2, 1, 6), 6).unwrap(),
            HsDeriv::identity(2, 1, 14)
        );
    }

    #[test]
    fn rescaled_extractor_rejects_bad_orders() {
        let d = HsDeriv::identity(2, 1, 8);
        assert!(
            matches!(
                rescaled_extractor(&d, 8),
                Err(BivariateError::UnsupportedOrder(8))
            ),
            "powers of the characteristic are not bridgeable"
        );
        assert!(
            matches!(
                rescaled_extractor(&d, 5),
                Err(BivariateError::UnsupportedOrder(5))
            ),
            "orders prime to the characteristic need no bridge"
        );
        let d3 = HsDeriv::identity(3, 1, 9);
        assert!(matches!(
            rescaled_extractor(&d3, 9),
            Err(BivariateError::UnsupportedOrder(9))
        ));
        assert!(rescaled_extractor(&d3.resized(6), 6).is_ok());
    }
}

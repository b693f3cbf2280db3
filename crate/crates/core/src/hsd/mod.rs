//! Hasse-Schmidt derivations of finite length on a polynomial ring.
//!
//! A higher derivation of length `m` is a sequence `(Id, D_1, ..., D_m)` of
//! additive operators satisfying the convolution product rule
//! `D_n(fg) = sum over a+b=n of D_a(f) D_b(g)`. Equivalently it is a ring
//! homomorphism into the truncated series ring `R[mu]/(mu^{m+1})` sending
//! each element to itself modulo `mu`. On a polynomial ring such a
//! homomorphism is freely determined by the images of the variables, so a
//! derivation is stored here as one truncated series per variable with
//! constant coefficient the variable itself; the product rule then holds by
//! construction and every component is recovered by evaluation.
//!
//! The zero test for a component on variable images is exact precisely for
//! "first nonzero" questions: if all components below an index vanish, the
//! component at that index obeys the two-term product rule and is therefore
//! determined by (and zero together with) its variable images. All order
//! computations in this module only ever ask such questions.

mod series;
mod text;

pub use series::TruncSeries;
pub use text::{parse_hsd, print_hsd, HsdDocument, HsdParseError};

use thiserror::Error;

use crate::poly::{IdealPresentation, Poly, WeightVector};
use crate::zpfield::FpElem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HsdError {
    #[error("component index {index} exceeds length {length}")]
    IndexBeyondLength { index: usize, length: usize },
    #[error("operands mix moduli, variable counts, or lengths incompatibly")]
    ShapeMismatch,
    #[error("truncation length {target} exceeds current length {length}")]
    BadLength { target: usize, length: usize },
    #[error("block size {e} must lie in 1 < e <= length = {length}")]
    BadBlockSize { e: usize, length: usize },
    #[error("component at index {index} (not a multiple of {e}) is nonzero")]
    NotMultipleSupported { index: usize, e: usize },
    #[error(
        "padding with derivations requires all components away from multiples of {m} to vanish"
    )]
    PadShapeMismatch { m: usize },
}

/// A plain derivation `d` with `d(x_i) = images[i]`, extended to the whole
/// ring by the Leibniz rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    p: u64,
    nvars: usize,
    images: Vec<Poly>,
}

impl Derivation {
    pub fn new(images: Vec<Poly>) -> Self {
        assert!(!images.is_empty(), "need at least one variable");
        let p = images[0].modulus();
        let nvars = images.len();
        assert!(
            images
                .iter()
                .all(|f| f.modulus() == p && f.nvars() == nvars),
            "image shapes must agree"
        );
        Derivation { p, nvars, images }
    }

    pub fn zero(p: u64, nvars: usize) -> Self {
        Derivation::new(vec![Poly::zero(p, nvars); nvars])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    pub fn image(&self, var: usize) -> &Poly {
        &self.images[var]
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(Poly::is_zero)
    }

    /// Applies the derivation via the chain rule:
    /// `d(f) = sum_i (partial f / partial x_i) * d(x_i)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.p, self.nvars);
        for (i, img) in self.images.iter().enumerate() {
            if !img.is_zero() {
                out = out.add(&f.partial(i).mul(img));
            }
        }
        out
    }

    /// Whether the derivation maps every generator of `ideal` into it; by
    /// the Leibniz rule this extends to the whole ideal.
    pub fn is_logarithmic(&self, ideal: &IdealPresentation) -> bool {
        ideal
            .generators()
            .iter()
            .all(|g| ideal.contains(&self.apply(g)))
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        assert_eq!(self.nvars, other.nvars);
        Derivation::new(
            self.images
                .iter()
                .zip(&other.images)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn neg(&self) -> Derivation {
        Derivation::new(self.images.iter().map(Poly::neg).collect())
    }

    pub fn scale(&self, c: FpElem) -> Derivation {
        Derivation::new(self.images.iter().map(|f| f.scale(c)).collect())
    }

    /// Weighted degree when every image is weighted homogeneous of degree
    /// `w_i + d` for one common `d`; `None` for the zero derivation or when
    /// the images mix degrees.
    pub fn homogeneous_degree(&self, w: &WeightVector) -> Option<i64> {
        let mut degree = None;
        for (i, img) in self.images.iter().enumerate() {
            if img.is_zero() {
                continue;
            }
            let d = img.homogeneous_weighted_degree(w)? as i64 - w.0[i] as i64;
            match degree {
                None => degree = Some(d),
                Some(existing) if existing == d => {}
                Some(_) => return None,
            }
        }
        degree
    }

    /// Largest `deg(image_i) - w_i` over nonzero image parts: an upper bound
    /// for the degree shift the derivation can cause. `None` if zero.
    pub fn max_degree_shift(&self, w: &WeightVector) -> Option<i64> {
        self.images
            .iter()
            .enumerate()
            .filter_map(|(i, img)| img.max_weighted_degree(w).map(|d| d as i64 - w.0[i] as i64))
            .max()
    }
}

/// A Hasse-Schmidt derivation of length `m`, stored through the images of
/// the variables under the associated truncated-series homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsDeriv {
    p: u64,
    nvars: usize,
    length: usize,
    images: Vec<TruncSeries>,
}

impl HsDeriv {
    /// The identity derivation `(Id, 0, ..., 0)` of the given length.
    pub fn identity(p: u64, nvars: usize, length: usize) -> Self {
        let images = (0..nvars)
            .map(|i| {
                let mut s = TruncSeries::zero(p, nvars, length);
                s.set_coeff(0, Poly::variable(p, nvars, i));
                s
            })
            .collect();
        HsDeriv {
            p,
            nvars,
            length,
            images,
        }
    }

    /// Builds from explicit variable images. Every series must have the same
    /// length and its constant coefficient must be the matching variable.
    pub fn from_images(images: Vec<TruncSeries>) -> Result<Self, HsdError> {
        if images.is_empty() {
            return Err(HsdError::ShapeMismatch);
        }
        let p = images[0].modulus();
        let nvars = images.len();
        let length = images[0].length();
        for (i, s) in images.iter().enumerate() {
            if s.modulus() != p || s.nvars() != nvars || s.length() != length {
                return Err(HsdError::ShapeMismatch);
            }
            if *s.coeff(0) != Poly::variable(p, nvars, i) {
                return Err(HsdError::ShapeMismatch);
            }
        }
        Ok(HsDeriv {
            p,
            nvars,
            length,
            images,
        })
    }

    /// The length-1 derivation `(Id, d)`.
    pub fn from_derivation(d: &Derivation) -> Self {
        let mut out = HsDeriv::identity(d.modulus(), d.nvars(), 1);
        for (i, img) in d.images().iter().enumerate() {
            out.images[i].set_coeff(1, img.clone());
        }
        out
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn images(&self) -> &[TruncSeries] {
        &self.images
    }

    /// The coefficient of `mu^n` in the image of variable `var`, i.e. the
    /// value of the n-th component on that variable.
    pub fn component_image(&self, n: usize, var: usize) -> &Poly {
        self.images[var].coeff(n)
    }

    /// Views component `n` as a plain derivation through its variable
    /// images. This is the honest component only when all lower components
    /// away from suitable multiples vanish (the situations in which the
    /// pipeline extracts components); callers are responsible for that
    /// context, and downstream checks re-verify the uses.
    pub fn component_derivation(&self, n: usize) -> Derivation {
        assert!(n >= 1 && n <= self.length);
        Derivation::new(
            (0..self.nvars)
                .map(|i| self.images[i].coeff(n).clone())
                .collect(),
        )
    }

    pub fn component_is_zero(&self, n: usize) -> bool {
        (0..self.nvars).all(|i| self.images[i].coeff(n).is_zero())
    }

    /// Evaluates the homomorphism on an arbitrary polynomial, returning the
    /// full truncated series of its component values.
    pub fn eval(&self, f: &Poly) -> TruncSeries {
        assert_eq!(f.modulus(), self.p, "mixed moduli");
        assert_eq!(f.nvars(), self.nvars, "mixed variable counts");
        TruncSeries::eval_poly(f, &self.images, self.length)
    }

    /// Value of the n-th component on `f`.
    pub fn apply(&self, n: usize, f: &Poly) -> Result<Poly, HsdError> {
        if n > self.length {
            return Err(HsdError::IndexBeyondLength {
                index: n,
                length: self.length,
            });
        }
        // Evaluating at truncation order n is enough for coefficient n.
        let truncated: Vec<TruncSeries> = self.images.iter().map(|s| s.truncated(n)).collect();
        Ok(TruncSeries::eval_poly(f, &truncated, n).coeff(n).clone())
    }

    /// Group composition: the composite's homomorphism applies `self`
    /// coefficientwise to the series of `other`, so the n-th component is
    /// `sum over i+j=n of self_i (other_j (..))`.
    pub fn compose(&self, other: &HsDeriv) -> Result<HsDeriv, HsdError> {
        if self.p != other.p || self.nvars != other.nvars || self.length != other.length {
            return Err(HsdError::ShapeMismatch);
        }
        let m = self.length;
        let images = (0..self.nvars)
            .map(|i| {
                let mut acc = TruncSeries::zero(self.p, self.nvars, m);
                for j in 0..=m {
                    let coeff = other.images[i].coeff(j);
                    if coeff.is_zero() {
                        continue;
                    }
                    let lifted = TruncSeries::eval_poly(coeff, &self.images, m);
                    acc.add_shifted(&lifted, j);
                }
                acc
            })
            .collect();
        HsDeriv::from_images(images)
    }

    /// Group inverse: solves coefficientwise so that applying `self`
    /// coefficientwise to the result gives back the embedding.
    pub fn inverse(&self) -> HsDeriv {
        let m = self.length;
        let images: Vec<TruncSeries> = (0..self.nvars)
            .map(|i| {
                let mut inv = TruncSeries::zero(self.p, self.nvars, m);
                inv.set_coeff(0, Poly::variable(self.p, self.nvars, i));
                for n in 1..=m {
                    // coefficient n of self applied coefficientwise must
                    // vanish: self_0(c_n) = c_n cancels the rest.
                    let mut acc = Poly::zero(self.p, self.nvars);
                    for j in 0..n {
                        let cj = inv.coeff(j);
                        if cj.is_zero() {
                            continue;
                        }
                        let truncated: Vec<TruncSeries> =
                            self.images.iter().map(|s| s.truncated(n - j)).collect();
                        let val = TruncSeries::eval_poly(cj, &truncated, n - j);
                        acc = acc.add(val.coeff(n - j));
                    }
                    inv.set_coeff(n, acc.neg());
                }
                inv
            })
            .collect();
        HsDeriv::from_images(images).expect("inverse preserves shape")
    }

    /// Reparametrises `mu` to `c * mu`: component `n` is scaled by `c^n`.
    pub fn scale_elem(&self, c: FpElem) -> HsDeriv {
        assert_eq!(c.modulus(), self.p, "mixed moduli");
        self.scale(&Poly::constant(c, self.nvars))
    }

    /// Reparametrises `mu` to `a * mu` for a ring element `a`: component `n`
    /// is multiplied by `a^n`.
    pub fn scale(&self, a: &Poly) -> HsDeriv {
        assert_eq!(a.modulus(), self.p, "mixed moduli");
        assert_eq!(a.nvars(), self.nvars, "mixed variable counts");
        let images = self
            .images
            .iter()
            .map(|s| {
                let mut out = TruncSeries::zero(self.p, self.nvars, self.length);
                let mut power = Poly::constant(FpElem::raw(1 % self.p, self.p), self.nvars);
                for n in 0..=self.length {
                    out.set_coeff(n, s.coeff(n).mul(&power));
                    power = power.mul(a);
                }
                out
            })
            .collect();
        HsDeriv::from_images(images).expect("scaling preserves shape")
    }

    /// Drops components above `n`.
    pub fn truncate(&self, n: usize) -> Result<HsDeriv, HsdError> {
        if n > self.length {
            return Err(HsdError::BadLength {
                target: n,
                length: self.length,
            });
        }
        let images = self.images.iter().map(|s| s.truncated(n)).collect();
        HsDeriv::from_images(images)
    }

    /// Truncates if longer, zero-pads if shorter: length becomes exactly `n`.
    pub fn resized(&self, n: usize) -> HsDeriv {
        if n <= self.length {
            self.truncate(n).expect("within length")
        } else {
            self.pad_to(n)
        }
    }

    /// Reparametrises `mu` to `mu^k`: the result has length `k * m` and its
    /// only possibly nonzero components sit at multiples of `k`, where
    /// component `k * j` equals the original component `j`.
    pub fn stretch(&self, k: usize) -> HsDeriv {
        assert!(k >= 1);
        let new_len = self.length * k;
        let images = self
            .images
            .iter()
            .map(|s| {
                let mut out = TruncSeries::zero(self.p, self.nvars, new_len);
                for j in 0..=self.length {
                    out.set_coeff(j * k, s.coeff(j).clone());
                }
                out
            })
            .collect();
        HsDeriv::from_images(images).expect("stretch preserves shape")
    }

    /// Index of the first nonzero component; `None` for the identity
    /// (conventionally infinite order).
    pub fn leading_order(&self) -> Option<usize> {
        (1..=self.length).find(|&n| !self.component_is_zero(n))
    }

    /// Block order with respect to block size `e` (`1 < e <= length`).
    ///
    /// If every component away from the multiples of `e` vanishes, this is
    /// the full value `ceil(m / e)`. Otherwise it is the block index `h`
    /// of the first nonzero component at an index `h*e + a`, `0 < a < e`.
    pub fn block_order(&self, e: usize) -> Result<usize, HsdError> {
        if e <= 1 || e > self.length {
            return Err(HsdError::BadBlockSize {
                e,
                length: self.length,
            });
        }
        for n in 1..=self.length {
            if n % e != 0 && !self.component_is_zero(n) {
                return Ok(n / e);
            }
        }
        Ok(self.length.div_ceil(e))
    }

    /// Whether all components away from multiples of `e` vanish.
    pub fn is_block_exact(&self, e: usize) -> bool {
        (1..=self.length).all(|n| n % e == 0 || self.component_is_zero(n))
    }

    /// Whether every component up to `upto` maps the ideal into itself.
    /// Checking the generators suffices: the product rule spreads membership
    /// over multiples, so generator images control the whole ideal.
    pub fn is_logarithmic(&self, ideal: &IdealPresentation, upto: usize) -> bool {
        assert!(upto <= self.length, "order beyond length");
        ideal.generators().iter().all(|g| {
            let series = self.eval(g);
            (1..=upto).all(|n| ideal.contains(series.coeff(n)))
        })
    }

    /// Zero-pads to length `target` (a no-op when already that long). Any
    /// extension of variable images is a valid derivation on a polynomial
    /// ring, and zero is the canonical choice.
    pub fn pad_to(&self, target: usize) -> HsDeriv {
        assert!(target >= self.length);
        let images = self.images.iter().map(|s| s.padded(target)).collect();
        HsDeriv::from_images(images).expect("padding preserves shape")
    }

    /// Extends a derivation whose support lies on multiples of
    /// `m = deltas.len() + 1` by one further block: with current length
    /// `m * n`, the result has length `(n + 1) * m - 1` and carries
    /// `deltas[a-1]` at index `m * n + a`. The off-multiple positions of the
    /// new block may hold arbitrary derivations without breaking the product
    /// rule, which is why the extension stays a valid derivation.
    pub fn pad_with(&self, deltas: &[Derivation]) -> Result<HsDeriv, HsdError> {
        let m = deltas.len() + 1;
        if m < 2 || !self.length.is_multiple_of(m) || self.length == 0 {
            return Err(HsdError::PadShapeMismatch { m });
        }
        if !self.is_block_exact(m) {
            return Err(HsdError::PadShapeMismatch { m });
        }
        for d in deltas {
            if d.modulus() != self.p || d.nvars() != self.nvars {
                return Err(HsdError::ShapeMismatch);
            }
        }
        let base = self.length;
        let target = base + m - 1;
        let images = (0..self.nvars)
            .map(|i| {
                let mut s = self.images[i].padded(target);
                for (a, d) in deltas.iter().enumerate() {
                    s.set_coeff(base + a + 1, d.image(i).clone());
                }
                s
            })
            .collect();
        HsDeriv::from_images(images)
    }

    /// Keeps every m-th component: requires all components away from
    /// multiples of `m` to vanish; the result has length `floor(len / m)`
    /// and its component `a` is the original component `m * a`.
    pub fn compress(&self, m: usize) -> Result<HsDeriv, HsdError> {
        assert!(m >= 1);
        if let Some(bad) = (1..=self.length).find(|&n| n % m != 0 && !self.component_is_zero(n)) {
            return Err(HsdError::NotMultipleSupported { index: bad, e: m });
        }
        let new_len = self.length / m;
        let images = (0..self.nvars)
            .map(|i| {
                let mut s = TruncSeries::zero(self.p, self.nvars, new_len);
                for a in 0..=new_len {
                    s.set_coeff(a, self.images[i].coeff(a * m).clone());
                }
                s
            })
            .collect();
        HsDeriv::from_images(images)
    }

    /// Negates, stretches by `m`, and zero-extends by one block: the result
    /// has length `(len + 1) * m - 1`, support on multiples of `m`, component
    /// `m` equal to minus the first component, and component `m*j` equal to
    /// `(-1)^j` times component `j`. Composing against it cancels a matching
    /// component at index `m`.
    pub fn neg_stretch_extend(&self, m: usize) -> HsDeriv {
        assert!(m >= 2);
        let minus_one = FpElem::raw(self.p - 1, self.p);
        let stretched = self.scale_elem(minus_one).stretch(m);
        stretched
            .pad_with(&vec![Derivation::zero(self.p, self.nvars); m - 1])
            .expect("stretched support is block exact")
    }

    /// The first component as a plain derivation (always genuine: order-one
    /// components satisfy the Leibniz rule).
    pub fn first_component(&self) -> Derivation {
        assert!(self.length >= 1);
        self.component_derivation(1)
    }
}

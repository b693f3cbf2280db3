//! Seeded builders shared by the integration suites: random polynomials and
//! derivations, binomial plane-curve ideals with their natural gradings, and
//! factories for logarithmic derivations backed by the search module.
//!
//! Everything is deterministic given the seed each test passes in, so any
//! failure reproduces from the test source alone.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsleaps_core::hsd::{Derivation, HsDeriv, TruncSeries};
use hsleaps_core::leapfinder::{self, DegreePolicy, SearchBounds};
use hsleaps_core::poly::{groebner_basis, IdealPresentation, Monomial, Poly, WeightVector};
use hsleaps_core::zpfield::FpElem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var_names(nvars: usize) -> Vec<String> {
    ["x", "y", "z", "w"][..nvars]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn fp(value: u64, p: u64) -> FpElem {
    FpElem::new(value % p, p).expect("modulus is prime")
}

/// Random polynomial assembled from up to `terms` monomials of total degree
/// at most `max_deg`. Terms may cancel, so the result can be zero.
pub fn random_poly(rng: &mut ChaCha8Rng, p: u64, nvars: usize, max_deg: u32, terms: usize) -> Poly {
    let mut out = Poly::zero(p, nvars);
    for _ in 0..terms {
        let mut exps = vec![0u32; nvars];
        let mut budget = max_deg;
        for e in exps.iter_mut() {
            *e = rng.gen_range(0..=budget);
            budget -= *e;
        }
        let coeff = fp(rng.gen_range(1..p.max(2)), p);
        out = out.add(&Poly::term(coeff, Monomial(exps)));
    }
    out
}

pub fn random_nonzero_poly(
    rng: &mut ChaCha8Rng,
    p: u64,
    nvars: usize,
    max_deg: u32,
    terms: usize,
) -> Poly {
    loop {
        let f = random_poly(rng, p, nvars, max_deg, terms.max(1));
        if !f.is_zero() {
            return f;
        }
    }
}

pub fn random_derivation(rng: &mut ChaCha8Rng, p: u64, nvars: usize, max_deg: u32) -> Derivation {
    Derivation::new(
        (0..nvars)
            .map(|_| random_poly(rng, p, nvars, max_deg, 2))
            .collect(),
    )
}

/// Random Hasse-Schmidt derivation whose component `n` may be nonzero only
/// where `keep(n)` holds. On a free polynomial ring any choice of variable
/// images is valid, so this builds arbitrary support shapes directly.
pub fn random_hsderiv_with(
    rng: &mut ChaCha8Rng,
    p: u64,
    nvars: usize,
    length: usize,
    max_deg: u32,
    keep: impl Fn(usize) -> bool,
) -> HsDeriv {
    let images = (0..nvars)
        .map(|v| {
            let mut s = TruncSeries::zero(p, nvars, length);
            s.set_coeff(0, Poly::variable(p, nvars, v));
            for n in 1..=length {
                if keep(n) {
                    s.set_coeff(n, random_poly(rng, p, nvars, max_deg, 2));
                }
            }
            s
        })
        .collect();
    HsDeriv::from_images(images).expect("images share shape and fix the variables")
}

pub fn random_hsderiv(
    rng: &mut ChaCha8Rng,
    p: u64,
    nvars: usize,
    length: usize,
    max_deg: u32,
) -> HsDeriv {
    random_hsderiv_with(rng, p, nvars, length, max_deg, |_| true)
}

/// Copy of `d` with component `n` replaced by the given variable images.
pub fn with_component(d: &HsDeriv, n: usize, images: &[Poly]) -> HsDeriv {
    let mut imgs: Vec<TruncSeries> = d.images().to_vec();
    for (v, s) in imgs.iter_mut().enumerate() {
        s.set_coeff(n, images[v].clone());
    }
    HsDeriv::from_images(imgs).expect("component replacement preserves the shape")
}

/// Extends `d` to length `n` and plants a random, typically non-logarithmic,
/// component at the new top order. Everything below stays untouched.
pub fn with_random_top(rng: &mut ChaCha8Rng, d: &HsDeriv, n: usize, max_deg: u32) -> HsDeriv {
    let padded = d.resized(n);
    let images: Vec<Poly> = (0..d.nvars())
        .map(|_| random_nonzero_poly(rng, d.modulus(), d.nvars(), max_deg, 2))
        .collect();
    with_component(&padded, n, &images)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The plane curve x^a − y^b over F_p as a Groebner-presented ideal.
pub fn curve_ideal(p: u64, a: u32, b: u32) -> IdealPresentation {
    let x = Poly::variable(p, 2, 0);
    let y = Poly::variable(p, 2, 1);
    groebner_basis(&[x.pow(a).sub(&y.pow(b))]).expect("principal ideal stays within budget")
}

/// Weights under which x^a − y^b is weighted homogeneous.
pub fn curve_weights(a: u32, b: u32) -> WeightVector {
    let g = gcd(a, b);
    WeightVector::new(vec![b / g, a / g])
}

/// The diagonal flow x_i ↦ x_i·(1 + c·μ)^{w_i}: logarithmic at every length
/// for any ideal generated by w-homogeneous polynomials.
pub fn diagonal_flow(p: u64, w: &WeightVector, c: u64, length: usize) -> HsDeriv {
    let nvars = w.len();
    let images = (0..nvars)
        .map(|v| {
            let mut unit = TruncSeries::constant(Poly::constant(fp(1, p), nvars), length);
            unit.set_coeff(1, Poly::constant(fp(c, p), nvars));
            unit.pow(w.0[v]).mul_poly(&Poly::variable(p, nvars, v))
        })
        .collect();
    HsDeriv::from_images(images).expect("diagonal images fix the variables")
}

/// Logarithmic integrals of length `m` over a weighted-homogeneous ideal:
/// one search per basis direction with weighted degree in `lo..=hi`, keeping
/// every direction that extends all the way.
pub fn log_pool(
    ideal: &IdealPresentation,
    w: &WeightVector,
    m: usize,
    lo: i64,
    hi: i64,
) -> Vec<HsDeriv> {
    let bounds = SearchBounds::default();
    let mut pool = Vec::new();
    for degree in lo..=hi {
        for delta in leapfinder::log_derivations(ideal, w, degree) {
            let policy = DegreePolicy::HomogeneousSlope(degree);
            if let Ok(Some(found)) =
                leapfinder::find_log_integral(&delta, m, ideal, w, policy, &bounds)
            {
                pool.push(found);
            }
        }
    }
    pool
}

/// Random composition of scaled pool members: logarithmic of the pool's
/// length by the subgroup property, and rarely trivial.
pub fn random_log_deriv(rng: &mut ChaCha8Rng, pool: &[HsDeriv], p: u64) -> HsDeriv {
    assert!(!pool.is_empty(), "need at least one logarithmic integral");
    let nvars = pool[0].nvars();
    let length = pool[0].length();
    let mut out = HsDeriv::identity(p, nvars, length);
    for _ in 0..rng.gen_range(1..=3) {
        let pick = &pool[rng.gen_range(0..pool.len())];
        let c = fp(rng.gen_range(1..p.max(2)), p);
        out = out
            .compose(&pick.scale_elem(c))
            .expect("pool members share the pool shape");
    }
    out
}

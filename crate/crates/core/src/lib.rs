//! Exact arithmetic for truncated higher derivations over small prime fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`zpfield`] — arithmetic in F_p (p prime, p < 2^16) and deterministic
//!   affine solving over F_p;
//! * [`digits`] — base-p digit combinatorics: digit sums, digital roots,
//!   Lucas binomials, and the small congruence systems used by the
//!   integration pipeline;
//! * [`poly`] — sparse multivariate polynomials over F_p, a line-oriented
//!   text grammar, weighted gradings, and Buchberger Groebner bases with
//!   normal forms;
//! * [`hsd`] — Hasse-Schmidt derivations of finite length, represented by
//!   the images of the ring variables under the associated truncated-series
//!   homomorphism, together with the group operations (composition,
//!   inversion) and the structural operations (scaling, truncation,
//!   stretching, padding, compression);
//! * [`bivariate`] — two-variable Hasse-Schmidt derivations supported on a
//!   weighted-bound co-ideal of exponent pairs, and the constructions that
//!   extract top components of a one-variable derivation through them;
//! * [`integrate`] — constructive procedures that extend logarithmic
//!   integrals of a derivation across an order where a leap could occur;
//! * [`leapfinder`] — linear-algebra search for logarithmic derivations and
//!   their integrals, dimension tables per integration order, and the scan
//!   that locates leap orders.

pub mod bivariate;
pub mod digits;
pub mod hsd;
pub mod integrate;
pub mod leapfinder;
pub mod poly;
pub mod zpfield;

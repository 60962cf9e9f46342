//! Certification that elliptic curves over Q admitting a rational cyclic
//! isogeny have surjective mod-p Galois representations for primes beyond
//! the isogeny range.
//!
//! A rational cyclic isogeny has prime degree r in {2, 3, 5, 7, 11, 13,
//! 17, 37}. The corresponding j-invariants with a chance of extra level
//! structure form a short explicit list: the integral points of the
//! genus-zero curves X_0(r) for r in {2, 3, 5, 7, 13}, plus the known
//! rational points of X_0(11), X_0(17) and X_0(37). This crate enumerates
//! that list exactly and certifies, prime by prime, that every non-CM
//! member has image all of GL2(F_p), using trace-of-Frobenius witnesses
//! that rule out each class of maximal subgroup. The witness criteria are
//! themselves validated by exhaustive subgroup enumeration at p = 5 and 7.
//!
//! Modules:
//! * [`arith`] - exact rationals, prime fields, sieves.
//! * [`curves`] - curve models, point counts, the Frobenius trace cache.
//! * [`modcurve`] - j-map polynomials, integral-point enumeration, CM table.
//! * [`galois`] - witness classification, certification, subgroup oracle.
//! * [`reduction`] - denominator criteria and the integrality upgrade.
//! * [`pipeline`] - candidate collection, full runs, report output.

pub mod arith;
pub mod curves;
pub mod error;
pub mod galois;
pub mod modcurve;
pub mod pipeline;
pub mod reduction;

pub use error::{Error, Result};

//! Modular-curve data for the prime-degree isogeny classification.
//!
//! For r in {2, 3, 5, 7, 13} the curve X_0(r) has genus zero and its j-map
//! is t -> f(t)/t for a monic integral f of degree r + 1; integral j-values
//! on it come exactly from integer t dividing f(0). For r in {11, 17, 37}
//! the curve has positive genus and rank-zero Jacobian, and its few
//! non-cuspidal rational points are hardcoded. The thirteen rational CM
//! j-invariants are kept here as well, to filter candidates before any
//! surjectivity certification.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Primes r for which X_0(r) has genus zero.
pub const GENUS_ZERO_DEGREES: [u64; 5] = [2, 3, 5, 7, 13];

/// Primes r for which X_0(r) has positive genus but still finitely many,
/// explicitly known, rational points.
pub const POSITIVE_GENUS_DEGREES: [u64; 3] = [11, 17, 37];

/// Numerator polynomial f(t) of the j-map on X_0(r), expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JMapPoly {
    r: u64,
    /// Coefficients in ascending degree order; monic of degree r + 1.
    coeffs: Vec<BigInt>,
}

// Expanded coefficients (ascending degree) of the factored forms:
//   r = 2:  (t + 16)^3
//   r = 3:  (t + 27)(t + 3)^3
//   r = 5:  (t^2 + 10t + 5)^3
//   r = 7:  (t^2 + 5t + 1)^3 (t^2 + 13t + 49)
//   r = 13: (t^4 + 7t^3 + 20t^2 + 19t + 1)^3 (t^2 + 5t + 13)
// A unit test re-expands the factored forms and compares.
const F2: [i64; 4] = [4096, 768, 48, 1];
const F3: [i64; 5] = [729, 756, 270, 36, 1];
const F5: [i64; 7] = [125, 750, 1575, 1300, 315, 30, 1];
const F7: [i64; 9] = [49, 748, 4018, 8624, 5915, 1904, 322, 28, 1];
const F13: [i64; 15] = [
    13, 746, 15145, 124852, 354536, 534820, 509366, 333580, 157118, 54340, 13832, 2548, 325, 26, 1,
];

impl JMapPoly {
    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.coeffs[0]
    }

    /// Coefficients in ascending degree order.
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Horner evaluation over the integers.
    pub fn eval_int(&self, t: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Horner evaluation over the rationals.
    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + BigRational::from(c.clone());
        }
        acc
    }
}

/// The j-map numerator for X_0(r); errors unless r is a genus-zero degree.
pub fn f_poly(r: u64) -> Result<JMapPoly> {
    let raw: &[i64] = match r {
        2 => &F2,
        3 => &F3,
        5 => &F5,
        7 => &F7,
        13 => &F13,
        _ => return Err(Error::NoGenusZeroJMap(r)),
    };
    let coeffs: Vec<BigInt> = raw.iter().map(|&c| BigInt::from(c)).collect();
    debug_assert_eq!(coeffs.len() as u64, r + 2);
    debug_assert!(coeffs.last().unwrap().is_one());
    debug_assert!(!coeffs[0].is_zero());
    Ok(JMapPoly { r, coeffs })
}

/// j-invariant of the point with coordinate t on X_0(r): f(t)/t.
/// t = 0 (like t = infinity) is a cusp and has no j-invariant.
pub fn j_map(r: u64, t: &BigRational) -> Result<BigRational> {
    if t.is_zero() {
        return Err(Error::Cusp);
    }
    let f = f_poly(r)?;
    Ok(f.eval(t) / t)
}

/// All integers t (of both signs) dividing f(0), ascending. These are the
/// only coordinates that can produce an integral j-invariant.
pub fn integral_t_candidates(r: u64) -> Result<Vec<BigInt>> {
    let f = f_poly(r)?;
    let c = f.constant_term().abs();
    let c: u64 = (&c).try_into().expect("constant terms are tiny");
    let mut divs: Vec<i64> = Vec::new();
    for d in 1..=c {
        if c.is_multiple_of(d) {
            divs.push(d as i64);
            divs.push(-(d as i64));
        }
    }
    divs.sort_unstable();
    Ok(divs.into_iter().map(BigInt::from).collect())
}

/// The set of integral j-invariants attained on X_0(r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralJSet {
    pub r: u64,
    /// Sorted ascending, deduplicated.
    pub values: Vec<BigInt>,
}

/// Evaluates f(t)/t over every integral candidate t and collects the
/// (sorted, deduplicated) integer values. Integrality of each quotient is
/// guaranteed: f is monic, so t | f(t) - f(0), and t | f(0) by choice of t.
pub fn enumerate_integral_j(r: u64) -> Result<IntegralJSet> {
    let f = f_poly(r)?;
    let mut values: Vec<BigInt> = Vec::new();
    for t in integral_t_candidates(r)? {
        let ft = f.eval_int(&t);
        let (q, rem) = num_integer::div_rem(ft, t.clone());
        assert!(rem.is_zero(), "monic f must give t | f(t) for t | f(0)");
        values.push(q);
    }
    values.sort();
    values.dedup();
    Ok(IntegralJSet { r, values })
}

fn pow3(base: i64) -> BigInt {
    BigInt::from(base).pow(3)
}

/// The complete j-invariant lists for the positive-genus degrees, from the
/// known rational points of X_0(11), X_0(17) and X_0(37).
pub fn known_sets() -> BTreeMap<u64, Vec<BigRational>> {
    let int = |n: BigInt| BigRational::from(n);
    let mut m = BTreeMap::new();
    m.insert(
        11,
        vec![
            int(-11 * pow3(131)),
            int(BigInt::from(-(1i64 << 15))),
            int(BigInt::from(-121)),
        ],
    );
    m.insert(
        17,
        vec![
            BigRational::new(-17 * 17 * pow3(101), BigInt::from(2)),
            BigRational::new(-17 * pow3(373), BigInt::from(2).pow(17)),
        ],
    );
    m.insert(
        37,
        vec![int(-7 * pow3(137) * pow3(2083)), int(-7 * pow3(11))],
    );
    m
}

/// The thirteen j-invariants of elliptic curves over Q with complex
/// multiplication (one per imaginary quadratic order of class number one).
pub fn cm_j_invariants() -> &'static [BigInt; 13] {
    static TABLE: OnceLock<[BigInt; 13]> = OnceLock::new();
    TABLE.get_or_init(|| {
        [
            BigInt::from(0),
            BigInt::from(1728),
            BigInt::from(-3375),
            BigInt::from(8000),
            BigInt::from(54000),
            BigInt::from(287496),
            BigInt::from(-32768),
            BigInt::from(16581375),
            BigInt::from(-884736),
            BigInt::from(-12288000),
            BigInt::from(-884736000),
            BigInt::from(-147197952000i64),
            BigInt::from(-262537412640768000i64),
        ]
    })
}

/// Whether j is one of the thirteen rational CM j-invariants.
pub fn is_cm(j: &BigRational) -> bool {
    j.is_integer() && cm_j_invariants().contains(j.numer())
}

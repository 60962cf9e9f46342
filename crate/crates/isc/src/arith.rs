//! Exact integer/rational arithmetic and prime-field primitives.
//!
//! j-invariants live in `BigRational` (arbitrary precision, always in lowest
//! terms with positive denominator); everything inside a mod-l inner loop is
//! a machine-word [`FpElem`] with `u128` intermediates, which is exact for
//! any modulus below 2^63.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// An element of the prime field F_l, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpElem {
    residue: u64,
    modulus: u64,
}

// Named methods instead of operator traits: division is fallible, and a
// uniform fallible surface beats a half-operator one.
#[allow(clippy::should_implement_trait)]
impl FpElem {
    /// Reduces `value` into F_l. The modulus must be prime; this is the
    /// caller's obligation and is not re-proved on every construction.
    pub fn new(value: u64, modulus: u64) -> Self {
        debug_assert!(modulus >= 2);
        FpElem {
            residue: value % modulus,
            modulus,
        }
    }

    /// Reduces a signed value (e.g. a Frobenius trace) into F_l.
    pub fn from_i64(value: i64, modulus: u64) -> Self {
        let m = modulus as i64;
        FpElem::new(value.rem_euclid(m) as u64, modulus)
    }

    pub fn from_bigint(value: &BigInt, modulus: u64) -> Self {
        let m = BigInt::from(modulus);
        let r = value.mod_floor(&m);
        FpElem::new(r.try_into().expect("mod_floor result fits u64"), modulus)
    }

    pub fn residue(self) -> u64 {
        self.residue
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.residue == 0
    }

    fn check_same(self, other: FpElem) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::MixedModuli(self.modulus, other.modulus))
        }
    }

    pub fn add(self, other: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, other.modulus);
        let mut r = self.residue + other.residue; // < 2^64 needs modulus < 2^63
        if r >= self.modulus {
            r -= self.modulus;
        }
        FpElem {
            residue: r,
            modulus: self.modulus,
        }
    }

    pub fn sub(self, other: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, other.modulus);
        let r = if self.residue >= other.residue {
            self.residue - other.residue
        } else {
            self.residue + self.modulus - other.residue
        };
        FpElem {
            residue: r,
            modulus: self.modulus,
        }
    }

    pub fn mul(self, other: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, other.modulus);
        FpElem {
            residue: mul_mod(self.residue, other.residue, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn pow(self, mut exp: u64) -> FpElem {
        let mut base = self;
        let mut acc = FpElem::new(1 % self.modulus, self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            exp >>= 1;
        }
        acc
    }

    /// `self / other`; errors when `other` is zero.
    pub fn div(self, other: FpElem) -> Result<FpElem> {
        self.check_same(other)?;
        Ok(self.mul(mod_inverse(other)?))
    }
}

impl std::fmt::Display for FpElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, exp: u64, m: u64) -> u64 {
    FpElem::new(base, m).pow(exp).residue()
}

/// Legendre symbol of `a` over its (odd prime) modulus, by Euler's criterion.
///
/// Returns 0 iff a = 0, +1 iff a is a nonzero square, -1 otherwise.
pub fn legendre_symbol(a: FpElem) -> Result<i32> {
    let l = a.modulus();
    if l == 2 {
        return Err(Error::EvenModulus);
    }
    if a.is_zero() {
        return Ok(0);
    }
    let e = a.pow((l - 1) / 2).residue();
    Ok(if e == 1 { 1 } else { -1 })
}

/// Multiplicative inverse in F_l via the extended Euclidean algorithm.
pub fn mod_inverse(a: FpElem) -> Result<FpElem> {
    if a.is_zero() {
        return Err(Error::NotInvertible {
            residue: a.residue(),
            modulus: a.modulus(),
        });
    }
    let m = a.modulus() as i128;
    let (mut old_r, mut r) = (a.residue() as i128, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "modulus must be prime");
    Ok(FpElem::new(old_s.rem_euclid(m) as u64, a.modulus()))
}

/// Square root in F_l by Tonelli–Shanks, fully deterministic (the needed
/// non-residue is the smallest one). Returns the root in [0, l/2] when one
/// exists.
pub fn sqrt_mod(a: FpElem) -> Option<u64> {
    let l = a.modulus();
    debug_assert!(l % 2 == 1);
    if a.is_zero() {
        return Some(0);
    }
    if legendre_symbol(a).ok()? != 1 {
        return None;
    }
    let root = if l % 4 == 3 {
        a.pow((l + 1) / 4).residue()
    } else {
        // Write l - 1 = q * 2^s with q odd.
        let mut q = l - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = (2..l)
            .find(|&z| matches!(legendre_symbol(FpElem::new(z, l)), Ok(-1)))
            .expect("every odd prime field has a non-residue");
        let mut c = FpElem::new(z, l).pow(q);
        let mut t = a.pow(q);
        let mut r = a.pow(q.div_ceil(2));
        let mut m = s;
        while t.residue() != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2.residue() != 1 {
                t2 = t2.mul(t2);
                i += 1;
            }
            let b = c.pow(1 << (m - i - 1));
            r = r.mul(b);
            c = b.mul(b);
            t = t.mul(c);
            m = i;
        }
        r.residue()
    };
    Some(root.min(l - root))
}

/// All primes <= `bound`, ascending, by the sieve of Eratosthenes.
/// Returns the empty list for bound < 2.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

/// Reduces an exact rational into F_l as num * den^{-1}.
/// Errors when l divides the denominator.
pub fn reduce_rational_mod(x: &BigRational, l: u64) -> Result<FpElem> {
    let den = FpElem::from_bigint(x.denom(), l);
    if den.is_zero() {
        return Err(Error::BadReductionPrime {
            prime: l,
            value: canonical_rational_string(x),
        });
    }
    let num = FpElem::from_bigint(x.numer(), l);
    num.div(den)
}

/// Canonical `numerator/denominator` form, also used as the trace-cache key.
pub fn canonical_rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `<num>` or `<num>/<den>` into an exact rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidRational {
        literal: s.to_string(),
    };
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_str.trim().parse().map_err(|_| bad())?;
    let den: BigInt = den_str.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Floor of the square root, exact for all u64.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

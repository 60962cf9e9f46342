//! Arithmetic reduction criteria tying denominators of j to the shape of
//! the mod-p image.
//!
//! A prime l divides the denominator of j(E) exactly when E has
//! potentially multiplicative reduction at l. If the mod-p image lies in
//! the normaliser of a non-split Cartan, such an l must satisfy
//! l^2 = 1 (mod p) (and l = p is outright impossible for p >= 5), which
//! upgrades "j integral away from p" to "j integral". This module encodes
//! that decision procedure; the deep inputs behind it are assumptions,
//! not computations.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::curves::small_primes;
use crate::error::{Error, Result};

/// The prime degrees a rational cyclic isogeny can have (non-CM curves):
/// the genus-zero degrees {2, 3, 5, 7, 13} and the rank-zero degrees
/// {11, 17, 37}.
pub fn mazur_isogeny_degrees() -> [u64; 8] {
    [2, 3, 5, 7, 11, 13, 17, 37]
}

/// Denominator structure of a j-invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionProfile {
    pub j: BigRational,
    /// Primes of potentially multiplicative reduction.
    pub denominator_primes: BTreeSet<u64>,
    pub is_integral: bool,
    /// Set when the denominator is a power of this single prime.
    pub integral_away_from: Option<u64>,
}

impl ReductionProfile {
    pub fn compute(j: &BigRational) -> Result<ReductionProfile> {
        let primes = denominator_primes(j)?;
        Ok(ReductionProfile {
            j: j.clone(),
            is_integral: primes.is_empty(),
            integral_away_from: if primes.len() == 1 {
                primes.iter().next().copied()
            } else {
                None
            },
            denominator_primes: primes,
        })
    }
}

/// Prime factors of the denominator of j, by trial division. Denominators
/// in scope are smooth; an unfactored cofactor above 10^12 is refused
/// rather than guessed at.
pub fn denominator_primes(j: &BigRational) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    let mut n = j.denom().abs();
    if n.is_one() {
        return Ok(out);
    }
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > n {
            break;
        }
        if (&n % p).is_zero() {
            out.insert(p);
            while (&n % p).is_zero() {
                n /= p;
            }
        }
    }
    if !n.is_one() {
        // Either the loop broke with p^2 > n (then n is prime and below
        // 10^12), or the sieve ran out and n is an unfactored rough part.
        if n > BigInt::from(1_000_000_000_000u64) {
            return Err(Error::DenominatorNotSmooth(n.to_string()));
        }
        out.insert((&n).try_into().expect("below 10^12"));
    }
    Ok(out)
}

/// Whether potentially multiplicative reduction at l is compatible with a
/// mod-p image inside the normaliser of a non-split Cartan: for l != p
/// this means l = +-1 (mod p); for l = p it is impossible once p >= 5.
pub fn ns_compatible(l: u64, p: u64) -> Result<bool> {
    if p < 5 {
        return Err(Error::CriterionPrimeTooSmall(p));
    }
    if l == p {
        return Ok(false);
    }
    let r = l % p;
    Ok(r == 1 || r == p - 1)
}

/// Outcome of the integrality decision procedure at (j, p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralityVerdict {
    /// The denominator is trivial; nothing to upgrade.
    IntegralAlready,
    /// Kept for interface completeness but never produced: a denominator
    /// that is a pure p-power contradicts the non-split Cartan hypothesis
    /// outright (potentially good reduction at p is forced), so such cases
    /// surface as `IncompatibleWithNns` instead of silently upgrading.
    UpgradedToIntegral,
    /// The denominator has primes other than p, all of them = +-1 mod p;
    /// j is outside Z[1/p] and this criterion alone decides nothing.
    NotInZ1OverP,
    /// Some denominator prime violates the compatibility criterion: the
    /// mod-p image cannot lie in the normaliser of a non-split Cartan.
    IncompatibleWithNns,
}

/// Decision procedure for the integrality upgrade at p. Valid only for
/// primes p >= 5 outside the genus-zero set {2, 3, 5, 7, 13}.
pub fn integrality_upgrade(j: &BigRational, p: u64) -> Result<IntegralityVerdict> {
    if matches!(p, 2 | 3 | 5 | 7 | 13) {
        return Err(Error::UpgradePrimeExcluded(p));
    }
    if p < 5 {
        return Err(Error::CriterionPrimeTooSmall(p));
    }
    if j.denom().is_one() {
        return Ok(IntegralityVerdict::IntegralAlready);
    }
    let primes = denominator_primes(j)?;
    for &l in &primes {
        if l != p && !ns_compatible(l, p)? {
            return Ok(IntegralityVerdict::IncompatibleWithNns);
        }
    }
    if primes.len() == 1 && primes.contains(&p) {
        // Potentially multiplicative at p itself: ns_compatible(p, p) is
        // false for p >= 5, so the non-split Cartan hypothesis fails.
        return Ok(IntegralityVerdict::IncompatibleWithNns);
    }
    Ok(IntegralityVerdict::NotInZ1OverP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_rational, primes_up_to};

    #[test]
    fn mazur_list() {
        let degrees = mazur_isogeny_degrees();
        assert_eq!(degrees.len(), 8);
        assert!(degrees.contains(&37));
        assert!(!degrees.contains(&19));
        let genus_zero: Vec<u64> = degrees
            .iter()
            .copied()
            .filter(|r| crate::modcurve::GENUS_ZERO_DEGREES.contains(r))
            .collect();
        let positive: Vec<u64> = degrees
            .iter()
            .copied()
            .filter(|r| crate::modcurve::POSITIVE_GENUS_DEGREES.contains(r))
            .collect();
        assert_eq!(genus_zero.len() + positive.len(), 8);
    }

    #[test]
    fn denominator_prime_examples() {
        let j = parse_rational("4913").unwrap();
        assert!(denominator_primes(&j).unwrap().is_empty());
        let j = parse_rational("-882216989/131072").unwrap();
        assert_eq!(denominator_primes(&j).unwrap(), BTreeSet::from([2]));
        let j = parse_rational("1/15").unwrap();
        assert_eq!(denominator_primes(&j).unwrap(), BTreeSet::from([3, 5]));
    }

    #[test]
    fn profile_shapes() {
        let p = ReductionProfile::compute(&parse_rational("1/8").unwrap()).unwrap();
        assert!(!p.is_integral);
        assert_eq!(p.integral_away_from, Some(2));
        let p = ReductionProfile::compute(&parse_rational("1/15").unwrap()).unwrap();
        assert_eq!(p.integral_away_from, None);
        let p = ReductionProfile::compute(&parse_rational("-121").unwrap()).unwrap();
        assert!(p.is_integral);
    }

    #[test]
    fn ns_compatible_examples() {
        assert!(!ns_compatible(2, 41).unwrap());
        assert!(ns_compatible(13, 7).unwrap());
        assert!(!ns_compatible(41, 41).unwrap());
        assert!(matches!(
            ns_compatible(2, 3),
            Err(Error::CriterionPrimeTooSmall(3))
        ));
    }

    #[test]
    fn ns_compatible_is_square_criterion() {
        // l^2 = 1 (mod p) is exactly the definition, for all l != p.
        for p in primes_up_to(100).into_iter().filter(|&p| p >= 5) {
            for l in primes_up_to(100) {
                if l == p {
                    continue;
                }
                assert_eq!(
                    ns_compatible(l, p).unwrap(),
                    l * l % p == 1,
                    "l = {l}, p = {p}"
                );
            }
        }
    }

    #[test]
    fn upgrade_examples() {
        let j = parse_rational("4913").unwrap();
        assert_eq!(
            integrality_upgrade(&j, 41).unwrap(),
            IntegralityVerdict::IntegralAlready
        );
        let j = parse_rational("-882216989/131072").unwrap();
        assert_eq!(
            integrality_upgrade(&j, 41).unwrap(),
            IntegralityVerdict::IncompatibleWithNns
        );
        let j = parse_rational("1/3").unwrap();
        assert_eq!(
            integrality_upgrade(&j, 41).unwrap(),
            IntegralityVerdict::IncompatibleWithNns
        );
    }

    #[test]
    fn upgrade_p_power_and_mixed_denominators() {
        // Pure p-power denominator: incompatible via the l = p case.
        let j = parse_rational("5/11").unwrap();
        assert_eq!(
            integrality_upgrade(&j, 11).unwrap(),
            IntegralityVerdict::IncompatibleWithNns
        );
        // 23 = +1 mod 11: compatible denominator prime, not integral.
        let j = parse_rational("1/23").unwrap();
        assert_eq!(
            integrality_upgrade(&j, 11).unwrap(),
            IntegralityVerdict::NotInZ1OverP
        );
        // Mixed p-power and compatible primes.
        let j = parse_rational("1/253").unwrap(); // 11 * 23
        assert_eq!(
            integrality_upgrade(&j, 11).unwrap(),
            IntegralityVerdict::NotInZ1OverP
        );
    }

    #[test]
    fn enumerated_integral_sets_are_integral_already() {
        for r in crate::modcurve::GENUS_ZERO_DEGREES {
            for v in crate::modcurve::enumerate_integral_j(r).unwrap().values {
                let j = num_rational::BigRational::from(v);
                assert!(denominator_primes(&j).unwrap().is_empty());
                for p in [11u64, 17, 41, 499] {
                    assert_eq!(
                        integrality_upgrade(&j, p).unwrap(),
                        IntegralityVerdict::IntegralAlready,
                        "j = {j}, p = {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn upgrade_rejects_excluded_primes() {
        let j = parse_rational("1/2").unwrap();
        assert!(matches!(
            integrality_upgrade(&j, 13),
            Err(Error::UpgradePrimeExcluded(13))
        ));
        assert!(matches!(
            integrality_upgrade(&j, 2),
            Err(Error::UpgradePrimeExcluded(2))
        ));
    }
}

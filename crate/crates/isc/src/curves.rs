//! Curve models attached to j-invariants, their reductions mod l, and
//! Frobenius traces a_l = l + 1 - #E(F_l) with a persistent cache.
//!
//! Any two curves over Q with the same non-CM j-invariant are quadratic
//! twists of one another, and every predicate consumed downstream is
//! twist-invariant, so one fixed model per j suffices: a = -3j(j - 1728),
//! b = -2j(j - 1728)^2 (with the degenerate j = 0 and j = 1728 handled
//! separately). Primes where that model's reduction could be singular or
//! model-dependent are skipped rather than repaired.

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    canonical_rational_string, isqrt, mul_mod, reduce_rational_mod, sqrt_mod, FpElem,
};
use crate::error::{Error, Result};

/// Default crossover from Legendre-sum counting to BSGS order computation.
pub const DEFAULT_BSGS_THRESHOLD: u64 = 4096;

/// A short Weierstrass model y^2 = x^3 + ax + b over Q with a fixed
/// j-invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModel {
    j: BigRational,
    a: BigRational,
    b: BigRational,
}

impl CurveModel {
    /// Builds the standard model with the given j-invariant.
    pub fn from_j(j: BigRational) -> CurveModel {
        let (a, b) = if j.is_zero() {
            (BigRational::zero(), BigRational::one())
        } else if j == BigRational::from(BigInt::from(1728)) {
            (BigRational::one(), BigRational::zero())
        } else {
            let shifted = &j - BigRational::from(BigInt::from(1728));
            let a = -BigRational::from(BigInt::from(3)) * &j * &shifted;
            let b = -BigRational::from(BigInt::from(2)) * &j * &shifted * &shifted;
            (a, b)
        };
        let model = CurveModel { j, a, b };
        debug_assert!(model.j_invariant_consistent());
        model
    }

    pub fn j(&self) -> &BigRational {
        &self.j
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Canonical cache key for this model's j-invariant.
    pub fn j_id(&self) -> String {
        canonical_rational_string(&self.j)
    }

    /// Symbolic check that 1728 * 4a^3 / (4a^3 + 27b^2) equals the stored j.
    pub fn j_invariant_consistent(&self) -> bool {
        let four_a3 = BigRational::from(BigInt::from(4)) * self.a.clone().pow(3);
        let disc = &four_a3 + BigRational::from(BigInt::from(27)) * self.b.clone().pow(2);
        if disc.is_zero() {
            return false;
        }
        BigRational::from(BigInt::from(1728)) * four_a3 / disc == self.j
    }

    /// Whether l divides 6 * den(j) * num(j) * num(j - 1728), i.e. whether
    /// the reduction of this model at l is unreliable. Decided by exact
    /// divisibility, so it is sound for arbitrary j and any scan bound.
    pub fn is_skip_prime(&self, l: u64) -> bool {
        if l == 2 || l == 3 {
            return true;
        }
        let divides = |n: &BigInt| !n.is_zero() && (n % l).is_zero();
        if divides(self.j.denom()) || divides(self.j.numer()) {
            return true;
        }
        let shifted_num = (&self.j - BigRational::from(BigInt::from(1728)))
            .numer()
            .clone();
        divides(&shifted_num)
    }

    /// The full set of primes dividing 6 * den(j) * num(j) * num(j - 1728).
    /// Witness scans never draw from these.
    pub fn skip_primes(&self) -> BTreeSet<BigInt> {
        let mut out = BTreeSet::new();
        out.insert(BigInt::from(2));
        out.insert(BigInt::from(3));
        let shifted = &self.j - BigRational::from(BigInt::from(1728));
        for part in [self.j.denom(), self.j.numer(), shifted.numer()] {
            if !part.is_zero() {
                out.extend(prime_divisors(part));
            }
        }
        out
    }

    /// Reduces the model mod l. Errors on skipped primes; the result is
    /// guaranteed nonsingular away from them.
    pub fn reduce(&self, l: u64) -> Result<ReducedCurve> {
        if self.is_skip_prime(l) {
            return Err(Error::SkippedPrime {
                prime: l,
                j: self.j_id(),
            });
        }
        let a = reduce_rational_mod(&self.a, l)?;
        let b = reduce_rational_mod(&self.b, l)?;
        ReducedCurve::new(l, a.residue(), b.residue())
    }
}

/// y^2 = x^3 + ax + b over F_l, nonsingular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    l: u64,
    a: u64,
    b: u64,
}

impl ReducedCurve {
    pub fn new(l: u64, a: u64, b: u64) -> Result<ReducedCurve> {
        let a = a % l;
        let b = b % l;
        let a3 = mul_mod(mul_mod(a, a, l), a, l);
        let b2 = mul_mod(b, b, l);
        let disc = (mul_mod(4 % l, a3, l) + mul_mod(27 % l, b2, l)) % l;
        if disc == 0 {
            return Err(Error::SingularReduction(l));
        }
        Ok(ReducedCurve { l, a, b })
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    fn rhs(&self, x: u64) -> u64 {
        let x2 = mul_mod(x, x, self.l);
        let x3 = mul_mod(x2, x, self.l);
        (x3 + mul_mod(self.a, x, self.l) + self.b) % self.l
    }

    /// The quadratic twist by d (a non-residue mod l for a proper twist).
    pub fn twist(&self, d: u64) -> Result<ReducedCurve> {
        let l = self.l;
        let d2 = mul_mod(d, d, l);
        let d3 = mul_mod(d2, d, l);
        ReducedCurve::new(l, mul_mod(self.a, d2, l), mul_mod(self.b, d3, l))
    }
}

/// #E(F_l) by brute enumeration of all (x, y) pairs, plus infinity.
/// The designated independent oracle; refuses l > 10^4.
pub fn count_points_naive(c: &ReducedCurve) -> Result<u64> {
    if c.l > 10_000 {
        return Err(Error::OracleBoundExceeded(c.l));
    }
    let mut count = 1u64; // infinity
    for x in 0..c.l {
        let rhs = c.rhs(x);
        for y in 0..c.l {
            if mul_mod(y, y, c.l) == rhs {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// #E(F_l) as l + 1 + sum over x of chi(x^3 + ax + b), with chi the
/// quadratic character mod l. Requires odd l.
pub fn count_points_legendre(c: &ReducedCurve) -> Result<u64> {
    let l = c.l;
    if l == 2 {
        return Err(Error::LegendreCountEvenPrime);
    }
    // Square table instead of per-x Euler exponentiation.
    let mut is_square = vec![false; l as usize];
    for y in 0..=(l / 2) {
        is_square[mul_mod(y, y, l) as usize] = true;
    }
    // x^3 + ax + b evaluated by finite differences: only additions mod l.
    let mut f = c.b % l;
    let mut d1 = (1 + c.a) % l;
    let mut d2 = 6 % l;
    let d3 = 6 % l;
    let mut sum: i64 = 0;
    for _ in 0..l {
        if f != 0 {
            sum += if is_square[f as usize] { 1 } else { -1 };
        }
        f = (f + d1) % l;
        d1 = (d1 + d2) % l;
        d2 = (d2 + d3) % l;
    }
    Ok((l as i64 + 1 + sum) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Point {
    Infinity,
    Affine(u64, u64),
}

fn ec_add(c: &ReducedCurve, p: Point, q: Point) -> Point {
    let l = c.l;
    let (x1, y1) = match p {
        Point::Infinity => return q,
        Point::Affine(x, y) => (x, y),
    };
    let (x2, y2) = match q {
        Point::Infinity => return p,
        Point::Affine(x, y) => (x, y),
    };
    let slope = if x1 == x2 {
        if (y1 + y2) % l == 0 {
            return Point::Infinity;
        }
        // Tangent: (3x^2 + a) / 2y.
        let num = (mul_mod(3, mul_mod(x1, x1, l), l) + c.a) % l;
        let den = mul_mod(2, y1, l);
        FpElem::new(num, l)
            .div(FpElem::new(den, l))
            .expect("2y != 0 here")
    } else {
        let num = (y2 + l - y1) % l;
        let den = (x2 + l - x1) % l;
        FpElem::new(num, l)
            .div(FpElem::new(den, l))
            .expect("x2 != x1 here")
    };
    let s = slope.residue();
    let x3 = (mul_mod(s, s, l) + 2 * l - x1 - x2) % l;
    let y3 = (mul_mod(s, (x1 + l - x3) % l, l) + l - y1) % l;
    Point::Affine(x3, y3)
}

fn ec_mul(c: &ReducedCurve, mut k: u64, p: Point) -> Point {
    let mut acc = Point::Infinity;
    let mut base = p;
    while k > 0 {
        if k & 1 == 1 {
            acc = ec_add(c, acc, base);
        }
        base = ec_add(c, base, base);
        k >>= 1;
    }
    acc
}

/// All m in [lo, hi] with m * p = O, by baby-step giant-step. Every
/// returned value is verified by a direct scalar multiplication.
fn annihilators_in_interval(c: &ReducedCurve, p: Point, lo: u64, hi: u64) -> BTreeSet<u64> {
    let l = c.l;
    let width = hi - lo + 1;
    let stride = isqrt(width - 1) + 1;

    // Baby steps j*p for 0 <= j < stride, keyed by x-coordinate.
    let mut baby: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
    let mut cur = Point::Infinity;
    let mut point_order: Option<u64> = None;
    for j in 0..stride {
        match cur {
            Point::Infinity => {
                if j > 0 {
                    point_order = Some(j);
                    break;
                }
            }
            Point::Affine(x, y) => baby.entry(x).or_default().push((y, j)),
        }
        cur = ec_add(c, cur, p);
    }

    let mut out = BTreeSet::new();
    if let Some(d) = point_order {
        // p has tiny order d: the annihilators are just the multiples of d.
        let first = lo.div_ceil(d) * d;
        let mut m = first;
        while m <= hi {
            out.insert(m);
            m += d;
        }
        return out;
    }

    let giant = ec_mul(c, stride, p);
    let mut q = ec_mul(c, lo, p);
    let verify = |m: u64, out: &mut BTreeSet<u64>| {
        if (lo..=hi).contains(&m) && ec_mul(c, m, p) == Point::Infinity {
            out.insert(m);
        }
    };
    let mut base = lo;
    while base <= hi + stride {
        match q {
            Point::Infinity => verify(base, &mut out),
            Point::Affine(x, y) => {
                if let Some(list) = baby.get(&x) {
                    for &(yj, j) in list {
                        if yj == y {
                            // q = j*p, so (base - j) p = O.
                            if base >= j {
                                verify(base - j, &mut out);
                            }
                        }
                        if (l - yj) % l == y {
                            verify(base + j, &mut out);
                        }
                    }
                }
            }
        }
        q = ec_add(c, q, giant);
        base += stride;
    }
    out
}

/// Group order by BSGS inside the Hasse interval, pinning the order down
/// with successive points. Returns None when the retry budget is exhausted
/// with the order still ambiguous (the caller falls back to the
/// Legendre-sum count).
pub fn bsgs_group_order(c: &ReducedCurve) -> Option<u64> {
    let l = c.l;
    let half_width = isqrt(4 * l);
    let lo = l + 1 - half_width;
    let hi = l + 1 + half_width;
    let mut candidates: Option<BTreeSet<u64>> = None;
    let mut points_used = 0;
    for x in 0..l {
        if points_used >= 8 {
            break;
        }
        let rhs = c.rhs(x);
        if rhs == 0 {
            continue;
        }
        let y = match sqrt_mod(FpElem::new(rhs, l)) {
            Some(y) => y,
            None => continue,
        };
        let ann = annihilators_in_interval(c, Point::Affine(x, y), lo, hi);
        debug_assert!(!ann.is_empty(), "the true order annihilates every point");
        points_used += 1;
        let merged = match candidates.take() {
            None => ann,
            Some(prev) => prev.intersection(&ann).copied().collect(),
        };
        if merged.len() == 1 {
            return merged.into_iter().next();
        }
        candidates = Some(merged);
    }
    None
}

/// A cached Frobenius trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub j_id: String,
    pub l: u64,
    pub a_l: i64,
}

fn hasse_ok(l: u64, a: i64) -> bool {
    (a as i128) * (a as i128) <= 4 * l as i128
}

/// Persistent trace cache: append-only text, one `<j_id> <l> <a_l>` record
/// per line. All writes go through this single handle; the Hasse bound is
/// enforced both when loading and when recording.
pub struct TraceCache {
    map: HashMap<(String, u64), i64>,
    writer: Option<BufWriter<File>>,
    path: Option<PathBuf>,
    bsgs_threshold: u64,
}

impl TraceCache {
    /// Opens (or creates) a cache file and loads every record.
    pub fn open(path: &Path, bsgs_threshold: u64) -> Result<TraceCache> {
        let io_err = |source| Error::CacheIo {
            path: path.to_path_buf(),
            source,
        };
        let mut map = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(io_err)?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(io_err)?;
                if line.trim().is_empty() {
                    continue;
                }
                let corrupt = |reason: &str| Error::CorruptTraceCache {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: reason.to_string(),
                };
                let mut parts = line.split_whitespace();
                let j_id = parts.next().ok_or_else(|| corrupt("missing j_id"))?;
                let l: u64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| corrupt("bad prime field"))?;
                let a: i64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| corrupt("bad trace field"))?;
                if parts.next().is_some() {
                    return Err(corrupt("trailing fields"));
                }
                if !hasse_ok(l, a) {
                    return Err(corrupt("Hasse bound violated"));
                }
                map.insert((j_id.to_string(), l), a);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err)?;
        Ok(TraceCache {
            map,
            writer: Some(BufWriter::new(file)),
            path: Some(path.to_path_buf()),
            bsgs_threshold,
        })
    }

    /// A purely in-memory cache (tests, one-shot queries).
    pub fn in_memory(bsgs_threshold: u64) -> TraceCache {
        TraceCache {
            map: HashMap::new(),
            writer: None,
            path: None,
            bsgs_threshold,
        }
    }

    pub fn bsgs_threshold(&self) -> u64 {
        self.bsgs_threshold
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, j_id: &str, l: u64) -> Option<i64> {
        self.map.get(&(j_id.to_string(), l)).copied()
    }

    /// Every cached record, in (j_id, l) order. This is the view a
    /// third-party checker needs to re-derive the witnesses in a report.
    pub fn records(&self) -> Vec<TraceRecord> {
        let mut out: Vec<TraceRecord> = self
            .map
            .iter()
            .map(|((j_id, l), &a_l)| TraceRecord {
                j_id: j_id.clone(),
                l: *l,
                a_l,
            })
            .collect();
        out.sort_by(|x, y| (&x.j_id, x.l).cmp(&(&y.j_id, y.l)));
        out
    }

    fn record(&mut self, j_id: &str, l: u64, a: i64) -> Result<()> {
        assert!(hasse_ok(l, a), "refusing to record a trace outside Hasse");
        if self.map.insert((j_id.to_string(), l), a).is_none() {
            if let Some(w) = self.writer.as_mut() {
                writeln!(w, "{j_id} {l} {a}").map_err(|source| Error::CacheIo {
                    path: self.path.clone().unwrap_or_default(),
                    source,
                })?;
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        if let Some(w) = self.writer.as_mut() {
            w.flush().map_err(|source| Error::CacheIo {
                path: self.path.clone().unwrap_or_default(),
                source,
            })?;
        }
        Ok(())
    }
}

impl Drop for TraceCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}

/// Frobenius trace a_l = l + 1 - #E(F_l) for the model, through the cache.
///
/// Below the cache's BSGS threshold the count is a Legendre sum; above it,
/// BSGS over the Hasse interval with Legendre as the fallback when the
/// order stays ambiguous.
pub fn trace_of_frobenius(m: &CurveModel, l: u64, cache: &mut TraceCache) -> Result<i64> {
    if m.is_skip_prime(l) {
        return Err(Error::SkippedPrime {
            prime: l,
            j: m.j_id(),
        });
    }
    let j_id = m.j_id();
    if let Some(a) = cache.get(&j_id, l) {
        return Ok(a);
    }
    let curve = m.reduce(l)?;
    let n = if l >= cache.bsgs_threshold {
        match bsgs_group_order(&curve) {
            Some(n) => n,
            None => count_points_legendre(&curve)?,
        }
    } else {
        count_points_legendre(&curve)?
    };
    let a = (l as i64 + 1) - n as i64;
    cache.record(&j_id, l, a)?;
    Ok(a)
}

/// Primes up to 10^6, shared by the trial-division factorizers.
pub(crate) fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| crate::arith::primes_up_to(1_000_000))
}

/// Complete prime factor set of |n|. Trial division covers everything in
/// the pipeline's range; a deterministic Miller-Rabin plus Brent's rho
/// keep the function total on outsized CLI inputs.
fn prime_divisors(n: &BigInt) -> BTreeSet<BigInt> {
    let mut out = BTreeSet::new();
    let mut m = n.abs();
    if m <= BigInt::one() {
        return out;
    }
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        if (&m % p).is_zero() {
            out.insert(pb);
            while (&m % p).is_zero() {
                m /= p;
            }
        }
    }
    if m > BigInt::one() {
        factor_rough(m, &mut out);
    }
    out
}

/// Factors a cofactor with no prime divisor below 10^6.
fn factor_rough(m: BigInt, out: &mut BTreeSet<BigInt>) {
    if is_prime_mr(&m) {
        out.insert(m);
        return;
    }
    let d = brent_rho(&m);
    factor_rough(m / &d, out);
    factor_rough(d, out);
}

/// Miller-Rabin with the fixed witness set {2, ..., 37}: deterministic,
/// and a proven primality test for n < 3.3 * 10^24.
fn is_prime_mr(n: &BigInt) -> bool {
    let two = BigInt::from(2);
    if n < &two {
        return false;
    }
    for w in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == &BigInt::from(w) {
            return true;
        }
        if (n % w).is_zero() {
            return false;
        }
    }
    let n_minus_1: BigInt = n - 1u32;
    let mut d = n_minus_1.clone();
    let mut s = 0u32;
    while (&d % 2u32).is_zero() {
        d /= 2;
        s += 1;
    }
    'witness: for w in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho with a deterministic parameter sweep.
/// Preconditions: m composite, odd, no factor below 10^6.
fn brent_rho(m: &BigInt) -> BigInt {
    let one = BigInt::one();
    for c in 1u64.. {
        let f = |x: &BigInt| (x * x + c) % m;
        let mut x = BigInt::from(2);
        let mut y = x.clone();
        let mut d = one.clone();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(m);
        }
        if &d != m {
            return d;
        }
    }
    unreachable!("parameter sweep terminates for composite m")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{legendre_symbol, parse_rational};

    fn model(j: i64) -> CurveModel {
        CurveModel::from_j(BigRational::from(BigInt::from(j)))
    }

    #[test]
    fn model_special_cases() {
        let zero = model(0);
        assert!(zero.a().is_zero());
        assert!(zero.b().is_one());
        let m1728 = model(1728);
        assert!(m1728.a().is_one());
        assert!(m1728.b().is_zero());
    }

    #[test]
    fn model_j_recovery() {
        let m = model(4913);
        let a = BigRational::from(BigInt::from(-3i64 * 4913 * 3185));
        let b = BigRational::from(BigInt::from(-2i64 * 4913) * BigInt::from(3185).pow(2));
        assert_eq!(m.a(), &a);
        assert_eq!(m.b(), &b);
        assert!(m.j_invariant_consistent());
        for j in ["-32768", "999", "-882216989/131072", "1/3", "-7/11"] {
            let m = CurveModel::from_j(parse_rational(j).unwrap());
            assert!(m.j_invariant_consistent(), "j = {j}");
        }
    }

    #[test]
    fn skip_primes_examples() {
        let expect = |m: &CurveModel, primes: &[u64]| {
            let want: BTreeSet<BigInt> = primes.iter().map(|&p| BigInt::from(p)).collect();
            assert_eq!(m.skip_primes(), want);
            for p in crate::arith::primes_up_to(1000) {
                assert_eq!(
                    m.is_skip_prime(p),
                    want.contains(&BigInt::from(p)),
                    "p = {p}"
                );
            }
        };
        expect(&model(4913), &[2, 3, 5, 7, 13, 17]);
        expect(&model(1), &[2, 3, 11, 157]);
        let s17 = CurveModel::from_j(parse_rational("-882216989/131072").unwrap());
        assert!(s17.skip_primes().contains(&BigInt::from(2)));
    }

    #[test]
    fn skip_primes_of_degenerate_j() {
        assert_eq!(
            model(0).skip_primes(),
            [2, 3].map(BigInt::from).into_iter().collect()
        );
        assert_eq!(
            model(1728).skip_primes(),
            [2, 3].map(BigInt::from).into_iter().collect()
        );
    }

    #[test]
    fn reduce_respects_skips() {
        let m = model(4913);
        assert!(m.reduce(11).is_ok());
        assert!(matches!(
            m.reduce(17),
            Err(Error::SkippedPrime { prime: 17, .. })
        ));
        let zero = model(0);
        let c = zero.reduce(5).unwrap();
        assert_eq!((c.a(), c.b()), (0, 1));
    }

    #[test]
    fn naive_count_examples() {
        let c = ReducedCurve::new(5, 0, 1).unwrap();
        assert_eq!(count_points_naive(&c).unwrap(), 6);
        let c = ReducedCurve::new(3, 1, 0).unwrap();
        assert_eq!(count_points_naive(&c).unwrap(), 4);
        let c = ReducedCurve::new(7, 6, 0).unwrap(); // y^2 = x^3 - x
        assert_eq!(count_points_naive(&c).unwrap(), 8);
        assert!(matches!(
            count_points_naive(&ReducedCurve::new(10_007, 1, 1).unwrap()),
            Err(Error::OracleBoundExceeded(_))
        ));
    }

    #[test]
    fn legendre_count_matches_naive() {
        let c = ReducedCurve::new(5, 0, 1).unwrap();
        assert_eq!(count_points_legendre(&c).unwrap(), 6);
        let c = ReducedCurve::new(5, 1, 0).unwrap();
        assert_eq!(count_points_legendre(&c).unwrap(), 4);
        assert_eq!(count_points_naive(&c).unwrap(), 4);
        for l in crate::arith::primes_up_to(200).into_iter().skip(1) {
            for (a, b) in [(0, 1), (1, 0), (1, 1), (2, 3), (l - 1, 5 % l)] {
                let Ok(c) = ReducedCurve::new(l, a, b) else {
                    continue;
                };
                assert_eq!(
                    count_points_legendre(&c).unwrap(),
                    count_points_naive(&c).unwrap(),
                    "l = {l}, a = {a}, b = {b}"
                );
            }
        }
    }

    #[test]
    fn hasse_bound_holds_on_counts() {
        for l in crate::arith::primes_up_to(100).into_iter().skip(1) {
            for a in 0..l.min(8) {
                for b in 0..l.min(8) {
                    let Ok(c) = ReducedCurve::new(l, a, b) else {
                        continue;
                    };
                    let n = count_points_legendre(&c).unwrap() as i64;
                    let t = l as i64 + 1 - n;
                    assert!(hasse_ok(l, t), "l = {l}, a = {a}, b = {b}");
                }
            }
        }
    }

    #[test]
    fn twist_negates_trace() {
        // Exhaustive over every curve and every proper twist class, l <= 50.
        for l in crate::arith::primes_up_to(50).into_iter().skip(1) {
            let d = (2..l)
                .find(|&d| legendre_symbol(FpElem::new(d, l)).unwrap() == -1)
                .unwrap();
            for a in 0..l {
                for b in 0..l {
                    let Ok(c) = ReducedCurve::new(l, a, b) else {
                        continue;
                    };
                    let ct = c.twist(d).unwrap();
                    let t = l as i64 + 1 - count_points_legendre(&c).unwrap() as i64;
                    let tt = l as i64 + 1 - count_points_legendre(&ct).unwrap() as i64;
                    assert_eq!(tt, -t, "l = {l}, a = {a}, b = {b}");
                }
            }
        }
    }

    #[test]
    fn bsgs_agrees_with_legendre() {
        for l in crate::arith::primes_up_to(300).into_iter().skip(1) {
            for (a, b) in [(0, 1), (1, 1), (3, 5), (l - 1, 2)] {
                let Ok(c) = ReducedCurve::new(l, a, b) else {
                    continue;
                };
                if let Some(n) = bsgs_group_order(&c) {
                    assert_eq!(
                        n,
                        count_points_legendre(&c).unwrap(),
                        "l = {l}, a = {a}, b = {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn bsgs_resolves_midsize_orders() {
        // Above the default threshold the BSGS path must essentially always
        // resolve; spot-check it against the Legendre count.
        for l in [4099u64, 4111, 5003, 8191] {
            let c = ReducedCurve::new(l, 2, 3).unwrap();
            assert_eq!(
                bsgs_group_order(&c).expect("unambiguous"),
                count_points_legendre(&c).unwrap()
            );
        }
    }

    #[test]
    fn trace_examples_and_cache() {
        let mut cache = TraceCache::in_memory(DEFAULT_BSGS_THRESHOLD);
        let zero = model(0);
        assert_eq!(trace_of_frobenius(&zero, 5, &mut cache).unwrap(), 0);
        assert_eq!(cache.get(&zero.j_id(), 5), Some(0));
        // Cached value is reused verbatim.
        assert_eq!(trace_of_frobenius(&zero, 5, &mut cache).unwrap(), 0);
        assert!(matches!(
            trace_of_frobenius(&zero, 2, &mut cache),
            Err(Error::SkippedPrime { .. })
        ));
        let m = model(4913);
        for l in [11u64, 19, 23, 4099] {
            let a = trace_of_frobenius(&m, l, &mut cache).unwrap();
            assert!(hasse_ok(l, a), "l = {l}");
        }
    }

    #[test]
    fn cache_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.txt");
        let m = model(4913);
        let first = {
            let mut cache = TraceCache::open(&path, DEFAULT_BSGS_THRESHOLD).unwrap();
            let a = trace_of_frobenius(&m, 11, &mut cache).unwrap();
            cache.flush().unwrap();
            a
        };
        let cache = TraceCache::open(&path, DEFAULT_BSGS_THRESHOLD).unwrap();
        assert_eq!(cache.get(&m.j_id(), 11), Some(first));
        assert_eq!(cache.len(), 1);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("4913/1 11 {first}\n"));
    }

    #[test]
    fn corrupt_cache_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.txt");
        std::fs::write(&path, "4913/1 11 999\n").unwrap(); // violates Hasse
        assert!(matches!(
            TraceCache::open(&path, DEFAULT_BSGS_THRESHOLD),
            Err(Error::CorruptTraceCache { .. })
        ));
        std::fs::write(&path, "4913/1 eleven 1\n").unwrap();
        assert!(TraceCache::open(&path, DEFAULT_BSGS_THRESHOLD).is_err());
    }

    #[test]
    fn prime_divisor_helper() {
        let set = |v: &[u64]| -> BTreeSet<BigInt> { v.iter().map(|&p| BigInt::from(p)).collect() };
        assert_eq!(prime_divisors(&BigInt::from(1727)), set(&[11, 157]));
        assert_eq!(prime_divisors(&BigInt::from(-4096)), set(&[2]));
        assert_eq!(prime_divisors(&BigInt::from(1)), set(&[]));
        // A rough semiprime beyond the trial-division bound.
        let p = BigInt::from(1_000_003u64);
        let q = BigInt::from(1_000_033u64);
        assert_eq!(prime_divisors(&(&p * &q)), [p, q].into_iter().collect());
    }
}

//! Trace-based certification that a mod-p image is all of GL2(F_p).
//!
//! A Frobenius element at a good prime l has trace t = a_l mod p and
//! determinant d = l mod p. Three kinds of witness jointly rule out every
//! class of proper subgroup with full determinant:
//!
//! * split: t != 0 and t^2 - 4d a nonzero square. Such an element lies in
//!   no conjugate of the normaliser of a non-split Cartan (the non-Cartan
//!   coset has trace 0, Cartan elements have non-split or scalar
//!   characteristic polynomial).
//! * nonsplit: t != 0 and t^2 - 4d a non-square. Such an element lies in
//!   no Borel and no conjugate of the normaliser of a split Cartan.
//! * exceptional: u = t^2/d outside {0, 1, 2, 4} with u^2 - 3u + 1 != 0.
//!   The image of such an element in PGL2 has order > 5, which no
//!   subgroup with projective image A4, S4 or A5 contains.
//!
//! Finding all three certifies surjectivity (the determinant of the global
//! image is already onto, being cyclotomic). Not finding them proves
//! nothing, and is always reported as inconclusive. A brute-force subgroup
//! oracle validates the criteria exhaustively at p = 5 and p = 7.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use num_rational::BigRational;

use crate::arith::{legendre_symbol, primes_up_to, FpElem};
use crate::curves::{trace_of_frobenius, CurveModel, TraceCache};
use crate::error::{Error, Result};

/// The three exclusion classes a Frobenius witness can land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WitnessKind {
    Split,
    Nonsplit,
    Exceptional,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 3] = [
        WitnessKind::Split,
        WitnessKind::Nonsplit,
        WitnessKind::Exceptional,
    ];

    pub fn label(self) -> &'static str {
        match self {
            WitnessKind::Split => "split",
            WitnessKind::Nonsplit => "nonsplit",
            WitnessKind::Exceptional => "exceptional",
        }
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which witness classes a single (t, d) pair realizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WitnessClasses {
    pub split: bool,
    pub nonsplit: bool,
    pub exceptional: bool,
}

impl WitnessClasses {
    pub fn contains(self, kind: WitnessKind) -> bool {
        match kind {
            WitnessKind::Split => self.split,
            WitnessKind::Nonsplit => self.nonsplit,
            WitnessKind::Exceptional => self.exceptional,
        }
    }

    fn mask(self) -> u8 {
        self.split as u8 | (self.nonsplit as u8) << 1 | (self.exceptional as u8) << 2
    }
}

/// Classifies a Frobenius trace/determinant pair mod p into witness classes.
pub fn classify_witness(t: FpElem, d: FpElem) -> Result<WitnessClasses> {
    let p = t.modulus();
    if p != d.modulus() {
        return Err(Error::MixedModuli(p, d.modulus()));
    }
    if p < 5 {
        return Err(Error::WitnessPrimeTooSmall(p));
    }
    if d.is_zero() {
        return Err(Error::DegenerateDeterminant);
    }
    let mut out = WitnessClasses::default();
    if !t.is_zero() {
        let disc = t.mul(t).sub(FpElem::new(4, p).mul(d));
        match legendre_symbol(disc)? {
            1 => out.split = true,
            -1 => out.nonsplit = true,
            _ => {}
        }
    }
    let u = t.mul(t).div(d)?.residue();
    let excluded = u == 0 || u == 1 || u == 2 || u == 4;
    if !excluded && !(u * u + 3 * p - 3 * u + 1).is_multiple_of(p) {
        out.exceptional = true;
    }
    Ok(out)
}

/// Witness bookkeeping for one (j, p) pair: the first prime l realizing
/// each class, and how far the scan went.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessState {
    pub p: u64,
    pub found_split: Option<u64>,
    pub found_nonsplit: Option<u64>,
    pub found_exceptional: Option<u64>,
    pub scanned_bound: u64,
}

impl WitnessState {
    fn new(p: u64) -> WitnessState {
        WitnessState {
            p,
            found_split: None,
            found_nonsplit: None,
            found_exceptional: None,
            scanned_bound: 0,
        }
    }

    fn absorb(&mut self, l: u64, classes: WitnessClasses) {
        if classes.split {
            self.found_split.get_or_insert(l);
        }
        if classes.nonsplit {
            self.found_nonsplit.get_or_insert(l);
        }
        if classes.exceptional {
            self.found_exceptional.get_or_insert(l);
        }
    }

    pub fn is_complete(&self) -> bool {
        self.found_split.is_some()
            && self.found_nonsplit.is_some()
            && self.found_exceptional.is_some()
    }

    pub fn found(&self, kind: WitnessKind) -> Option<u64> {
        match kind {
            WitnessKind::Split => self.found_split,
            WitnessKind::Nonsplit => self.found_nonsplit,
            WitnessKind::Exceptional => self.found_exceptional,
        }
    }

    /// Witness classes still unrealized after the scan.
    pub fn missing(&self) -> Vec<WitnessKind> {
        WitnessKind::ALL
            .into_iter()
            .filter(|&k| self.found(k).is_none())
            .collect()
    }
}

fn scan_witnesses(
    j: &BigRational,
    p: u64,
    l_bound: u64,
    cache: &mut TraceCache,
) -> Result<WitnessState> {
    if p < 5 {
        return Err(Error::WitnessPrimeTooSmall(p));
    }
    let model = CurveModel::from_j(j.clone());
    let mut state = WitnessState::new(p);
    for l in primes_up_to(l_bound) {
        if l == p || model.is_skip_prime(l) {
            continue;
        }
        let a = trace_of_frobenius(&model, l, cache)?;
        let t = FpElem::from_i64(a, p);
        let d = FpElem::new(l, p);
        state.absorb(l, classify_witness(t, d)?);
        state.scanned_bound = l;
        if state.is_complete() {
            return Ok(state);
        }
    }
    state.scanned_bound = l_bound;
    Ok(state)
}

/// Outcome of a certification scan. `Certified` is a sound proof that the
/// mod-p image is all of GL2(F_p); `Inconclusive` proves nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certification {
    Certified(WitnessState),
    Inconclusive(WitnessState),
}

impl Certification {
    pub fn state(&self) -> &WitnessState {
        match self {
            Certification::Certified(s) | Certification::Inconclusive(s) => s,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }
}

/// Scans primes l <= l_bound (skipping bad-model primes and p itself) for
/// the three witness classes. Callers filter out CM j-invariants first.
pub fn certify_surjective(
    j: &BigRational,
    p: u64,
    l_bound: u64,
    cache: &mut TraceCache,
) -> Result<Certification> {
    let state = scan_witnesses(j, p, l_bound, cache)?;
    Ok(if state.is_complete() {
        Certification::Certified(state)
    } else {
        Certification::Inconclusive(state)
    })
}

/// The same scan as [`certify_surjective`], returned as a plain profile.
/// Useful diagnostically below p = 37: a class still missing after a large
/// scan is one-sided evidence about which maximal subgroup could contain
/// the image.
pub fn evidence_profile(
    j: &BigRational,
    p: u64,
    l_bound: u64,
    cache: &mut TraceCache,
) -> Result<WitnessState> {
    scan_witnesses(j, p, l_bound, cache)
}

/// An element of GL2(F_p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupElem22 {
    entries: [[u64; 2]; 2],
    p: u64,
}

impl GroupElem22 {
    pub fn new(entries: [[u64; 2]; 2], p: u64) -> Result<GroupElem22> {
        let e = entries.map(|row| row.map(|v| v % p));
        let det = (e[0][0] * e[1][1] % p + p - e[0][1] * e[1][0] % p) % p;
        if det == 0 {
            return Err(Error::SingularMatrix(p));
        }
        Ok(GroupElem22 { entries: e, p })
    }

    pub fn identity(p: u64) -> GroupElem22 {
        GroupElem22 {
            entries: [[1, 0], [0, 1]],
            p,
        }
    }

    pub fn entries(&self) -> [[u64; 2]; 2] {
        self.entries
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn det(&self) -> u64 {
        let e = &self.entries;
        (e[0][0] * e[1][1] % self.p + self.p - e[0][1] * e[1][0] % self.p) % self.p
    }

    pub fn trace(&self) -> u64 {
        (self.entries[0][0] + self.entries[1][1]) % self.p
    }

    fn code(&self) -> usize {
        let e = &self.entries;
        let p = self.p as usize;
        ((e[0][0] as usize * p + e[0][1] as usize) * p + e[1][0] as usize) * p + e[1][1] as usize
    }
}

/// Precomputed multiplication structure of GL2(F_p) for the oracle primes.
struct GroupTable {
    p: u64,
    elems: Vec<[[u64; 2]; 2]>,
    /// p^4-sized map from entry code to element index + 1 (0 = singular).
    code_to_index: Vec<u16>,
    /// Row-major n*n multiplication table of element indices.
    mul: Vec<u16>,
    det: Vec<u8>,
    witness_mask: Vec<u8>,
}

impl GroupTable {
    fn order(&self) -> usize {
        self.elems.len()
    }

    fn index_of(&self, g: &GroupElem22) -> u16 {
        self.code_to_index[g.code()] - 1
    }

    fn build(p: u64) -> GroupTable {
        let mut elems = Vec::new();
        let mut code_to_index = vec![0u16; (p * p * p * p) as usize];
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if let Ok(g) = GroupElem22::new([[a, b], [c, d]], p) {
                            elems.push(g.entries);
                            code_to_index[g.code()] = elems.len() as u16;
                        }
                    }
                }
            }
        }
        let n = elems.len();
        let mut mul = vec![0u16; n * n];
        for (i, x) in elems.iter().enumerate() {
            for (k, y) in elems.iter().enumerate() {
                let prod = [
                    [
                        (x[0][0] * y[0][0] + x[0][1] * y[1][0]) % p,
                        (x[0][0] * y[0][1] + x[0][1] * y[1][1]) % p,
                    ],
                    [
                        (x[1][0] * y[0][0] + x[1][1] * y[1][0]) % p,
                        (x[1][0] * y[0][1] + x[1][1] * y[1][1]) % p,
                    ],
                ];
                let code = ((prod[0][0] * p + prod[0][1]) * p + prod[1][0]) * p + prod[1][1];
                mul[i * n + k] = code_to_index[code as usize] - 1;
            }
        }
        let mut det = Vec::with_capacity(n);
        let mut witness_mask = Vec::with_capacity(n);
        for e in &elems {
            let g = GroupElem22 { entries: *e, p };
            det.push(g.det() as u8);
            let classes = classify_witness(FpElem::new(g.trace(), p), FpElem::new(g.det(), p))
                .expect("p >= 5 and det != 0");
            witness_mask.push(classes.mask());
        }
        GroupTable {
            p,
            elems,
            code_to_index,
            mul,
            det,
            witness_mask,
        }
    }
}

fn group_table(p: u64) -> Result<&'static GroupTable> {
    static T5: OnceLock<GroupTable> = OnceLock::new();
    static T7: OnceLock<GroupTable> = OnceLock::new();
    match p {
        5 => Ok(T5.get_or_init(|| GroupTable::build(5))),
        7 => Ok(T7.get_or_init(|| GroupTable::build(7))),
        _ => Err(Error::OracleRange(p)),
    }
}

/// Closure accumulators. `det_mask` has bit v-1 set once determinant v has
/// been seen; the determinant image is the subgroup those values generate,
/// so it is full iff all p-1 bits are set.
struct ClosureScratch {
    visited: Vec<u32>,
    generation: u32,
    stack: Vec<u16>,
}

impl ClosureScratch {
    fn new(n: usize) -> ClosureScratch {
        ClosureScratch {
            visited: vec![0; n],
            generation: 0,
            stack: Vec::with_capacity(n),
        }
    }
}

struct ClosureOutcome {
    /// Element indices, only collected for proper subgroups.
    members: Option<Vec<u16>>,
    size: usize,
    det_mask: u32,
    witness_mask: u8,
}

/// Breadth-first closure of the sub-semigroup generated by `gens`; in a
/// finite group this is the generated subgroup. Stops early once the size
/// passes |G|/2, which by Lagrange already forces the full group.
fn close_subgroup(
    table: &GroupTable,
    gens: &[u16],
    scratch: &mut ClosureScratch,
) -> ClosureOutcome {
    let n = table.order();
    scratch.generation += 1;
    let gen = scratch.generation;
    scratch.stack.clear();
    let identity = GroupElem22::identity(table.p);
    let id_idx = table.index_of(&identity);
    let mut members = Vec::new();
    let mut det_mask = 0u32;
    let mut witness_mask = 0u8;
    let mut size = 0usize;
    let push = |idx: u16,
                scratch_visited: &mut Vec<u32>,
                stack: &mut Vec<u16>,
                members: &mut Vec<u16>,
                size: &mut usize,
                det_mask: &mut u32,
                witness_mask: &mut u8| {
        if scratch_visited[idx as usize] != gen {
            scratch_visited[idx as usize] = gen;
            stack.push(idx);
            members.push(idx);
            *size += 1;
            *det_mask |= 1 << (table.det[idx as usize] - 1);
            *witness_mask |= table.witness_mask[idx as usize];
        }
    };
    push(
        id_idx,
        &mut scratch.visited,
        &mut scratch.stack,
        &mut members,
        &mut size,
        &mut det_mask,
        &mut witness_mask,
    );
    for &g in gens {
        push(
            g,
            &mut scratch.visited,
            &mut scratch.stack,
            &mut members,
            &mut size,
            &mut det_mask,
            &mut witness_mask,
        );
    }
    while let Some(x) = scratch.stack.pop() {
        if 2 * size > n {
            // A subgroup of more than half the order is the whole group.
            return ClosureOutcome {
                members: None,
                size: n,
                det_mask: (1u32 << (table.p - 1)) - 1,
                witness_mask: 0x7,
            };
        }
        for &g in gens {
            let y = table.mul[x as usize * n + g as usize];
            push(
                y,
                &mut scratch.visited,
                &mut scratch.stack,
                &mut members,
                &mut size,
                &mut det_mask,
                &mut witness_mask,
            );
        }
    }
    ClosureOutcome {
        members: Some(members),
        size,
        det_mask,
        witness_mask,
    }
}

/// The subgroup generated by `gens`, as an explicit sorted element list.
/// Only the exhaustible oracle primes p = 5 and p = 7 are supported.
pub fn subgroup_closure(gens: &[GroupElem22]) -> Result<Vec<GroupElem22>> {
    let p = match gens.first() {
        Some(g) => g.modulus(),
        None => return Err(Error::OracleRange(0)),
    };
    if gens.iter().any(|g| g.modulus() != p) {
        return Err(Error::MixedModuli(p, 0));
    }
    let table = group_table(p)?;
    let idxs: Vec<u16> = gens.iter().map(|g| table.index_of(g)).collect();
    let mut scratch = ClosureScratch::new(table.order());
    let outcome = close_subgroup(table, &idxs, &mut scratch);
    let mut members = match outcome.members {
        Some(m) => m,
        None => (0..table.order() as u16).collect(),
    };
    members.sort_unstable();
    Ok(members
        .into_iter()
        .map(|i| GroupElem22 {
            entries: table.elems[i as usize],
            p,
        })
        .collect())
}

/// Result of the exhaustive small-p validation of the witness criteria.
#[derive(Debug, Clone)]
pub struct SubgroupOracleResult {
    pub p: u64,
    /// Distinct subgroups with full determinant that were examined.
    pub subgroups_tested: u64,
    /// Generator sets of proper subgroups realizing all three witness
    /// classes. Must be empty: that is the soundness of the certificate.
    pub counterexamples: Vec<Vec<GroupElem22>>,
}

/// Enumerates the closures of every 1- and 2-element subset of GL2(F_p)
/// whose determinants already generate F_p^* (no other subset can have
/// full determinant image), and checks that any closure realizing all
/// three witness classes with full determinant is GL2(F_p) itself.
pub fn verify_witness_lemma(p: u64) -> Result<SubgroupOracleResult> {
    let table = group_table(p)?;
    let n = table.order();
    let full_det: u32 = (1u32 << (p - 1)) - 1;

    // det(<g, h>) is the subgroup of F_p^* generated by det g and det h;
    // tabulate which determinant pairs generate everything.
    let unit_order = |v: u64| (1..).find(|k| pow_mod_small(v, *k, p) == 1).unwrap();
    let mut pair_full = vec![false; (p * p) as usize];
    for a in 1..p {
        for b in 1..p {
            // In a cyclic ambient group, <a, b> is the unique subgroup of
            // order lcm(ord a, ord b).
            let gen_order = num_integer::lcm(unit_order(a), unit_order(b));
            pair_full[(a * p + b) as usize] = gen_order == p - 1;
        }
    }

    let mut scratch = ClosureScratch::new(n);
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut saw_full_group = false;
    let mut counterexamples = Vec::new();

    let consider = |gens: &[u16],
                    scratch: &mut ClosureScratch,
                    seen: &mut HashSet<(u64, u64)>,
                    saw_full_group: &mut bool,
                    counterexamples: &mut Vec<Vec<GroupElem22>>| {
        let outcome = close_subgroup(table, gens, scratch);
        match outcome.members {
            None => *saw_full_group = true,
            Some(members) => {
                debug_assert!(outcome.size < n);
                if outcome.det_mask == full_det && outcome.witness_mask & 0x7 == 0x7 {
                    counterexamples.push(
                        gens.iter()
                            .map(|&i| GroupElem22 {
                                entries: table.elems[i as usize],
                                p,
                            })
                            .collect(),
                    );
                }
                seen.insert(fingerprint(&members));
            }
        }
    };

    for i in 0..n as u16 {
        if pair_full[(table.det[i as usize] as u64 * p + table.det[i as usize] as u64) as usize] {
            consider(
                &[i],
                &mut scratch,
                &mut seen,
                &mut saw_full_group,
                &mut counterexamples,
            );
        }
    }
    for i in 0..n as u16 {
        let di = table.det[i as usize] as u64;
        for k in (i + 1)..n as u16 {
            let dk = table.det[k as usize] as u64;
            if pair_full[(di * p + dk) as usize] {
                consider(
                    &[i, k],
                    &mut scratch,
                    &mut seen,
                    &mut saw_full_group,
                    &mut counterexamples,
                );
            }
        }
    }

    Ok(SubgroupOracleResult {
        p,
        subgroups_tested: seen.len() as u64 + saw_full_group as u64,
        counterexamples,
    })
}

fn pow_mod_small(base: u64, exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc * base % p;
    }
    acc
}

/// Order-independent 128-bit fingerprint of an index set.
fn fingerprint(members: &[u16]) -> (u64, u64) {
    let mix = |x: u64| {
        let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let mut a = members.len() as u64;
    let mut b = 0u64;
    for &m in members {
        a = a.wrapping_add(mix(m as u64 + 1));
        b = b.wrapping_add(mix((m as u64) << 17 | 0x5555));
    }
    (a, b)
}

/// The upper-triangular Borel subgroup of GL2(F_p).
pub fn borel_subgroup(p: u64) -> Result<Vec<GroupElem22>> {
    group_table(p)?;
    let mut out = Vec::new();
    for a in 1..p {
        for d in 1..p {
            for b in 0..p {
                out.push(GroupElem22::new([[a, b], [0, d]], p)?);
            }
        }
    }
    Ok(out)
}

/// The normaliser of a non-split Cartan subgroup of GL2(F_p): elements
/// a*I + b*M with M^2 = eps*I for the least non-residue eps, together with
/// their conjugates by diag(1, -1).
pub fn nonsplit_cartan_normalizer(p: u64) -> Result<Vec<GroupElem22>> {
    group_table(p)?;
    let eps = (2..p)
        .find(|&e| matches!(legendre_symbol(FpElem::new(e, p)), Ok(-1)))
        .expect("odd prime fields have non-residues");
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            if a == 0 && b == 0 {
                continue;
            }
            let cartan = GroupElem22::new([[a, b * eps % p], [b, a]], p)?;
            out.push(cartan);
            // Outer coset: diag(1,-1) * (aI + bM).
            out.push(GroupElem22::new(
                [[a, b * eps % p], [(p - b) % p, (p - a) % p]],
                p,
            )?);
        }
    }
    Ok(out)
}

//! End-to-end orchestration: candidate collection, per-(j, p)
//! certification, report assembly and serialization.
//!
//! The candidate list is the union of the integral j-invariants on the
//! genus-zero curves X_0(r), r in {2, 3, 5, 7, 13}, with the known
//! j-invariants from X_0(11), X_0(17) and X_0(37). CM values are filtered
//! out before certification. Everything runs in a fixed canonical order
//! (candidates ascending by j, primes ascending), so a run is
//! reproducible byte for byte, trace cache included.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{canonical_rational_string, primes_up_to};
use crate::curves::{TraceCache, DEFAULT_BSGS_THRESHOLD};
use crate::error::{Error, Result};
use crate::galois::{certify_surjective, evidence_profile, WitnessState};
use crate::modcurve::{enumerate_integral_j, is_cm, known_sets, GENUS_ZERO_DEGREES};

pub const DEFAULT_P_MIN: u64 = 38;
pub const DEFAULT_P_MAX: u64 = 500;
pub const DEFAULT_L_BOUND: u64 = 10_000;
pub const DEFAULT_TRACE_CACHE: &str = "traces.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Knobs for a verification run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub p_min: u64,
    pub p_max: u64,
    pub l_bound: u64,
    pub trace_cache_path: PathBuf,
    /// None writes the report to stdout.
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub bsgs_threshold: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_min: DEFAULT_P_MIN,
            p_max: DEFAULT_P_MAX,
            l_bound: DEFAULT_L_BOUND,
            trace_cache_path: PathBuf::from(DEFAULT_TRACE_CACHE),
            output_path: None,
            output_format: OutputFormat::Json,
            bsgs_threshold: DEFAULT_BSGS_THRESHOLD,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_min <= 37 {
            return Err(Error::InvalidConfig(format!(
                "p_min must exceed 37, got {}",
                self.p_min
            )));
        }
        if self.p_min > self.p_max {
            return Err(Error::InvalidConfig(format!(
                "empty prime range: p_min {} > p_max {}",
                self.p_min, self.p_max
            )));
        }
        if self.l_bound < 100 {
            return Err(Error::InvalidConfig(format!(
                "l_bound must be at least 100, got {}",
                self.l_bound
            )));
        }
        Ok(())
    }
}

/// The configuration knobs that determine a report's content. Paths are
/// deliberately excluded so reports are location-independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub p_min: u64,
    pub p_max: u64,
    pub l_bound: u64,
    pub bsgs_threshold: u64,
}

/// First witnessing prime of each class at one p, when found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessTriple {
    pub split: Option<u64>,
    pub nonsplit: Option<u64>,
    pub exceptional: Option<u64>,
}

impl From<&WitnessState> for WitnessTriple {
    fn from(s: &WitnessState) -> Self {
        WitnessTriple {
            split: s.found_split,
            nonsplit: s.found_nonsplit,
            exceptional: s.found_exceptional,
        }
    }
}

/// Per-candidate verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    /// Canonical numerator/denominator form.
    pub j: String,
    /// Isogeny degrees r with j in S_r (a value can come from several).
    pub source_r: Vec<u64>,
    pub cm: bool,
    pub certified_primes: Vec<u64>,
    pub inconclusive_primes: Vec<u64>,
    /// For source degrees 5 <= r <= 37: witness classes still missing at
    /// p = r after the scan. One-sided evidence only, never a proof of
    /// non-surjectivity. The witness criteria need p >= 5, so source
    /// degrees 2 and 3 have no entry.
    pub small_p_evidence: BTreeMap<u64, Vec<String>>,
    /// Witnessing primes per p, re-checkable against the trace cache.
    pub witnessing_l: BTreeMap<u64, WitnessTriple>,
}

/// Full verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertReport {
    pub config: ReportConfig,
    pub candidate_count: u64,
    pub candidates: Vec<CandidateRecord>,
}

/// How a run ended, mathematically. I/O trouble is an `Error` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    AllCertified,
    Inconclusive,
}

/// The deduplicated candidate list, ascending by j, each value tagged with
/// every isogeny degree that produces it.
pub fn collect_candidate_j() -> Vec<(BigRational, BTreeSet<u64>)> {
    let mut tagged: BTreeMap<BigRational, BTreeSet<u64>> = BTreeMap::new();
    for r in GENUS_ZERO_DEGREES {
        let set = enumerate_integral_j(r).expect("genus-zero degree");
        for v in set.values {
            tagged.entry(BigRational::from(v)).or_default().insert(r);
        }
    }
    for (r, values) in known_sets() {
        for v in values {
            tagged.entry(v).or_default().insert(r);
        }
    }
    tagged.into_iter().collect()
}

/// Runs the whole certification: every non-CM candidate j against every
/// prime p in [p_min, p_max], plus small-p evidence profiles at the source
/// degrees. Writes the report and returns it with the outcome.
pub fn verify_theorem(cfg: &RunConfig) -> Result<(CertReport, RunOutcome)> {
    cfg.validate()?;
    let mut cache = TraceCache::open(&cfg.trace_cache_path, cfg.bsgs_threshold)?;
    let range: Vec<u64> = primes_up_to(cfg.p_max)
        .into_iter()
        .filter(|&p| p >= cfg.p_min)
        .collect();

    let candidates = collect_candidate_j();
    let mut records = Vec::with_capacity(candidates.len());
    let mut any_inconclusive = false;

    for (j, sources) in &candidates {
        let cm = is_cm(j);
        let mut record = CandidateRecord {
            j: canonical_rational_string(j),
            source_r: sources.iter().copied().collect(),
            cm,
            certified_primes: Vec::new(),
            inconclusive_primes: Vec::new(),
            small_p_evidence: BTreeMap::new(),
            witnessing_l: BTreeMap::new(),
        };
        if !cm {
            for &p in &range {
                let cert = certify_surjective(j, p, cfg.l_bound, &mut cache)?;
                record.witnessing_l.insert(p, cert.state().into());
                if cert.is_certified() {
                    record.certified_primes.push(p);
                } else {
                    record.inconclusive_primes.push(p);
                    any_inconclusive = true;
                }
            }
            for &r in sources {
                if (5..=37).contains(&r) {
                    let profile = evidence_profile(j, r, cfg.l_bound, &mut cache)?;
                    record.small_p_evidence.insert(
                        r,
                        profile.missing().iter().map(|k| k.label().into()).collect(),
                    );
                }
            }
        }
        records.push(record);
    }
    cache.flush()?;

    let report = CertReport {
        config: ReportConfig {
            p_min: cfg.p_min,
            p_max: cfg.p_max,
            l_bound: cfg.l_bound,
            bsgs_threshold: cfg.bsgs_threshold,
        },
        candidate_count: records.len() as u64,
        candidates: records,
    };
    write_report(&report, cfg)?;
    let outcome = if any_inconclusive {
        RunOutcome::Inconclusive
    } else {
        RunOutcome::AllCertified
    };
    Ok((report, outcome))
}

pub fn render_json(report: &CertReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// One row per non-CM (j, p) pair.
pub fn render_csv(report: &CertReport) -> String {
    let mut out = String::from("j,p,status,l_split,l_nonsplit,l_exceptional\n");
    let cell = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for rec in &report.candidates {
        for (&p, w) in &rec.witnessing_l {
            let status = if rec.certified_primes.contains(&p) {
                "certified"
            } else {
                "inconclusive"
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                rec.j,
                p,
                status,
                cell(w.split),
                cell(w.nonsplit),
                cell(w.exceptional)
            ));
        }
    }
    out
}

/// Writes the report to the configured destination; file output goes
/// through a sibling temp file and an atomic rename.
pub fn write_report(report: &CertReport, cfg: &RunConfig) -> Result<()> {
    let rendered = match cfg.output_format {
        OutputFormat::Json => render_json(report),
        OutputFormat::Csv => render_csv(report),
    };
    match &cfg.output_path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|source| Error::ReportIo {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
        Some(path) => {
            let io_err = |source| Error::ReportIo {
                path: path.clone(),
                source,
            };
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, rendered.as_bytes()).map_err(io_err)?;
            fs::rename(&tmp, path).map_err(io_err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn candidates_union_and_tags() {
        let candidates = collect_candidate_j();
        assert_eq!(candidates.len(), 59);
        let find = |j: &BigRational| {
            candidates
                .iter()
                .find(|(v, _)| v == j)
                .map(|(_, rs)| rs.clone())
        };
        assert_eq!(find(&rat(0)).unwrap(), BTreeSet::from([2, 3]));
        assert_eq!(find(&rat(-32768)).unwrap(), BTreeSet::from([11]));
        assert_eq!(find(&rat(54000)).unwrap(), BTreeSet::from([2, 3]));
        assert_eq!(find(&rat(-3375)).unwrap(), BTreeSet::from([2, 7]));
        assert_eq!(find(&rat(16581375)).unwrap(), BTreeSet::from([2, 7]));
        // Sorted ascending by j.
        for pair in candidates.windows(2) {
            assert!(pair[0].0 < pair[1].0);
        }
    }

    #[test]
    fn cm_candidates_are_exactly_nine() {
        let cm: Vec<String> = collect_candidate_j()
            .into_iter()
            .filter(|(j, _)| is_cm(j))
            .map(|(j, _)| canonical_rational_string(&j))
            .collect();
        assert_eq!(cm.len(), 9);
        for v in [
            "-12288000/1",
            "-32768/1",
            "-3375/1",
            "0/1",
            "1728/1",
            "8000/1",
            "54000/1",
            "287496/1",
            "16581375/1",
        ] {
            assert!(cm.contains(&v.to_string()), "{v} missing from {cm:?}");
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.p_min = 37;
        assert!(cfg.validate().is_err());
        cfg.p_min = 41;
        cfg.p_max = 40;
        assert!(cfg.validate().is_err());
        cfg.p_max = 500;
        cfg.l_bound = 50;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let report = CertReport {
            config: ReportConfig {
                p_min: 38,
                p_max: 43,
                l_bound: 100,
                bsgs_threshold: 4096,
            },
            candidate_count: 1,
            candidates: vec![CandidateRecord {
                j: "4913/1".into(),
                source_r: vec![2],
                cm: false,
                certified_primes: vec![41],
                inconclusive_primes: vec![],
                small_p_evidence: BTreeMap::new(),
                witnessing_l: BTreeMap::from([(
                    41,
                    WitnessTriple {
                        split: Some(11),
                        nonsplit: Some(23),
                        exceptional: Some(11),
                    },
                )]),
            }],
        };
        let parsed: CertReport = serde_json::from_str(&render_json(&report)).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn empty_report_is_valid_json() {
        let report = CertReport {
            config: ReportConfig {
                p_min: 38,
                p_max: 38,
                l_bound: 100,
                bsgs_threshold: 4096,
            },
            candidate_count: 0,
            candidates: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&render_json(&report)).unwrap();
        assert_eq!(v["candidates"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn small_run_counts_and_partition() {
        // A narrow range keeps this quick: p in [41, 43].
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            p_min: 41,
            p_max: 43,
            l_bound: 300,
            trace_cache_path: dir.path().join("traces.txt"),
            output_path: Some(dir.path().join("report.json")),
            output_format: OutputFormat::Json,
            bsgs_threshold: DEFAULT_BSGS_THRESHOLD,
        };
        let (report, outcome) = verify_theorem(&cfg).unwrap();
        assert_eq!(outcome, RunOutcome::AllCertified);
        assert_eq!(report.candidate_count, 59);
        let mut cm_count = 0;
        for rec in &report.candidates {
            if rec.cm {
                cm_count += 1;
                assert!(rec.certified_primes.is_empty());
                assert!(rec.inconclusive_primes.is_empty());
                assert!(rec.witnessing_l.is_empty());
            } else {
                // Partition: certified and inconclusive cover the range.
                assert_eq!(
                    rec.certified_primes.len() + rec.inconclusive_primes.len(),
                    2,
                    "j = {}",
                    rec.j
                );
            }
        }
        assert_eq!(cm_count, 9);

        // CSV row count: one per non-CM (j, p).
        let csv = render_csv(&report);
        let expected_rows: usize = report
            .candidates
            .iter()
            .map(|r| r.certified_primes.len() + r.inconclusive_primes.len())
            .sum();
        assert_eq!(csv.lines().count(), expected_rows + 1);

        // Third-party recheck: every reported witness must be reproducible
        // from the trace cache file alone.
        use crate::arith::FpElem;
        use crate::galois::classify_witness;
        let reloaded = TraceCache::open(&cfg.trace_cache_path, cfg.bsgs_threshold).unwrap();
        let traces: std::collections::HashMap<(String, u64), i64> = reloaded
            .records()
            .into_iter()
            .map(|r| ((r.j_id, r.l), r.a_l))
            .collect();
        for rec in &report.candidates {
            for (&p, w) in &rec.witnessing_l {
                for (l, check) in [
                    (w.split, WitnessCheck::Split),
                    (w.nonsplit, WitnessCheck::Nonsplit),
                    (w.exceptional, WitnessCheck::Exceptional),
                ] {
                    let Some(l) = l else { continue };
                    let a = traces[&(rec.j.clone(), l)];
                    let classes =
                        classify_witness(FpElem::from_i64(a, p), FpElem::new(l, p)).unwrap();
                    let ok = match check {
                        WitnessCheck::Split => classes.split,
                        WitnessCheck::Nonsplit => classes.nonsplit,
                        WitnessCheck::Exceptional => classes.exceptional,
                    };
                    assert!(ok, "witness at l = {l} for j = {}, p = {p}", rec.j);
                }
            }
        }
    }

    enum WitnessCheck {
        Split,
        Nonsplit,
        Exceptional,
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use isc::arith::{canonical_rational_string, parse_rational, primes_up_to};
use isc::curves::{TraceCache, DEFAULT_BSGS_THRESHOLD};
use isc::galois::certify_surjective;
use isc::modcurve::enumerate_integral_j;
use isc::pipeline::{
    verify_theorem, OutputFormat, RunConfig, RunOutcome, DEFAULT_L_BOUND, DEFAULT_P_MAX,
    DEFAULT_P_MIN, DEFAULT_TRACE_CACHE,
};
use isc::reduction::{integrality_upgrade, ReductionProfile};

/// Environment variable overriding the default trace cache path; the
/// --trace-cache flag overrides both.
const TRACE_CACHE_ENV: &str = "ISC_TRACE_CACHE";

/// Exit status for mathematically inconclusive runs, distinct from
/// operational failures (1).
const EXIT_INCONCLUSIVE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "isc",
    version,
    about = "Mod-p Galois image certification for elliptic curves with rational cyclic isogenies"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum EnumerateFormat {
    #[default]
    Plain,
    Json,
}

#[derive(Subcommand)]
enum Commands {
    /// Certify every candidate j-invariant for every prime in range and
    /// write a report; exits 0 only if all of them are certified.
    VerifyTheorem {
        /// Lower end of the certified prime range (must exceed 37).
        #[arg(long, default_value_t = DEFAULT_P_MIN)]
        pmin: u64,
        /// Upper end of the certified prime range.
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        pmax: u64,
        /// Scan Frobenius primes l up to this bound.
        #[arg(long, default_value_t = DEFAULT_L_BOUND)]
        lbound: u64,
        /// Report destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        /// Trace cache path; overrides ISC_TRACE_CACHE.
        #[arg(long)]
        trace_cache: Option<PathBuf>,
        /// Switch from Legendre-sum counting to BSGS at this l.
        #[arg(long, default_value_t = DEFAULT_BSGS_THRESHOLD)]
        bsgs_threshold: u64,
    },
    /// Print the integral j-invariants attained on X_0(r).
    Enumerate {
        /// Isogeny degree, one of 2, 3, 5, 7, 13.
        #[arg(long)]
        r: u64,
        #[arg(long, value_enum, default_value_t)]
        format: EnumerateFormat,
    },
    /// Certify a single j-invariant over a prime range.
    Certify {
        /// j-invariant as <num> or <num>/<den>.
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        #[arg(long, default_value_t = DEFAULT_P_MIN)]
        pmin: u64,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        pmax: u64,
        #[arg(long, default_value_t = DEFAULT_L_BOUND)]
        lbound: u64,
        #[arg(long)]
        trace_cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BSGS_THRESHOLD)]
        bsgs_threshold: u64,
    },
    /// Denominator profile and integrality verdict for one (j, p).
    Reduction {
        /// j-invariant as <num> or <num>/<den>.
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        /// Prime p (at least 5 and outside {2, 3, 5, 7, 13}).
        #[arg(long)]
        p: u64,
    },
}

fn resolve_cache_path(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(TRACE_CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_TRACE_CACHE))
}

fn run(cli: Cli) -> isc::Result<u8> {
    match cli.command {
        Commands::VerifyTheorem {
            pmin,
            pmax,
            lbound,
            out,
            format,
            trace_cache,
            bsgs_threshold,
        } => {
            let cfg = RunConfig {
                p_min: pmin,
                p_max: pmax,
                l_bound: lbound,
                trace_cache_path: resolve_cache_path(trace_cache),
                output_path: out,
                output_format: match format {
                    FormatArg::Json => OutputFormat::Json,
                    FormatArg::Csv => OutputFormat::Csv,
                },
                bsgs_threshold,
            };
            let (_, outcome) = verify_theorem(&cfg)?;
            Ok(match outcome {
                RunOutcome::AllCertified => 0,
                RunOutcome::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Commands::Enumerate { r, format } => {
            let set = enumerate_integral_j(r)?;
            match format {
                EnumerateFormat::Plain => {
                    for v in &set.values {
                        println!("{v}");
                    }
                }
                EnumerateFormat::Json => {
                    let values: Vec<String> = set.values.iter().map(|v| v.to_string()).collect();
                    println!(
                        "{}",
                        serde_json::to_string(&json!({ "r": r, "values": values }))
                            .expect("serializes")
                    );
                }
            }
            Ok(0)
        }
        Commands::Certify {
            j,
            pmin,
            pmax,
            lbound,
            trace_cache,
            bsgs_threshold,
        } => {
            let j = parse_rational(&j)?;
            let mut cache = TraceCache::open(&resolve_cache_path(trace_cache), bsgs_threshold)?;
            let mut results = Vec::new();
            let mut all_certified = true;
            for p in primes_up_to(pmax).into_iter().filter(|&p| p >= pmin) {
                let cert = certify_surjective(&j, p, lbound, &mut cache)?;
                let state = cert.state();
                all_certified &= cert.is_certified();
                let missing: Vec<&str> = state.missing().iter().map(|k| k.label()).collect();
                results.push(json!({
                    "p": p,
                    "certified": cert.is_certified(),
                    "witnesses": {
                        "split": state.found_split,
                        "nonsplit": state.found_nonsplit,
                        "exceptional": state.found_exceptional,
                    },
                    "missing": missing,
                    "scanned_bound": state.scanned_bound,
                }));
            }
            cache.flush()?;
            let doc = json!({
                "j": canonical_rational_string(&j),
                "p_min": pmin,
                "p_max": pmax,
                "l_bound": lbound,
                "all_certified": all_certified,
                "results": results,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializes")
            );
            Ok(if all_certified { 0 } else { EXIT_INCONCLUSIVE })
        }
        Commands::Reduction { j, p } => {
            let j = parse_rational(&j)?;
            let profile = ReductionProfile::compute(&j)?;
            let verdict = integrality_upgrade(&j, p)?;
            let primes: Vec<u64> = profile.denominator_primes.iter().copied().collect();
            let doc = json!({
                "j": canonical_rational_string(&j),
                "p": p,
                "denominator_primes": primes,
                "is_integral": profile.is_integral,
                "integral_away_from": profile.integral_away_from,
                "verdict": serde_json::to_value(verdict).expect("serializes"),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializes")
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // Exit-code contract: 0 success, 1 operational error (including CLI
    // misuse), 2 mathematically inconclusive. clap's own usage-error code
    // of 2 would collide with the last one, so parse errors are remapped.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

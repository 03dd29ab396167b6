//! Command-line surface: configuration, report records with digests, and
//! the four subcommands (rootsys info, weyl enumerate, pairing, verify).
//!
//! JSON is the canonical output format. Exact rationals serialize as "p/q"
//! strings, complex numbers as {"re": ..., "im": ...}. The report digest is
//! a SHA-256 over the canonical JSON of everything except timings, so two
//! runs with identical config and seed produce identical digests.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use crate::alcove;
use crate::error::{Error, Result};
use crate::oracle;
use crate::pairing::{self, Conventions, Haar};
use crate::rat::{self, Rat};
use crate::rootsys::{build_root_system, RootSystem};
use crate::verify;
use crate::weyl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Fully validated run configuration; the seed determines every randomized
/// suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub type_letter: char,
    pub rank: usize,
    pub k: i64,
    pub conventions: Conventions,
    pub seed: u64,
    pub weyl_cache_dir: Option<PathBuf>,
    pub output: OutputFormat,
    pub max_weyl: usize,
}

/// One emitted report: command echo, config echo, payload, checks, timing,
/// and the timing-independent digest.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<verify::CheckResult>,
    pub digest: String,
    pub timing_ms: f64,
}

impl ReportRecord {
    fn assemble(
        command: &str,
        config: &RunConfig,
        results: Value,
        checks: Vec<verify::CheckResult>,
        started: Instant,
    ) -> Result<ReportRecord> {
        let version = env!("CARGO_PKG_VERSION").to_string();
        // Digest over everything except timings.
        let digest_input = serde_json::to_string(&json!({
            "version": version,
            "command": command,
            "config": config,
            "results": results,
            "checks": checks,
        }))?;
        let digest: String = Sha256::digest(digest_input.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(ReportRecord {
            version,
            command: command.to_string(),
            config: config.clone(),
            results,
            checks,
            digest,
            timing_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rats_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(rat::rat_to_string(x))).collect())
}

fn complex_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

/// `rootsys info`: the constructed root-system data.
pub fn cmd_rootsys_info(config: &RunConfig) -> Result<ReportRecord> {
    let started = Instant::now();
    let rs = build_root_system(config.type_letter, config.rank)?;
    let results = json!({
        "label": rs.label(),
        "rank": rs.rank,
        "m": rs.m,
        "n": rs.n,
        "gram": rs.gram.iter().map(|row| rats_json(row)).collect::<Vec<_>>(),
        "positive_roots": rs.positive_roots.iter().map(|a| rats_json(a)).collect::<Vec<_>>(),
        "highest_root": rats_json(&rs.highest_root),
        "rho": rats_json(&rs.rho),
    });
    ReportRecord::assemble("rootsys info", config, results, vec![], started)
}

/// `weyl enumerate`: order and length histogram, writing/reading the cache.
pub fn cmd_weyl_enumerate(config: &RunConfig) -> Result<ReportRecord> {
    let started = Instant::now();
    let rs = build_root_system(config.type_letter, config.rank)?;
    let elements =
        weyl::enumerate_weyl_cached(&rs, config.max_weyl, config.weyl_cache_dir.as_deref())?;
    let mut histogram: Vec<u64> = vec![0; rs.m + 1];
    for e in &elements {
        histogram[e.length] += 1;
    }
    let classical = oracle::classical_weyl_order(&rs);
    let checks = vec![verify::CheckResult {
        name: "weyl.order_vs_classical".into(),
        pass: elements.len() as u64 == classical,
        max_deviation: 0.0,
        detail: format!("enumerated {} vs classical {}", elements.len(), classical),
    }];
    let results = json!({
        "label": rs.label(),
        "order": elements.len(),
        "classical_order": classical,
        "length_histogram": histogram,
        "longest_length": rs.m,
    });
    ReportRecord::assemble("weyl enumerate", config, results, checks, started)
}

fn pairing_row(rs: &RootSystem, result: &pairing::PairingResult, beta: &[Rat], beta_prime: &[Rat]) -> Value {
    json!({
        "label": rs.label(),
        "k": result.k,
        "beta": rats_json(beta),
        "beta_prime": rats_json(beta_prime),
        "prefactor": result.prefactor,
        "product_term": result.product_term,
        "weyl_terms": result.weyl_terms.iter().map(|t| json!({
            "word": t.word,
            "length": t.length,
            "norm_sq": rat::rat_to_string(&t.norm_sq),
            "phase": complex_json(t.phase),
        })).collect::<Vec<_>>(),
        "total": complex_json(result.total),
    })
}

/// `pairing`: one pair or the full admissible table.
pub fn cmd_pairing(
    config: &RunConfig,
    beta: Option<Vec<Rat>>,
    beta_prime: Option<Vec<Rat>>,
    table: bool,
) -> Result<ReportRecord> {
    let started = Instant::now();
    let rs = build_root_system(config.type_letter, config.rank)?;
    let elements =
        weyl::enumerate_weyl_cached(&rs, config.max_weyl, config.weyl_cache_dir.as_deref())?;
    let mut rows = Vec::new();
    if table {
        let points = alcove::enumerate_admissible(&rs, config.k, 1_000_000)?;
        for b in &points {
            for bp in &points {
                let result =
                    pairing::bks_pairing(&rs, &elements, config.k, &b.beta, &bp.beta, config.conventions)?;
                rows.push(pairing_row(&rs, &result, &b.beta, &bp.beta));
            }
        }
    } else {
        let b = beta.ok_or_else(|| Error::Validation("--beta required without --table".into()))?;
        let bp = beta_prime
            .ok_or_else(|| Error::Validation("--beta-prime required without --table".into()))?;
        let result = pairing::bks_pairing(&rs, &elements, config.k, &b, &bp, config.conventions)?;
        rows.push(pairing_row(&rs, &result, &b, &bp));
    }
    let results = json!({"rows": rows});
    ReportRecord::assemble("pairing", config, results, vec![], started)
}

/// `verify`: run the named suite with the config seed.
pub fn cmd_verify(config: &RunConfig, suite: &str, trials: u64) -> Result<ReportRecord> {
    let started = Instant::now();
    let checks = verify::run_suite(suite, trials, config.seed)?;
    let results = json!({
        "suite": suite,
        "trials": trials,
        "passed": checks.iter().filter(|c| c.pass).count(),
        "failed": checks.iter().filter(|c| !c.pass).count(),
    });
    ReportRecord::assemble("verify", config, results, checks, started)
}

/// Flattened CSV projection of a pairing report (pairing tables only).
pub fn pairing_csv(record: &ReportRecord) -> Result<String> {
    let rows = record.results["rows"]
        .as_array()
        .ok_or_else(|| Error::Validation("CSV output is only available for pairing reports".into()))?;
    let mut out = String::from("label,k,beta,beta_prime,prefactor,product_term,total_re,total_im\n");
    for row in rows {
        let joined = |key: &str| -> String {
            row[key]
                .as_array()
                .map(|a| {
                    a.iter()
                        .map(|x| x.as_str().unwrap_or_default().to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row["label"].as_str().unwrap_or_default(),
            row["k"],
            joined("beta"),
            joined("beta_prime"),
            row["prefactor"],
            row["product_term"],
            row["total"]["re"],
            row["total"]["im"],
        ));
    }
    Ok(out)
}

#[derive(Parser, Debug)]
#[command(name = "bks", version, about = "BKS pairings for compact simple groups: exact root-system machinery, density calculus, and verification oracles")]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Simple type letter (A, B, C, D, E, F, G).
    #[arg(long = "type", default_value = "A")]
    pub type_letter: char,
    /// Rank.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    /// Level k.
    #[arg(short, long, default_value_t = 1)]
    pub k: i64,
    /// Haar normalization behind kappa(G).
    #[arg(long, value_enum, default_value = "probability")]
    pub haar: HaarArg,
    /// Multiply phase exponents by k (alternative phase reading).
    #[arg(long, default_value_t = false)]
    pub phase_k: bool,
    /// Master seed for randomized suites.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Weyl cache directory (BKS_CACHE_DIR overrides the default; this flag
    /// overrides both).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
    /// Weyl enumeration cap.
    #[arg(long, default_value_t = weyl::DEFAULT_MAX_WEYL)]
    pub max_weyl: usize,
    /// Optional flat key=value config file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HaarArg {
    Probability,
    UnitLattice,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Root-system data for one simple type.
    Rootsys {
        #[command(subcommand)]
        sub: RootsysSub,
    },
    /// Weyl group enumeration.
    Weyl {
        #[command(subcommand)]
        sub: WeylSub,
    },
    /// BKS pairing of admissible conjugacy classes.
    Pairing {
        #[command(flatten)]
        common: CommonArgs,
        /// beta as comma-separated simple-root coordinates "p/q,...".
        #[arg(long)]
        beta: Option<String>,
        /// beta' in the same format.
        #[arg(long)]
        beta_prime: Option<String>,
        /// Full table over all admissible pairs at level k.
        #[arg(long, default_value_t = false)]
        table: bool,
    },
    /// Verification suites.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Which suite: densities|signs|oracles|all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Trials per randomized property.
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum RootsysSub {
    Info {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum WeylSub {
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Read a flat key=value config file (comments with '#', blank lines ok).
fn read_config_file(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Validation(format!("config file line {}: expected key=value", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Build the validated RunConfig from flags, config file, and environment.
/// Precedence: explicit flags > config file > BKS_CACHE_DIR > defaults.
pub fn resolve_config(common: &CommonArgs, explicit: &[String]) -> Result<RunConfig> {
    let mut type_letter = common.type_letter;
    let mut rank = common.rank;
    let mut k = common.k;
    let mut seed = common.seed;
    let mut haar = common.haar;
    let mut phase_k = common.phase_k;
    let mut output = common.output;
    let mut max_weyl = common.max_weyl;
    let mut cache_dir = common.cache_dir.clone();

    if let Some(path) = &common.config {
        let file = read_config_file(path)?;
        let overridden = |flag: &str| explicit.iter().any(|f| f == flag);
        for (key, value) in &file {
            let bad = |what: &str| Error::Validation(format!("config file: bad {what}: {value}"));
            match key.as_str() {
                "type" if !overridden("type") => {
                    type_letter = value.chars().next().ok_or_else(|| bad("type"))?
                }
                "rank" if !overridden("rank") => rank = value.parse().map_err(|_| bad("rank"))?,
                "k" if !overridden("k") => k = value.parse().map_err(|_| bad("k"))?,
                "seed" if !overridden("seed") => seed = value.parse().map_err(|_| bad("seed"))?,
                "haar" if !overridden("haar") => {
                    haar = match value.as_str() {
                        "probability" => HaarArg::Probability,
                        "unit-lattice" => HaarArg::UnitLattice,
                        _ => return Err(bad("haar")),
                    }
                }
                "phase-k" if !overridden("phase-k") => {
                    phase_k = value.parse().map_err(|_| bad("phase-k"))?
                }
                "output" if !overridden("output") => {
                    output = match value.as_str() {
                        "json" => OutputFormat::Json,
                        "csv" => OutputFormat::Csv,
                        _ => return Err(bad("output")),
                    }
                }
                "max-weyl" if !overridden("max-weyl") => {
                    max_weyl = value.parse().map_err(|_| bad("max-weyl"))?
                }
                "cache-dir" if !overridden("cache-dir") => {
                    cache_dir = Some(PathBuf::from(value))
                }
                _ => {} // unknown keys are ignored, flags already took precedence
            }
        }
    }
    if cache_dir.is_none() {
        if let Ok(env_dir) = std::env::var("BKS_CACHE_DIR") {
            if !env_dir.is_empty() {
                cache_dir = Some(PathBuf::from(env_dir));
            }
        }
    }
    if k < 1 {
        return Err(Error::Validation(format!("level k must be >= 1, got {k}")));
    }
    Ok(RunConfig {
        type_letter,
        rank,
        k,
        conventions: Conventions {
            haar: match haar {
                HaarArg::Probability => Haar::Probability,
                HaarArg::UnitLattice => Haar::UnitLattice,
            },
            phase_k,
        },
        seed,
        weyl_cache_dir: cache_dir,
        output,
        max_weyl,
    })
}

fn parse_beta(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(|t| rat::rat_from_string(t.trim())).collect()
}

/// Exit code mapping: 0 success, 2 validation, 3 check failure, 4 resource
/// cap.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Validation(_) => 2,
        Error::Check(_) => 3,
        Error::ResourceCap(_) => 4,
        Error::Io(_) | Error::Serde(_) => 2,
    }
}

/// Execute a parsed command; returns (rendered output, exit code).
pub fn execute(args: CliArgs, explicit: &[String]) -> (String, i32) {
    let run = || -> Result<(String, i32)> {
        let (record, output) = match &args.command {
            Command::Rootsys { sub: RootsysSub::Info { common } } => {
                let config = resolve_config(common, explicit)?;
                (cmd_rootsys_info(&config)?, config.output)
            }
            Command::Weyl { sub: WeylSub::Enumerate { common } } => {
                let config = resolve_config(common, explicit)?;
                (cmd_weyl_enumerate(&config)?, config.output)
            }
            Command::Pairing { common, beta, beta_prime, table } => {
                let config = resolve_config(common, explicit)?;
                let b = beta.as_deref().map(parse_beta).transpose()?;
                let bp = beta_prime.as_deref().map(parse_beta).transpose()?;
                (cmd_pairing(&config, b, bp, *table)?, config.output)
            }
            Command::Verify { common, suite, trials } => {
                let config = resolve_config(common, explicit)?;
                (cmd_verify(&config, suite, *trials)?, config.output)
            }
        };
        let rendered = match output {
            OutputFormat::Json => serde_json::to_string_pretty(&record)?,
            OutputFormat::Csv => pairing_csv(&record)?,
        };
        let code = if record.all_pass() { 0 } else { 3 };
        Ok((rendered, code))
    };
    match run() {
        Ok((text, code)) => (text, code),
        Err(e) => (format!("error: {e}"), exit_code_for(&e)),
    }
}

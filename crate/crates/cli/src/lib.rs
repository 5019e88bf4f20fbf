//! Command implementations and report types for the `pepin` binary.
//!
//! Exit codes: 0 success, 1 input error, 2 parameter error, 3 internal
//! invariant violation, 4 verification below the `1 - delta` target.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use pepin::{
    count, exact_count, generate_random, parse_dnf_with, serialize, Backend, CountError, CounterConfig,
    DnfFormula, ExactMethod, GenerateError, OracleError, ParseOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod mem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Parameter(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Parameter(_) => EXIT_PARAMETER,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Parameter(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CountError> for CliError {
    fn from(e: CountError) -> Self {
        match e {
            CountError::InvalidEpsilon(_) | CountError::InvalidDelta(_) => CliError::Parameter(e.to_string()),
            CountError::NoCubes => CliError::Input(e.to_string()),
            CountError::ExponentOverflow { .. } | CountError::Store(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        CliError::Parameter(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Reads and parses a formula file.
pub fn load_formula(path: &Path, allow_tautology: bool) -> Result<DnfFormula, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_dnf_with(&bytes, ParseOptions { allow_tautology })
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Outcome of one `count` run, as printed under `--json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub file: PathBuf,
    pub n: u32,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub thresh: u64,
    pub seed: u64,
    /// Exact decimal estimate, `final_size * 2^final_k`.
    pub count: String,
    pub final_k: u64,
    pub final_size: u64,
    pub elapsed_seconds: f64,
    pub backend: String,
}

impl RunReport {
    pub fn count_value(&self) -> Option<BigUint> {
        self.count.parse().ok()
    }

    /// The report with the fields that legitimately differ between
    /// equivalent runs (timing and backend name) blanked, as JSON.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.elapsed_seconds = 0.0;
        r.backend.clear();
        serde_json::to_string(&r).expect("report serializes")
    }

    pub fn to_human(&self) -> String {
        format!(
            "{}\ncount    {}\n         ~ {}\nthresh   {}  final |X| {}  k {}\nseed     {}  backend {}  eps {}  delta {}\ntime     {:.3}s\n",
            self.file.display(),
            self.count,
            scientific(&self.count),
            self.thresh,
            self.final_size,
            self.final_k,
            self.seed,
            self.backend,
            self.epsilon,
            self.delta,
            self.elapsed_seconds,
        )
    }
}

/// `1.234 x 10^e` rendering of a decimal integer string.
pub fn scientific(digits: &str) -> String {
    let exp = digits.len() - 1;
    let mut mantissa = digits[..1].to_string();
    if digits.len() > 1 {
        mantissa.push('.');
        mantissa.push_str(&digits[1..digits.len().min(4)]);
    }
    format!("{mantissa} x 10^{exp}")
}

#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub backend: Backend,
    pub allow_tautology: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        let c = CounterConfig::default();
        Self {
            epsilon: c.epsilon,
            delta: c.delta,
            seed: c.seed,
            backend: c.backend,
            allow_tautology: false,
        }
    }
}

impl CountOptions {
    pub fn validate(&self) -> Result<(), CliError> {
        Ok(self.config().validate()?)
    }

    fn config(&self) -> CounterConfig {
        CounterConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            backend: self.backend,
        }
    }
}

/// Counts an already-parsed formula.
pub fn count_formula(file: &Path, formula: &DnfFormula, opts: &CountOptions) -> Result<RunReport, CliError> {
    let est = count(formula, &opts.config())?;
    Ok(RunReport {
        file: file.to_path_buf(),
        n: formula.num_vars(),
        m: formula.num_cubes(),
        epsilon: opts.epsilon,
        delta: opts.delta,
        thresh: est.thresh,
        seed: est.seed,
        count: est.count.to_string(),
        final_k: est.final_k,
        final_size: est.final_size,
        elapsed_seconds: est.elapsed.as_secs_f64(),
        backend: opts.backend.to_string(),
    })
}

pub fn cmd_count(file: &Path, opts: &CountOptions) -> Result<RunReport, CliError> {
    opts.validate()?;
    let formula = load_formula(file, opts.allow_tautology)?;
    count_formula(file, &formula, opts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactReport {
    pub file: PathBuf,
    pub method: String,
    pub count: String,
}

pub fn cmd_exact(file: &Path, method: Option<ExactMethod>, allow_tautology: bool) -> Result<ExactReport, CliError> {
    let formula = load_formula(file, allow_tautology)?;
    let exact = exact_count(&formula, method)?;
    Ok(ExactReport {
        file: file.to_path_buf(),
        method: exact.method.to_string(),
        count: exact.count.to_string(),
    })
}

/// Generates a random formula and writes it to `out`, or returns the text
/// when `out` is `None`.
pub fn cmd_gen(vars: u32, cubes: usize, width: usize, seed: u64, out: Option<&Path>) -> Result<String, CliError> {
    let formula = generate_random(vars, cubes, width, seed)?;
    let text = serialize(&formula);
    if let Some(path) = out {
        fs::write(path, &text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySample {
    pub seed: u64,
    pub count: String,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub file: PathBuf,
    pub runs: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub exact: String,
    pub method: String,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    pub fraction_within: f64,
    pub passed: bool,
    pub samples: Vec<VerifySample>,
}

/// `|estimate / exact - 1|`; zero when both are zero.
pub fn relative_error(estimate: &BigUint, exact: &BigUint) -> f64 {
    if exact.bits() == 0 {
        return if estimate.bits() == 0 { 0.0 } else { f64::INFINITY };
    }
    (ratio(estimate, exact) - 1.0).abs()
}

fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    // shift both so the larger has ~64 significant bits; f64 then holds
    // the quotient to full precision
    let shift = a.bits().max(b.bits()).saturating_sub(64);
    let a = u64::try_from(a >> shift).unwrap() as f64;
    let b = u64::try_from(b >> shift).unwrap() as f64;
    a / b
}

/// Runs seeds `base, base+1, ..., base+runs-1` in parallel and compares
/// each estimate with the exact count. Results are ordered by seed.
pub fn verify_formula(
    file: &Path,
    formula: &DnfFormula,
    runs: usize,
    base_seed: u64,
    opts: &CountOptions,
) -> Result<VerifySummary, CliError> {
    opts.config().validate()?;
    if runs == 0 {
        return Err(CliError::Parameter("--runs must be at least 1".into()));
    }
    let exact = exact_count(formula, None)?;
    let samples = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let est = count(formula, &CounterConfig { seed, ..opts.config() })?;
            Ok(VerifySample {
                seed,
                relative_error: relative_error(&est.count, &exact.count),
                count: est.count.to_string(),
            })
        })
        .collect::<Result<Vec<_>, CountError>>()?;

    let within = samples.iter().filter(|s| s.relative_error <= opts.epsilon).count();
    let fraction_within = within as f64 / runs as f64;
    let mean = samples.iter().map(|s| s.relative_error).sum::<f64>() / runs as f64;
    let max = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
    Ok(VerifySummary {
        file: file.to_path_buf(),
        runs,
        epsilon: opts.epsilon,
        delta: opts.delta,
        exact: exact.count.to_string(),
        method: exact.method.to_string(),
        mean_relative_error: mean,
        max_relative_error: max,
        fraction_within,
        passed: fraction_within >= 1.0 - opts.delta,
        samples,
    })
}

pub fn cmd_verify(file: &Path, runs: usize, base_seed: u64, opts: &CountOptions) -> Result<VerifySummary, CliError> {
    let formula = load_formula(file, opts.allow_tautology)?;
    verify_formula(file, &formula, runs, base_seed, opts)
}

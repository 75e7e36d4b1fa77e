use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use qcat::tlcat::pair_constraint_residual;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctorKind {
    Embedding,
    WeightZero,
    Fiber,
    UserFile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Axioms,
    Bounds,
    Algebra,
    Subgroup,
    Commutativity,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Axioms,
        Check::Bounds,
        Check::Algebra,
        Check::Subgroup,
        Check::Commutativity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Axioms => "axioms",
            Check::Bounds => "bounds",
            Check::Algebra => "algebra",
            Check::Subgroup => "subgroup",
            Check::Commutativity => "commutativity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Build a quasitensor functor, run the verification suites and write a report.
#[derive(Parser, Debug)]
#[command(name = "qcat", version)]
pub struct Cli {
    /// Deformation parameter, 0 < mu <= 1.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,

    #[arg(long, value_enum, default_value = "weight-zero")]
    pub functor: FunctorKind,

    /// Pair parameters lambda_k of the fiber datum, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub fiber_pairs: Vec<f64>,

    /// Expected fiber dimension; must be even and equal twice the number of pairs.
    #[arg(long)]
    pub fiber_dim: Option<usize>,

    /// Functor file for `--functor user-file`.
    #[arg(long)]
    pub functor_file: Option<PathBuf>,

    /// Largest spectral grade of the algebra; the functor is compressed up to twice this.
    #[arg(long, default_value_t = 2)]
    pub max_spin: usize,

    /// Largest total word length for the word-level checks.
    #[arg(long, default_value_t = 4)]
    pub max_word: usize,

    /// Residual tolerance for every check.
    #[arg(long, env = "QCAT_TOL", default_value_t = 1e-8)]
    pub tol: f64,

    /// Checks to run, comma separated; empty means all.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Vec<Check>,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Report path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Seed for the sampled algebra checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub mu: f64,
    pub functor: FunctorKind,
    pub fiber_pairs: Vec<f64>,
    pub functor_file: Option<PathBuf>,
    pub max_spin: usize,
    pub max_word: usize,
    pub tol: f64,
    pub checks: Vec<Check>,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub seed: u64,
}

pub fn validate_config(cli: Cli) -> Result<RunConfig, String> {
    if !(cli.mu > 0.0 && cli.mu <= 1.0) {
        return Err(format!("mu must satisfy 0 < mu <= 1, got {}", cli.mu));
    }
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(format!("tolerance must be positive, got {}", cli.tol));
    }
    if cli.max_spin == 0 {
        return Err("max-spin must be at least 1".into());
    }
    if cli.max_word == 0 || cli.max_word > 8 {
        return Err(format!("max-word must be in 1..=8, got {}", cli.max_word));
    }
    match cli.functor {
        FunctorKind::Fiber => {
            if cli.fiber_pairs.is_empty() {
                return Err("--functor fiber needs --fiber-pairs".into());
            }
            if let Some(d) = cli.fiber_dim {
                if d % 2 == 1 {
                    return Err(format!("fiber dimension {d} is odd; j^2 = -mu has no odd solutions"));
                }
                if d != 2 * cli.fiber_pairs.len() {
                    return Err(format!(
                        "fiber dimension {d} does not match {} pair blocks",
                        cli.fiber_pairs.len()
                    ));
                }
            }
            if cli.fiber_pairs.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err("fiber pair parameters must be positive".into());
            }
            let residual = pair_constraint_residual(cli.mu, &cli.fiber_pairs);
            if residual.abs() > 1e-9 {
                return Err(format!(
                    "fiber pairs violate sum(l^2 + mu^2/l^2) = 1 + mu^2: residual {residual:e}"
                ));
            }
        }
        FunctorKind::UserFile => {
            if cli.functor_file.is_none() {
                return Err("--functor user-file needs --functor-file".into());
            }
        }
        _ => {
            if !cli.fiber_pairs.is_empty() || cli.fiber_dim.is_some() {
                return Err("fiber options given for a non-fiber functor".into());
            }
        }
    }
    if cli.functor != FunctorKind::UserFile && cli.functor_file.is_some() {
        return Err("--functor-file is only used with --functor user-file".into());
    }
    let mut checks = cli.checks;
    if checks.is_empty() {
        checks = Check::ALL.to_vec();
    }
    checks.sort();
    checks.dedup();
    Ok(RunConfig {
        mu: cli.mu,
        functor: cli.functor,
        fiber_pairs: cli.fiber_pairs,
        functor_file: cli.functor_file,
        max_spin: cli.max_spin,
        max_word: cli.max_word,
        tol: cli.tol,
        checks,
        format: cli.format,
        output: cli.output,
        seed: cli.seed,
    })
}

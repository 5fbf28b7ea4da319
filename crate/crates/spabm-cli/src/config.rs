//! Shared flag groups, the sweep configuration file, seeding, and hashing.

use clap::{Args, ValueEnum};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use spabm::estimator::penalty::{PenaltyParams, PenaltyVariant};
use spabm::ssc::SscConfig;

use crate::errors::{CliError, CliResult};

/// Derives one run seed from a base seed and two run coordinates, so grid
/// cells and repetitions get decorrelated streams no matter how the work is
/// scheduled.
pub fn mix_seed(base: u64, cell: u64, rep: u64) -> u64 {
    fn scramble(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }
    scramble(scramble(scramble(base) ^ cell.wrapping_mul(0xA24B_AED4_963E_E407)) ^ rep)
}

/// Hex SHA-256 of a canonical description of the run configuration. Output
/// files carry it so results can be traced back to exact settings.
pub fn config_hash(canonical: impl AsRef<[u8]>) -> String {
    let digest = Sha256::digest(canonical.as_ref());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Subspace-clustering knobs shared by the fitting commands.
#[derive(Args, Debug, Clone)]
pub struct SscArgs {
    /// L1 weight of the self-representation solver; defaults from density
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Squared-L2 weight of the self-representation solver
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Coordinate-descent stopping tolerance
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Coordinate-descent sweep budget per column
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// k-means restarts
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Lloyd iteration budget per restart
    #[arg(long, default_value_t = 300)]
    pub kmeans_iters: usize,
    /// Keep raw eigenvector rows instead of normalizing them
    #[arg(long)]
    pub no_row_normalize: bool,
}

impl SscArgs {
    pub fn to_config(&self) -> SscConfig<f64> {
        SscConfig {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            row_normalize: !self.no_row_normalize,
            restarts: self.restarts,
            kmeans_iters: self.kmeans_iters,
        }
    }

    /// Canonical one-line form for config hashing.
    pub fn describe(&self) -> String {
        format!(
            "gamma1={:?} gamma2={:?} tol={} max_sweeps={} restarts={} kmeans_iters={} row_normalize={}",
            self.gamma1,
            self.gamma2,
            self.tol,
            self.max_sweeps,
            self.restarts,
            self.kmeans_iters,
            !self.no_row_normalize
        )
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyChoice {
    Separable,
    Nonseparable,
    Empirical,
}

/// Penalty knobs for commands that score models.
#[derive(Args, Debug, Clone)]
pub struct PenaltyArgs {
    /// Penalty variant; experiments use the empirical one
    #[arg(long, value_enum, default_value_t = PenaltyChoice::Empirical)]
    pub penalty: PenaltyChoice,
    /// Weight of the support terms
    #[arg(long, default_value_t = 1.0)]
    pub beta1: f64,
    /// Weight of the clustering terms
    #[arg(long, default_value_t = 1.0)]
    pub beta2: f64,
}

impl PenaltyArgs {
    pub fn to_params(&self) -> PenaltyParams<f64> {
        PenaltyParams {
            beta1: self.beta1,
            beta2: self.beta2,
            variant: match self.penalty {
                PenaltyChoice::Separable => PenaltyVariant::Separable,
                PenaltyChoice::Nonseparable => PenaltyVariant::NonSeparable,
                PenaltyChoice::Empirical => PenaltyVariant::Empirical,
            },
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "penalty={:?} beta1={} beta2={}",
            self.penalty, self.beta1, self.beta2
        )
    }
}

/// Parses a candidate range: either an inclusive span `2..6` (or `2..=6`)
/// or a comma list `2,3,5`.
pub fn parse_k_range(text: &str) -> CliResult<Vec<usize>> {
    let bad = |m: String| CliError::Usage(m);
    let parse_one = |tok: &str| -> CliResult<usize> {
        tok.trim()
            .parse()
            .map_err(|_| bad(format!("cannot parse K value {tok:?}")))
    };
    let values = if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(bad(format!("empty K range {text:?}")));
        }
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(parse_one)
            .collect::<CliResult<Vec<_>>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(bad(format!("K range {text:?} must list positive values")));
    }
    Ok(values)
}

/// Parses explicit community sizes `a,b,c`.
pub fn parse_sizes(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("cannot parse community size {tok:?}")))
        })
        .collect()
}

/// Experiment file for `sweep`: a parameter grid, a repetition count, a
/// base seed, and optional solver settings. Unknown keys are rejected.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base_seed: u64,
    pub reps: usize,
    pub grid: GridConfig,
    #[serde(default)]
    pub ssc: SscSection,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub sigma: Vec<f64>,
    pub omega: Vec<f64>,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct SscSection {
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub restarts: Option<usize>,
    pub kmeans_iters: Option<usize>,
    pub row_normalize: Option<bool>,
}

impl SscSection {
    pub fn to_config(&self) -> SscConfig<f64> {
        let base = SscConfig::default();
        SscConfig {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            tol: self.tol.unwrap_or(base.tol),
            max_sweeps: self.max_sweeps.unwrap_or(base.max_sweeps),
            row_normalize: self.row_normalize.unwrap_or(base.row_normalize),
            restarts: self.restarts.unwrap_or(base.restarts),
            kmeans_iters: self.kmeans_iters.unwrap_or(base.kmeans_iters),
        }
    }
}

impl SweepConfig {
    pub fn load(path: &std::path::Path) -> CliResult<(Self, String)> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::Data(format!("reading config {}: {e}", path.display()))
        })?;
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Data(format!("config {} is not UTF-8", path.display())))?;
        let config: SweepConfig = toml::from_str(&text)
            .map_err(|e| CliError::Data(format!("parsing config {}: {e}", path.display())))?;
        config.validate()?;
        // Hash the file bytes themselves: comments and formatting count as
        // part of the recorded configuration.
        Ok((config, config_hash(&text)))
    }

    fn validate(&self) -> CliResult<()> {
        let g = &self.grid;
        if g.n.is_empty() || g.k.is_empty() || g.sigma.is_empty() || g.omega.is_empty() {
            return Err(CliError::Usage(
                "sweep grid must list at least one value per axis".into(),
            ));
        }
        if self.reps == 0 {
            return Err(CliError::Usage("sweep needs reps >= 1".into()));
        }
        Ok(())
    }

    /// Grid cells in file order: n outermost, then k, sigma, omega.
    pub fn cells(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.grid.n {
            for &k in &self.grid.k {
                for &sigma in &self.grid.sigma {
                    for &omega in &self.grid.omega {
                        out.push((n, k, sigma, omega));
                    }
                }
            }
        }
        out
    }
}

/// Builds a rayon pool honoring `--workers`; `None` keeps the default.
pub fn thread_pool(workers: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))
}

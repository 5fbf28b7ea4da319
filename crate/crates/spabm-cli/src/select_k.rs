//! `select-k`: repeated data-driven choice of the community count.
//!
//! Two input modes. With `--adjacency` the same network is re-analyzed and
//! only the pipeline seed varies across repetitions. With the generator
//! flags (`--n --k-true --sigma --omega`) every repetition draws a fresh
//! network, which is what frequency tables over an ensemble call for.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use spabm::model_select::{default_k_range, select_k};
use spabm::net::AdjacencyMatrix;
use spabm::synth::{generate_instance, GeneratorConfig};

use crate::config::{config_hash, mix_seed, parse_k_range, thread_pool, PenaltyArgs, SscArgs};
use crate::errors::{CliError, CliResult};
use crate::outfiles::{ensure_dir, read_adjacency, write_file};

#[derive(Args, Debug)]
pub struct SelectKArgs {
    /// Adjacency matrix file to re-analyze across repetitions
    #[arg(long, conflicts_with_all = ["n", "k_true", "sigma", "omega"])]
    pub adjacency: Option<PathBuf>,
    /// Generator mode: number of nodes
    #[arg(long, requires_all = ["k_true", "sigma", "omega"])]
    pub n: Option<usize>,
    /// Generator mode: true number of communities
    #[arg(long)]
    pub k_true: Option<usize>,
    /// Generator mode: fraction of cross-community popularity entries kept
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Generator mode: scale applied to the surviving entries
    #[arg(long)]
    pub omega: Option<f64>,
    /// Candidate values, `2..6`, `2..=6`, or `2,3,5`; default `2..=min(10, n/10)`
    #[arg(long)]
    pub k_range: Option<String>,
    /// Repetitions
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Base seed; per-repetition seeds are derived from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[command(flatten)]
    pub ssc: SscArgs,
    /// Worker threads; default uses every core
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory receiving frequencies.csv and selections.csv
    #[arg(long)]
    pub out_dir: PathBuf,
}

struct Selection {
    rep: usize,
    gen_seed: Option<u64>,
    fit_seed: u64,
    outcome: Result<usize, String>,
}

fn sanitize(text: &str) -> String {
    text.replace(',', ";").replace(['\n', '\r'], " ")
}

enum Input {
    File(AdjacencyMatrix<f64>),
    Generate { n: usize, k: usize, sigma: f64, omega: f64 },
}

fn resolve_input(args: &SelectKArgs) -> CliResult<(Input, String)> {
    match (&args.adjacency, args.n) {
        (Some(path), None) => {
            let bytes = fs::read(path)
                .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
            let a = read_adjacency(path)?;
            Ok((Input::File(a), format!("adjacency_sha256={}", config_hash(&bytes))))
        }
        (None, Some(n)) => {
            let k = args.k_true.expect("clap enforces requires_all");
            let sigma = args.sigma.expect("clap enforces requires_all");
            let omega = args.omega.expect("clap enforces requires_all");
            Ok((
                Input::Generate { n, k, sigma, omega },
                format!("generate n={n} k={k} sigma={sigma} omega={omega}"),
            ))
        }
        _ => Err(CliError::Usage(
            "pass either --adjacency FILE or the generator flags --n --k-true --sigma --omega"
                .into(),
        )),
    }
}

pub fn run(args: &SelectKArgs) -> CliResult<()> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let (input, input_desc) = resolve_input(args)?;
    let n = match &input {
        Input::File(a) => a.n(),
        Input::Generate { n, .. } => *n,
    };
    let candidates = match &args.k_range {
        Some(text) => parse_k_range(text)?,
        None => default_k_range(n).collect(),
    };
    let params = args.penalty.to_params();
    let config = args.ssc.to_config();

    let canonical = format!(
        "select-k {input_desc} k_range={candidates:?} reps={} seed={} {} {}",
        args.reps,
        args.seed,
        args.penalty.describe(),
        args.ssc.describe()
    );
    let hash = config_hash(&canonical);

    let pool = thread_pool(args.workers)?;
    let mut selections: Vec<Selection> = pool.install(|| {
        (0..args.reps)
            .into_par_iter()
            .map(|rep| {
                let (gen_seed, fit_seed, outcome) = match &input {
                    Input::File(a) => {
                        let fit_seed = mix_seed(args.seed, 0, rep as u64);
                        let got = select_k(a, candidates.iter().copied(), &params, fit_seed, &config);
                        (None, fit_seed, got)
                    }
                    Input::Generate { n, k, sigma, omega } => {
                        let gen_seed = mix_seed(args.seed, 1, rep as u64);
                        let fit_seed = mix_seed(args.seed, 2, rep as u64);
                        let got = generate_instance(&GeneratorConfig {
                            n: *n,
                            k: *k,
                            sigma: *sigma,
                            omega: *omega,
                            seed: gen_seed,
                            sizes: None,
                        })
                        .and_then(|instance| {
                            select_k(
                                &instance.adjacency,
                                candidates.iter().copied(),
                                &params,
                                fit_seed,
                                &config,
                            )
                        });
                        (Some(gen_seed), fit_seed, got)
                    }
                };
                Selection {
                    rep,
                    gen_seed,
                    fit_seed,
                    outcome: outcome
                        .map(|r| r.k_hat)
                        .map_err(|e| sanitize(&e.to_string())),
                }
            })
            .collect()
    });
    selections.sort_by_key(|s| s.rep);

    let ok: Vec<usize> = selections
        .iter()
        .filter_map(|s| s.outcome.as_ref().ok().copied())
        .collect();
    if ok.is_empty() {
        let first = selections
            .iter()
            .find_map(|s| s.outcome.as_ref().err().cloned())
            .unwrap_or_default();
        return Err(CliError::Numerical(format!(
            "every repetition failed; first failure: {first}"
        )));
    }

    ensure_dir(&args.out_dir)?;
    let comments = [
        "tool=spabm-select-k".to_string(),
        format!("config_hash={hash}"),
        format!("seed={}", args.seed),
    ];

    write_file(&args.out_dir, "selections.csv", |out| {
        for c in &comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        out.extend_from_slice(b"rep,gen_seed,fit_seed,status,k_hat\n");
        for s in &selections {
            let gen_seed = s.gen_seed.map(|v| v.to_string()).unwrap_or_default();
            let (status, k_hat) = match &s.outcome {
                Ok(k) => ("ok".to_string(), k.to_string()),
                Err(text) => (text.clone(), String::new()),
            };
            out.extend_from_slice(
                format!("{},{},{},{},{}\n", s.rep + 1, gen_seed, s.fit_seed, status, k_hat)
                    .as_bytes(),
            );
        }
        Ok(())
    })?;

    write_file(&args.out_dir, "frequencies.csv", |out| {
        for c in &comments {
            out.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        out.extend_from_slice(b"k,count,frequency\n");
        for &k in &candidates {
            let count = ok.iter().filter(|&&v| v == k).count();
            let frequency = count as f64 / ok.len() as f64;
            out.extend_from_slice(format!("{k},{count},{frequency}\n").as_bytes());
        }
        Ok(())
    })?;

    let failures = selections.len() - ok.len();
    let (mode_k, mode_count) = candidates
        .iter()
        .map(|&k| (k, ok.iter().filter(|&&v| v == k).count()))
        .max_by_key(|&(k, count)| (count, std::cmp::Reverse(k)))
        .expect("candidates is nonempty");
    println!(
        "select-k: K={mode_k} chosen {mode_count}/{} times ({} failed reps); results in {}",
        ok.len(),
        failures,
        args.out_dir.display()
    );
    Ok(())
}

//! `fit`: run the full pipeline on an adjacency file.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use spabm::estimator::fit_with_clustering;
use spabm::ssc::cluster_network;
use spabm::{io, metrics};

use crate::config::{config_hash, SscArgs};
use crate::errors::{at_stage, CliError, CliResult};
use crate::outfiles::{ensure_dir, metadata, read_adjacency, write_file};
use crate::report::{permutation_1based, read_labels_file, read_matrix_file, threshold_zeros, Report};

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Adjacency matrix file
    #[arg(long)]
    pub adjacency: PathBuf,
    /// Number of communities to fit
    #[arg(long)]
    pub k: usize,
    /// Pipeline seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ssc: SscArgs,
    /// True labels file; turns on the evaluation report
    #[arg(long)]
    pub truth_labels: Option<PathBuf>,
    /// True probability matrix file; extends the report to matrix metrics
    #[arg(long, requires = "truth_labels")]
    pub truth_probability: Option<PathBuf>,
    /// Estimate entries at or below this magnitude count as zero
    #[arg(long, default_value_t = 0.0)]
    pub zero_eps: f64,
    /// Directory receiving the result files
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    let adjacency_bytes = fs::read(&args.adjacency)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", args.adjacency.display())))?;
    let a = read_adjacency(&args.adjacency)?;
    if args.zero_eps < 0.0 {
        return Err(CliError::Usage("--zero-eps must be nonnegative".into()));
    }

    let canonical = format!(
        "fit adjacency_sha256={} k={} seed={} zero_eps={} {}",
        config_hash(&adjacency_bytes),
        args.k,
        args.seed,
        args.zero_eps,
        args.ssc.describe()
    );
    let hash = config_hash(&canonical);
    let config = args.ssc.to_config();

    let (clustering, _) =
        cluster_network(&a, args.k, args.seed, &config).map_err(at_stage("clustering"))?;
    let fitted = fit_with_clustering(&a, &clustering).map_err(at_stage("estimation"))?;

    ensure_dir(&args.out_dir)?;
    let comments = metadata("fit", &hash, args.seed);
    write_file(&args.out_dir, "labels.txt", |out| {
        io::write_labels(out, &fitted.clustering, &comments)
    })?;
    write_file(&args.out_dir, "probability.txt", |out| {
        io::write_matrix(out, &fitted.probability.entries().view(), &comments)
    })?;
    write_file(&args.out_dir, "support.txt", |out| {
        io::write_support(out, &fitted.support, &comments)
    })?;

    let mut summary = format!(
        "fitted K={} to {} nodes; support rows kept: {}",
        args.k,
        a.n(),
        fitted.support.total()
    );

    if let Some(labels_path) = &args.truth_labels {
        let truth = read_labels_file(labels_path)?;
        let report = match &args.truth_probability {
            Some(prob_path) => {
                let p_star = read_matrix_file(prob_path)?;
                let mut p_hat = fitted.probability.entries().clone();
                threshold_zeros(&mut p_hat, args.zero_eps);
                let full = metrics::evaluate(
                    &p_hat.view(),
                    &p_star.view(),
                    &fitted.clustering,
                    &truth,
                )
                .map_err(at_stage("evaluation"))?;
                Report {
                    clustering_error: full.clustering_error,
                    matched_true_community: permutation_1based(&full.permutation, truth.k()),
                    estimation_error: Some(full.estimation_error),
                    false_positive_rate: Some(full.false_positive_rate),
                    false_negative_error: Some(full.false_negative_error),
                }
            }
            None => {
                let (err, permutation) = metrics::clustering_error(&fitted.clustering, &truth)
                    .map_err(at_stage("evaluation"))?;
                Report {
                    clustering_error: err,
                    matched_true_community: permutation_1based(&permutation, truth.k()),
                    estimation_error: None,
                    false_positive_rate: None,
                    false_negative_error: None,
                }
            }
        };
        let json = report.to_json()?;
        write_file(&args.out_dir, "report.json", |out| {
            out.extend_from_slice(json.as_bytes());
            out.push(b'\n');
            Ok(())
        })?;
        summary.push_str(&format!("; clustering error {}", report.clustering_error));
    }

    println!("{summary}");
    Ok(())
}

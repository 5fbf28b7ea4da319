//! `evaluate`: compare an estimated fit against ground truth files.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use spabm::metrics;

use crate::errors::{at_stage, CliError, CliResult};
use crate::report::{permutation_1based, read_labels_file, read_matrix_file, threshold_zeros, Report};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Estimated labels file
    #[arg(long)]
    pub estimated_labels: PathBuf,
    /// True labels file
    #[arg(long)]
    pub truth_labels: PathBuf,
    /// Estimated probability matrix; needs --truth-probability
    #[arg(long, requires = "truth_probability")]
    pub estimated_probability: Option<PathBuf>,
    /// True probability matrix; needs --estimated-probability
    #[arg(long, requires = "estimated_probability")]
    pub truth_probability: Option<PathBuf>,
    /// Estimate entries at or below this magnitude count as zero
    #[arg(long, default_value_t = 0.0)]
    pub zero_eps: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    if args.zero_eps < 0.0 {
        return Err(CliError::Usage("--zero-eps must be nonnegative".into()));
    }
    let est = read_labels_file(&args.estimated_labels)?;
    let truth = read_labels_file(&args.truth_labels)?;

    let report = match (&args.estimated_probability, &args.truth_probability) {
        (Some(est_path), Some(truth_path)) => {
            let mut p_hat = read_matrix_file(est_path)?;
            let p_star = read_matrix_file(truth_path)?;
            threshold_zeros(&mut p_hat, args.zero_eps);
            let full = metrics::evaluate(&p_hat.view(), &p_star.view(), &est, &truth)
                .map_err(at_stage("evaluation"))?;
            Report {
                clustering_error: full.clustering_error,
                matched_true_community: permutation_1based(&full.permutation, truth.k()),
                estimation_error: Some(full.estimation_error),
                false_positive_rate: Some(full.false_positive_rate),
                false_negative_error: Some(full.false_negative_error),
            }
        }
        _ => {
            let (err, permutation) =
                metrics::clustering_error(&est, &truth).map_err(at_stage("evaluation"))?;
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
    match &args.out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(())
}

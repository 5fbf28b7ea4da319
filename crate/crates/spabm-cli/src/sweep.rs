//! `sweep`: run a parameter grid of generate-fit-evaluate rounds.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use spabm::estimator::fit;
use spabm::metrics::{evaluate, EvaluationReport};
use spabm::synth::{generate_instance, GeneratorConfig};

use crate::config::{mix_seed, thread_pool, SweepConfig};
use crate::errors::CliResult;
use crate::outfiles::{ensure_dir, write_file};

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Experiment file: grid axes, repetitions, base seed, solver settings
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; default uses every core
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory receiving rows.csv and aggregate.csv
    #[arg(long)]
    pub out_dir: PathBuf,
}

struct Row {
    cell: usize,
    rep: usize,
    n: usize,
    k: usize,
    sigma: f64,
    omega: f64,
    seed: u64,
    outcome: Result<EvaluationReport<f64>, String>,
    wall_ms: u128,
}

/// Keeps error text on one CSV field.
fn sanitize(text: &str) -> String {
    text.replace(',', ";").replace(['\n', '\r'], " ")
}

fn run_one(
    cell: usize,
    rep: usize,
    n: usize,
    k: usize,
    sigma: f64,
    omega: f64,
    seed: u64,
    ssc: &spabm::ssc::SscConfig<f64>,
) -> Row {
    let started = Instant::now();
    let outcome = (|| {
        let instance = generate_instance(&GeneratorConfig {
            n,
            k,
            sigma,
            omega,
            seed,
            sizes: None,
        })?;
        let fitted = fit(&instance.adjacency, k, seed, ssc)?;
        evaluate(
            &fitted.probability.entries().view(),
            &instance.probability.entries().view(),
            &fitted.clustering,
            instance.clustering(),
        )
    })()
    .map_err(|e| sanitize(&e.to_string()));
    Row {
        cell,
        rep,
        n,
        k,
        sigma,
        omega,
        seed,
        outcome,
        wall_ms: started.elapsed().as_millis(),
    }
}

fn push_rows(out: &mut Vec<u8>, comments: &[String], rows: &[Row]) {
    for c in comments {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(
        b"n,k_true,sigma,omega,rep,seed,status,clustering_error,estimation_error,false_positive,false_negative,wall_ms\n",
    );
    for r in rows {
        let (status, ce, ee, fp, fn_) = match &r.outcome {
            Ok(report) => (
                "ok".to_string(),
                report.clustering_error.to_string(),
                report.estimation_error.to_string(),
                report.false_positive_rate.to_string(),
                report.false_negative_error.to_string(),
            ),
            Err(text) => (text.clone(), String::new(), String::new(), String::new(), String::new()),
        };
        out.extend_from_slice(
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.k,
                r.sigma,
                r.omega,
                r.rep + 1,
                r.seed,
                status,
                ce,
                ee,
                fp,
                fn_,
                r.wall_ms
            )
            .as_bytes(),
        );
    }
}

fn push_aggregate(out: &mut Vec<u8>, comments: &[String], cells: &[(usize, usize, f64, f64)], rows: &[Row]) {
    for c in comments {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(
        b"n,k_true,sigma,omega,reps_ok,mean_clustering_error,mean_estimation_error,mean_false_positive,mean_false_negative\n",
    );
    for (at, &(n, k, sigma, omega)) in cells.iter().enumerate() {
        let ok: Vec<&EvaluationReport<f64>> = rows
            .iter()
            .filter(|r| r.cell == at)
            .filter_map(|r| r.outcome.as_ref().ok())
            .collect();
        let mean = |f: &dyn Fn(&EvaluationReport<f64>) -> f64| -> String {
            if ok.is_empty() {
                String::new()
            } else {
                (ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64).to_string()
            }
        };
        out.extend_from_slice(
            format!(
                "{},{},{},{},{},{},{},{},{}\n",
                n,
                k,
                sigma,
                omega,
                ok.len(),
                mean(&|r| r.clustering_error),
                mean(&|r| r.estimation_error),
                mean(&|r| r.false_positive_rate),
                mean(&|r| r.false_negative_error),
            )
            .as_bytes(),
        );
    }
}

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let (config, hash) = SweepConfig::load(&args.config)?;
    let ssc = config.ssc.to_config();
    let cells = config.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|cell| (0..config.reps).map(move |rep| (cell, rep)))
        .collect();

    let pool = thread_pool(args.workers)?;
    let mut rows: Vec<Row> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, rep)| {
                let (n, k, sigma, omega) = cells[cell];
                let seed = mix_seed(config.base_seed, cell as u64, rep as u64);
                run_one(cell, rep, n, k, sigma, omega, seed, &ssc)
            })
            .collect()
    });
    // Scheduling must not leak into the files.
    rows.sort_by_key(|r| (r.cell, r.rep));

    ensure_dir(&args.out_dir)?;
    let comments = vec![
        "tool=spabm-sweep".to_string(),
        format!("config_hash={hash}"),
        format!("seed={}", config.base_seed),
    ];
    write_file(&args.out_dir, "rows.csv", |out| {
        push_rows(out, &comments, &rows);
        Ok(())
    })?;
    write_file(&args.out_dir, "aggregate.csv", |out| {
        push_aggregate(out, &comments, &cells, &rows);
        Ok(())
    })?;

    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    println!(
        "sweep finished: {ok}/{} runs ok across {} cells; results in {}",
        rows.len(),
        cells.len(),
        args.out_dir.display()
    );
    Ok(())
}

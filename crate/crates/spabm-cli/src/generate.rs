//! `generate`: write one synthetic instance to disk.

use std::path::PathBuf;

use clap::Args;
use spabm::io;
use spabm::synth::{generate_instance, GeneratorConfig, RNG_ALGORITHM};

use crate::config::{config_hash, parse_sizes};
use crate::errors::{classify, CliResult};
use crate::outfiles::{ensure_dir, metadata, write_file};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Number of nodes
    #[arg(long)]
    pub n: usize,
    /// Number of communities
    #[arg(long)]
    pub k: usize,
    /// Fraction of cross-community popularity entries kept nonzero
    #[arg(long)]
    pub sigma: f64,
    /// Scale applied to the surviving cross-community entries
    #[arg(long)]
    pub omega: f64,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit community sizes `a,b,c`; default is near-balanced
    #[arg(long)]
    pub sizes: Option<String>,
    /// Directory receiving the instance files
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let sizes = args.sizes.as_deref().map(parse_sizes).transpose()?;
    let config = GeneratorConfig {
        n: args.n,
        k: args.k,
        sigma: args.sigma,
        omega: args.omega,
        seed: args.seed,
        sizes,
    };
    let canonical = format!(
        "generate n={} k={} sigma={} omega={} seed={} sizes={:?} rng={RNG_ALGORITHM}",
        config.n, config.k, config.sigma, config.omega, config.seed, config.sizes
    );
    let hash = config_hash(&canonical);
    let instance = generate_instance(&config).map_err(classify)?;

    ensure_dir(&args.out_dir)?;
    let mut comments = metadata("generate", &hash, config.seed);
    comments.push(format!("rng={RNG_ALGORITHM}"));

    write_file(&args.out_dir, "adjacency.txt", |out| {
        io::write_matrix(out, &instance.adjacency.entries().view(), &comments)
    })?;
    write_file(&args.out_dir, "probability.txt", |out| {
        io::write_matrix(out, &instance.probability.entries().view(), &comments)
    })?;
    write_file(&args.out_dir, "lambda.txt", |out| {
        io::write_matrix(out, &instance.lambda.entries().view(), &comments)
    })?;
    write_file(&args.out_dir, "labels.txt", |out| {
        io::write_labels(out, instance.clustering(), &comments)
    })?;
    write_file(&args.out_dir, "support.txt", |out| {
        io::write_support(out, &instance.support, &comments)
    })?;

    println!(
        "generated n={} K={} network with {} edges into {}",
        config.n,
        config.k,
        instance.adjacency.edge_count(),
        args.out_dir.display()
    );
    Ok(())
}

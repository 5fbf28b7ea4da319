//! `ingest`: turn an edge-list file into a binary adjacency file.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use spabm::io::{self, ingest_edge_list};

use crate::config::config_hash;
use crate::errors::{classify, CliError, CliResult};
use crate::outfiles::{ensure_dir, metadata, write_file};

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Edge-list file: lines `i j` or `i j weight`, 1-based ids, `#` comments
    #[arg(long)]
    pub edges: PathBuf,
    /// Keep an edge when its weight magnitude exceeds this value
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Directory receiving adjacency.txt and nodes.txt
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &IngestArgs) -> CliResult<()> {
    let bytes = fs::read(&args.edges)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", args.edges.display())))?;
    let canonical = format!(
        "ingest edges_sha256={} threshold={}",
        config_hash(&bytes),
        args.threshold
    );
    let hash = config_hash(&canonical);

    let file = fs::File::open(&args.edges)
        .map_err(|e| CliError::Data(format!("opening {}: {e}", args.edges.display())))?;
    let report = ingest_edge_list(BufReader::new(file), args.threshold).map_err(classify)?;

    if report.self_loops_dropped > 0 {
        eprintln!("warning: dropped {} self-loop(s)", report.self_loops_dropped);
    }
    if report.duplicates_collapsed > 0 {
        eprintln!(
            "warning: collapsed {} duplicate edge listing(s)",
            report.duplicates_collapsed
        );
    }
    if report.below_threshold > 0 {
        eprintln!(
            "warning: discarded {} edge(s) at or below weight threshold {}",
            report.below_threshold, args.threshold
        );
    }

    ensure_dir(&args.out_dir)?;
    let comments = metadata("ingest", &hash, 0);
    write_file(&args.out_dir, "adjacency.txt", |out| {
        io::write_matrix(out, &report.adjacency.view(), &comments)
    })?;
    write_file(&args.out_dir, "nodes.txt", |out| {
        use std::io::Write;
        for c in &comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", report.node_ids.len())?;
        for (at, original) in report.node_ids.iter().enumerate() {
            writeln!(out, "{} {}", at + 1, original)?;
        }
        Ok(())
    })?;

    println!(
        "ingested {} nodes and {} edges into {}",
        report.node_ids.len(),
        report.edges,
        args.out_dir.display()
    );
    Ok(())
}

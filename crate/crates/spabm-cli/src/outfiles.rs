//! Output-directory plumbing shared by the commands.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use spabm::ndarray::Array2;
use spabm::net::AdjacencyMatrix;

use crate::errors::{classify, CliError, CliResult};

/// Creates the output directory (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Data(format!("creating {}: {e}", dir.display())))
}

/// Writes one file atomically enough for our purposes: build the bytes in
/// memory, then write in a single call.
pub fn write_file(
    dir: &Path,
    name: &str,
    fill: impl FnOnce(&mut Vec<u8>) -> spabm::Result<()>,
) -> CliResult<PathBuf> {
    let mut bytes = Vec::new();
    fill(&mut bytes).map_err(classify)?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Data(format!("writing {name}: {e}")))?;
    Ok(path)
}

/// Reads a matrix file and validates it as an adjacency matrix.
pub fn read_adjacency(path: &Path) -> CliResult<AdjacencyMatrix<f64>> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("opening {}: {e}", path.display())))?;
    let (entries, _): (Array2<f64>, _) = spabm::io::read_matrix(BufReader::new(file))
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
    AdjacencyMatrix::new(entries)
        .map_err(|e| CliError::Data(format!("validating {}: {e}", path.display())))
}

/// Standard metadata comment block carried by every output file.
pub fn metadata(tool: &str, hash: &str, seed: u64) -> Vec<String> {
    vec![
        format!("tool=spabm-{tool}"),
        format!("config_hash={hash}"),
        format!("seed={seed}"),
    ]
}

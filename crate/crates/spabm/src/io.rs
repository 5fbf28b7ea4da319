//! Plain-text file formats used by the command-line tools.
//!
//! All formats are line-based and diff-friendly. Lines starting with `#`
//! are comments; writers put them before the header, and readers hand them
//! back verbatim (without the marker) so metadata like seeds and config
//! hashes survives round trips. Numbers are written with Rust's shortest
//! round-trip formatting, so writing is deterministic and re-reading is
//! lossless.
//!
//! * matrix: header `n m`, then `n` rows of `m` space-separated values;
//! * labels: header `n K`, then `n` lines of 1-based community labels;
//! * support: header `K`, then one line per block in row-major order:
//!   `k l count pos...` with 1-based block indices and positions;
//! * edge list (read only): lines `i j` or `i j weight` with 1-based ids.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::Array2;

use crate::error::{Result, SpabmError};
use crate::net::{Clustering, SupportFamily};
use crate::scalar::Scalar;

fn parse_err(line: usize, message: impl Into<String>) -> SpabmError {
    SpabmError::Parse {
        line,
        message: message.into(),
    }
}

/// Lines of a text file split into leading comments and numbered content
/// lines (1-based, blank lines skipped).
struct Lines {
    comments: Vec<String>,
    content: Vec<(usize, String)>,
}

fn read_lines(reader: impl BufRead) -> Result<Lines> {
    let mut comments = Vec::new();
    let mut content = Vec::new();
    for (at, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            comments.push(rest.trim().to_string());
        } else {
            content.push((at + 1, trimmed.to_string()));
        }
    }
    Ok(Lines { comments, content })
}

fn write_comments(out: &mut impl Write, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    token: &str,
    line: usize,
    what: &str,
) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {token:?}")))
}

/// Writes a matrix with an `n m` header after the comment lines.
pub fn write_matrix<T: Scalar>(
    out: &mut impl Write,
    m: &ndarray::ArrayView2<'_, T>,
    comments: &[String],
) -> Result<()> {
    write_comments(out, comments)?;
    let (rows, cols) = m.dim();
    writeln!(out, "{rows} {cols}")?;
    for i in 0..rows {
        let mut line = String::new();
        for j in 0..cols {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&m[[i, j]].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a matrix written by [`write_matrix`], returning it with the
/// comment lines found in the file.
pub fn read_matrix<T: Scalar>(reader: impl BufRead) -> Result<(Array2<T>, Vec<String>)> {
    let lines = read_lines(reader)?;
    let Some(((header_at, header), rest)) = lines.content.split_first() else {
        return Err(parse_err(1, "missing matrix header"));
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(*header_at, "matrix header must be \"n m\""));
    }
    let rows: usize = parse_field(fields[0], *header_at, "row count")?;
    let cols: usize = parse_field(fields[1], *header_at, "column count")?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(*header_at, "matrix must be nonempty"));
    }
    if rest.len() != rows {
        return Err(parse_err(
            *header_at,
            format!("expected {rows} matrix rows, found {}", rest.len()),
        ));
    }
    let mut m = Array2::zeros((rows, cols));
    for (i, (at, line)) in rest.iter().enumerate() {
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != cols {
            return Err(parse_err(
                *at,
                format!("expected {cols} values, found {}", values.len()),
            ));
        }
        for (j, token) in values.iter().enumerate() {
            let x: f64 = parse_field(token, *at, "matrix entry")?;
            m[[i, j]] = T::real(x);
        }
    }
    Ok((m, lines.comments))
}

/// Writes community labels with an `n K` header, one 1-based label per line.
pub fn write_labels(out: &mut impl Write, z: &Clustering, comments: &[String]) -> Result<()> {
    write_comments(out, comments)?;
    writeln!(out, "{} {}", z.n(), z.k())?;
    for i in 0..z.n() {
        writeln!(out, "{}", z.label(i) + 1)?;
    }
    Ok(())
}

/// Reads a labels file written by [`write_labels`].
pub fn read_labels(reader: impl BufRead) -> Result<(Clustering, Vec<String>)> {
    let lines = read_lines(reader)?;
    let Some(((header_at, header), rest)) = lines.content.split_first() else {
        return Err(parse_err(1, "missing labels header"));
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(*header_at, "labels header must be \"n K\""));
    }
    let n: usize = parse_field(fields[0], *header_at, "node count")?;
    let k: usize = parse_field(fields[1], *header_at, "community count")?;
    if rest.len() != n {
        return Err(parse_err(
            *header_at,
            format!("expected {n} labels, found {}", rest.len()),
        ));
    }
    let mut labels = Vec::with_capacity(n);
    for (at, line) in rest {
        let label: usize = parse_field(line, *at, "label")?;
        if label == 0 || label > k {
            return Err(parse_err(
                *at,
                format!("label {label} outside 1..={k}"),
            ));
        }
        labels.push(label - 1);
    }
    Clustering::new(labels, k)
        .map(|z| (z, lines.comments))
        .map_err(|e| parse_err(*header_at, e.to_string()))
}

/// Writes a support family: header `K`, then `K*K` row-major lines of
/// `k l count pos...` with 1-based indices.
pub fn write_support(
    out: &mut impl Write,
    support: &SupportFamily,
    comments: &[String],
) -> Result<()> {
    write_comments(out, comments)?;
    let k = support.k();
    writeln!(out, "{k}")?;
    for a in 0..k {
        for b in 0..k {
            let set = support.set(a, b);
            let mut line = format!("{} {} {}", a + 1, b + 1, set.len());
            for &p in set {
                line.push(' ');
                line.push_str(&(p + 1).to_string());
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Reads a support file written by [`write_support`].
pub fn read_support(reader: impl BufRead) -> Result<(SupportFamily, Vec<String>)> {
    let lines = read_lines(reader)?;
    let Some(((header_at, header), rest)) = lines.content.split_first() else {
        return Err(parse_err(1, "missing support header"));
    };
    let k: usize = parse_field(header, *header_at, "community count")?;
    if k == 0 {
        return Err(parse_err(*header_at, "support needs at least one community"));
    }
    if rest.len() != k * k {
        return Err(parse_err(
            *header_at,
            format!("expected {} block lines, found {}", k * k, rest.len()),
        ));
    }
    let mut sets = vec![vec![Vec::new(); k]; k];
    for (cell, (at, line)) in rest.iter().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(*at, "block line must be \"k l count pos...\""));
        }
        let a: usize = parse_field(fields[0], *at, "block row")?;
        let b: usize = parse_field(fields[1], *at, "block column")?;
        let count: usize = parse_field(fields[2], *at, "position count")?;
        if (a, b) != (cell / k + 1, cell % k + 1) {
            return Err(parse_err(
                *at,
                format!(
                    "block ({a},{b}) out of order, expected ({},{})",
                    cell / k + 1,
                    cell % k + 1
                ),
            ));
        }
        if fields.len() != 3 + count {
            return Err(parse_err(
                *at,
                format!("declared {count} positions, found {}", fields.len() - 3),
            ));
        }
        let mut positions = Vec::with_capacity(count);
        for token in &fields[3..] {
            let p: usize = parse_field(token, *at, "support position")?;
            if p == 0 {
                return Err(parse_err(*at, "support positions are 1-based"));
            }
            positions.push(p - 1);
        }
        sets[a - 1][b - 1] = positions;
    }
    SupportFamily::new(sets)
        .map(|s| (s, lines.comments))
        .map_err(|e| parse_err(*header_at, e.to_string()))
}

/// What ingestion made of an edge-list file.
#[derive(Debug, Clone)]
pub struct IngestReport {
    /// Symmetric binary adjacency over the remapped nodes.
    pub adjacency: Array2<f64>,
    /// Original node id for each internal index, ascending.
    pub node_ids: Vec<u64>,
    /// Undirected edges kept.
    pub edges: usize,
    /// `i i` lines skipped.
    pub self_loops_dropped: usize,
    /// Repeated node pairs collapsed into their first occurrence.
    pub duplicates_collapsed: usize,
    /// Weighted lines whose magnitude stayed at or below the threshold.
    pub below_threshold: usize,
}

/// Parses an undirected edge list with 1-based ids and optional weights.
///
/// Weights are binarized: an edge is kept when `|weight| > threshold`
/// (unweighted lines count as weight one). Node ids are remapped to a
/// contiguous range in ascending id order; the mapping is reported.
pub fn ingest_edge_list(reader: impl BufRead, threshold: f64) -> Result<IngestReport> {
    let lines = read_lines(reader)?;
    let mut self_loops_dropped = 0usize;
    let mut below_threshold = 0usize;
    let mut duplicates_collapsed = 0usize;
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for (at, line) in &lines.content {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_err(*at, "edge line must be \"i j\" or \"i j weight\""));
        }
        let i: u64 = parse_field(fields[0], *at, "node id")?;
        let j: u64 = parse_field(fields[1], *at, "node id")?;
        if i == 0 || j == 0 {
            return Err(parse_err(*at, "node ids are 1-based"));
        }
        let weight: f64 = if fields.len() == 3 {
            parse_field(fields[2], *at, "edge weight")?
        } else {
            1.0
        };
        if i == j {
            self_loops_dropped += 1;
            continue;
        }
        if weight.abs() <= threshold {
            below_threshold += 1;
            continue;
        }
        pairs.push((i.min(j), i.max(j)));
    }
    if pairs.is_empty() {
        return Err(SpabmError::InvalidMatrix(
            "edge list holds no usable edges".into(),
        ));
    }
    let mut remap = BTreeMap::new();
    for &(i, j) in &pairs {
        remap.insert(i, 0usize);
        remap.insert(j, 0usize);
    }
    let node_ids: Vec<u64> = remap.keys().copied().collect();
    for (index, (_, slot)) in remap.iter_mut().enumerate() {
        *slot = index;
    }
    let n = node_ids.len();
    let mut adjacency = Array2::zeros((n, n));
    let mut edges = 0usize;
    for (i, j) in pairs {
        let a = remap[&i];
        let b = remap[&j];
        if adjacency[[a, b]] == 1.0 {
            duplicates_collapsed += 1;
            continue;
        }
        adjacency[[a, b]] = 1.0;
        adjacency[[b, a]] = 1.0;
        edges += 1;
    }
    Ok(IngestReport {
        adjacency,
        node_ids,
        edges,
        self_loops_dropped,
        duplicates_collapsed,
        below_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn round_trip_matrix(m: &Array2<f64>, comments: &[String]) -> (Array2<f64>, Vec<String>) {
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m.view(), comments).unwrap();
        read_matrix(buf.as_slice()).unwrap()
    }

    #[test]
    fn matrix_round_trip_is_lossless() {
        let m = array![
            [0.1 + 0.2, 1.0 / 3.0, 0.0],
            [5e-324, 1.0, 0.9999999999999999]
        ];
        let comments = vec!["seed=42".to_string(), "config_hash=abc".to_string()];
        let (back, got_comments) = round_trip_matrix(&m, &comments);
        assert_eq!(m, back);
        assert_eq!(got_comments, comments);
    }

    #[test]
    fn matrix_writing_is_deterministic() {
        let m = array![[0.25, 0.5], [0.5, 0.125]];
        let mut one = Vec::new();
        let mut two = Vec::new();
        write_matrix(&mut one, &m.view(), &[]).unwrap();
        write_matrix(&mut two, &m.view(), &[]).unwrap();
        assert_eq!(one, two);
        assert_eq!(String::from_utf8(one).unwrap(), "2 2\n0.25 0.5\n0.5 0.125\n");
    }

    #[test]
    fn matrix_parse_errors_carry_line_numbers() {
        let bad_header = "# note\n3\n";
        let err = read_matrix::<f64>(bad_header.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 2, .. }), "{err}");

        let bad_cell = "2 2\n0 1\n0 x\n";
        let err = read_matrix::<f64>(bad_cell.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 3, .. }), "{err}");

        let short_row = "2 3\n0 1 0\n0 1\n";
        let err = read_matrix::<f64>(short_row.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 3, .. }), "{err}");

        let missing_rows = "3 2\n0 1\n1 0\n";
        let err = read_matrix::<f64>(missing_rows.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn labels_round_trip() {
        let z = Clustering::new(vec![0, 2, 1, 1, 0], 3).unwrap();
        let mut buf = Vec::new();
        write_labels(&mut buf, &z, &["seed=7".to_string()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# seed=7\n5 3\n1\n3\n2\n2\n1\n");
        let (back, comments) = read_labels(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), z.labels());
        assert_eq!(back.k(), 3);
        assert_eq!(comments, vec!["seed=7".to_string()]);
    }

    #[test]
    fn labels_validate_range_and_coverage() {
        let out_of_range = "2 2\n1\n3\n";
        let err = read_labels(out_of_range.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 3, .. }), "{err}");

        // Label 2 never used: constructor rejects, surfaced as parse error.
        let uncovered = "2 2\n1\n1\n";
        assert!(read_labels(uncovered.as_bytes()).is_err());
    }

    #[test]
    fn support_round_trip() {
        let support = SupportFamily::new(vec![
            vec![vec![0, 1, 2], vec![0, 2]],
            vec![vec![], vec![1]],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_support(&mut buf, &support, &[]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "2\n1 1 3 1 2 3\n1 2 2 1 3\n2 1 0\n2 2 1 2\n");
        let (back, _) = read_support(buf.as_slice()).unwrap();
        assert_eq!(back, support);
    }

    #[test]
    fn support_rejects_malformed_blocks() {
        let wrong_order = "2\n1 1 0\n2 1 0\n1 2 0\n2 2 0\n";
        let err = read_support(wrong_order.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 3, .. }), "{err}");

        let wrong_count = "1\n1 1 2 1\n";
        let err = read_support(wrong_count.as_bytes()).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 2, .. }), "{err}");

        let unsorted = "1\n1 1 2 2 1\n";
        assert!(read_support(unsorted.as_bytes()).is_err());
    }

    #[test]
    fn edge_list_basics() {
        let text = "# toy graph\n1 2\n2 3\n";
        let report = ingest_edge_list(text.as_bytes(), 0.0).unwrap();
        assert_eq!(report.node_ids, vec![1, 2, 3]);
        assert_eq!(report.edges, 2);
        assert_eq!(report.adjacency.iter().filter(|&&x| x != 0.0).count(), 4);
        assert_eq!(report.adjacency[[0, 1]], 1.0);
        assert_eq!(report.adjacency[[1, 2]], 1.0);
        assert_eq!(report.adjacency[[0, 2]], 0.0);
    }

    #[test]
    fn edge_list_collapses_duplicates_and_drops_loops() {
        let text = "1 2\n2 1\n1 2\n5 5\n2 3\n";
        let report = ingest_edge_list(text.as_bytes(), 0.0).unwrap();
        assert_eq!(report.edges, 2);
        assert_eq!(report.duplicates_collapsed, 2);
        assert_eq!(report.self_loops_dropped, 1);
        // Node 5 only appeared in the dropped loop, so it is not a node.
        assert_eq!(report.node_ids, vec![1, 2, 3]);
    }

    #[test]
    fn edge_list_remaps_sparse_ids() {
        let text = "10 40\n40 7\n";
        let report = ingest_edge_list(text.as_bytes(), 0.0).unwrap();
        assert_eq!(report.node_ids, vec![7, 10, 40]);
        assert_eq!(report.adjacency[[1, 2]], 1.0);
        assert_eq!(report.adjacency[[0, 2]], 1.0);
        assert_eq!(report.adjacency[[0, 1]], 0.0);
    }

    #[test]
    fn edge_list_thresholds_weights() {
        let text = "1 2 0.9\n2 3 0.1\n3 4 -0.5\n";
        let report = ingest_edge_list(text.as_bytes(), 0.25).unwrap();
        assert_eq!(report.edges, 2);
        assert_eq!(report.below_threshold, 1);
        assert_eq!(report.node_ids, vec![1, 2, 3, 4]);
        assert_eq!(report.adjacency[[1, 2]], 0.0);
    }

    #[test]
    fn edge_list_failures() {
        let malformed = "1 2\nnope\n";
        let err = ingest_edge_list(malformed.as_bytes(), 0.0).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 2, .. }), "{err}");

        let empty = "# nothing\n5 5\n";
        assert!(ingest_edge_list(empty.as_bytes(), 0.0).is_err());

        let zero_based = "0 1\n";
        let err = ingest_edge_list(zero_based.as_bytes(), 0.0).unwrap_err();
        assert!(matches!(err, SpabmError::Parse { line: 1, .. }), "{err}");
    }
}

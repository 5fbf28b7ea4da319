//! Network containers and the block algebra built on top of them:
//! community rearrangement, block extraction, structural row supports,
//! and entrywise support projections.
//!
//! Conventions used throughout the crate:
//! * community labels are `0..K` internally and `1..=K` in files,
//! * rearranged order lists nodes community by community, ascending node
//!   index within each community,
//! * a support set `J[k][l]` holds within-community row positions
//!   (0-based) of community-`k` nodes, sorted ascending.

use ndarray::{Array2, ArrayView2};

use crate::error::{Result, SpabmError};
use crate::scalar::Scalar;

/// Symmetric binary adjacency matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix<T> {
    entries: Array2<T>,
}

impl<T: Scalar> AdjacencyMatrix<T> {
    /// Validates symmetry, a zero diagonal, and 0/1 entries.
    pub fn new(entries: Array2<T>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(SpabmError::InvalidMatrix(format!(
                "adjacency must be square, got {r}x{c}"
            )));
        }
        for i in 0..r {
            if entries[[i, i]] != T::zero() {
                return Err(SpabmError::InvalidMatrix(format!(
                    "nonzero diagonal at ({i},{i})"
                )));
            }
            for j in 0..c {
                let x = entries[[i, j]];
                if x != T::zero() && x != T::one() {
                    return Err(SpabmError::InvalidMatrix(format!(
                        "entry ({i},{j}) = {x} is not 0 or 1"
                    )));
                }
                if entries[[i, j]] != entries[[j, i]] {
                    return Err(SpabmError::InvalidMatrix(format!(
                        "asymmetry at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    /// Fraction of nonzero entries among the `n(n-1)` off-diagonal cells.
    pub fn density(&self) -> T {
        let n = self.n();
        if n < 2 {
            return T::zero();
        }
        let nonzero = self.entries.iter().filter(|&&x| x != T::zero()).count();
        T::count(nonzero) / T::count(n * (n - 1))
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&x| x != T::zero()).count() / 2
    }
}

/// Symmetric matrix of connection probabilities with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    entries: Array2<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    pub fn new(entries: Array2<T>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(SpabmError::InvalidMatrix(format!(
                "probability matrix must be square, got {r}x{c}"
            )));
        }
        for i in 0..r {
            for j in 0..c {
                let x = entries[[i, j]];
                if !(x >= T::zero() && x <= T::one()) {
                    return Err(SpabmError::InvalidMatrix(format!(
                        "entry ({i},{j}) = {x} outside [0, 1]"
                    )));
                }
                if entries[[i, j]] != entries[[j, i]] {
                    return Err(SpabmError::InvalidMatrix(format!(
                        "asymmetry at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }
}

/// Node-to-community assignment with every community nonempty.
///
/// Labels are stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<usize>,
    k: usize,
}

impl Clustering {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 || labels.is_empty() {
            return Err(SpabmError::InvalidClustering(
                "need at least one node and one community".into(),
            ));
        }
        let mut seen = vec![false; k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(SpabmError::InvalidClustering(format!(
                    "node {i} has label {l} >= K = {k}"
                )));
            }
            seen[l] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(SpabmError::EmptyCommunity(format!(
                "community {} has no nodes",
                empty + 1
            )));
        }
        Ok(Self { labels, k })
    }

    /// Balanced assignment `0,..,0,1,..,1,...` with `n/k` nodes per community.
    pub fn balanced(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n % k != 0 {
            return Err(SpabmError::InvalidClustering(format!(
                "cannot split {n} nodes into {k} equal communities"
            )));
        }
        let per = n / k;
        Self::new((0..n).map(|i| i / per).collect(), k)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// Node lists per community, each ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    /// Rearranged node order: community by community, ascending inside.
    pub fn node_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by_key(|&i| (self.labels[i], i));
        order
    }

    /// Inverse of [`Clustering::node_order`]: `positions()[node]` is the
    /// node's row in the rearranged matrix.
    pub fn positions(&self) -> Vec<usize> {
        let order = self.node_order();
        let mut pos = vec![0usize; order.len()];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        pos
    }

    /// `within_positions()[node]` is the node's rank among the ascending
    /// members of its own community, i.e. its row inside each block the
    /// community owns.
    pub fn within_positions(&self) -> Vec<usize> {
        let mut counter = vec![0usize; self.k];
        self.labels
            .iter()
            .map(|&l| {
                let w = counter[l];
                counter[l] += 1;
                w
            })
            .collect()
    }
}

/// Popularity parameters: row `i` of the `n`-by-`K` matrix gives node `i`'s
/// affinity toward each community; the attached clustering fixes the block
/// structure. Entries live in `[0, 1]` so that products are probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityMatrix<T> {
    entries: Array2<T>,
    clustering: Clustering,
}

impl<T: Scalar> PopularityMatrix<T> {
    pub fn new(entries: Array2<T>, clustering: Clustering) -> Result<Self> {
        let (n, k) = entries.dim();
        if n != clustering.n() || k != clustering.k() {
            return Err(SpabmError::DimensionMismatch(format!(
                "popularity matrix is {n}x{k} but clustering has n = {}, K = {}",
                clustering.n(),
                clustering.k()
            )));
        }
        for ((i, l), &x) in entries.indexed_iter() {
            if !(x >= T::zero() && x <= T::one()) {
                return Err(SpabmError::InvalidMatrix(format!(
                    "popularity entry ({i},{l}) = {x} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            entries,
            clustering,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn k(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }
}

/// Structural row supports for every ordered community pair.
///
/// `set(k, l)` lists which community-`k` rows of block `(k, l)` are allowed
/// to be nonzero, as sorted within-community positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFamily {
    k: usize,
    sets: Vec<Vec<Vec<usize>>>,
}

impl SupportFamily {
    pub fn new(sets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let k = sets.len();
        if k == 0 {
            return Err(SpabmError::InvalidSupport("no communities".into()));
        }
        for (a, row) in sets.iter().enumerate() {
            if row.len() != k {
                return Err(SpabmError::InvalidSupport(format!(
                    "support row {a} has {} sets, expected {k}",
                    row.len()
                )));
            }
            for (b, set) in row.iter().enumerate() {
                if !set.windows(2).all(|w| w[0] < w[1]) {
                    return Err(SpabmError::InvalidSupport(format!(
                        "support ({a},{b}) is not strictly ascending"
                    )));
                }
            }
        }
        Ok(Self { k, sets })
    }

    /// Full support for the given community sizes: every row of every block.
    pub fn full(sizes: &[usize]) -> Self {
        let k = sizes.len();
        let sets = (0..k)
            .map(|a| (0..k).map(|_| (0..sizes[a]).collect()).collect())
            .collect();
        Self { k, sets }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn set(&self, k: usize, l: usize) -> &[usize] {
        &self.sets[k][l]
    }

    /// Row and column index sets of the rectangular support of block `(k, l)`.
    pub fn rect(&self, k: usize, l: usize) -> (&[usize], &[usize]) {
        (&self.sets[k][l], &self.sets[l][k])
    }

    /// Per-block support sizes `|J[k][l]|`.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        self.sets
            .iter()
            .map(|row| row.iter().map(Vec::len).collect())
            .collect()
    }

    /// Total support size `|J|`.
    pub fn total(&self) -> usize {
        self.sets.iter().flatten().map(Vec::len).sum()
    }

    /// True when every set of `self` is contained in the matching set of
    /// `other`.
    pub fn is_subset_of(&self, other: &SupportFamily) -> bool {
        self.k == other.k
            && self.sets.iter().zip(&other.sets).all(|(ra, rb)| {
                ra.iter()
                    .zip(rb)
                    .all(|(sa, sb)| sa.iter().all(|i| sb.binary_search(i).is_ok()))
            })
    }

    /// Checks that every index fits the community sizes of `z`.
    pub fn validate_against(&self, z: &Clustering) -> Result<()> {
        if self.k != z.k() {
            return Err(SpabmError::DimensionMismatch(format!(
                "support has K = {}, clustering has K = {}",
                self.k,
                z.k()
            )));
        }
        let sizes = z.sizes();
        for a in 0..self.k {
            for b in 0..self.k {
                if let Some(&i) = self.sets[a][b].last() {
                    if i >= sizes[a] {
                        return Err(SpabmError::InvalidSupport(format!(
                            "support ({a},{b}) index {i} exceeds community size {}",
                            sizes[a]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A block of a node-by-node matrix: rows from community `k`, columns from
/// community `l`, both ascending, plus the node indices they came from.
#[derive(Debug, Clone)]
pub struct Block<T> {
    pub row_nodes: Vec<usize>,
    pub col_nodes: Vec<usize>,
    pub values: Array2<T>,
}

fn check_square_n<T>(m: &ArrayView2<'_, T>, z: &Clustering) -> Result<()> {
    let (r, c) = m.dim();
    if r != c || r != z.n() {
        return Err(SpabmError::DimensionMismatch(format!(
            "matrix is {r}x{c}, clustering has n = {}",
            z.n()
        )));
    }
    Ok(())
}

/// Reorders rows and columns so nodes appear community by community,
/// ascending node index within each community.
pub fn rearrange<T: Copy>(m: &ArrayView2<'_, T>, z: &Clustering) -> Result<Array2<T>> {
    check_square_n(m, z)?;
    let order = z.node_order();
    let n = order.len();
    Ok(Array2::from_shape_fn((n, n), |(a, b)| {
        m[[order[a], order[b]]]
    }))
}

/// Inverse of [`rearrange`]: scatters a community-ordered matrix back to
/// original node order.
pub fn inverse_rearrange<T: Copy>(m: &ArrayView2<'_, T>, z: &Clustering) -> Result<Array2<T>> {
    check_square_n(m, z)?;
    let pos = z.positions();
    let n = pos.len();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        m[[pos[i], pos[j]]]
    }))
}

/// Extracts block `(k, l)` of a node-by-node matrix under clustering `z`.
pub fn block<T: Copy>(
    m: &ArrayView2<'_, T>,
    z: &Clustering,
    k: usize,
    l: usize,
) -> Result<Block<T>> {
    check_square_n(m, z)?;
    if k >= z.k() || l >= z.k() {
        return Err(SpabmError::InvalidClustering(format!(
            "block ({k},{l}) out of range for K = {}",
            z.k()
        )));
    }
    let communities = z.communities();
    let row_nodes = communities[k].clone();
    let col_nodes = communities[l].clone();
    let values = Array2::from_shape_fn((row_nodes.len(), col_nodes.len()), |(a, b)| {
        m[[row_nodes[a], col_nodes[b]]]
    });
    Ok(Block {
        row_nodes,
        col_nodes,
        values,
    })
}

/// Connection probabilities induced by popularity parameters: for node `i`
/// in community `k` and node `j` in community `l`,
/// `P[i][j] = lambda[i][l] * lambda[j][k]`, so every block `(k, l)` is the
/// outer product of the two popularity sub-columns.
pub fn probability_from_lambda<T: Scalar>(lambda: &PopularityMatrix<T>) -> ProbabilityMatrix<T> {
    let n = lambda.n();
    let z = lambda.clustering();
    let e = lambda.entries();
    let entries = Array2::from_shape_fn((n, n), |(i, j)| e[[i, z.label(j)]] * e[[j, z.label(i)]]);
    ProbabilityMatrix { entries }
}

/// Structural row support declared by a popularity matrix: for block
/// `(k, l)`, the within-community positions of community-`k` nodes whose
/// popularity toward community `l` is nonzero.
pub fn lambda_support<T: Scalar>(lambda: &PopularityMatrix<T>) -> SupportFamily {
    let z = lambda.clustering();
    let e = lambda.entries();
    let communities = z.communities();
    let kk = z.k();
    let sets = (0..kk)
        .map(|k| {
            (0..kk)
                .map(|l| {
                    communities[k]
                        .iter()
                        .enumerate()
                        .filter(|&(_, &i)| e[[i, l]] != T::zero())
                        .map(|(pos, _)| pos)
                        .collect()
                })
                .collect()
        })
        .collect();
    SupportFamily { k: kk, sets }
}

/// Row support actually visible in a nonnegative matrix: for every block
/// `(k, l)`, the within-community positions of rows holding at least one
/// entry with `|x| > eps`.
pub fn breve_support_eps<T: Scalar>(
    m: &ArrayView2<'_, T>,
    z: &Clustering,
    eps: T,
) -> Result<SupportFamily> {
    check_square_n(m, z)?;
    let communities = z.communities();
    let kk = z.k();
    let mut sets = vec![vec![Vec::new(); kk]; kk];
    for (k, rows) in communities.iter().enumerate() {
        for (l, cols) in communities.iter().enumerate() {
            let set = &mut sets[k][l];
            for (pos, &i) in rows.iter().enumerate() {
                if cols.iter().any(|&j| m[[i, j]].abs() > eps) {
                    set.push(pos);
                }
            }
        }
    }
    Ok(SupportFamily { k: kk, sets })
}

/// [`breve_support_eps`] with the exact-zero threshold used for binary
/// adjacency data and structurally zero-filled estimates.
pub fn breve_support<T: Scalar>(m: &ArrayView2<'_, T>, z: &Clustering) -> Result<SupportFamily> {
    breve_support_eps(m, z, T::zero())
}

/// Keeps entries whose row index is in `rows` and column index in `cols`,
/// zeroing everything else.
pub fn project_support<T: Scalar>(
    m: &ArrayView2<'_, T>,
    rows: &[usize],
    cols: &[usize],
) -> Result<Array2<T>> {
    let (r, c) = m.dim();
    if rows.iter().any(|&i| i >= r) || cols.iter().any(|&j| j >= c) {
        return Err(SpabmError::InvalidSupport(format!(
            "support index out of range for a {r}x{c} block"
        )));
    }
    let mut out = Array2::zeros((r, c));
    for &i in rows {
        for &j in cols {
            out[[i, j]] = m[[i, j]];
        }
    }
    Ok(out)
}

//! Weighted graphs, the wildcard-annotated adjacency matrix, and twin blocks.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact weight type used throughout the crate.
pub type Rational = Ratio<i128>;

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NonPositiveWeight(VertexId, VertexId, Rational),
    #[error("vertex {0} out of range for n = {1}")]
    VertexOutOfRange(VertexId, usize),
    #[error("annotation on vertex {0} is negative ({1})")]
    NegativeAnnotation(VertexId, Rational),
    #[error("block validation failed: {0} and {1} grouped but are not twins")]
    NonTransitiveBlock(VertexId, VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: Rational,
}

/// Simple undirected graph with positive edge weights.
///
/// Stored as an edge list plus sorted adjacency lists; suitable for large sparse inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(VertexId, Rational)>>,
}

impl WeightedGraph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self, InstanceError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Rational)>,
    {
        let mut adj: Vec<Vec<(VertexId, Rational)>> = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (u, v, w) in edges {
            if u >= n {
                return Err(InstanceError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(InstanceError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(InstanceError::SelfLoop(u));
            }
            if !w.is_positive() {
                return Err(InstanceError::NonPositiveWeight(u, v, w));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
            list.push(Edge { u, v, w });
        }
        for row in adj.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
        }
        for (u, row) in adj.iter().enumerate() {
            if let Some(pair) = row.windows(2).find(|p| p[0].0 == p[1].0) {
                let v = pair[0].0;
                return Err(InstanceError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        Ok(WeightedGraph { n, edges: list, adj })
    }

    pub fn empty(n: usize) -> Self {
        WeightedGraph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, Rational)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<Rational> {
        let row = &self.adj[u];
        row.binary_search_by_key(&v, |&(j, _)| j)
            .ok()
            .map(|idx| row[idx].1)
    }

    /// Subgraph induced by `keep`; vertex `keep[i]` becomes vertex `i`.
    pub fn induced(&self, keep: &[VertexId]) -> WeightedGraph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges = self.edges.iter().filter_map(|e| {
            let (a, b) = (index[e.u], index[e.v]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b, e.w))
        });
        WeightedGraph::new(keep.len(), edges).expect("induced subgraph of a valid graph")
    }
}

/// A matrix entry: a nonnegative number or the wildcard `⋆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StarValue {
    Number(Rational),
    Wildcard,
}

impl fmt::Display for StarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarValue::Number(x) => write!(f, "{x}"),
            StarValue::Wildcard => f.write_str("*"),
        }
    }
}

/// `a ⋆= b`: equal, or either side is a wildcard.
pub fn star_equal(a: StarValue, b: StarValue) -> bool {
    match (a, b) {
        (StarValue::Wildcard, _) | (_, StarValue::Wildcard) => true,
        (StarValue::Number(x), StarValue::Number(y)) => x == y,
    }
}

/// Symmetric matrix over nonnegative rationals with wildcards allowed on the diagonal.
///
/// Off-diagonal entries are stored sparsely per row (absent means 0, a non-edge). The
/// diagonal is `None` for a wildcard and `Some(w)` for an annotated vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedMatrix {
    rows: Vec<Vec<(VertexId, Rational)>>,
    diag: Vec<Option<Rational>>,
}

impl AnnotatedMatrix {
    /// Encodes `g` as a matrix; annotated vertices get a numeric diagonal, all others `⋆`.
    pub fn from_graph(
        g: &WeightedGraph,
        annotations: &BTreeMap<VertexId, Rational>,
    ) -> Result<Self, InstanceError> {
        let mut diag = vec![None; g.n()];
        for (&v, &w) in annotations {
            if v >= g.n() {
                return Err(InstanceError::VertexOutOfRange(v, g.n()));
            }
            if w.is_negative() {
                return Err(InstanceError::NegativeAnnotation(v, w));
            }
            diag[v] = Some(w);
        }
        Ok(AnnotatedMatrix {
            rows: g.adj.clone(),
            diag,
        })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, i: VertexId, j: VertexId) -> StarValue {
        if i == j {
            return match self.diag[i] {
                Some(w) => StarValue::Number(w),
                None => StarValue::Wildcard,
            };
        }
        StarValue::Number(self.weight(i, j))
    }

    /// Off-diagonal entry; zero for non-adjacent pairs.
    pub fn weight(&self, i: VertexId, j: VertexId) -> Rational {
        debug_assert_ne!(i, j);
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(idx) => row[idx].1,
            Err(_) => Rational::zero(),
        }
    }

    pub fn diag(&self, i: VertexId) -> Option<Rational> {
        self.diag[i]
    }

    pub fn is_annotated(&self, i: VertexId) -> bool {
        self.diag[i].is_some()
    }

    pub fn is_adjacent(&self, i: VertexId, j: VertexId) -> bool {
        i != j && self.rows[i].binary_search_by_key(&j, |&(c, _)| c).is_ok()
    }

    /// Nonzero off-diagonal entries of row `i`, sorted by column.
    pub fn row(&self, i: VertexId) -> &[(VertexId, Rational)] {
        &self.rows[i]
    }

    pub fn degree(&self, i: VertexId) -> usize {
        self.rows[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn set_diag(&mut self, i: VertexId, value: Option<Rational>) {
        self.diag[i] = value;
    }

    /// Principal submatrix on `keep`; `keep[i]` becomes index `i`.
    pub fn principal(&self, keep: &[VertexId]) -> AnnotatedMatrix {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let rows = keep
            .iter()
            .map(|&v| {
                let mut row: Vec<_> = self.rows[v]
                    .iter()
                    .filter(|&&(c, _)| index[c] != usize::MAX)
                    .map(|&(c, w)| (index[c], w))
                    .collect();
                row.sort_by_key(|&(c, _)| c);
                row
            })
            .collect();
        let diag = keep.iter().map(|&v| self.diag[v]).collect();
        AnnotatedMatrix { rows, diag }
    }

    /// Graph of the off-diagonal part plus the annotation map.
    pub fn to_graph(&self) -> (WeightedGraph, BTreeMap<VertexId, Rational>) {
        let edges = self.rows.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        });
        let g = WeightedGraph::new(self.n(), edges).expect("matrix rows encode a valid graph");
        let ann = self
            .diag
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|w| (v, w)))
            .collect();
        (g, ann)
    }
}

/// `A_u ⋆= A_v` column by column.
pub fn rows_star_equal(a: &AnnotatedMatrix, u: VertexId, v: VertexId) -> bool {
    debug_assert_ne!(u, v);
    // Columns other than u and v hold plain numbers and must agree exactly.
    let strip = |row: &[(VertexId, Rational)]| {
        row.iter()
            .filter(|&&(c, _)| c != u && c != v)
            .copied()
            .collect::<Vec<_>>()
    };
    if a.row(u).len().abs_diff(a.row(v).len()) > 2 {
        return false;
    }
    if strip(a.row(u)) != strip(a.row(v)) {
        return false;
    }
    let uv = StarValue::Number(a.weight(u, v));
    star_equal(a.entry(u, u), uv) && star_equal(uv, a.entry(v, v))
}

/// True iff `u` and `v` are adjacent with ⋆-equal rows.
pub fn are_twins(a: &AnnotatedMatrix, u: VertexId, v: VertexId) -> bool {
    a.is_adjacent(u, v) && rows_star_equal(a, u, v)
}

/// Partition of the vertices into maximal sets of pairwise twins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<Vec<VertexId>>,
    weights: Vec<Option<Rational>>,
    block_of: Vec<usize>,
}

impl BlockPartition {
    /// Every vertex in its own block.
    pub fn singletons(n: usize) -> Self {
        BlockPartition {
            blocks: (0..n).map(|v| vec![v]).collect(),
            weights: vec![None; n],
            block_of: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[VertexId] {
        &self.blocks[b]
    }

    /// Uniform internal edge weight; `None` for singleton blocks.
    pub fn block_weight(&self, b: usize) -> Option<Rational> {
        self.weights[b]
    }

    pub fn block_of(&self, v: VertexId) -> usize {
        self.block_of[v]
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Groups vertices into twin blocks.
///
/// Twins share their closed neighbourhood, so vertices are first sorted by it; each group
/// is then split into twin classes. Blocks come out ordered by their smallest member.
pub fn compute_blocks(a: &AnnotatedMatrix) -> Result<BlockPartition, InstanceError> {
    let n = a.n();
    let closed = |u: VertexId| {
        let mut key: Vec<VertexId> = a.row(u).iter().map(|&(c, _)| c).collect();
        let pos = key.partition_point(|&c| c < u);
        key.insert(pos, u);
        key
    };
    let keys: Vec<Vec<VertexId>> = (0..n).map(closed).collect();
    let mut by_key: Vec<VertexId> = (0..n).collect();
    by_key.sort_by(|&x, &y| keys[x].cmp(&keys[y]).then(x.cmp(&y)));

    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keys[by_key[end]] == keys[by_key[start]] {
            end += 1;
        }
        let mut pending: Vec<VertexId> = by_key[start..end].to_vec();
        while let Some((&first, rest)) = pending.split_first() {
            let (mut class, others): (Vec<_>, Vec<_>) =
                rest.iter().partition(|&&v| are_twins(a, first, v));
            class.insert(0, first);
            blocks.push(class);
            pending = others;
        }
        start = end;
    }
    blocks.sort_by_key(|b| b[0]);

    if cfg!(debug_assertions) {
        for block in &blocks {
            for (x, &u) in block.iter().enumerate() {
                for &v in &block[x + 1..] {
                    if !are_twins(a, u, v) {
                        return Err(InstanceError::NonTransitiveBlock(u, v));
                    }
                }
            }
        }
    }

    let mut block_of = vec![0; n];
    for (b, block) in blocks.iter().enumerate() {
        for &v in block {
            block_of[v] = b;
        }
    }
    let weights = blocks
        .iter()
        .map(|b| (b.len() >= 2).then(|| a.weight(b[0], b[1])))
        .collect();
    Ok(BlockPartition {
        blocks,
        weights,
        block_of,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn r(x: i128) -> Rational {
        Rational::from_integer(x)
    }

    pub fn graph(n: usize, edges: &[(usize, usize, i128)]) -> WeightedGraph {
        WeightedGraph::new(n, edges.iter().map(|&(u, v, w)| (u, v, r(w)))).unwrap()
    }

    pub fn matrix(n: usize, edges: &[(usize, usize, i128)]) -> AnnotatedMatrix {
        AnnotatedMatrix::from_graph(&graph(n, edges), &BTreeMap::new()).unwrap()
    }

    pub fn complete(n: usize, w: i128) -> AnnotatedMatrix {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, w));
            }
        }
        matrix(n, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle_encodes_wildcard_diagonal() {
        let a = matrix(3, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        for i in 0..3 {
            assert_eq!(a.entry(i, i), StarValue::Wildcard);
            for j in 0..3 {
                if i != j {
                    assert_eq!(a.entry(i, j), StarValue::Number(r(1)));
                }
            }
        }
    }

    #[test]
    fn annotation_sets_diagonal() {
        let g = graph(2, &[(0, 1, 5)]);
        let ann = BTreeMap::from([(0, r(5))]);
        let a = AnnotatedMatrix::from_graph(&g, &ann).unwrap();
        assert_eq!(a.entry(0, 1), StarValue::Number(r(5)));
        assert_eq!(a.entry(0, 0), StarValue::Number(r(5)));
        assert_eq!(a.entry(1, 1), StarValue::Wildcard);
    }

    #[test]
    fn empty_graph_has_zero_off_diagonal() {
        let a = AnnotatedMatrix::from_graph(&WeightedGraph::empty(2), &BTreeMap::new()).unwrap();
        assert_eq!(a.entry(0, 1), StarValue::Number(r(0)));
        assert_eq!(a.entry(1, 0), StarValue::Number(r(0)));
        assert_eq!(a.entry(0, 0), StarValue::Wildcard);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            WeightedGraph::new(2, [(0, 0, r(1))]).unwrap_err(),
            InstanceError::SelfLoop(0)
        );
        assert_eq!(
            WeightedGraph::new(2, [(0, 1, r(1)), (1, 0, r(2))]).unwrap_err(),
            InstanceError::DuplicateEdge(0, 1)
        );
        assert!(matches!(
            WeightedGraph::new(2, [(0, 1, r(-1))]),
            Err(InstanceError::NonPositiveWeight(..))
        ));
        assert!(matches!(
            WeightedGraph::new(2, [(0, 2, r(1))]),
            Err(InstanceError::VertexOutOfRange(2, 2))
        ));
        let ann = BTreeMap::from([(1, r(-3))]);
        assert!(matches!(
            AnnotatedMatrix::from_graph(&WeightedGraph::empty(2), &ann),
            Err(InstanceError::NegativeAnnotation(1, _))
        ));
    }

    #[test]
    fn star_equal_cases() {
        let n = |x| StarValue::Number(r(x));
        assert!(star_equal(n(3), n(3)));
        assert!(star_equal(n(3), StarValue::Wildcard));
        assert!(star_equal(StarValue::Wildcard, n(3)));
        assert!(!star_equal(n(3), n(4)));
    }

    #[test]
    fn rows_star_equal_examples() {
        let tri = matrix(3, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        assert!(rows_star_equal(&tri, 0, 1));

        // Path a-b-c: a = (⋆,1,0), c = (0,1,⋆) agree columnwise but are not adjacent.
        let path = matrix(3, &[(0, 1, 1), (1, 2, 1)]);
        assert!(rows_star_equal(&path, 0, 2));
        assert!(!are_twins(&path, 0, 2));
        assert!(!rows_star_equal(&path, 0, 1));

        let edge = matrix(2, &[(0, 1, 5)]);
        assert!(rows_star_equal(&edge, 0, 1));
    }

    #[test]
    fn annotated_diagonal_must_match_twin_weight() {
        let g = graph(2, &[(0, 1, 5)]);
        let a = AnnotatedMatrix::from_graph(&g, &BTreeMap::from([(0, r(4))])).unwrap();
        assert!(!rows_star_equal(&a, 0, 1));
        let a = AnnotatedMatrix::from_graph(&g, &BTreeMap::from([(0, r(5))])).unwrap();
        assert!(rows_star_equal(&a, 0, 1));
    }

    #[test]
    fn blocks_of_examples() {
        let tri = matrix(3, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let p = compute_blocks(&tri).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1, 2]]);
        assert_eq!(p.block_weight(0), Some(r(1)));

        let path = matrix(3, &[(0, 1, 1), (1, 2, 1)]);
        let p = compute_blocks(&path).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(p.block_weight(1), None);

        let k5 = complete(5, 2);
        let p = compute_blocks(&k5).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.block(0).len(), 5);
        assert_eq!(p.block_weight(0), Some(r(2)));
    }

    #[test]
    fn unequal_internal_weights_split_block() {
        // Triangle 2,1,1: only a and b see c with the same weight, but ab != ac.
        let a = matrix(3, &[(0, 1, 2), (0, 2, 1), (1, 2, 1)]);
        let p = compute_blocks(&a).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(p.block_weight(0), Some(r(2)));
    }

    #[test]
    fn principal_submatrix_reindexes() {
        let a = matrix(4, &[(0, 1, 1), (1, 2, 2), (2, 3, 3)]);
        let s = a.principal(&[1, 3, 2]);
        assert_eq!(s.n(), 3);
        assert_eq!(s.weight(0, 2), r(2));
        assert_eq!(s.weight(1, 2), r(3));
        assert_eq!(s.weight(0, 1), r(0));
    }

    fn arb_matrix() -> impl Strategy<Value = AnnotatedMatrix> {
        (2usize..8).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                proptest::collection::vec(0i128..3, pairs),
                proptest::collection::vec(proptest::option::of(1i128..3), n),
            )
                .prop_map(move |(ws, diag)| {
                    let mut edges = Vec::new();
                    let mut idx = 0;
                    for u in 0..n {
                        for v in u + 1..n {
                            if ws[idx] > 0 {
                                edges.push((u, v, ws[idx]));
                            }
                            idx += 1;
                        }
                    }
                    let mut a = matrix(n, &edges);
                    for (v, d) in diag.into_iter().enumerate() {
                        a.set_diag(v, d.map(r));
                    }
                    a
                })
        })
    }

    proptest! {
        #[test]
        fn blocks_partition_and_are_uniform(a in arb_matrix()) {
            let p = compute_blocks(&a).unwrap();
            let mut seen = vec![0; a.n()];
            for (b, block) in p.blocks().iter().enumerate() {
                for &v in block {
                    seen[v] += 1;
                    prop_assert_eq!(p.block_of(v), b);
                }
                for &u in block {
                    for &v in block {
                        if u != v {
                            prop_assert_eq!(Some(a.weight(u, v)), p.block_weight(b));
                        }
                    }
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert_eq!(compute_blocks(&a).unwrap(), p);
        }

        #[test]
        fn twin_relation_is_symmetric_and_matches_blocks(a in arb_matrix()) {
            let p = compute_blocks(&a).unwrap();
            for u in 0..a.n() {
                for v in 0..a.n() {
                    if u == v { continue; }
                    prop_assert_eq!(rows_star_equal(&a, u, v), rows_star_equal(&a, v, u));
                    prop_assert_eq!(are_twins(&a, u, v), p.block_of(u) == p.block_of(v));
                }
            }
        }
    }
}

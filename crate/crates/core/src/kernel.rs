//! Preprocessing, twin-block kernel rules, and lifting kernel solutions back.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::instance::{
    compute_blocks, AnnotatedMatrix, BlockPartition, InstanceError, Rational, VertexId,
    WeightedGraph,
};
use crate::search::{Decomposition, Signature, K_MAX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("k = {0} exceeds the supported maximum {K_MAX}")]
    UnsupportedK(usize),
    #[error("block {0:?} is a singleton; nothing to reduce")]
    SingletonBlock(Vec<VertexId>),
    #[error("solution has {got} rows but the kernel has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// What to do with isolated vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum IsolatedPolicy {
    /// Drop them; `k` is unchanged.
    #[default]
    Ignore,
    /// Drop them and spend one clique on each.
    ConsumeK,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub graph: WeightedGraph,
    pub annotations: BTreeMap<VertexId, Rational>,
    /// Remaining budget; negative means the instance is a NO-instance.
    pub k: i64,
    pub removed: Vec<VertexId>,
    /// Index in `graph` to index in the input graph.
    pub vertex_map: Vec<VertexId>,
    n_original: usize,
}

/// Removes isolated vertices.
///
/// An isolated vertex annotated with a positive weight is kept: it needs a singleton clique.
pub fn preprocess(
    g: &WeightedGraph,
    annotations: &BTreeMap<VertexId, Rational>,
    k: usize,
    policy: IsolatedPolicy,
) -> Preprocessed {
    let (keep, removed): (Vec<VertexId>, Vec<VertexId>) = (0..g.n()).partition(|&v| {
        g.degree(v) > 0 || annotations.get(&v).is_some_and(|w| !w.is_zero())
    });
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        index[v] = i;
    }
    let annotations = annotations
        .iter()
        .filter(|&(&v, _)| index[v] != usize::MAX)
        .map(|(&v, &w)| (index[v], w))
        .collect();
    let k = match policy {
        IsolatedPolicy::Ignore => k as i64,
        IsolatedPolicy::ConsumeK => k as i64 - removed.len() as i64,
    };
    Preprocessed {
        graph: g.induced(&keep),
        annotations,
        k,
        removed,
        vertex_map: keep,
        n_original: g.n(),
    }
}

impl Preprocessed {
    /// Re-inserts the removed vertices with empty signatures.
    pub fn lift(&self, sol: &Decomposition) -> Decomposition {
        let mut rows = vec![Signature::ZERO; self.n_original];
        for (i, &orig) in self.vertex_map.iter().enumerate() {
            rows[orig] = sol.rows()[i];
        }
        Decomposition::new(rows, sol.gamma().clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule1 {
    Pass,
    No,
}

/// More than `2^k` blocks cannot be covered by `k` cliques.
pub fn krule1(blocks: &BlockPartition, k: usize) -> KRule1 {
    let limit = 1u128 << k.min(127);
    if blocks.len() as u128 > limit {
        KRule1::No
    } else {
        KRule1::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub representative: VertexId,
    pub removed: Vec<VertexId>,
    /// Diagonal given to the representative: the block's internal edge weight.
    pub weight: Rational,
}

/// How a kernel relates to the matrix it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTrace {
    pub removed: Vec<TraceRecord>,
    /// Kernel vertex to vertex of the input matrix, increasing.
    pub vertex_map: Vec<VertexId>,
    /// Whether each input vertex carried a numeric diagonal.
    pub input_annotated: Vec<bool>,
}

impl KernelTrace {
    /// Trace of an instance that was not reduced.
    pub fn identity(a: &AnnotatedMatrix) -> Self {
        KernelTrace {
            removed: Vec::new(),
            vertex_map: (0..a.n()).collect(),
            input_annotated: (0..a.n()).map(|v| a.is_annotated(v)).collect(),
        }
    }

    pub fn n_input(&self) -> usize {
        self.input_annotated.len()
    }

    pub fn kernel_index(&self, input: VertexId) -> Option<VertexId> {
        self.vertex_map.binary_search(&input).ok()
    }

    /// Kernel vertices that stand for a reduced block.
    pub fn representatives(&self) -> Vec<VertexId> {
        let mut reps: Vec<_> = self
            .removed
            .iter()
            .filter_map(|r| self.kernel_index(r.representative))
            .collect();
        reps.sort_unstable();
        reps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelVariant {
    /// Reduce blocks larger than `2^k`.
    Cricca,
    /// Reduce blocks larger than `k`.
    Decaf,
}

impl KernelVariant {
    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Cricca => "cricca",
            KernelVariant::Decaf => "decaf",
        }
    }

    pub fn threshold(self, k: usize) -> u128 {
        match self {
            KernelVariant::Cricca => 1u128 << k.min(127),
            KernelVariant::Decaf => k as u128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KernelStats {
    pub n_before: usize,
    pub n_after: usize,
    pub block_count: usize,
    pub rule_applications: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelOutcome {
    Reduced {
        matrix: AnnotatedMatrix,
        trace: KernelTrace,
    },
    No(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelResult {
    pub outcome: KernelOutcome,
    pub stats: KernelStats,
}

/// Keeps the smallest vertex of block `d`, gives it the block weight as its diagonal and
/// deletes the rest of the block.
///
/// Returns the reduced matrix, the trace record, and the surviving input vertices in
/// kernel order.
pub fn reduce_block(
    a: &AnnotatedMatrix,
    d: &[VertexId],
) -> Result<(AnnotatedMatrix, TraceRecord, Vec<VertexId>), KernelError> {
    if d.len() < 2 {
        return Err(KernelError::SingletonBlock(d.to_vec()));
    }
    let rep = *d.iter().min().expect("non-empty");
    let weight = a.weight(d[0], d[1]);
    let mut dropped = vec![false; a.n()];
    for &v in d {
        dropped[v] = v != rep;
    }
    let keep: Vec<VertexId> = (0..a.n()).filter(|&v| !dropped[v]).collect();
    let mut reduced = a.principal(&keep);
    let new_rep = keep.binary_search(&rep).expect("representative kept");
    reduced.set_diag(new_rep, Some(weight));
    let mut removed: Vec<VertexId> = d.iter().copied().filter(|&v| v != rep).collect();
    removed.sort_unstable();
    let record = TraceRecord {
        representative: rep,
        removed,
        weight,
    };
    Ok((reduced, record, keep))
}

/// Applies K-rule 1 and then reduces every block above the variant's size threshold.
pub fn kernelize(
    a: &AnnotatedMatrix,
    k: usize,
    variant: KernelVariant,
) -> Result<KernelResult, KernelError> {
    if k > K_MAX {
        return Err(KernelError::UnsupportedK(k));
    }
    let blocks = compute_blocks(a)?;
    let mut stats = KernelStats {
        n_before: a.n(),
        n_after: a.n(),
        block_count: blocks.len(),
        rule_applications: 0,
    };
    if krule1(&blocks, k) == KRule1::No {
        stats.n_after = 0;
        stats.rule_applications = 1;
        let reason = format!("{} blocks exceed 2^{k}", blocks.len());
        return Ok(KernelResult {
            outcome: KernelOutcome::No(reason),
            stats,
        });
    }

    let threshold = variant.threshold(k);
    let mut targets: Vec<&Vec<VertexId>> = blocks
        .blocks()
        .iter()
        .filter(|b| b.len() >= 2 && b.len() as u128 > threshold)
        .collect();
    targets.sort_by(|x, y| y.len().cmp(&x.len()).then(x[0].cmp(&y[0])));

    // Reductions touch disjoint blocks and never alter other rows, so all of them are
    // applied in one pass over the input.
    let mut dropped = vec![false; a.n()];
    let mut records = Vec::with_capacity(targets.len());
    for d in &targets {
        let rep = d[0];
        let weight = a.weight(d[0], d[1]);
        for &v in &d[1..] {
            dropped[v] = true;
        }
        records.push(TraceRecord {
            representative: rep,
            removed: d[1..].to_vec(),
            weight,
        });
    }
    let keep: Vec<VertexId> = (0..a.n()).filter(|&v| !dropped[v]).collect();
    let mut reduced = a.principal(&keep);
    for rec in &records {
        let idx = keep
            .binary_search(&rec.representative)
            .expect("representative kept");
        reduced.set_diag(idx, Some(rec.weight));
    }
    stats.n_after = keep.len();
    stats.rule_applications = records.len();
    let trace = KernelTrace {
        removed: records,
        vertex_map: keep,
        input_annotated: (0..a.n()).map(|v| a.is_annotated(v)).collect(),
    };
    Ok(KernelResult {
        outcome: KernelOutcome::Reduced {
            matrix: reduced,
            trace,
        },
        stats,
    })
}

/// Maps a kernel solution back to the kernel's input matrix.
///
/// Removed twins copy their representative's signature. A clique that ends up with a single
/// member that carries no annotation in the input is dropped: it only served the
/// representative's diagonal.
pub fn lift_solution(sol: &Decomposition, trace: &KernelTrace) -> Result<Decomposition, KernelError> {
    if sol.n() != trace.vertex_map.len() {
        return Err(KernelError::DimensionMismatch {
            expected: trace.vertex_map.len(),
            got: sol.n(),
        });
    }
    let mut rows = vec![Signature::ZERO; trace.n_input()];
    for (kv, &orig) in trace.vertex_map.iter().enumerate() {
        rows[orig] = sol.rows()[kv];
    }
    for rec in &trace.removed {
        let s = rows[rec.representative];
        for &v in &rec.removed {
            rows[v] = s;
        }
    }
    let k = sol.k();
    let mut gamma = sol.gamma().as_slice().to_vec();
    for (q, weight) in gamma.iter_mut().enumerate() {
        let mut members = rows.iter().enumerate().filter(|(_, s)| s.contains(q));
        if let (Some((v, _)), None) = (members.next(), members.next()) {
            if !trace.input_annotated[v] {
                rows[v] = Signature::new(rows[v].bits() & !(1 << q));
                *weight = Rational::zero();
            }
        }
    }
    debug_assert_eq!(gamma.len(), k);
    Ok(Decomposition::new(
        rows,
        crate::lpfeas::WeightVector::new(gamma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{complete, graph, matrix, r};
    use crate::lpfeas::WeightVector;
    use crate::oracle::verify;

    #[test]
    fn preprocess_policies() {
        let g = graph(4, &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        let none = BTreeMap::new();
        let p = preprocess(&g, &none, 2, IsolatedPolicy::Ignore);
        assert_eq!((p.graph.n(), p.k, p.removed.clone()), (3, 2, vec![3]));
        let p = preprocess(&g, &none, 2, IsolatedPolicy::ConsumeK);
        assert_eq!((p.graph.n(), p.k, p.removed.clone()), (3, 1, vec![3]));
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)]);
        let p = preprocess(&g, &none, 3, IsolatedPolicy::ConsumeK);
        assert_eq!((p.graph.n(), p.k), (3, 3));
        assert!(p.removed.is_empty());
    }

    #[test]
    fn preprocess_keeps_annotated_isolated_vertex() {
        let g = graph(3, &[(0, 1, 1)]);
        let ann = BTreeMap::from([(2, r(4))]);
        let p = preprocess(&g, &ann, 2, IsolatedPolicy::Ignore);
        assert_eq!(p.graph.n(), 3);
        assert_eq!(p.annotations, ann);
    }

    #[test]
    fn krule1_examples() {
        let path = matrix(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(krule1(&compute_blocks(&path).unwrap(), 1), KRule1::No);
        let tri = complete(3, 1);
        assert_eq!(krule1(&compute_blocks(&tri).unwrap(), 1), KRule1::Pass);
        let four = matrix(4, &[(0, 1, 1), (1, 2, 2), (2, 3, 3)]);
        let b = compute_blocks(&four).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(krule1(&b, 2), KRule1::Pass);
    }

    #[test]
    fn reduce_k5_to_single_vertex() {
        let a = complete(5, 2);
        let (m, rec, keep) = reduce_block(&a, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.diag(0), Some(r(2)));
        assert_eq!(keep, vec![0]);
        assert_eq!(rec.removed, vec![1, 2, 3, 4]);
        assert_eq!(rec.weight, r(2));
    }

    #[test]
    fn reduce_keeps_external_adjacency() {
        // K3 {0,1,2} weight 1, each joined to 3 with weight 2
        let a = matrix(
            4,
            &[(0, 1, 1), (0, 2, 1), (1, 2, 1), (0, 3, 2), (1, 3, 2), (2, 3, 2)],
        );
        let b = compute_blocks(&a).unwrap();
        assert_eq!(b.block(0), &[0, 1, 2]);
        let (m, _, keep) = reduce_block(&a, b.block(0)).unwrap();
        assert_eq!(keep, vec![0, 3]);
        assert_eq!(m.weight(0, 1), r(2));
        assert_eq!(m.diag(0), Some(r(1)));
        assert_eq!(m.diag(1), None);
    }

    #[test]
    fn reduce_pair_and_singleton_error() {
        let a = matrix(2, &[(0, 1, 7)]);
        let (m, _, _) = reduce_block(&a, &[0, 1]).unwrap();
        assert_eq!(m.diag(0), Some(r(7)));
        assert!(matches!(
            reduce_block(&a, &[1]),
            Err(KernelError::SingletonBlock(_))
        ));
    }

    #[test]
    fn k6_variants() {
        let a = complete(6, 2);
        let dec = kernelize(&a, 3, KernelVariant::Decaf).unwrap();
        let KernelOutcome::Reduced { matrix, trace } = dec.outcome else {
            panic!("expected reduction")
        };
        assert_eq!(matrix.n(), 1);
        assert_eq!(matrix.diag(0), Some(r(2)));
        assert_eq!(trace.representatives(), vec![0]);
        assert_eq!(dec.stats.n_after, 1);

        let cri = kernelize(&a, 3, KernelVariant::Cricca).unwrap();
        let KernelOutcome::Reduced { matrix, .. } = cri.outcome else {
            panic!("expected pass-through")
        };
        assert_eq!(matrix, a);
        assert_eq!(cri.stats.n_after, 6);
    }

    #[test]
    fn path_is_rejected_by_krule1() {
        let a = matrix(3, &[(0, 1, 1), (1, 2, 1)]);
        for v in [KernelVariant::Decaf, KernelVariant::Cricca] {
            assert!(matches!(
                kernelize(&a, 1, v).unwrap().outcome,
                KernelOutcome::No(_)
            ));
        }
    }

    #[test]
    fn unsupported_k() {
        let a = complete(2, 1);
        assert_eq!(
            kernelize(&a, K_MAX + 1, KernelVariant::Decaf).unwrap_err(),
            KernelError::UnsupportedK(K_MAX + 1)
        );
    }

    #[test]
    fn lift_k6_singleton_becomes_full_clique() {
        let a = complete(6, 2);
        let KernelOutcome::Reduced { trace, .. } =
            kernelize(&a, 3, KernelVariant::Decaf).unwrap().outcome
        else {
            panic!()
        };
        let sol = Decomposition::new(
            vec![Signature::new(0b001)],
            WeightVector::new(vec![r(2), r(0), r(0)]),
        );
        let lifted = lift_solution(&sol, &trace).unwrap();
        assert_eq!(lifted.cliques(), vec![((0..6).collect::<Vec<_>>(), r(2))]);
        assert!(verify(&a, lifted.rows(), lifted.gamma()).unwrap().ok);
    }

    #[test]
    fn lift_drops_unneeded_singletons() {
        // K4 weight 3 plus a pendant edge (3,4) weight 1; kernel at k = 2 reduces {0,1,2}
        let a = matrix(
            5,
            &[(0, 1, 3), (0, 2, 3), (1, 2, 3), (0, 3, 3), (1, 3, 3), (2, 3, 3), (3, 4, 1)],
        );
        let KernelOutcome::Reduced { matrix, trace } =
            kernelize(&a, 2, KernelVariant::Decaf).unwrap().outcome
        else {
            panic!()
        };
        assert_eq!(trace.vertex_map, vec![0, 3, 4]);
        // kernel solution with a spare singleton clique on vertex 4
        let sol = Decomposition::new(
            vec![Signature::new(0b001), Signature::new(0b011), Signature::new(0b110)],
            WeightVector::new(vec![r(3), r(1), r(5)]),
        );
        assert!(verify(&matrix, sol.rows(), sol.gamma()).unwrap().ok);
        let lifted = lift_solution(&sol, &trace).unwrap();
        assert!(verify(&a, lifted.rows(), lifted.gamma()).unwrap().ok);
        assert_eq!(
            lifted.cliques(),
            vec![(vec![0, 1, 2, 3], r(3)), (vec![3, 4], r(1))]
        );
    }

    #[test]
    fn identity_lift_and_dimension_check() {
        let a = complete(3, 1);
        let trace = KernelTrace::identity(&a);
        let sol = Decomposition::new(vec![Signature::new(1); 3], WeightVector::new(vec![r(1)]));
        assert_eq!(lift_solution(&sol, &trace).unwrap(), sol);
        let short = Decomposition::new(vec![Signature::new(1); 2], WeightVector::new(vec![r(1)]));
        assert!(matches!(
            lift_solution(&short, &trace),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }
}

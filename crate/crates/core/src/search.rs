//! Backtracking clique decomposition.
//!
//! Basis rows are guessed one at a time at the first row the greedy fill cannot complete;
//! after each guess the clique weights are re-inferred by LP over the basis rows and the
//! remaining rows are filled greedily against those weights. A branch holds at most `2k`
//! basis rows. Candidate signatures are filtered by the search rules:
//!
//! * rule 1: a vertex shares no clique with an assigned non-neighbour;
//! * rule 2: vertices in different blocks get different signatures, twins are never in a
//!   proper-subset relation, and each block is either all-identical or pairwise distinct.
//!
//! Rule 0 is the vertex ordering, see [`order_vertices`].

use std::fmt;
use std::time::{Duration, Instant};

use num_traits::Zero;
use thiserror::Error;

use crate::instance::{compute_blocks, AnnotatedMatrix, InstanceError, Rational, VertexId};
use crate::kernel::KernelTrace;
use crate::lpfeas::{infer_clique_weights, LpError, LpMode, WeightVector};

/// Largest supported number of cliques.
pub const K_MAX: usize = 26;

/// Clique-membership row of a vertex; bit `q` set iff the vertex is in clique `q`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Signature(u32);

impl Signature {
    pub const ZERO: Signature = Signature(0);

    pub fn new(bits: u32) -> Self {
        Signature(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, q: usize) -> bool {
        self.0 >> q & 1 == 1
    }

    pub fn is_proper_subset_of(self, other: Signature) -> bool {
        self.0 != other.0 && self.0 & !other.0 == 0
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({:#b})", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VertexOrdering {
    #[default]
    Arbitrary,
    PushFront,
    PushBack,
    KeepFirst,
}

impl VertexOrdering {
    pub const ALL: [VertexOrdering; 4] = [
        VertexOrdering::Arbitrary,
        VertexOrdering::PushFront,
        VertexOrdering::PushBack,
        VertexOrdering::KeepFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VertexOrdering::Arbitrary => "arbitrary",
            VertexOrdering::PushFront => "push_front",
            VertexOrdering::PushBack => "push_back",
            VertexOrdering::KeepFirst => "keep_first",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub ordering: VertexOrdering,
    pub srule1: bool,
    pub srule2: bool,
    pub column_symmetry_breaking: bool,
    pub lp_mode: LpMode,
    pub timeout: Option<Duration>,
    pub count_lp_runs: bool,
    /// Basis rows allowed per branch; `None` means `2k`.
    pub max_basis_rows: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            ordering: VertexOrdering::PushFront,
            srule1: true,
            srule2: true,
            column_symmetry_breaking: false,
            lp_mode: LpMode::Rational,
            timeout: None,
            count_lp_runs: true,
            max_basis_rows: None,
        }
    }
}

impl SolveConfig {
    /// Plain backtracking: arbitrary order, no search rules.
    pub fn baseline() -> Self {
        SolveConfig {
            ordering: VertexOrdering::Arbitrary,
            srule1: false,
            srule2: false,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutcomeKind {
    Yes,
    #[default]
    No,
    Timeout,
}

impl OutcomeKind {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::Yes => "yes",
            OutcomeKind::No => "no",
            OutcomeKind::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub lp_runs: u64,
    pub signatures_tested: u64,
    pub backtracks: u64,
    pub wall_time: Duration,
    pub outcome: OutcomeKind,
}

/// Binary membership matrix `B` together with clique weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    k: usize,
    rows: Vec<Signature>,
    gamma: WeightVector,
}

impl Decomposition {
    pub fn new(rows: Vec<Signature>, gamma: WeightVector) -> Self {
        Decomposition {
            k: gamma.k(),
            rows,
            gamma,
        }
    }

    /// Builds `B` from explicit cliques; column `q` is clique `q`.
    pub fn from_cliques(n: usize, cliques: &[(Vec<VertexId>, Rational)]) -> Self {
        let mut rows = vec![Signature::ZERO; n];
        for (q, (members, _)) in cliques.iter().enumerate() {
            for &v in members {
                rows[v].0 |= 1 << q;
            }
        }
        let gamma = WeightVector::new(cliques.iter().map(|c| c.1).collect());
        Decomposition::new(rows, gamma)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Signature] {
        &self.rows
    }

    pub fn gamma(&self) -> &WeightVector {
        &self.gamma
    }

    pub fn members(&self, q: usize) -> Vec<VertexId> {
        (0..self.rows.len())
            .filter(|&v| self.rows[v].contains(q))
            .collect()
    }

    /// Columns with at least one member and positive weight.
    pub fn cliques(&self) -> Vec<(Vec<VertexId>, Rational)> {
        (0..self.k)
            .filter(|&q| !self.gamma.get(q).is_zero())
            .map(|q| (self.members(q), self.gamma.get(q)))
            .filter(|(m, _)| !m.is_empty())
            .collect()
    }

    /// Relabels column `q` as `perm[q]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Decomposition {
        let rows = self
            .rows
            .iter()
            .map(|s| {
                let mut bits = 0;
                for (q, &to) in perm.iter().enumerate() {
                    if s.contains(q) {
                        bits |= 1 << to;
                    }
                }
                Signature(bits)
            })
            .collect();
        let mut gamma = vec![Rational::zero(); self.k];
        for (q, &to) in perm.iter().enumerate() {
            gamma[to] = self.gamma.get(q);
        }
        Decomposition::new(rows, WeightVector::new(gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Yes(Decomposition),
    No,
    Timeout,
}

impl SolveOutcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            SolveOutcome::Yes(_) => OutcomeKind::Yes,
            SolveOutcome::No => OutcomeKind::No,
            SolveOutcome::Timeout => OutcomeKind::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("k = {0} is outside the supported range 1..={K_MAX}")]
    UnsupportedK(usize),
    #[error("vertex ordering is not a permutation of 0..{0}")]
    BadOrdering(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Orders kernel vertices for signature assignment.
///
/// `arbitrary` places a reduced block's survivor where the block's last original vertex
/// stood, `keep_first` where its first one stood (kernel order), `push_front` and
/// `push_back` move all survivors of reduced blocks to the front or back.
pub fn order_vertices(trace: &KernelTrace, strategy: VertexOrdering) -> Vec<VertexId> {
    let n = trace.vertex_map.len();
    let mut reduced_max = vec![None; n];
    for rec in &trace.removed {
        let kv = trace
            .kernel_index(rec.representative)
            .expect("representative survives kernelization");
        reduced_max[kv] = rec.removed.iter().copied().max();
    }
    let is_rep = |v: VertexId| reduced_max[v].is_some();
    let mut order: Vec<VertexId> = (0..n).collect();
    match strategy {
        VertexOrdering::KeepFirst => {}
        VertexOrdering::Arbitrary => {
            order.sort_by_key(|&v| {
                let orig = trace.vertex_map[v];
                (reduced_max[v].unwrap_or(orig).max(orig), v)
            });
        }
        VertexOrdering::PushFront => order.sort_by_key(|&v| (!is_rep(v), v)),
        VertexOrdering::PushBack => order.sort_by_key(|&v| (is_rep(v), v)),
    }
    order
}

/// Decides whether `a` decomposes into at most `k` weighted cliques, in kernel order.
pub fn clique_decomp(
    a: &AnnotatedMatrix,
    k: usize,
    cfg: &SolveConfig,
) -> Result<(SolveOutcome, SolveStats), SearchError> {
    let order: Vec<VertexId> = (0..a.n()).collect();
    clique_decomp_ordered(a, k, cfg, &order)
}

/// As [`clique_decomp`] with an explicit vertex order.
pub fn clique_decomp_ordered(
    a: &AnnotatedMatrix,
    k: usize,
    cfg: &SolveConfig,
    order: &[VertexId],
) -> Result<(SolveOutcome, SolveStats), SearchError> {
    if k == 0 || k > K_MAX {
        return Err(SearchError::UnsupportedK(k));
    }
    let n = a.n();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true))
    {
        return Err(SearchError::BadOrdering(n));
    }
    let start = Instant::now();
    let mut search = Search::new(a, k, cfg, order, start)?;
    let result = search.run();
    let mut stats = search.stats;
    stats.wall_time = start.elapsed();
    let outcome = match result {
        Ok(Some(d)) => SolveOutcome::Yes(d),
        Ok(None) => SolveOutcome::No,
        Err(Interrupt::Timeout) => SolveOutcome::Timeout,
        Err(Interrupt::Lp(e)) => return Err(e.into()),
    };
    stats.outcome = outcome.kind();
    Ok((outcome, stats))
}

/// Why a search step stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interrupt {
    Timeout,
    Lp(LpError),
}

impl From<LpError> for Interrupt {
    fn from(e: LpError) -> Self {
        Interrupt::Lp(e)
    }
}

/// Largest `k` for which masked weight sums are tabulated.
const SUM_TABLE_MAX_K: usize = 16;

/// Mutable search state over one kernel instance.
///
/// Exposed so the per-step operations can be exercised directly.
pub struct Search<'a> {
    a: &'a AnnotatedMatrix,
    k: usize,
    n: usize,
    cfg: &'a SolveConfig,
    order: Vec<VertexId>,
    deadline: Option<Instant>,
    weights: Vec<Rational>,
    adjacent: Vec<bool>,
    block_of: Vec<usize>,
    block_members: Vec<Vec<VertexId>>,
    zero_allowed: Vec<bool>,
    rows: Vec<Option<Signature>>,
    assigned: Vec<VertexId>,
    basis: Vec<(VertexId, Signature)>,
    gamma: WeightVector,
    sums: Vec<Rational>,
    max_basis: usize,
    since_check: u32,
    pub stats: SolveStats,
}

impl<'a> Search<'a> {
    pub fn new(
        a: &'a AnnotatedMatrix,
        k: usize,
        cfg: &'a SolveConfig,
        order: &[VertexId],
        start: Instant,
    ) -> Result<Self, SearchError> {
        let n = a.n();
        let mut weights = vec![Rational::zero(); n * n];
        let mut adjacent = vec![false; n * n];
        for i in 0..n {
            for &(j, w) in a.row(i) {
                weights[i * n + j] = w;
                adjacent[i * n + j] = true;
            }
        }
        let blocks = compute_blocks(a)?;
        let block_of = (0..n).map(|v| blocks.block_of(v)).collect();
        let block_members = blocks.blocks().to_vec();
        let zero_allowed = (0..n)
            .map(|v| match a.diag(v) {
                Some(w) => w.is_zero(),
                None => a.degree(v) == 0,
            })
            .collect();
        Ok(Search {
            a,
            k,
            n,
            cfg,
            order: order.to_vec(),
            deadline: cfg.timeout.map(|t| start + t),
            weights,
            adjacent,
            block_of,
            block_members,
            zero_allowed,
            rows: vec![None; n],
            assigned: Vec::new(),
            basis: Vec::new(),
            gamma: WeightVector::zeros(k),
            sums: Vec::new(),
            max_basis: cfg.max_basis_rows.unwrap_or(2 * k),
            since_check: 0,
            stats: SolveStats::default(),
        })
    }

    fn run(&mut self) -> Result<Option<Decomposition>, Interrupt> {
        let Some(&first) = self.order.first() else {
            return Ok(Some(Decomposition::new(Vec::new(), WeightVector::zeros(self.k))));
        };
        self.branch(first)
    }

    /// Tries every admissible basis signature for the stuck row `v`.
    fn branch(&mut self, v: VertexId) -> Result<Option<Decomposition>, Interrupt> {
        if self.basis.len() >= self.max_basis {
            self.stats.backtracks += 1;
            return Ok(None);
        }
        self.reset_to_basis();
        let mut candidates = self.candidate_signatures(v);
        if self.cfg.column_symmetry_breaking {
            let used = self
                .basis
                .iter()
                .fold(0u32, |acc, &(_, s)| acc | s.bits());
            let prefix = 32 - used.leading_zeros();
            candidates.retain(|s| {
                let fresh = s.bits() >> prefix;
                fresh & fresh.wrapping_add(1) == 0
            });
        }
        for s in candidates {
            self.tick_signature()?;
            self.basis.push((v, s));
            let found = self.try_basis()?;
            self.basis.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        self.stats.backtracks += 1;
        Ok(None)
    }

    fn try_basis(&mut self) -> Result<Option<Decomposition>, Interrupt> {
        self.check_deadline()?;
        if self.cfg.count_lp_runs {
            self.stats.lp_runs += 1;
        }
        let Some(gamma) = infer_clique_weights(self.a, &self.basis, self.k, self.cfg.lp_mode)?
        else {
            self.stats.backtracks += 1;
            return Ok(None);
        };
        self.set_weights(gamma);
        self.reset_to_basis();
        match self.fill_non_basis()? {
            None => {
                let rows = self.rows.iter().map(|r| r.expect("filled")).collect();
                Ok(Some(Decomposition::new(rows, self.gamma.clone())))
            }
            Some(stuck) => self.branch(stuck),
        }
    }

    fn reset_to_basis(&mut self) {
        for &v in &self.assigned {
            self.rows[v] = None;
        }
        self.assigned.clear();
        for &(v, s) in &self.basis {
            self.rows[v] = Some(s);
            self.assigned.push(v);
        }
    }

    /// Installs clique weights for subsequent compatibility checks.
    pub fn set_weights(&mut self, gamma: WeightVector) {
        self.sums.clear();
        if self.k <= SUM_TABLE_MAX_K {
            self.sums.reserve(1 << self.k);
            self.sums.push(Rational::zero());
            for mask in 1u32..(1 << self.k) {
                let low = mask.trailing_zeros() as usize;
                let rest = self.sums[(mask & (mask - 1)) as usize];
                self.sums.push(rest + gamma.get(low));
            }
        }
        self.gamma = gamma;
    }

    /// Places basis rows without solving the LP; the state the fill starts from.
    pub fn set_basis(&mut self, basis: &[(VertexId, Signature)]) {
        self.basis = basis.to_vec();
        self.reset_to_basis();
    }

    pub fn row(&self, v: VertexId) -> Option<Signature> {
        self.rows[v]
    }

    fn masked_sum(&self, mask: u32) -> Rational {
        if self.sums.is_empty() {
            self.gamma.masked_sum(mask)
        } else {
            self.sums[mask as usize]
        }
    }

    /// `(i, W)`-compatibility of signature `s` for unassigned row `i`.
    pub fn is_w_compatible(&self, i: VertexId, s: Signature) -> bool {
        let base = i * self.n;
        for &j in &self.assigned {
            let bj = self.rows[j].expect("assigned row");
            if self.masked_sum(s.bits() & bj.bits()) != self.weights[base + j] {
                return false;
            }
        }
        match self.a.diag(i) {
            Some(d) => self.masked_sum(s.bits()) == d,
            None => true,
        }
    }

    /// Greedily fills null rows in order; returns the first row with no admissible signature.
    pub fn fill_non_basis(&mut self) -> Result<Option<VertexId>, Interrupt> {
        for idx in 0..self.order.len() {
            let v = self.order[idx];
            if self.rows[v].is_some() {
                continue;
            }
            let mut chosen = None;
            for s in self.candidate_signatures(v) {
                self.tick_signature()?;
                if self.is_w_compatible(v, s) {
                    chosen = Some(s);
                    break;
                }
            }
            match chosen {
                Some(s) => {
                    self.rows[v] = Some(s);
                    self.assigned.push(v);
                }
                None => return Ok(Some(v)),
            }
        }
        Ok(None)
    }

    /// Admissible signatures for unassigned `v` in ascending bitmask order.
    pub fn candidate_signatures(&self, v: VertexId) -> Vec<Signature> {
        let full: u32 = if self.k == 32 { u32::MAX } else { (1 << self.k) - 1 };
        let mut allowed = full;
        if self.cfg.srule1 {
            let base = v * self.n;
            for &u in &self.assigned {
                if !self.adjacent[base + u] {
                    allowed &= !self.rows[u].expect("assigned row").bits();
                }
            }
        }

        let mut twins: Vec<Signature> = Vec::new();
        let mut other_blocks: Vec<Signature> = Vec::new();
        if self.cfg.srule2 {
            let b = self.block_of[v];
            for &u in &self.assigned {
                let s = self.rows[u].expect("assigned row");
                if self.block_of[u] == b {
                    twins.push(s);
                } else if !s.is_zero() {
                    other_blocks.push(s);
                }
            }
            other_blocks.sort_unstable();
            other_blocks.dedup();
            if self.block_members[b].len() < 2 {
                twins.clear();
            }
        }
        let forced = match twins.as_slice() {
            [t, u, ..] if t == u => Some(*t),
            _ => None,
        };

        let admissible = |s: Signature| -> bool {
            if s.is_zero() && !self.zero_allowed[v] {
                return false;
            }
            if !self.cfg.srule2 {
                return true;
            }
            if !s.is_zero() && other_blocks.binary_search(&s).is_ok() {
                return false;
            }
            if let Some(f) = forced {
                return s == f;
            }
            if twins.len() >= 2 && twins.contains(&s) {
                return false;
            }
            !twins
                .iter()
                .any(|&t| s.is_proper_subset_of(t) || t.is_proper_subset_of(s))
        };

        if let Some(f) = forced {
            return if f.bits() & !allowed == 0 && admissible(f) {
                vec![f]
            } else {
                Vec::new()
            };
        }
        // ascending enumeration of the submasks of `allowed`
        let mut out = Vec::new();
        let mut s = 0u32;
        loop {
            if admissible(Signature(s)) {
                out.push(Signature(s));
            }
            if s == allowed {
                break;
            }
            s = ((s | !allowed).wrapping_add(1)) & allowed;
        }
        out
    }

    fn tick_signature(&mut self) -> Result<(), Interrupt> {
        self.stats.signatures_tested += 1;
        self.since_check += 1;
        if self.since_check >= 4096 {
            self.since_check = 0;
            self.check_deadline()?;
        }
        Ok(())
    }

    fn check_deadline(&self) -> Result<(), Interrupt> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Interrupt::Timeout),
            _ => Ok(()),
        }
    }
}

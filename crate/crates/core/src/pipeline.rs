//! End-to-end solve: preprocess, kernelize, search, lift, verify.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::instance::{AnnotatedMatrix, InstanceError, Rational, VertexId, WeightedGraph};
use crate::kernel::{
    kernelize, lift_solution, preprocess, IsolatedPolicy, KernelError, KernelOutcome,
    KernelStats, KernelTrace, KernelVariant,
};
use crate::lpfeas::WeightVector;
use crate::oracle::{verify, OracleError};
use crate::search::{
    clique_decomp_ordered, order_vertices, Decomposition, OutcomeKind, SearchError, SolveConfig,
    SolveOutcome, SolveStats, VertexOrdering, K_MAX,
};

/// Which kernel to apply before searching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelChoice {
    None,
    Cricca,
    Decaf,
}

impl KernelChoice {
    pub const ALL: [KernelChoice; 3] = [KernelChoice::None, KernelChoice::Cricca, KernelChoice::Decaf];

    pub fn name(self) -> &'static str {
        match self {
            KernelChoice::None => "none",
            KernelChoice::Cricca => "cricca",
            KernelChoice::Decaf => "decaf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn variant(self) -> Option<KernelVariant> {
        match self {
            KernelChoice::None => None,
            KernelChoice::Cricca => Some(KernelVariant::Cricca),
            KernelChoice::Decaf => Some(KernelVariant::Decaf),
        }
    }
}

/// Cumulative search-rule sets: rule 0 is the push-front ordering, rule 1 the
/// non-neighbour rule, rule 2 the twin rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SRuleSet {
    None,
    R0,
    R01,
    R012,
}

impl SRuleSet {
    pub const ALL: [SRuleSet; 4] = [SRuleSet::None, SRuleSet::R0, SRuleSet::R01, SRuleSet::R012];

    pub fn name(self) -> &'static str {
        match self {
            SRuleSet::None => "none",
            SRuleSet::R0 => "0",
            SRuleSet::R01 => "01",
            SRuleSet::R012 => "012",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Sets the rule flags; rule 0 sets the ordering unless `explicit_order` is given.
    pub fn apply(self, cfg: &mut SolveConfig, explicit_order: Option<VertexOrdering>) {
        let rank = self as u8;
        cfg.ordering = explicit_order.unwrap_or(if rank >= 1 {
            VertexOrdering::PushFront
        } else {
            VertexOrdering::Arbitrary
        });
        cfg.srule1 = rank >= 2;
        cfg.srule2 = rank >= 3;
    }

    /// Label for a configuration's flags.
    pub fn describe(cfg: &SolveConfig) -> String {
        let mut s = String::new();
        if cfg.ordering == VertexOrdering::PushFront {
            s.push('0');
        }
        if cfg.srule1 {
            s.push('1');
        }
        if cfg.srule2 {
            s.push('2');
        }
        if s.is_empty() {
            s.push_str("none");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub kernel: KernelChoice,
    pub search: SolveConfig,
    pub isolated: IsolatedPolicy,
}

impl PipelineConfig {
    pub const PRESETS: [&'static str; 3] = ["decaf", "cricca", "cricca-star"];

    /// Kernel with the `k` threshold and all search rules.
    pub fn decaf() -> Self {
        PipelineConfig {
            kernel: KernelChoice::Decaf,
            search: SolveConfig::default(),
            isolated: IsolatedPolicy::Ignore,
        }
    }

    /// Kernel with the `2^k` threshold and plain backtracking.
    pub fn cricca() -> Self {
        PipelineConfig {
            kernel: KernelChoice::Cricca,
            search: SolveConfig::baseline(),
            isolated: IsolatedPolicy::Ignore,
        }
    }

    /// As [`PipelineConfig::cricca`] with push-front ordering.
    pub fn cricca_star() -> Self {
        let mut cfg = Self::cricca();
        cfg.search.ordering = VertexOrdering::PushFront;
        cfg
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "decaf" => Some(Self::decaf()),
            "cricca" => Some(Self::cricca()),
            "cricca-star" | "cricca_star" => Some(Self::cricca_star()),
            _ => None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.search.timeout = timeout;
        self
    }

    /// Short label such as `decaf/push_front/012`.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{}/{}/{}",
            self.kernel.name(),
            self.search.ordering.name(),
            SRuleSet::describe(&self.search)
        );
        if self.search.column_symmetry_breaking {
            s.push_str("/sym");
        }
        s
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::decaf()
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("k = {0} exceeds the supported maximum {K_MAX}")]
    UnsupportedK(usize),
    #[error("lifted solution fails verification at ({i}, {j})")]
    LiftFailed { i: VertexId, j: VertexId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineOutcome {
    /// A decomposition of the input graph, one row per input vertex.
    Yes(Decomposition),
    No,
    Timeout,
}

impl PipelineOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, PipelineOutcome::Yes(_))
    }

    pub fn kind(&self) -> OutcomeKind {
        match self {
            PipelineOutcome::Yes(_) => OutcomeKind::Yes,
            PipelineOutcome::No => OutcomeKind::No,
            PipelineOutcome::Timeout => OutcomeKind::Timeout,
        }
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            PipelineOutcome::Yes(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineRun {
    pub outcome: PipelineOutcome,
    pub search: SolveStats,
    pub kernel: KernelStats,
    /// Vertices left after isolated-vertex removal.
    pub n_preprocessed: usize,
    /// Budget passed to the search.
    pub k_effective: i64,
    pub wall_time: Duration,
}

impl PipelineRun {
    pub fn n_kernel(&self) -> usize {
        self.kernel.n_after
    }

    /// `key value` pairs for solution files and logs.
    pub fn stat_pairs(&self) -> Vec<(String, String)> {
        vec![
            ("n_preprocessed".into(), self.n_preprocessed.to_string()),
            ("n_kernel".into(), self.kernel.n_after.to_string()),
            ("k_effective".into(), self.k_effective.to_string()),
            ("lp_runs".into(), self.search.lp_runs.to_string()),
            ("signatures_tested".into(), self.search.signatures_tested.to_string()),
            ("backtracks".into(), self.search.backtracks.to_string()),
            ("wall_ms".into(), format!("{:.3}", self.wall_time.as_secs_f64() * 1e3)),
        ]
    }
}

/// Decides whether `graph` with `annotations` is a sum of at most `k` weighted cliques.
///
/// A YES answer carries a decomposition of the input that has been verified entry by entry.
pub fn solve(
    graph: &WeightedGraph,
    annotations: &BTreeMap<VertexId, Rational>,
    k: usize,
    cfg: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    let start = Instant::now();
    if k > K_MAX {
        return Err(PipelineError::UnsupportedK(k));
    }
    let original = AnnotatedMatrix::from_graph(graph, annotations)?;
    let pre = preprocess(graph, annotations, k, cfg.isolated);
    let a = AnnotatedMatrix::from_graph(&pre.graph, &pre.annotations)?;
    let mut run = PipelineRun {
        outcome: PipelineOutcome::No,
        search: SolveStats::default(),
        kernel: KernelStats {
            n_before: a.n(),
            n_after: a.n(),
            ..KernelStats::default()
        },
        n_preprocessed: a.n(),
        k_effective: pre.k,
        wall_time: Duration::ZERO,
    };
    let finish = |mut run: PipelineRun| {
        run.wall_time = start.elapsed();
        run.search.outcome = run.outcome.kind();
        log::debug!(
            "solve k={k} config={} outcome={} n_kernel={} lp_runs={}",
            cfg.label(),
            run.outcome.kind().name(),
            run.kernel.n_after,
            run.search.lp_runs
        );
        Ok(run)
    };

    if pre.k < 0 {
        run.kernel.n_after = 0;
        return finish(run);
    }
    let k_eff = pre.k as usize;
    if a.n() == 0 {
        let empty = Decomposition::new(Vec::new(), WeightVector::zeros(k_eff));
        run.outcome = PipelineOutcome::Yes(pre.lift(&empty));
        return finish(run);
    }
    if k_eff == 0 {
        // every remaining vertex has an edge or a positive annotation to cover
        return finish(run);
    }

    let (kernel, trace) = match cfg.kernel.variant() {
        None => {
            let trace = KernelTrace::identity(&a);
            (a, trace)
        }
        Some(variant) => {
            let res = kernelize(&a, k_eff, variant)?;
            run.kernel = res.stats;
            match res.outcome {
                KernelOutcome::No(reason) => {
                    log::debug!("kernel rejects: {reason}");
                    return finish(run);
                }
                KernelOutcome::Reduced { matrix, trace } => (matrix, trace),
            }
        }
    };

    let order = order_vertices(&trace, cfg.search.ordering);
    let (outcome, stats) = clique_decomp_ordered(&kernel, k_eff, &cfg.search, &order)?;
    run.search = stats;
    run.outcome = match outcome {
        SolveOutcome::No => PipelineOutcome::No,
        SolveOutcome::Timeout => PipelineOutcome::Timeout,
        SolveOutcome::Yes(d) => {
            let lifted = pre.lift(&lift_solution(&d, &trace)?);
            let report = verify(&original, lifted.rows(), lifted.gamma())?;
            if let Some(v) = report.first_violation {
                return Err(PipelineError::LiftFailed { i: v.i, j: v.j });
            }
            PipelineOutcome::Yes(lifted)
        }
    };
    finish(run)
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

//! Ground truth for small instances: an exact verifier and an exhaustive decider.

use thiserror::Error;

use crate::instance::{star_equal, AnnotatedMatrix, StarValue, VertexId};
use crate::lpfeas::{infer_clique_weights, LpError, LpMode, WeightVector};
use crate::search::{Decomposition, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("instance too large for the exhaustive oracle (n = {n}, k = {k}; limits {max_n}, {max_k})")]
    TooLarge {
        n: usize,
        k: usize,
        max_n: usize,
        max_k: usize,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub i: VertexId,
    pub j: VertexId,
    pub lhs: crate::instance::Rational,
    pub rhs: StarValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub ok: bool,
    pub first_violation: Option<Violation>,
}

/// Checks `A ⋆= B W Bᵀ` entry by entry.
pub fn verify(
    a: &AnnotatedMatrix,
    rows: &[Signature],
    gamma: &WeightVector,
) -> Result<VerifyReport, OracleError> {
    if rows.len() != a.n() {
        return Err(OracleError::DimensionMismatch(format!(
            "{} rows for a {}-vertex instance",
            rows.len(),
            a.n()
        )));
    }
    let k = gamma.k();
    if k < 32 {
        if let Some((v, s)) = rows.iter().enumerate().find(|(_, s)| s.bits() >> k != 0) {
            return Err(OracleError::DimensionMismatch(format!(
                "row {v} = {s:?} uses a clique beyond k = {k}"
            )));
        }
    }
    for i in 0..a.n() {
        for j in i..a.n() {
            let lhs = gamma.masked_sum(rows[i].bits() & rows[j].bits());
            let rhs = a.entry(i, j);
            if !star_equal(StarValue::Number(lhs), rhs) {
                return Ok(VerifyReport {
                    ok: false,
                    first_violation: Some(Violation { i, j, lhs, rhs }),
                });
            }
        }
    }
    Ok(VerifyReport {
        ok: true,
        first_violation: None,
    })
}

/// Size guards for [`brute_force_decide`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_k: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_n: 10, max_k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Yes(Decomposition),
    No,
}

impl OracleOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, OracleOutcome::Yes(_))
    }
}

/// Exhausts all assignments of `k`-bit signatures to rows, up to relabelling of columns.
///
/// Columns are canonical when they are first used in increasing order. Partial
/// assignments are abandoned only when an edge or a positive diagonal entry has no
/// clique left to cover it. Each complete assignment is checked with the LP.
pub fn brute_force_decide(
    a: &AnnotatedMatrix,
    k: usize,
    limits: OracleLimits,
) -> Result<OracleOutcome, OracleError> {
    if a.n() > limits.max_n || k > limits.max_k {
        return Err(OracleError::TooLarge {
            n: a.n(),
            k,
            max_n: limits.max_n,
            max_k: limits.max_k,
        });
    }
    let mut rows = vec![Signature::ZERO; a.n()];
    match assign(a, k, 0, 0, &mut rows)? {
        Some(gamma) => Ok(OracleOutcome::Yes(Decomposition::new(rows, gamma))),
        None => Ok(OracleOutcome::No),
    }
}

fn assign(
    a: &AnnotatedMatrix,
    k: usize,
    row: usize,
    used: usize,
    rows: &mut [Signature],
) -> Result<Option<WeightVector>, OracleError> {
    if row == a.n() {
        let all: Vec<(VertexId, Signature)> = rows.iter().copied().enumerate().collect();
        return Ok(infer_clique_weights(a, &all, k, LpMode::Rational)?);
    }
    for bits in 0u32..(1 << k) {
        let fresh = bits >> used;
        if fresh & fresh.wrapping_add(1) != 0 {
            continue;
        }
        let s = Signature::new(bits);
        if s.is_zero() && a.diag(row).is_some_and(|d| d > num_traits::Zero::zero()) {
            continue;
        }
        let uncovered = (0..row).any(|j| {
            rows[j].bits() & bits == 0 && a.weight(row, j) > num_traits::Zero::zero()
        });
        if uncovered {
            continue;
        }
        rows[row] = s;
        let now_used = used + fresh.count_ones() as usize;
        if let Some(g) = assign(a, k, row + 1, now_used, rows)? {
            return Ok(Some(g));
        }
    }
    rows[row] = Signature::ZERO;
    Ok(None)
}

/// Smallest `k ≤ k_cap` admitting a decomposition, or `None` when there is none.
pub fn minimal_k(
    a: &AnnotatedMatrix,
    k_cap: usize,
    limits: OracleLimits,
) -> Result<Option<usize>, OracleError> {
    for k in 0..=k_cap {
        if brute_force_decide(a, k, limits)?.is_yes() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

//! Clique-weight inference by LP feasibility.
//!
//! Every constraint has the shape `Σ_{q ∈ mask} γ_q = rhs` with `γ ≥ 0`. Feasibility is
//! decided with a phase-1 simplex (Bland's rule). The default exact mode pivots over
//! `i128` rationals with checked arithmetic and reruns over big integers on overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::instance::{AnnotatedMatrix, Rational, VertexId};
use crate::search::Signature;

/// Tolerance used by the float LP mode.
pub const EPS_LP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum LpMode {
    #[default]
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint mask {mask:#b} uses variables beyond k = {k}")]
    DimensionMismatch { mask: u32, k: usize },
    #[error("LP solution does not fit the 128-bit rational weight type")]
    Overflow,
}

/// Clique weights, the diagonal of `W`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightVector(Vec<Rational>);

impl WeightVector {
    pub fn new(gamma: Vec<Rational>) -> Self {
        debug_assert!(gamma.iter().all(|g| !g.is_negative()));
        WeightVector(gamma)
    }

    pub fn zeros(k: usize) -> Self {
        WeightVector(vec![Rational::zero(); k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, q: usize) -> Rational {
        self.0[q]
    }

    /// `Σ_{q ∈ mask} γ_q`.
    pub fn masked_sum(&self, mask: u32) -> Rational {
        let mut sum = Rational::zero();
        let mut m = mask;
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            sum += self.0[q];
            m &= m - 1;
        }
        sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub mask: u32,
    pub rhs: Rational,
}

/// Equality-constrained feasibility problem over `k` nonnegative variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpProblem {
    pub k: usize,
    pub constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(k: usize) -> Self {
        LpProblem {
            k,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, mask: u32, rhs: Rational) {
        self.constraints.push(Constraint { mask, rhs });
    }

    pub fn is_satisfied_by(&self, gamma: &WeightVector) -> bool {
        self.constraints
            .iter()
            .all(|c| gamma.masked_sum(c.mask) == c.rhs)
    }
}

/// Builds the LP for the non-null rows and solves it.
///
/// One constraint per unordered pair of rows `(i, j)` whose entry is not a wildcard,
/// including `i = j` for annotated vertices. `None` means infeasible.
pub fn infer_clique_weights(
    a: &AnnotatedMatrix,
    rows: &[(VertexId, Signature)],
    k: usize,
    mode: LpMode,
) -> Result<Option<WeightVector>, LpError> {
    let mut p = LpProblem::new(k);
    for (x, &(i, si)) in rows.iter().enumerate() {
        if let Some(d) = a.diag(i) {
            p.push(si.bits(), d);
        }
        for &(j, sj) in &rows[x + 1..] {
            p.push(si.bits() & sj.bits(), a.weight(i, j));
        }
    }
    solve_feasibility(&p, mode)
}

/// Returns a feasible vertex of `p` or `None` if the constraints cannot all hold.
pub fn solve_feasibility(p: &LpProblem, mode: LpMode) -> Result<Option<WeightVector>, LpError> {
    let full = if p.k >= 32 { u32::MAX } else { (1u32 << p.k) - 1 };
    let mut cons = Vec::with_capacity(p.constraints.len());
    for c in &p.constraints {
        if c.mask & !full != 0 {
            return Err(LpError::DimensionMismatch { mask: c.mask, k: p.k });
        }
        if c.rhs.is_negative() {
            return Ok(None);
        }
        if c.mask == 0 {
            if c.rhs.is_zero() {
                continue;
            }
            return Ok(None);
        }
        cons.push(*c);
    }
    cons.sort_unstable();
    cons.dedup();
    if cons.windows(2).any(|w| w[0].mask == w[1].mask) {
        // same left-hand side, different right-hand side
        return Ok(None);
    }
    if cons.is_empty() {
        return Ok(Some(WeightVector::zeros(p.k)));
    }

    match mode {
        LpMode::Rational => solve_exact(p.k, &cons),
        LpMode::Float => {
            match phase_one::<f64>(p.k, &cons) {
                Some(Some(x)) => {
                    let snapped: Option<Vec<Rational>> = x.iter().map(|&v| snap(v)).collect();
                    if let Some(g) = snapped {
                        let g = WeightVector::new(g);
                        if cons.iter().all(|c| g.masked_sum(c.mask) == c.rhs) {
                            return Ok(Some(g));
                        }
                    }
                    // The float vertex does not round to an exact solution.
                    solve_exact(p.k, &cons)
                }
                Some(None) => Ok(None),
                None => solve_exact(p.k, &cons),
            }
        }
    }
}

fn solve_exact(k: usize, cons: &[Constraint]) -> Result<Option<WeightVector>, LpError> {
    if let Some(res) = phase_one_integer(k, cons) {
        return Ok(res.map(WeightVector::new));
    }
    if let Some(res) = phase_one::<Ratio<i128>>(k, cons) {
        return Ok(res.map(WeightVector::new));
    }
    match phase_one::<BigRational>(k, cons).expect("big rationals do not overflow") {
        None => Ok(None),
        Some(x) => {
            let g = x
                .iter()
                .map(|v| {
                    let n = v.numer().to_i128()?;
                    let d = v.denom().to_i128()?;
                    Some(Rational::new(n, d))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or(LpError::Overflow)?;
            Ok(Some(WeightVector::new(g)))
        }
    }
}

/// Nearest rational with a small denominator, if within [`EPS_LP`].
fn snap(x: f64) -> Option<Rational> {
    if x.abs() <= EPS_LP {
        return Some(Rational::zero());
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut t = x;
    for _ in 0..40 {
        let a = t.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if k1 > 1_000_000 {
            return None;
        }
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= EPS_LP * x.abs().max(1.0) {
            return Some(Rational::new(h1, k1).max(Rational::zero()));
        }
        let frac = t - a;
        if frac.abs() < 1e-15 {
            break;
        }
        t = 1.0 / frac;
    }
    None
}

/// Field operations for the tableau; `None` signals arithmetic overflow.
trait Scalar: Clone + Sized {
    fn nil() -> Self;
    fn unit() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_nil(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn less(&self, o: &Self) -> bool;
}

impl Scalar for Ratio<i128> {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        *r
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        let g = self.denom().gcd(o.denom());
        let (bd, dd) = (self.denom() / g, o.denom() / g);
        let num = self
            .numer()
            .checked_mul(dd)?
            .checked_add(o.numer().checked_mul(bd)?)?;
        let den = self.denom().checked_mul(dd)?;
        Some(Ratio::new(num, den))
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&Ratio::new_raw(o.numer().checked_neg()?, *o.denom()))
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(self) || Zero::is_zero(o) {
            return Some(Zero::zero());
        }
        let g1 = self.numer().gcd(o.denom());
        let g2 = o.numer().gcd(self.denom());
        let num = (self.numer() / g1).checked_mul(o.numer() / g2)?;
        let den = (self.denom() / g2).checked_mul(o.denom() / g1)?;
        Some(Ratio::new(num, den))
    }
    fn div(&self, o: &Self) -> Option<Self> {
        let (n, d) = (*o.numer(), *o.denom());
        let recip = if n < 0 {
            Ratio::new_raw(d.checked_neg()?, n.checked_neg()?)
        } else {
            Ratio::new_raw(d, n)
        };
        self.mul(&recip)
    }
    fn less(&self, o: &Self) -> bool {
        // cross-multiplication can overflow; compare via the checked difference
        match self.sub(o) {
            Some(d) => Signed::is_negative(&d),
            None => self < o,
        }
    }
}

impl Scalar for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }
    fn is_nil(&self) -> bool {
        self.abs() <= EPS_LP
    }
    fn is_pos(&self) -> bool {
        *self > EPS_LP
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn less(&self, o: &Self) -> bool {
        *self < *o - EPS_LP
    }
}

/// Phase-1 simplex on `{Mx = b, x ≥ 0}` with one artificial per row.
///
/// Artificial columns are not stored: an artificial that leaves the basis never needs to
/// return, since a positive optimum of the restricted problem already rules out a
/// solution with all artificials at zero. Bland's rule prevents cycling.
///
/// Outer `None` means overflow, `Some(None)` infeasible, `Some(Some(x))` a feasible vertex.
fn phase_one<T: Scalar>(k: usize, cons: &[Constraint]) -> Option<Option<Vec<T::Out>>>
where
    T: ScalarOut,
{
    let m = cons.len();
    let rhs = k;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for c in cons {
        let mut row = vec![T::nil(); k + 1];
        for (q, cell) in row.iter_mut().enumerate().take(k) {
            if c.mask >> q & 1 == 1 {
                *cell = T::unit();
            }
        }
        row[rhs] = T::from_rational(&c.rhs);
        tab.push(row);
    }
    // basic variable per row: a structural index, or `k + r` for row r's artificial
    let mut basis: Vec<usize> = (k..k + m).collect();
    // reduced costs of the structurals; obj[rhs] is minus the artificial sum
    let mut obj = vec![T::nil(); k + 1];
    for row in &tab {
        for j in 0..=k {
            obj[j] = obj[j].sub(&row[j])?;
        }
    }

    loop {
        let Some(enter) = (0..k).find(|&j| {
            let d = &obj[j];
            !d.is_nil() && !d.is_pos()
        }) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<T> = None;
        for r in 0..m {
            let a = &tab[r][enter];
            if !a.is_pos() {
                continue;
            }
            let ratio = tab[r][rhs].div(a)?;
            let better = match (&best, leave) {
                (Some(b), Some(l)) => ratio.less(b) || (!b.less(&ratio) && basis[r] < basis[l]),
                _ => true,
            };
            if better {
                best = Some(ratio);
                leave = Some(r);
            }
        }
        // the phase-one objective is bounded below, so some row limits the step
        let pr = leave.expect("phase-one objective is bounded");
        let pivot = tab[pr][enter].clone();
        for j in 0..=k {
            tab[pr][j] = tab[pr][j].div(&pivot)?;
        }
        let prow = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r == pr || row[enter].is_nil() {
                continue;
            }
            let f = row[enter].clone();
            for j in 0..=k {
                if !prow[j].is_nil() {
                    row[j] = row[j].sub(&f.mul(&prow[j])?)?;
                }
            }
        }
        if !obj[enter].is_nil() {
            let f = obj[enter].clone();
            for j in 0..=k {
                if !prow[j].is_nil() {
                    obj[j] = obj[j].sub(&f.mul(&prow[j])?)?;
                }
            }
        }
        basis[pr] = enter;
    }

    if !obj[rhs].is_nil() {
        return Some(None);
    }
    let mut x = vec![T::nil(); k];
    for (r, &b) in basis.iter().enumerate() {
        if b < k {
            x[b] = tab[r][rhs].clone();
        }
    }
    Some(Some(x.into_iter().map(T::finish).collect::<Option<Vec<_>>>()?))
}

/// [`phase_one`] on an integer tableau with fraction-free pivoting.
///
/// Every stored entry is a minor of the row-scaled input, so the update
/// `(p·t − a·b) / d` divides exactly by the previous pivot `d`, and the true tableau is
/// the stored one divided by `d`. `None` on `i64` overflow.
fn phase_one_integer(k: usize, cons: &[Constraint]) -> Option<Option<Vec<Rational>>> {
    let m = cons.len();
    let rhs = k;
    let mut tab: Vec<Vec<i64>> = Vec::with_capacity(m);
    for c in cons {
        // scale the row so its right-hand side is integral
        let scale = i64::try_from(*c.rhs.denom()).ok()?;
        let mut row = vec![0i64; k + 1];
        for (q, cell) in row.iter_mut().enumerate().take(k) {
            if c.mask >> q & 1 == 1 {
                *cell = scale;
            }
        }
        row[rhs] = i64::try_from(*c.rhs.numer()).ok()?;
        tab.push(row);
    }
    let mut basis: Vec<usize> = (k..k + m).collect();
    let mut obj = vec![0i64; k + 1];
    for row in &tab {
        for j in 0..=k {
            obj[j] = obj[j].checked_sub(row[j])?;
        }
    }
    let mut d: i64 = 1;

    while let Some(enter) = (0..k).find(|&j| obj[j] < 0) {
        let mut leave: Option<usize> = None;
        for r in 0..m {
            if tab[r][enter] <= 0 {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    // tab[r][rhs] / tab[r][enter]  vs  tab[l][rhs] / tab[l][enter]
                    let lhs = tab[r][rhs].checked_mul(tab[l][enter])?;
                    let rhs_ = tab[l][rhs].checked_mul(tab[r][enter])?;
                    lhs < rhs_ || (lhs == rhs_ && basis[r] < basis[l])
                }
            };
            if better {
                leave = Some(r);
            }
        }
        let pr = leave.expect("phase-one objective is bounded");
        let p = tab[pr][enter];
        let prow = tab[pr].clone();
        let update = |row: &mut Vec<i64>| -> Option<()> {
            let a = row[enter];
            for j in 0..=k {
                let v = p.checked_mul(row[j])?.checked_sub(a.checked_mul(prow[j])?)?;
                debug_assert_eq!(v % d, 0);
                row[j] = v / d;
            }
            Some(())
        };
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr {
                update(row)?;
            }
        }
        update(&mut obj)?;
        d = p;
        basis[pr] = enter;
    }

    if obj[rhs] != 0 {
        return Some(None);
    }
    let mut x = vec![Rational::zero(); k];
    for (r, &b) in basis.iter().enumerate() {
        if b < k {
            x[b] = Rational::new(tab[r][rhs] as i128, d as i128);
        }
    }
    Some(Some(x))
}

/// Conversion of a finished tableau value to the caller-facing type.
trait ScalarOut: Scalar {
    type Out;
    fn finish(self) -> Option<Self::Out>;
}

impl ScalarOut for Ratio<i128> {
    type Out = Rational;
    fn finish(self) -> Option<Rational> {
        Some(self)
    }
}

impl ScalarOut for BigRational {
    type Out = BigRational;
    fn finish(self) -> Option<BigRational> {
        Some(self)
    }
}

impl ScalarOut for f64 {
    type Out = f64;
    fn finish(self) -> Option<f64> {
        Some(self.max(0.0))
    }
}

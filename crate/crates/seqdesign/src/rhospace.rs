//! The dual, invariant-first view of sequencing: searching over sequences
//! of orbit-invariant values instead of domain enumerations.
//!
//! A candidate is a sequence of distinct invariant values; it is realizable
//! exactly when the chain of domain elements it forces (via
//! [`Action::solve_rho`]) stays collision-free. For the affine action the
//! collision tests are the nonvanishing of the distinguishing polynomials
//!
//! d_s(ρ₁,…,ρ_s) = 1 - ρ₁ + ρ₁ρ₂ - ⋯ ± ρ₁ρ₂⋯ρ_s,
//!
//! computable by the recursion d_s = 1 - ρ₁·d_{s-1}(ρ₂,…,ρ_s); for the
//! fractional-linear action closed forms are tabulated up to degree 4. The
//! generic validity test reconstructs the chain instead, which covers every
//! sharp action without per-group symbolic work.

use thiserror::Error;

use crate::actions::{Action, Label};
use crate::finfield::{FieldElement, FieldSpec};
use crate::sequencer::{SearchMode, SearchStats, Sequencing};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RhoError {
    #[error("no closed-form distinguisher of order {0}; use the reconstruction test instead")]
    UnsupportedOrder(usize),
}

/// A sequence of orbit-invariant values, the dual representation of a
/// sequencing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RhoSequence {
    values: Vec<Label>,
}

impl RhoSequence {
    pub fn new(values: Vec<Label>) -> RhoSequence {
        RhoSequence { values }
    }

    pub fn values(&self) -> &[Label] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates the affine distinguishing polynomial d_s on s invariant values
/// via the recursion d_s = 1 - ρ₁·d_{s-1}(ρ₂,…,ρ_s), d₀ = 1.
pub fn affine_d(field: &FieldSpec, rhos: &[FieldElement]) -> FieldElement {
    let mut d = field.one();
    for &r in rhos.iter().rev() {
        d = field.sub(field.one(), field.mul(r, d));
    }
    d
}

/// Evaluates the cross-ratio distinguishing polynomial d_s, s ≤ 4, from the
/// closed forms:
///
/// d₁ = ρ₁
/// d₂ = ρ₁ρ₂ - 1
/// d₃ = ρ₁ρ₂ρ₃ - ρ₁ - ρ₃ + 1
/// d₄ = ρ₁ρ₂ρ₃ρ₄ - ρ₁ρ₂ - ρ₁ρ₄ - ρ₃ρ₄ + ρ₁ + ρ₄
pub fn pgl_d(field: &FieldSpec, rhos: &[FieldElement]) -> Result<FieldElement, RhoError> {
    let f = field;
    match *rhos {
        [r1] => Ok(r1),
        [r1, r2] => Ok(f.sub(f.mul(r1, r2), f.one())),
        [r1, r2, r3] => {
            let mut v = f.mul(f.mul(r1, r2), r3);
            v = f.sub(v, r1);
            v = f.sub(v, r3);
            Ok(f.add(v, f.one()))
        }
        [r1, r2, r3, r4] => {
            let mut v = f.mul(f.mul(r1, r2), f.mul(r3, r4));
            v = f.sub(v, f.mul(r1, r2));
            v = f.sub(v, f.mul(r1, r4));
            v = f.sub(v, f.mul(r3, r4));
            v = f.add(v, r1);
            Ok(f.add(v, r4))
        }
        _ => Err(RhoError::UnsupportedOrder(rhos.len())),
    }
}

/// The windowed invariant values of an enumeration, in order; length is
/// always len(order) - k.
pub fn x_to_rho(action: &Action, order: &[Label]) -> RhoSequence {
    let k = action.k();
    let values = (0..order.len().saturating_sub(k))
        .map(|i| action.rho(&order[i..i + k + 1]))
        .collect();
    RhoSequence::new(values)
}

/// Rebuilds the standard-form enumeration forced by a full-length value
/// sequence, or None when the chain collides (no sequencing realizes it).
pub fn rho_to_x(action: &Action, values: &[Label]) -> Option<Sequencing> {
    debug_assert_eq!(values.len(), action.m());
    let chain = reconstruct(action, values)?;
    Some(Sequencing::from_order_unchecked(chain))
}

fn reconstruct(action: &Action, values: &[Label]) -> Option<Vec<Label>> {
    let k = action.k();
    let n = action.n();
    let mut chain: Vec<Label> = action.reference().to_vec();
    let mut used = vec![false; n];
    for &x in &chain {
        used[x as usize] = true;
    }
    for (i, &v) in values.iter().enumerate() {
        let x = action.solve_rho(&chain[i..i + k], v);
        if used[x as usize] {
            return None;
        }
        used[x as usize] = true;
        chain.push(x);
    }
    Some(chain)
}

/// Why a value prefix fails to extend to distinct domain elements.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RhoViolation {
    /// Two positions carry the same value.
    DuplicateValue { first: usize, second: usize },
    /// The value at `position` is the reference label with index
    /// `reference_index`, which folds the forced element onto an entry of
    /// its own window; such values are forbidden everywhere.
    ReferenceValue {
        position: usize,
        reference_index: usize,
    },
    /// The distinguisher over value positions start..=end (order
    /// end-start+1) vanishes: the element forced at step `end` equals the
    /// one entering at step `start`.
    Collision { start: usize, end: usize },
}

#[derive(Clone, Debug)]
pub struct RhoCheck {
    pub valid: bool,
    pub violation: Option<RhoViolation>,
}

/// Decides whether a prefix of distinct invariant values extends to
/// distinct domain elements, by incremental reconstruction. Equivalent to
/// the nonvanishing of every windowed distinguisher.
pub fn rho_valid(action: &Action, prefix: &[Label]) -> bool {
    rho_check(action, prefix).valid
}

/// As [`rho_valid`], reporting the first violation: a duplicated value or
/// the first vanishing distinguisher window.
pub fn rho_check(action: &Action, prefix: &[Label]) -> RhoCheck {
    let k = action.k();
    let n = action.n();
    let mut first_pos = vec![usize::MAX; n];
    for (i, &v) in prefix.iter().enumerate() {
        if first_pos[v as usize] != usize::MAX {
            return RhoCheck {
                valid: false,
                violation: Some(RhoViolation::DuplicateValue {
                    first: first_pos[v as usize],
                    second: i,
                }),
            };
        }
        first_pos[v as usize] = i;
    }
    let mut chain: Vec<Label> = action.reference().to_vec();
    let mut position = vec![usize::MAX; n];
    for (i, &x) in chain.iter().enumerate() {
        position[x as usize] = i;
    }
    for (i, &v) in prefix.iter().enumerate() {
        let x = action.solve_rho(&chain[i..i + k], v);
        let j = position[x as usize];
        if j != usize::MAX {
            // chain position j maps to the distinguisher window j..=i when
            // the earlier occurrence predates the current window; inside
            // the window (j > i) the value itself is a reference label
            let violation = if j > i {
                RhoViolation::ReferenceValue {
                    position: i,
                    reference_index: j - i,
                }
            } else {
                RhoViolation::Collision { start: j, end: i }
            };
            return RhoCheck {
                valid: false,
                violation: Some(violation),
            };
        }
        position[x as usize] = chain.len();
        chain.push(x);
    }
    RhoCheck {
        valid: true,
        violation: None,
    }
}

/// Incrementally maintained table of affine distinguisher values.
///
/// After pushing ρ₀,…,ρ_j, column j holds d_{j-i+1}(ρ_i,…,ρ_j) for each
/// i ≤ j, computed by one downward sweep of the recursion; a push is
/// accepted only when ρ_j ≠ 0 and the whole column is nonzero, which is
/// exactly the condition that the forced domain chain stays collision-free.
pub struct DistinguisherTrace {
    field: FieldSpec,
    rhos: Vec<FieldElement>,
    columns: Vec<Vec<FieldElement>>,
}

impl DistinguisherTrace {
    pub fn new(field: FieldSpec) -> DistinguisherTrace {
        DistinguisherTrace {
            field,
            rhos: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.rhos.len()
    }

    /// Tries to extend by one value; on rejection the trace is unchanged.
    pub fn push(&mut self, rho: FieldElement) -> bool {
        let f = &self.field;
        if rho == f.zero() {
            return false;
        }
        let mut column = vec![f.zero(); self.rhos.len() + 1];
        let mut d = f.sub(f.one(), rho);
        if d == f.zero() {
            return false;
        }
        column[self.rhos.len()] = d;
        for i in (0..self.rhos.len()).rev() {
            d = f.sub(f.one(), f.mul(self.rhos[i], d));
            if d == f.zero() {
                return false;
            }
            column[i] = d;
        }
        self.rhos.push(rho);
        self.columns.push(column);
        true
    }

    pub fn pop(&mut self) {
        self.rhos.pop();
        self.columns.pop();
    }

    /// d over value positions i..=j, from the stored triangle.
    pub fn window_value(&self, i: usize, j: usize) -> FieldElement {
        self.columns[j][i]
    }
}

#[derive(Clone, Debug)]
pub struct RhoSearchResult {
    pub first: Option<RhoSequence>,
    pub all: Vec<RhoSequence>,
    pub stats: SearchStats,
}

/// Depth-first search over sequences of distinct invariant values, pruned
/// by realizability. Mirrors [`crate::sequencer::dfs_sequence`] node for node, so
/// S (and T) agree between the two searches.
pub fn rho_dfs(action: &Action, mode: SearchMode) -> RhoSearchResult {
    assert!(action.is_sharp(), "the value-first search needs a sharp action");
    match action.kind_name() {
        "affine" => rho_dfs_affine(action, mode),
        _ => rho_dfs_reconstruct(action, mode),
    }
}

fn non_reference_labels(action: &Action) -> Vec<Label> {
    (0..action.n() as Label)
        .filter(|l| !action.reference().contains(l))
        .collect()
}

/// Generic engine: the partial domain chain doubles as the validity test.
fn rho_dfs_reconstruct(action: &Action, mode: SearchMode) -> RhoSearchResult {
    let start = std::time::Instant::now();
    let k = action.k();
    let n = action.n();
    let m = action.m();
    let candidates = non_reference_labels(action);

    let mut stats = SearchStats {
        sequencings: 0,
        nodes: 0,
        mode,
        elapsed: std::time::Duration::ZERO,
    };
    let mut first = None;
    let mut all = Vec::new();
    let mut values: Vec<Label> = Vec::with_capacity(m);
    let mut chain: Vec<Label> = action.reference().to_vec();
    let mut used_x = vec![false; n];
    for &x in &chain {
        used_x[x as usize] = true;
    }
    let mut used_v = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn go(
        action: &Action,
        candidates: &[Label],
        m: usize,
        k: usize,
        values: &mut Vec<Label>,
        chain: &mut Vec<Label>,
        used_x: &mut [bool],
        used_v: &mut [bool],
        stats: &mut SearchStats,
        first: &mut Option<RhoSequence>,
        all: &mut Vec<RhoSequence>,
    ) -> bool {
        stats.nodes += 1;
        if values.len() == m {
            stats.sequencings += 1;
            let found = RhoSequence::new(values.clone());
            if first.is_none() {
                *first = Some(found.clone());
            }
            match stats.mode {
                SearchMode::FindFirst => return true,
                SearchMode::EnumerateAll { cap } => {
                    if all.len() < cap {
                        all.push(found);
                    }
                }
                SearchMode::CountAll => {}
            }
            return false;
        }
        let depth = values.len();
        for &v in candidates {
            if used_v[v as usize] {
                continue;
            }
            let x = action.solve_rho(&chain[depth..depth + k], v);
            if used_x[x as usize] {
                continue;
            }
            used_v[v as usize] = true;
            used_x[x as usize] = true;
            values.push(v);
            chain.push(x);
            let stop = go(
                action, candidates, m, k, values, chain, used_x, used_v, stats, first, all,
            );
            chain.pop();
            values.pop();
            used_x[x as usize] = false;
            used_v[v as usize] = false;
            if stop {
                return true;
            }
        }
        false
    }

    go(
        action,
        &candidates,
        m,
        k,
        &mut values,
        &mut chain,
        &mut used_x,
        &mut used_v,
        &mut stats,
        &mut first,
        &mut all,
    );
    stats.elapsed = start.elapsed();
    RhoSearchResult { first, all, stats }
}

/// Affine fast path: validity via the distinguisher trace, no domain chain.
fn rho_dfs_affine(action: &Action, mode: SearchMode) -> RhoSearchResult {
    let start = std::time::Instant::now();
    let field = action.field().expect("affine actions carry a field").clone();
    let m = action.m();
    let n = action.n();
    let candidates = non_reference_labels(action);

    let mut stats = SearchStats {
        sequencings: 0,
        nodes: 0,
        mode,
        elapsed: std::time::Duration::ZERO,
    };
    let mut first = None;
    let mut all = Vec::new();
    let mut values: Vec<Label> = Vec::with_capacity(m);
    let mut used_v = vec![false; n];
    let mut trace = DistinguisherTrace::new(field.clone());

    #[allow(clippy::too_many_arguments)]
    fn go(
        field: &FieldSpec,
        candidates: &[Label],
        m: usize,
        values: &mut Vec<Label>,
        used_v: &mut [bool],
        trace: &mut DistinguisherTrace,
        stats: &mut SearchStats,
        first: &mut Option<RhoSequence>,
        all: &mut Vec<RhoSequence>,
    ) -> bool {
        stats.nodes += 1;
        if values.len() == m {
            stats.sequencings += 1;
            let found = RhoSequence::new(values.clone());
            if first.is_none() {
                *first = Some(found.clone());
            }
            match stats.mode {
                SearchMode::FindFirst => return true,
                SearchMode::EnumerateAll { cap } => {
                    if all.len() < cap {
                        all.push(found);
                    }
                }
                SearchMode::CountAll => {}
            }
            return false;
        }
        for &v in candidates {
            if used_v[v as usize] {
                continue;
            }
            if !trace.push(field.element(v as u64)) {
                continue;
            }
            used_v[v as usize] = true;
            values.push(v);
            let stop = go(field, candidates, m, values, used_v, trace, stats, first, all);
            values.pop();
            used_v[v as usize] = false;
            trace.pop();
            if stop {
                return true;
            }
        }
        false
    }

    go(
        &field,
        &candidates,
        m,
        &mut values,
        &mut used_v,
        &mut trace,
        &mut stats,
        &mut first,
        &mut all,
    );
    stats.elapsed = start.elapsed();
    RhoSearchResult { first, all, stats }
}

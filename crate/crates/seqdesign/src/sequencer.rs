//! Depth-first search for sequencings, closed-form constructions, and the
//! expected-count estimates used to calibrate the search.
//!
//! A sequencing of an action is an enumeration of the domain whose
//! consecutive (k+1)-windows carry pairwise distinct orbit-invariant
//! values. The search fixes the reference k-tuple as a prefix (standard
//! form), extends by unused labels in ascending order, and prunes any
//! extension whose new window repeats an invariant value already used.
//!
//! Node-count convention: `T` counts every valid node of the tree including
//! the depth-0 reference prefix; `S` counts the full-length leaves.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::actions::{Action, Label};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequencerError {
    #[error("order is not a permutation of the domain (size {n})")]
    NotAPermutation { n: usize },
    #[error("order is not a sequencing: window {window} repeats the invariant value {value} of window {earlier}")]
    NotASequencing {
        window: usize,
        earlier: usize,
        value: Label,
    },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
}

/// An enumeration of an action's domain whose windowed invariant values are
/// pairwise distinct. The order alone is stored; validity is always checked
/// against an action.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sequencing {
    order: Vec<Label>,
}

impl Sequencing {
    pub(crate) fn from_order_unchecked(order: Vec<Label>) -> Sequencing {
        Sequencing { order }
    }

    /// Wraps an order after checking it really is a sequencing.
    pub fn checked(action: &Action, order: Vec<Label>) -> Result<Sequencing, SequencerError> {
        match is_sequencing(action, &order)? {
            SequencingCheck { valid: true, .. } => Ok(Sequencing { order }),
            SequencingCheck {
                violation: Some(v), ..
            } => Err(SequencerError::NotASequencing {
                window: v.window,
                earlier: v.earlier,
                value: v.value,
            }),
            _ => unreachable!(),
        }
    }

    pub fn order(&self) -> &[Label] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True when the first k entries equal the action's reference tuple.
    pub fn is_standard(&self, action: &Action) -> bool {
        self.order.len() >= action.k() && self.order[..action.k()] == *action.reference()
    }
}

/// What the search should produce.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchMode {
    /// Stop at the first (lexicographically least) sequencing.
    FindFirst,
    /// Traverse the whole tree, counting.
    CountAll,
    /// Traverse the whole tree, collecting up to `cap` sequencings.
    EnumerateAll { cap: usize },
}

/// Counters from one search: S (sequencings in standard form) and T (valid
/// nodes of the search tree, root included).
#[derive(Clone, Debug)]
pub struct SearchStats {
    pub sequencings: u64,
    pub nodes: u64,
    pub mode: SearchMode,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// First sequencing found, if any (always set when S > 0 in FindFirst
    /// and EnumerateAll modes, and in CountAll mode too).
    pub first: Option<Sequencing>,
    /// All sequencings found, in lexicographic order (EnumerateAll only).
    pub all: Vec<Sequencing>,
    pub stats: SearchStats,
}

/// Depth-first search for sequencings in standard form.
pub fn dfs_sequence(action: &Action, mode: SearchMode) -> SearchResult {
    dfs_budgeted(action, 1, action.n(), mode, None)
}

/// The shared engine: each invariant value may be used up to `budget` times
/// and the search stops at `target_len` total entries. Sharp sequencings use
/// budget 1 and the full domain; the flat searches use other budgets.
///
/// `child_order`, when given, replaces the ascending candidate order (the
/// full-traversal counts do not depend on it).
pub(crate) fn dfs_budgeted(
    action: &Action,
    budget: u32,
    target_len: usize,
    mode: SearchMode,
    child_order: Option<&[Label]>,
) -> SearchResult {
    let start = Instant::now();
    let n = action.n();
    let k = action.k();
    let default_order: Vec<Label> = (0..n as Label).collect();
    let candidates: &[Label] = child_order.unwrap_or(&default_order);

    let mut seq: Vec<Label> = action.reference().to_vec();
    let mut used = vec![false; n];
    for &x in &seq {
        used[x as usize] = true;
    }
    let mut value_counts = vec![0u32; n];
    let mut window = vec![0 as Label; k + 1];

    let mut stats = SearchStats {
        sequencings: 0,
        nodes: 0,
        mode,
        elapsed: Duration::ZERO,
    };
    let mut first: Option<Sequencing> = None;
    let mut all: Vec<Sequencing> = Vec::new();

    struct Ctx<'a> {
        action: &'a Action,
        candidates: &'a [Label],
        budget: u32,
        target_len: usize,
        mode: SearchMode,
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        ctx: &Ctx,
        seq: &mut Vec<Label>,
        used: &mut [bool],
        value_counts: &mut [u32],
        window: &mut [Label],
        stats: &mut SearchStats,
        first: &mut Option<Sequencing>,
        all: &mut Vec<Sequencing>,
    ) -> bool {
        stats.nodes += 1;
        if seq.len() == ctx.target_len {
            stats.sequencings += 1;
            let found = Sequencing::from_order_unchecked(seq.clone());
            if first.is_none() {
                *first = Some(found.clone());
            }
            match ctx.mode {
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
        let k = window.len() - 1;
        window[..k].copy_from_slice(&seq[seq.len() - k..]);
        for &cand in ctx.candidates {
            if used[cand as usize] {
                continue;
            }
            window[k] = cand;
            let value = ctx.action.rho(window);
            if value_counts[value as usize] >= ctx.budget {
                continue;
            }
            value_counts[value as usize] += 1;
            used[cand as usize] = true;
            seq.push(cand);
            let stop = go(ctx, seq, used, value_counts, window, stats, first, all);
            seq.pop();
            used[cand as usize] = false;
            value_counts[value as usize] -= 1;
            if stop {
                return true;
            }
            window[..k].copy_from_slice(&seq[seq.len() - k..]);
        }
        false
    }

    let ctx = Ctx {
        action,
        candidates,
        budget,
        target_len,
        mode,
    };
    go(
        &ctx,
        &mut seq,
        &mut used,
        &mut value_counts,
        &mut window,
        &mut stats,
        &mut first,
        &mut all,
    );
    stats.elapsed = start.elapsed();
    SearchResult { first, all, stats }
}

/// A repeated invariant value between two windows of an order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RhoCollision {
    /// 0-based index of the later window.
    pub window: usize,
    /// 0-based index of the earlier window carrying the same value.
    pub earlier: usize,
    pub value: Label,
}

#[derive(Clone, Debug)]
pub struct SequencingCheck {
    pub valid: bool,
    pub violation: Option<RhoCollision>,
}

/// Checks whether an order is a sequencing, reporting the first repeated
/// invariant value if not.
pub fn is_sequencing(action: &Action, order: &[Label]) -> Result<SequencingCheck, SequencerError> {
    let n = action.n();
    if order.len() != n {
        return Err(SequencerError::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &x in order {
        if x as usize >= n || seen[x as usize] {
            return Err(SequencerError::NotAPermutation { n });
        }
        seen[x as usize] = true;
    }
    Ok(check_windows(action, order, 1))
}

/// As [`is_sequencing`], but allowing each invariant value to occur up to
/// `budget` times; budget = flatness validates the long sequencings of flat
/// actions.
pub fn is_sequencing_budgeted(
    action: &Action,
    order: &[Label],
    budget: u32,
) -> Result<SequencingCheck, SequencerError> {
    let n = action.n();
    if order.len() != n {
        return Err(SequencerError::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &x in order {
        if x as usize >= n || seen[x as usize] {
            return Err(SequencerError::NotAPermutation { n });
        }
        seen[x as usize] = true;
    }
    Ok(check_windows(action, order, budget))
}

/// Budgeted window check shared with the flat sequencings: each invariant
/// value may occur at most `budget` times.
pub(crate) fn check_windows(action: &Action, order: &[Label], budget: u32) -> SequencingCheck {
    let k = action.k();
    let mut first_window_with = vec![usize::MAX; action.n()];
    let mut counts = vec![0u32; action.n()];
    for i in 0..order.len() - k {
        let value = action.rho(&order[i..i + k + 1]);
        counts[value as usize] += 1;
        if counts[value as usize] > budget {
            return SequencingCheck {
                valid: false,
                violation: Some(RhoCollision {
                    window: i,
                    earlier: first_window_with[value as usize],
                    value,
                }),
            };
        }
        if first_window_with[value as usize] == usize::MAX {
            first_window_with[value as usize] = i;
        }
    }
    SequencingCheck {
        valid: true,
        violation: None,
    }
}

/// The zigzag enumeration (0, 1, p-1, 2, p-2, …) of GF(p), a sequencing of
/// the affine action for every odd prime p.
pub fn zigzag_affine(p: u64) -> Result<Sequencing, SequencerError> {
    if p < 3 || !is_prime(p) {
        return Err(SequencerError::NotOddPrime(p));
    }
    Ok(Sequencing::from_order_unchecked(zigzag_order(p as usize)))
}

/// The zigzag pattern itself, defined for any odd n; used both by the
/// affine construction and as a long sequencing of the dihedral action.
pub(crate) fn zigzag_order(n: usize) -> Vec<Label> {
    let mut order = Vec::with_capacity(n);
    order.push(0);
    for j in 1..=(n - 1) / 2 {
        order.push(j as Label);
        order.push((n - j) as Label);
    }
    order
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The identity enumeration sequences the alternating action exactly when n
/// is even; no sequencing exists for odd n.
pub fn alt_sequencing(n: usize) -> Option<Sequencing> {
    (n >= 4 && n.is_multiple_of(2)).then(|| Sequencing::from_order_unchecked((0..n as Label).collect()))
}

/// Rewrites a sequencing into standard form by applying the transporter of
/// its leading k-tuple onto the reference.
pub fn standardize(action: &Action, order: &[Label]) -> Result<Sequencing, SequencerError> {
    let check = is_sequencing(action, order)?;
    if let Some(v) = check.violation {
        return Err(SequencerError::NotASequencing {
            window: v.window,
            earlier: v.earlier,
            value: v.value,
        });
    }
    let g = action.transporter(&order[..action.k()], action.reference());
    Ok(Sequencing::from_order_unchecked(g.apply_slice(order)))
}

/// An exact rational estimate together with its table rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    exact: BigRational,
    /// The m this estimate was computed for; governs the displayed precision.
    m: u64,
}

impl Estimate {
    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn to_f64(&self) -> f64 {
        self.exact.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Renders with the precision the reference table uses: two decimals up
    /// to m = 4, one decimal up to m = 7, integers beyond (and always
    /// integers from 1000 up), rounding half away from zero and trimming
    /// trailing zeros.
    pub fn render(&self) -> String {
        let dp: u32 = if self.exact.ge(&BigRational::from_integer(1000.into())) {
            0
        } else if self.m <= 4 {
            2
        } else if self.m <= 7 {
            1
        } else {
            0
        };
        render_rational(&self.exact, dp)
    }
}

fn render_rational(v: &BigRational, dp: u32) -> String {
    let scale = BigUint::from(10u32).pow(dp);
    let scaled = v * BigRational::from_integer(scale.clone().into());
    let half = BigRational::new(1.into(), 2.into());
    let rounded = (scaled + half).floor().to_integer();
    debug_assert!(!rounded.is_negative());
    let digits = rounded.to_string();
    if dp == 0 {
        return digits;
    }
    let digits = format!("{:0>width$}", digits, width = dp as usize + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - dp as usize);
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac_part}")
    }
}

fn big_fp(m: u64, j: u64) -> BigUint {
    let mut v = BigUint::one();
    for i in 0..j {
        v *= BigUint::from(m - i);
    }
    v
}

/// Expected number of standard-form sequencings under the independence
/// heuristic: m!² / mᵐ.
pub fn expected_s(m: u64) -> Estimate {
    assert!(m >= 1);
    let fact = big_fp(m, m);
    let exact = BigRational::new(
        (&fact * &fact).into(),
        BigUint::from(m).pow(m as u32).into(),
    );
    Estimate { exact, m }
}

/// Expected number of search-tree nodes: Σ_{j=0}^{m} fp(m,j)² / mʲ.
pub fn expected_t(m: u64) -> Estimate {
    assert!(m >= 1);
    let mut exact = BigRational::zero();
    for j in 0..=m {
        let fp = big_fp(m, j);
        exact += BigRational::new((&fp * &fp).into(), BigUint::from(m).pow(j as u32).into());
    }
    Estimate { exact, m }
}

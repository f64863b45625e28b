//! Sequencing of sharply (and flatly) k-transitive group actions, and the
//! permutation designs their orbits generate.
//!
//! An (n,t)-permutation design is a set of n(n-1)···(n-t+2) permutations of an
//! n-set in which every ordered t-tuple of distinct symbols appears exactly
//! once as a contiguous window. The classical route to such designs runs
//! through group actions: enumerate the domain so that consecutive
//! (k+1)-windows fall in pairwise distinct orbits, then take the orbit of
//! that enumeration under the group.
//!
//! Module map:
//! - [`finfield`]: GF(p^r) arithmetic and the projective line.
//! - [`actions`]: a uniform interface to the concrete actions (affine, PGL₂,
//!   symmetric/alternating, cyclic/regular, dihedral, and materialized
//!   permutation groups loaded from generator files).
//! - [`sequencer`]: depth-first search for sequencings, closed-form
//!   constructions, and expected-count estimates.
//! - [`rhospace`]: the dual search over orbit-invariant sequences, with
//!   distinguishing polynomials for the affine and fractional-linear cases.
//! - [`designs`]: design construction, coverage verification, Carthaginian
//!   rectangle analysis and group reconstruction, tuple lookup, MOLS
//!   splitting, and the wide/narrow designs of flat actions.
//! - [`cli`]: the `seqdesign` command-line surface.

pub mod actions;
pub mod cli;
pub mod designs;
pub mod finfield;
pub mod rhospace;
pub mod sequencer;

pub use actions::{Action, ActionError, Label, Perm};
pub use finfield::{FieldElement, FieldError, FieldSpec, ProjPoint};
pub use sequencer::{SearchMode, SearchStats, Sequencing};

/// Falling factorial n(n-1)···(n-t+1), the number of ordered t-tuples of
/// distinct items from an n-set.
pub fn falling_factorial(n: u64, t: u64) -> u64 {
    (0..t).map(|i| n - i).product()
}

//! Permutation designs: orbit construction, coverage verification,
//! Carthaginian rectangle analysis with group reconstruction, tuple lookup,
//! MOLS splitting, and the wide/narrow designs of flat actions.
//!
//! A full (n,t)-design is a set of fp(n,t-1) permutations of an n-set in
//! which every ordered t-tuple of distinct symbols occurs exactly once as a
//! contiguous window. The orbit of a sequencing under its sharply
//! (t-1)-transitive action is such a design; flat actions yield wide
//! designs (every tuple s times) from long sequencings and narrow designs
//! (partial rows, every tuple once) from short ones.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{Action, Label, Perm};
use crate::falling_factorial;
use crate::rhospace::x_to_rho;
use crate::sequencer::{self, SearchMode, SearchResult, Sequencing};

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("design was not built from an affine action")]
    NotAffineProvenance,
    #[error("flatness {s} does not divide the {m} free positions (or lambda {lambda} exceeds it)")]
    Indivisible { s: usize, m: usize, lambda: u32 },
    #[error("sequence is not a valid flat sequencing: {0}")]
    NotAFlatSequencing(String),
    #[error(transparent)]
    NotASequencing(#[from] sequencer::SequencerError),
    #[error("coverage table would need {tuples} entries, beyond the verification budget")]
    TooLarge { tuples: u64 },
    #[error("bad design file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a design matrix came from, when orbit-built.
#[derive(Clone)]
pub struct Provenance {
    pub action: Action,
    pub sequence: Vec<Label>,
}

/// A rows-of-permutations matrix (rows may be partial for narrow designs),
/// with the design parameters it claims to satisfy.
#[derive(Clone)]
pub struct DesignMatrix {
    rows: Vec<Vec<Label>>,
    n: usize,
    /// Window length this matrix is meant to cover, when known.
    pub t: Option<usize>,
    /// Intended coverage multiplicity, when known.
    pub lambda: Option<u32>,
    pub provenance: Option<Provenance>,
}

impl DesignMatrix {
    /// Wraps rows over the label set `0..n`, checking that every row is a
    /// sequence of distinct in-range labels of uniform length.
    pub fn from_rows(rows: Vec<Vec<Label>>, n: usize) -> Result<DesignMatrix, DesignError> {
        if rows.is_empty() {
            return Err(DesignError::ShapeMismatch("no rows".into()));
        }
        let width = rows[0].len();
        if width == 0 || width > n {
            return Err(DesignError::ShapeMismatch(format!(
                "row width {width} with n = {n}"
            )));
        }
        let mut seen = vec![usize::MAX; n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(DesignError::ShapeMismatch(format!(
                    "row {i} has length {}, expected {width}",
                    row.len()
                )));
            }
            for &x in row {
                if x as usize >= n {
                    return Err(DesignError::ShapeMismatch(format!(
                        "row {i} contains label {x} >= n = {n}"
                    )));
                }
                if seen[x as usize] == i {
                    return Err(DesignError::ShapeMismatch(format!(
                        "row {i} repeats label {x}"
                    )));
                }
                seen[x as usize] = i;
            }
        }
        Ok(DesignMatrix {
            rows,
            n,
            t: None,
            lambda: None,
            provenance: None,
        })
    }

    pub fn rows(&self) -> &[Vec<Label>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_width(&self) -> usize {
        self.rows[0].len()
    }

    /// True when rows are full permutations of the label set.
    pub fn is_full(&self) -> bool {
        self.row_width() == self.n
    }
}

/// Rank of a distinct-label tuple among all fp(n,t) such tuples, by the
/// falling-factorial positional code.
fn rank_tuple(tuple: &[Label], n: usize, scratch: &mut [bool]) -> u64 {
    let mut rank = 0u64;
    for (i, &x) in tuple.iter().enumerate() {
        let smaller = (0..x as usize).filter(|&y| scratch[y]).count();
        rank = rank * (n - i) as u64 + (x as usize - smaller) as u64;
        scratch[x as usize] = true;
    }
    for &x in tuple {
        scratch[x as usize] = false;
    }
    rank
}

/// Inverse of [`rank_tuple`].
fn unrank_tuple(rank: u64, n: usize, t: usize) -> Vec<Label> {
    let mut digits = vec![0u64; t];
    let mut rest = rank;
    for i in (0..t).rev() {
        let radix = (n - i) as u64;
        digits[i] = rest % radix;
        rest /= radix;
    }
    let mut available: Vec<Label> = (0..n as Label).collect();
    digits
        .into_iter()
        .map(|d| available.remove(d as usize))
        .collect()
}

/// Exact multiset account of the t-windows of a matrix.
#[derive(Clone, Debug)]
pub struct CoverageReport {
    pub n: usize,
    pub t: usize,
    pub lambda: u32,
    /// fp(n,t), the number of tuples that must be covered.
    pub expected_tuples: u64,
    /// multiplicity -> number of tuples seen that many times.
    pub histogram: BTreeMap<u32, u64>,
    /// First tuple (in rank order) covered fewer than lambda times.
    pub first_missing: Option<Vec<Label>>,
    /// First tuple covered more than lambda times.
    pub first_duplicated: Option<Vec<Label>>,
    pub valid: bool,
}

const COVERAGE_BUDGET: u64 = 200_000_000;

/// Verifies the (n,t) coverage of a matrix at multiplicity `lambda` by an
/// exact count over a flat multiplicity table indexed by tuple rank.
pub fn verify_pd(
    matrix: &DesignMatrix,
    t: usize,
    lambda: u32,
) -> Result<CoverageReport, DesignError> {
    let n = matrix.n();
    if t == 0 || t > matrix.row_width() {
        return Err(DesignError::ShapeMismatch(format!(
            "window length {t} does not fit rows of width {}",
            matrix.row_width()
        )));
    }
    let expected = falling_factorial(n as u64, t as u64);
    if expected > COVERAGE_BUDGET {
        return Err(DesignError::TooLarge { tuples: expected });
    }
    let mut counts = vec![0u32; expected as usize];
    let mut scratch = vec![false; n];
    for row in matrix.rows() {
        for w in row.windows(t) {
            let r = rank_tuple(w, n, &mut scratch) as usize;
            counts[r] = counts[r].saturating_add(1);
        }
    }
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    let mut first_missing = None;
    let mut first_duplicated = None;
    for (r, &c) in counts.iter().enumerate() {
        *histogram.entry(c).or_default() += 1;
        if c < lambda && first_missing.is_none() {
            first_missing = Some(unrank_tuple(r as u64, n, t));
        }
        if c > lambda && first_duplicated.is_none() {
            first_duplicated = Some(unrank_tuple(r as u64, n, t));
        }
    }
    let valid = first_missing.is_none() && first_duplicated.is_none();
    Ok(CoverageReport {
        n,
        t,
        lambda,
        expected_tuples: expected,
        histogram,
        first_missing,
        first_duplicated,
        valid,
    })
}

/// Builds the orbit design of a sequencing: one row g·seq per group
/// element, rows sorted by the image of the reference k-tuple.
pub fn build_design(action: &Action, seq: &Sequencing) -> Result<DesignMatrix, DesignError> {
    let check = sequencer::is_sequencing(action, seq.order())?;
    if let Some(v) = check.violation {
        return Err(sequencer::SequencerError::NotASequencing {
            window: v.window,
            earlier: v.earlier,
            value: v.value,
        }
        .into());
    }
    Ok(orbit_matrix(action, seq.order(), action.k() + 1, 1))
}

fn orbit_matrix(action: &Action, order: &[Label], t: usize, lambda: u32) -> DesignMatrix {
    let mut keyed: Vec<(Vec<Label>, Vec<Label>)> = action
        .elements()
        .into_iter()
        .map(|g| (g.apply_slice(action.reference()), g.apply_slice(order)))
        .collect();
    keyed.sort_unstable();
    DesignMatrix {
        rows: keyed.into_iter().map(|(_, row)| row).collect(),
        n: action.n(),
        t: Some(t),
        lambda: Some(lambda),
        provenance: Some(Provenance {
            action: action.clone(),
            sequence: order.to_vec(),
        }),
    }
}

/// Checks the k-Carthaginian property: the matrix has fp(n,k) permutation
/// rows, and every ordered k-tuple of distinct columns, read across the
/// rows, covers all fp(n,k) distinct k-tuples exactly once.
pub fn check_carthaginian(matrix: &DesignMatrix, k: usize) -> Result<bool, DesignError> {
    let n = matrix.n();
    if !matrix.is_full() {
        return Err(DesignError::ShapeMismatch(
            "rows must be full permutations".into(),
        ));
    }
    if k == 0 || k >= n {
        return Err(DesignError::ShapeMismatch(format!(
            "column tuple length {k} out of range for n = {n}"
        )));
    }
    let required = falling_factorial(n as u64, k as u64);
    if matrix.rows().len() as u64 != required {
        return Err(DesignError::ShapeMismatch(format!(
            "{} rows, a {k}-Carthaginian rectangle on {n} symbols needs {required}",
            matrix.rows().len()
        )));
    }

    struct Walk<'a> {
        matrix: &'a DesignMatrix,
        k: usize,
        columns: Vec<usize>,
        used: Vec<bool>,
        stamp: Vec<u32>,
        epoch: u32,
        scratch: Vec<bool>,
        tuple: Vec<Label>,
    }

    impl Walk<'_> {
        fn run(&mut self, depth: usize) -> bool {
            let n = self.matrix.n();
            if depth == self.k {
                self.epoch += 1;
                for row in self.matrix.rows() {
                    for (i, &c) in self.columns.iter().enumerate() {
                        self.tuple[i] = row[c];
                    }
                    let r = rank_tuple(&self.tuple, n, &mut self.scratch) as usize;
                    if self.stamp[r] == self.epoch {
                        return false;
                    }
                    self.stamp[r] = self.epoch;
                }
                // row count equals fp(n,k) and nothing repeated, so every
                // distinct tuple occurred exactly once
                return true;
            }
            for c in 0..n {
                if !self.used[c] {
                    self.used[c] = true;
                    self.columns[depth] = c;
                    let ok = self.run(depth + 1);
                    self.used[c] = false;
                    if !ok {
                        return false;
                    }
                }
            }
            true
        }
    }

    let mut walk = Walk {
        matrix,
        k,
        columns: vec![0; k],
        used: vec![false; n],
        stamp: vec![0; required as usize],
        epoch: 0,
        scratch: vec![false; n],
        tuple: vec![0; k],
    };
    Ok(walk.run(0))
}

/// Attempts to rebuild a sharply k-transitive group from a k-Carthaginian
/// rectangle. Relabels so the first row is the identity, identifies each
/// row with the permutation carrying the first row to it, and checks the
/// set is closed under σ∘ρ⁻¹; on success the row set is that group, and it
/// comes back as a generic action. None when the matrix is not
/// Carthaginian or the closure fails.
pub fn reconstruct_group(matrix: &DesignMatrix, k: usize) -> Result<Option<Action>, DesignError> {
    if !check_carthaginian(matrix, k)? {
        return Ok(None);
    }
    let pos0 = {
        let row0 = &matrix.rows()[0];
        let mut inv = vec![0 as Label; matrix.n()];
        for (j, &x) in row0.iter().enumerate() {
            inv[x as usize] = j as Label;
        }
        inv
    };
    let perms: Vec<Perm> = matrix
        .rows()
        .iter()
        .map(|row| {
            Perm::from_image_unchecked((0..matrix.n()).map(|x| row[pos0[x] as usize]).collect())
        })
        .collect();
    let set: HashSet<&Perm> = perms.iter().collect();
    for rho in &perms {
        let rho_inv = rho.inverse();
        for sigma in &perms {
            if !set.contains(&sigma.compose(&rho_inv)) {
                return Ok(None);
            }
        }
    }
    match Action::from_group_elements(perms, k) {
        Ok(action) if action.is_sharp() => Ok(Some(action)),
        _ => Ok(None),
    }
}

/// The k-rectangle condition in its normative operational form:
/// reconstruction succeeds. Input must be a k-Carthaginian rectangle.
pub fn rectangle_condition(matrix: &DesignMatrix, k: usize) -> Result<bool, DesignError> {
    Ok(reconstruct_group(matrix, k)?.is_some())
}

/// The literal 2×(k+1) submatrix formulation, usable on small inputs:
/// whenever two 2×(k+1) submatrices agree in 2k+1 entries, the remaining
/// entries agree too.
///
/// Each ordered row pair and ordered (k+1)-column tuple yields a submatrix,
/// keyed by its top row and the first k bottom entries; two submatrices
/// sharing a key must share the final bottom entry.
pub fn rectangle_condition_literal(matrix: &DesignMatrix, k: usize) -> Result<bool, DesignError> {
    if !matrix.is_full() {
        return Err(DesignError::ShapeMismatch(
            "rows must be full permutations".into(),
        ));
    }
    let n = matrix.n();
    let rows = matrix.rows();
    fn column_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        let mut used = vec![false; n];
        fn walk(n: usize, len: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == len {
                out.push(cur.clone());
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    cur.push(c);
                    walk(n, len, cur, used, out);
                    cur.pop();
                    used[c] = false;
                }
            }
        }
        walk(n, len, &mut cur, &mut used, &mut out);
        out
    }
    let col_tuples = column_tuples(n, k + 1);
    let mut table: std::collections::HashMap<Vec<Label>, Label> = std::collections::HashMap::new();
    for (a, row_a) in rows.iter().enumerate() {
        for (b, row_b) in rows.iter().enumerate() {
            if a == b {
                continue;
            }
            for cols in &col_tuples {
                let mut key = Vec::with_capacity(2 * k + 1);
                for &c in cols.iter() {
                    key.push(row_a[c]);
                }
                for &c in cols[..k].iter() {
                    key.push(row_b[c]);
                }
                let last = row_b[cols[k]];
                match table.get(&key) {
                    Some(&prev) if prev != last => return Ok(false),
                    Some(_) => {}
                    None => {
                        table.insert(key, last);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Everything the Carthaginian analysis can say about a matrix.
pub struct CarthageReport {
    pub is_carthaginian: bool,
    pub rectangle_condition: bool,
    pub group: Option<Action>,
}

pub fn analyze_carthage(matrix: &DesignMatrix, k: usize) -> Result<CarthageReport, DesignError> {
    if !check_carthaginian(matrix, k)? {
        return Ok(CarthageReport {
            is_carthaginian: false,
            rectangle_condition: false,
            group: None,
        });
    }
    let group = reconstruct_group(matrix, k)?;
    Ok(CarthageReport {
        is_carthaginian: true,
        rectangle_condition: group.is_some(),
        group,
    })
}

/// Finds the unique occurrence of a distinct (k+1)-tuple in the orbit
/// design of `seq`: the invariant value selects the window offset, the
/// transporter of that window's prefix selects the row.
pub fn locate(action: &Action, seq: &Sequencing, tuple: &[Label]) -> (Perm, usize) {
    let k = action.k();
    assert_eq!(tuple.len(), k + 1, "locate takes a (k+1)-tuple");
    let values = x_to_rho(action, seq.order());
    let r = action.rho(tuple);
    let offset = values
        .values()
        .iter()
        .position(|&v| v == r)
        .expect("a valid sequencing realizes every invariant value");
    let g = action.transporter(&seq.order()[offset..offset + k], &tuple[..k]);
    debug_assert_eq!(g.apply_slice(&seq.order()[offset..offset + k + 1]), tuple);
    (g, offset)
}

/// The MOLS decomposition of an affine orbit design: rows grouped by
/// multiplier form q-1 squares of order q.
pub struct MolsSplit {
    /// Multiplier label of each square, ascending.
    pub multipliers: Vec<Label>,
    /// `squares[i][b]` is the design row built from x ↦ `multipliers[i]`·x + b.
    pub squares: Vec<Vec<Vec<Label>>>,
    pub each_latin: bool,
    pub pairwise_orthogonal: bool,
}

pub fn mols_split(design: &DesignMatrix) -> Result<MolsSplit, DesignError> {
    let prov = design
        .provenance
        .as_ref()
        .ok_or(DesignError::NotAffineProvenance)?;
    if prov.action.kind_name() != "affine" {
        return Err(DesignError::NotAffineProvenance);
    }
    let action = &prov.action;
    let field = action.field().expect("affine actions carry a field");
    let q = field.order();
    let s = &prov.sequence;
    let (s0, s1) = (field.element(s[0] as u64), field.element(s[1] as u64));
    let ds = field.sub(s0, s1);

    let mut squares: Vec<Vec<Vec<Label>>> = vec![vec![Vec::new(); q as usize]; q as usize - 1];
    for row in design.rows() {
        let r0 = field.element(row[0] as u64);
        let r1 = field.element(row[1] as u64);
        let a = field
            .div(field.sub(r0, r1), ds)
            .expect("sequence entries are distinct");
        let b = field.sub(r0, field.mul(a, s0));
        squares[a.code() as usize - 1][b.code() as usize] = row.clone();
    }

    let each_latin = squares.iter().all(|sq| is_latin(sq, q as usize));
    let mut pairwise_orthogonal = true;
    'outer: for i in 0..squares.len() {
        for j in i + 1..squares.len() {
            if !orthogonal(&squares[i], &squares[j], q as usize) {
                pairwise_orthogonal = false;
                break 'outer;
            }
        }
    }
    Ok(MolsSplit {
        multipliers: (1..q as Label).collect(),
        squares,
        each_latin,
        pairwise_orthogonal,
    })
}

fn is_latin(square: &[Vec<Label>], n: usize) -> bool {
    if square.len() != n || square.iter().any(|r| r.len() != n) {
        return false;
    }
    let mut seen = vec![false; n];
    for row in square {
        seen.fill(false);
        for &x in row {
            if seen[x as usize] {
                return false;
            }
            seen[x as usize] = true;
        }
    }
    for c in 0..n {
        seen.fill(false);
        for row in square {
            let x = row[c] as usize;
            if seen[x] {
                return false;
            }
            seen[x] = true;
        }
    }
    true
}

/// Ordered entry pairs (A[i][j], B[i][j]) must cover all n² pairs.
fn orthogonal(a: &[Vec<Label>], b: &[Vec<Label>], n: usize) -> bool {
    let mut seen = vec![false; n * n];
    for (ra, rb) in a.iter().zip(b) {
        for (&xa, &xb) in ra.iter().zip(rb) {
            let idx = xa as usize * n + xb as usize;
            if seen[idx] {
                return false;
            }
            seen[idx] = true;
        }
    }
    true
}

/// Searches for a long sequencing of a flat action: a full enumeration
/// whose windowed invariant values each occur exactly s times.
pub fn flat_long_sequence(action: &Action, mode: SearchMode) -> SearchResult {
    sequencer::dfs_budgeted(action, action.flatness() as u32, action.n(), mode, None)
}

/// Searches for a lambda-fold short sequencing: k + lambda(n-k)/s distinct
/// elements whose windowed invariant values each occur exactly lambda
/// times. lambda = 1 gives the short sequencings behind narrow designs.
pub fn flat_short_sequence(
    action: &Action,
    lambda: u32,
    mode: SearchMode,
) -> Result<SearchResult, DesignError> {
    let s = action.flatness();
    let m = action.m();
    if lambda == 0 || lambda as usize > s || !m.is_multiple_of(s) {
        return Err(DesignError::Indivisible { s, m, lambda });
    }
    let target = action.k() + lambda as usize * (m / s);
    Ok(sequencer::dfs_budgeted(action, lambda, target, mode, None))
}

/// Validates a long sequencing: a domain permutation whose invariant values
/// each appear exactly s times across the windows.
pub fn check_long_sequencing(action: &Action, order: &[Label]) -> Result<bool, DesignError> {
    let check = sequencer::is_sequencing_budgeted(action, order, action.flatness() as u32)?;
    Ok(check.valid)
}

/// Validates a lambda-fold short sequencing of the right length.
pub fn check_short_sequencing(
    action: &Action,
    lambda: u32,
    order: &[Label],
) -> Result<bool, DesignError> {
    let s = action.flatness();
    let m = action.m();
    if lambda == 0 || lambda as usize > s || !m.is_multiple_of(s) {
        return Err(DesignError::Indivisible { s, m, lambda });
    }
    let target = action.k() + lambda as usize * (m / s);
    if order.len() != target {
        return Ok(false);
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != order.len() || sorted.iter().any(|&x| x as usize >= action.n()) {
        return Ok(false);
    }
    Ok(sequencer::check_windows(action, order, lambda).valid)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlatMode {
    /// Full rows; covers every (k+1)-tuple s times.
    Wide,
    /// Partial rows from a short sequencing; covers every tuple lambda
    /// times, lambda inferred from the sequence length (1 for the plain
    /// short sequencing).
    Narrow,
}

/// Builds the orbit design of a long (wide) or short (narrow) sequencing of
/// a flat action.
pub fn build_flat_design(
    action: &Action,
    order: &[Label],
    mode: FlatMode,
) -> Result<DesignMatrix, DesignError> {
    let s = action.flatness();
    match mode {
        FlatMode::Wide => {
            if !check_long_sequencing(action, order)? {
                return Err(DesignError::NotAFlatSequencing(
                    "window values do not each occur exactly s times".into(),
                ));
            }
            Ok(orbit_matrix(action, order, action.k() + 1, s as u32))
        }
        FlatMode::Narrow => {
            let m = action.m();
            if !m.is_multiple_of(s) {
                return Err(DesignError::Indivisible { s, m, lambda: 1 });
            }
            let per_lambda = m / s;
            let extra = order.len().saturating_sub(action.k());
            if per_lambda == 0 || extra == 0 || !extra.is_multiple_of(per_lambda) {
                return Err(DesignError::NotAFlatSequencing(format!(
                    "length {} does not match k + lambda(n-k)/s for any lambda",
                    order.len()
                )));
            }
            let lambda = (extra / per_lambda) as u32;
            if !check_short_sequencing(action, lambda, order)? {
                return Err(DesignError::NotAFlatSequencing(
                    "window values do not each occur exactly lambda times".into(),
                ));
            }
            Ok(orbit_matrix(action, order, action.k() + 1, lambda))
        }
    }
}

/// JSON sidecar describing a design file.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Sidecar {
    pub n: usize,
    pub t: usize,
    pub lambda: u32,
    pub action: String,
    pub sequencing: Vec<String>,
    pub row_count: usize,
}

/// Writes a design as CSV, one row per line; labels use the action's
/// spelling (`inf` for the PGL₂ infinity label) when provided.
pub fn write_design_csv(
    design: &DesignMatrix,
    action: Option<&Action>,
    path: &Path,
) -> Result<(), DesignError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for row in design.rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|&x| match action {
                Some(a) => a.label_string(x),
                None => x.to_string(),
            })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a design CSV. `inf` denotes the last label of a full row;
/// otherwise n is inferred as one past the largest label (or taken from
/// `n_hint`).
pub fn read_design_csv(path: &Path, n_hint: Option<usize>) -> Result<DesignMatrix, DesignError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<Label>> = Vec::new();
    let mut width = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let w = *width.get_or_insert(cells.len());
        if cells.len() != w {
            return Err(DesignError::Parse(format!(
                "line {}: {} cells, expected {w}",
                lineno + 1,
                cells.len()
            )));
        }
        let row: Result<Vec<Label>, DesignError> = cells
            .iter()
            .map(|&c| {
                if c == "inf" {
                    Ok((w - 1) as Label)
                } else {
                    c.parse::<Label>().map_err(|_| {
                        DesignError::Parse(format!("line {}: bad label {c:?}", lineno + 1))
                    })
                }
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(DesignError::Parse("empty design file".into()));
    }
    let n = n_hint.unwrap_or_else(|| {
        rows.iter()
            .flat_map(|r| r.iter())
            .map(|&x| x as usize + 1)
            .max()
            .unwrap()
    });
    DesignMatrix::from_rows(rows, n)
}

pub fn write_sidecar(sidecar: &Sidecar, path: &Path) -> Result<(), DesignError> {
    let json =
        serde_json::to_string_pretty(sidecar).map_err(|e| DesignError::Parse(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, DesignError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| DesignError::Parse(e.to_string()))
}

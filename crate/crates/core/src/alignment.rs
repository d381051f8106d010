//! Cell-sequence alignment across notebooks.
//!
//! Each notebook is a sequence of cell vectors. Sequences are folded one at
//! a time (in search-rank order) into a profile whose columns become the rows
//! of the [`AlignmentGrid`]: cells on one row are similar, and every
//! notebook's cells stay in their original order.

use serde::{Deserialize, Serialize};

use crate::semantic::DescriptorVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    /// Subtracted from every cosine so that dissimilar cells prefer separate rows.
    pub tau: f64,
    pub gap_penalty: f64,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        Self { tau: 0.5, gap_penalty: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSequence {
    pub notebook_id: String,
    /// `(cell index, vector)` with strictly increasing indices.
    pub entries: Vec<(usize, DescriptorVector)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// `a[i]` and `b[j]` share a row.
    Match(usize, usize),
    /// `a[i]` against a gap in `b`.
    GapInB(usize),
    /// `b[j]` against a gap in `a`.
    GapInA(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseAlignment {
    pub total: f64,
    pub steps: Vec<Step>,
}

/// Global alignment maximizing the summed step scores.
///
/// Matches score `score(i, j)`, gaps cost `gap_penalty`. Ties during
/// traceback prefer match, then gap-in-`b`, then gap-in-`a`.
pub fn align_by_score<F>(n: usize, m: usize, score: F, gap_penalty: f64) -> PairwiseAlignment
where
    F: Fn(usize, usize) -> f64,
{
    let width = m + 1;
    let mut dp = vec![0.0f64; (n + 1) * width];
    let mut subs = vec![0.0f64; n * m];
    for i in 1..=n {
        dp[i * width] = dp[(i - 1) * width] - gap_penalty;
    }
    for j in 1..=m {
        dp[j] = dp[j - 1] - gap_penalty;
    }
    for i in 1..=n {
        for j in 1..=m {
            let s = score(i - 1, j - 1);
            subs[(i - 1) * m + (j - 1)] = s;
            let diag = dp[(i - 1) * width + (j - 1)] + s;
            let up = dp[(i - 1) * width + j] - gap_penalty;
            let left = dp[i * width + (j - 1)] - gap_penalty;
            dp[i * width + j] = diag.max(up).max(left);
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 && here == dp[(i - 1) * width + (j - 1)] + subs[(i - 1) * m + (j - 1)] {
            steps.push(Step::Match(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && (j == 0 || here == dp[(i - 1) * width + j] - gap_penalty) {
            steps.push(Step::GapInB(i - 1));
            i -= 1;
        } else {
            steps.push(Step::GapInA(j - 1));
            j -= 1;
        }
    }
    steps.reverse();
    PairwiseAlignment { total: dp[n * width + m], steps }
}

#[derive(Debug, Clone, PartialEq)]
struct ProfileColumn {
    /// One slot per member sequence.
    cells: Vec<Option<usize>>,
    /// Sum of the member vectors; its direction is the normalized centroid.
    sum: Vec<f64>,
    norm: f64,
}

impl ProfileColumn {
    fn add(&mut self, v: &DescriptorVector) {
        if self.sum.is_empty() {
            self.sum = vec![0.0; v.dim()];
        }
        for (s, &x) in self.sum.iter_mut().zip(&v.0) {
            *s += f64::from(x);
        }
        self.norm = self.sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    }

    fn cosine(&self, v: &DescriptorVector) -> f64 {
        let vn = v.norm();
        if self.norm == 0.0 || vn == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.sum.iter().zip(&v.0).map(|(s, &x)| s * f64::from(x)).sum();
        (dot / (self.norm * vn)).clamp(-1.0, 1.0)
    }
}

/// A running multiple alignment. Columns are summarized by the renormalized
/// centroid of their non-gap member vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    members: Vec<String>,
    columns: Vec<ProfileColumn>,
}

impl Profile {
    pub fn from_sequence(seq: &CellSequence) -> Self {
        let columns = seq
            .entries
            .iter()
            .map(|(idx, v)| {
                let mut col = ProfileColumn { cells: vec![Some(*idx)], sum: Vec::new(), norm: 0.0 };
                col.add(v);
                col
            })
            .collect();
        Self { members: vec![seq.notebook_id.clone()], columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Folds `seq` in as a new member. Gaps already in the profile stay gaps.
    fn absorb(&mut self, seq: &CellSequence, alignment: &PairwiseAlignment) {
        let members = self.members.len();
        let mut old: Vec<Option<ProfileColumn>> = self.columns.drain(..).map(Some).collect();
        let mut columns = Vec::with_capacity(alignment.steps.len());
        for step in &alignment.steps {
            match *step {
                Step::Match(i, j) => {
                    let mut col = old[i].take().expect("profile column used once");
                    let (idx, v) = &seq.entries[j];
                    col.cells.push(Some(*idx));
                    col.add(v);
                    columns.push(col);
                }
                Step::GapInB(i) => {
                    let mut col = old[i].take().expect("profile column used once");
                    col.cells.push(None);
                    columns.push(col);
                }
                Step::GapInA(j) => {
                    let (idx, v) = &seq.entries[j];
                    let mut cells = vec![None; members];
                    cells.push(Some(*idx));
                    let mut col = ProfileColumn { cells, sum: Vec::new(), norm: 0.0 };
                    col.add(v);
                    columns.push(col);
                }
            }
        }
        self.columns = columns;
        self.members.push(seq.notebook_id.clone());
    }

    pub fn into_grid(self) -> AlignmentGrid {
        AlignmentGrid {
            column_order: self.members,
            rows: self.columns.into_iter().map(|c| c.cells).collect(),
        }
    }
}

/// Aligns a sequence against a profile, scoring `cosine - tau` per match.
pub fn pairwise_align(a: &Profile, b: &CellSequence, p: &AlignmentParams) -> PairwiseAlignment {
    align_by_score(
        a.columns.len(),
        b.entries.len(),
        |i, j| a.columns[i].cosine(&b.entries[j].1) - p.tau,
        p.gap_penalty,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentGrid {
    /// Notebook ids, one per grid column, in search-rank order.
    pub column_order: Vec<String>,
    /// One entry per column: the cell index on that row, or a gap.
    pub rows: Vec<Vec<Option<usize>>>,
}

impl AlignmentGrid {
    pub fn cell_count(&self) -> usize {
        self.rows.iter().flatten().filter(|e| e.is_some()).count()
    }

    /// Cell indices of one column, gaps skipped.
    pub fn column(&self, col: usize) -> Vec<usize> {
        self.rows.iter().filter_map(|r| r.get(col).copied().flatten()).collect()
    }

    /// Every broken grid invariant, relative to the sequences it was built from.
    pub fn violations(&self, sequences: &[CellSequence]) -> Vec<String> {
        let mut out = Vec::new();
        let expected: Vec<&str> = sequences.iter().map(|s| s.notebook_id.as_str()).collect();
        if self.column_order.iter().map(String::as_str).collect::<Vec<_>>() != expected {
            out.push("column order differs from input order".to_string());
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.column_order.len() {
                out.push(format!("row {r} has {} entries", row.len()));
            }
            if row.iter().all(Option::is_none) {
                out.push(format!("row {r} is all gaps"));
            }
        }
        for (c, seq) in sequences.iter().enumerate() {
            let original: Vec<usize> = seq.entries.iter().map(|(i, _)| *i).collect();
            if self.column(c) != original {
                out.push(format!("column {c} does not reproduce its notebook's cell order"));
            }
        }
        let total: usize = sequences.iter().map(|s| s.entries.len()).sum();
        if self.cell_count() != total {
            out.push(format!("grid holds {} cells, inputs have {total}", self.cell_count()));
        }
        out
    }
}

/// Progressive multiple alignment in input (search-rank) order.
pub fn progressive_align(sequences: &[CellSequence], p: &AlignmentParams) -> AlignmentGrid {
    let Some((first, rest)) = sequences.split_first() else {
        return AlignmentGrid { column_order: Vec::new(), rows: Vec::new() };
    };
    let mut profile = Profile::from_sequence(first);
    for seq in rest {
        let alignment = pairwise_align(&profile, seq, p);
        profile.absorb(seq, &alignment);
    }
    profile.into_grid()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dot {
    pub notebook_id: String,
    pub cell_index: usize,
}

/// Dots view: each row's cells pushed left, keeping column order within the row.
pub fn compact_rows(grid: &AlignmentGrid) -> Vec<Vec<Dot>> {
    grid.rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&grid.column_order)
                .filter_map(|(entry, nb)| {
                    entry.map(|cell_index| Dot { notebook_id: nb.clone(), cell_index })
                })
                .collect()
        })
        .collect()
}

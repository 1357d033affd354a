//! Young diagrams, Le-tableaux and their pivot structure.
//!
//! Diagrams use English notation. The south-east boundary path is labelled
//! 1..n from north-east to south-west; vertical steps are pivots (sources),
//! horizontal steps are sinks. Rows and columns are 0-based in the API.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{format_exact, parse_decimal, to_f64};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct YoungDiagram {
    rows: Vec<usize>,
    n: usize,
}

/// Boundary labels of a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLabels {
    /// Label of the vertical step at the right end of each row.
    pub row_source: Vec<usize>,
    /// Label of the horizontal step at the bottom of each column.
    pub col_sink: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PivotSet {
    pub pivots: Vec<usize>,
    pub sinks: Vec<usize>,
}

impl YoungDiagram {
    /// `n` may exceed `k + rows[0]`; the extra labels are sinks of empty
    /// columns to the right of the first row.
    pub fn new(rows: Vec<usize>, n: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("diagram has no rows".into()));
        }
        for (r, w) in rows.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(Error::RowLengthIncrease {
                    row: r + 1,
                    len: w[1],
                    prev: w[0],
                });
            }
        }
        if let Some(r) = rows.iter().position(|&l| l == 0) {
            return Err(Error::EmptyRow { row: r });
        }
        if rows[0] + rows.len() > n {
            return Err(Error::Input(format!(
                "n = {n} is smaller than k + lambda_1 = {}",
                rows[0] + rows.len()
            )));
        }
        Ok(YoungDiagram { rows, n })
    }

    pub fn from_rows(rows: Vec<usize>) -> Result<Self> {
        let n = rows.len() + rows.first().copied().unwrap_or(0);
        Self::new(rows, n)
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.n - self.k()
    }

    pub fn num_boxes(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Height of column `c` (0-based).
    pub fn col_height(&self, c: usize) -> usize {
        self.rows.iter().filter(|&&l| l > c).count()
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        r < self.rows.len() && c < self.rows[r]
    }

    pub fn labels(&self) -> BoundaryLabels {
        let k = self.k();
        let mut row_source = vec![0; k];
        let mut col_sink = vec![0; self.width()];
        let mut label = 1;
        for c in (self.rows[0]..self.width()).rev() {
            col_sink[c] = label;
            label += 1;
        }
        for r in 0..k {
            row_source[r] = label;
            label += 1;
            let next = if r + 1 < k { self.rows[r + 1] } else { 0 };
            for c in (next..self.rows[r]).rev() {
                col_sink[c] = label;
                label += 1;
            }
        }
        debug_assert_eq!(label, self.n + 1);
        BoundaryLabels {
            row_source,
            col_sink,
        }
    }

    pub fn pivots(&self) -> PivotSet {
        pivots_from_diagram(self)
    }
}

impl BoundaryLabels {
    pub fn is_source(&self, label: usize) -> bool {
        self.row_source.contains(&label)
    }
}

pub fn pivots_from_diagram(d: &YoungDiagram) -> PivotSet {
    let labels = d.labels();
    let pivots = labels.row_source.clone();
    let sinks = (1..=d.n()).filter(|j| !pivots.contains(j)).collect();
    PivotSet { pivots, sinks }
}

/// lambda_l = number of non-pivot labels larger than i_l.
pub fn diagram_from_pivots(pivots: &[usize], n: usize) -> Result<YoungDiagram> {
    if pivots.is_empty() {
        return Err(Error::Pivots("empty pivot set".into()));
    }
    for w in pivots.windows(2) {
        if w[1] == w[0] {
            return Err(Error::Pivots(format!("duplicate pivot {}", w[0])));
        }
        if w[1] < w[0] {
            return Err(Error::Pivots("pivots must be increasing".into()));
        }
    }
    if let Some(&p) = pivots.iter().find(|&&p| p == 0 || p > n) {
        return Err(Error::Pivots(format!("pivot {p} outside 1..={n}")));
    }
    let rows = pivots
        .iter()
        .map(|&i| (i + 1..=n).filter(|j| !pivots.contains(j)).count())
        .collect();
    YoungDiagram::new(rows, n)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Zero,
    Weight(BigRational),
}

impl Entry {
    pub fn is_zero(&self) -> bool {
        matches!(self, Entry::Zero)
    }

    pub fn weight(&self) -> Option<&BigRational> {
        match self {
            Entry::Zero => None,
            Entry::Weight(w) => Some(w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LeTableau {
    diagram: YoungDiagram,
    entries: Vec<Vec<Entry>>,
}

/// A zero box violating the Le-rule, with a positive box to its left and one
/// above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LeViolation {
    pub zero: (usize, usize),
    pub left: (usize, usize),
    pub above: (usize, usize),
}

impl LeTableau {
    /// Shape-checked construction; the Le-rule is not enforced here so that
    /// invalid fillings can be inspected with [`validate_le_rule`].
    pub fn from_entries(entries: Vec<Vec<Entry>>) -> Result<Self> {
        let diagram = YoungDiagram::from_rows(entries.iter().map(Vec::len).collect())?;
        for row in &entries {
            for e in row {
                if let Entry::Weight(w) = e {
                    if !w.is_positive() {
                        return Err(Error::Input("weights must be positive".into()));
                    }
                }
            }
        }
        Ok(LeTableau { diagram, entries })
    }

    /// Tableau with all boxes of the given shape filled by ones.
    pub fn schubert(rows: &[usize]) -> Result<Self> {
        let one = BigRational::from_integer(1.into());
        Self::from_entries(
            rows.iter()
                .map(|&l| vec![Entry::Weight(one.clone()); l])
                .collect(),
        )
    }

    /// Builds a tableau from a 0/1 pattern (1 = unit weight).
    pub fn from_pattern(rows: &[Vec<u8>]) -> Result<Self> {
        let one = BigRational::from_integer(1.into());
        Self::from_entries(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&b| if b == 0 { Entry::Zero } else { Entry::Weight(one.clone()) })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn diagram(&self) -> &YoungDiagram {
        &self.diagram
    }

    pub fn entries(&self) -> &[Vec<Entry>] {
        &self.entries
    }

    pub fn entry(&self, r: usize, c: usize) -> &Entry {
        &self.entries[r][c]
    }

    pub fn is_positive(&self, r: usize, c: usize) -> bool {
        !self.entries[r][c].is_zero()
    }

    pub fn weight_f64(&self, r: usize, c: usize) -> f64 {
        self.entries[r][c].weight().map(to_f64).unwrap_or(0.0)
    }

    pub fn num_positive(&self) -> usize {
        self.entries.iter().flatten().filter(|e| !e.is_zero()).count()
    }

    /// Same zero pattern, new weights for the positive boxes in row-major
    /// order.
    pub fn with_weights(&self, weights: &[BigRational]) -> Result<Self> {
        if weights.len() != self.num_positive() {
            return Err(Error::Input(format!(
                "expected {} weights, got {}",
                self.num_positive(),
                weights.len()
            )));
        }
        let mut it = weights.iter();
        let entries = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        Entry::Zero => Entry::Zero,
                        Entry::Weight(_) => Entry::Weight(it.next().unwrap().clone()),
                    })
                    .collect()
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let line: Vec<String> = row
                .iter()
                .map(|e| match e {
                    Entry::Zero => "0".to_string(),
                    Entry::Weight(w) => format_exact(w),
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        Entry::Zero => "0".to_string(),
                        Entry::Weight(w) => format_exact(w),
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "rows": self.diagram.rows(),
            "n": self.diagram.n(),
            "k": self.diagram.k(),
            "pivots": self.diagram.pivots().pivots,
            "entries": entries,
        })
    }
}

impl fmt::Display for LeTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Parses whitespace-separated rows of "0" or positive decimals. Blank lines
/// and lines starting with '#' are skipped.
pub fn parse_tableau(text: &str) -> Result<LeTableau> {
    let mut entries: Vec<Vec<Entry>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 0;
        let bytes = line.as_bytes();
        while col < bytes.len() {
            if bytes[col].is_ascii_whitespace() {
                col += 1;
                continue;
            }
            let start = col;
            while col < bytes.len() && !bytes[col].is_ascii_whitespace() {
                col += 1;
            }
            let token = &line[start..col];
            let err = |message: String| Error::Syntax {
                line: lineno + 1,
                column: start + 1,
                message,
            };
            if token == "0" {
                row.push(Entry::Zero);
                continue;
            }
            let value = parse_decimal(token).ok_or_else(|| err(format!("bad number '{token}'")))?;
            if value.is_negative() {
                return Err(err(format!("negative weight '{token}'")));
            }
            if value.is_zero() {
                return Err(err(format!("zero written as a weight '{token}'; use 0")));
            }
            row.push(Entry::Weight(value));
        }
        if let Some(prev) = entries.last() {
            if row.len() > prev.len() {
                return Err(Error::RowLengthIncrease {
                    row: entries.len(),
                    len: row.len(),
                    prev: prev.len(),
                });
            }
        }
        entries.push(row);
    }
    if entries.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "empty tableau".into(),
        });
    }
    LeTableau::from_entries(entries)
}

/// A zero box is admissible when everything to its left in the row is zero
/// or everything above it in the column is zero.
pub fn validate_le_rule(t: &LeTableau) -> Vec<LeViolation> {
    let mut out = Vec::new();
    for (r, row) in t.entries.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            if !e.is_zero() {
                continue;
            }
            let left = (0..c).rev().find(|&cc| !row[cc].is_zero());
            let above = (0..r).rev().find(|&rr| !t.entries[rr][c].is_zero());
            if let (Some(lc), Some(ar)) = (left, above) {
                out.push(LeViolation {
                    zero: (r, c),
                    left: (r, lc),
                    above: (ar, c),
                });
            }
        }
    }
    out
}

pub fn is_schubert_positive(t: &LeTableau) -> bool {
    t.entries.iter().flatten().all(|e| !e.is_zero())
}

/// Parses and rejects Le-rule violations.
pub fn parse_valid_tableau(text: &str) -> Result<LeTableau> {
    let t = parse_tableau(text)?;
    let v = validate_le_rule(&t);
    if !v.is_empty() {
        return Err(Error::LeRule(v.len()));
    }
    Ok(t)
}

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "iter,objective,rel_subopt,seminorm_step,wall_ms";

/// One recorded iteration. `rel_subopt` is NaN without a reference and
/// `seminorm_step` is NaN when not evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordEntry {
    pub iter: usize,
    pub objective: f64,
    pub rel_subopt: f64,
    pub seminorm_step: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub entries: Vec<RecordEntry>,
}

impl ConvergenceRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: RecordEntry) {
        debug_assert!(self.entries.last().is_none_or(|e| e.iter < entry.iter));
        self.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&RecordEntry> {
        self.entries.last()
    }

    /// First recorded iteration with `rel_subopt ≤ threshold`.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.rel_subopt <= threshold)
            .map(|e| e.iter)
    }

    /// Recompute `rel_subopt` against a (new) reference objective.
    pub fn rebase(&mut self, reference: f64) {
        for e in &mut self.entries {
            e.rel_subopt = super::relative_suboptimality(e.objective, reference);
        }
    }

    /// Equal in every column except `wall_ms`, bitwise (NaN == NaN).
    pub fn same_values(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                a.iter == b.iter
                    && a.objective.to_bits() == b.objective.to_bits()
                    && a.rel_subopt.to_bits() == b.rel_subopt.to_bits()
                    && a.seminorm_step.to_bits() == b.seminorm_step.to_bits()
            })
    }

    /// CSV text. Floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.entries.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{:?},{:?}",
                e.iter, e.objective, e.rel_subopt, e.seminorm_step, e.wall_ms
            );
        }
        s
    }

    /// The CSV with the `wall_ms` column dropped.
    pub fn to_csv_without_time(&self) -> String {
        self.to_csv()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
            .fold(String::new(), |mut acc, l| {
                acc.push_str(l);
                acc.push('\n');
                acc
            })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedHeader {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => return Err(malformed(format!("expected header `{CSV_HEADER}`, found {other:?}"))),
        }
        let mut record = Self::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || Error::ShapeMismatch {
                path: path.to_path_buf(),
                reason: format!("row {}: cannot parse `{line}`", n + 1),
            };
            if fields.len() != 5 {
                return Err(bad());
            }
            let float = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
            record.entries.push(RecordEntry {
                iter: fields[0].trim().parse().map_err(|_| bad())?,
                objective: float(fields[1])?,
                rel_subopt: float(fields[2])?,
                seminorm_step: float(fields[3])?,
                wall_ms: float(fields[4])?,
            });
        }
        Ok(record)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }
}

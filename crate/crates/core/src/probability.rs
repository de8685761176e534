//! Probability vectors and conditional-probability tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DEFAULT_TOL;

/// A probability distribution over a finite outcome set. Serialized as a
/// plain JSON array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::with_tol(entries, DEFAULT_TOL)
    }

    /// Accepts entries `>= -tol` summing to `1 ± tol`; small negatives are
    /// clamped to zero and the result renormalized.
    pub fn with_tol(mut entries: Vec<f64>, tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidObject {
                kind: "ProbVector",
                predicate: "non-empty",
                magnitude: 0.0,
            });
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidObject {
                kind: "ProbVector",
                predicate: "finite entries",
                magnitude: *bad,
            });
        }
        let min = entries.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::InvalidObject {
                kind: "ProbVector",
                predicate: "non-negative entries",
                magnitude: -min,
            });
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidObject {
                kind: "ProbVector",
                predicate: "entries sum to 1",
                magnitude: (sum - 1.0).abs(),
            });
        }
        entries.iter_mut().for_each(|x| *x = x.max(0.0));
        let sum: f64 = entries.iter().sum();
        entries.iter_mut().for_each(|x| *x /= sum);
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over zero outcomes");
        Self(vec![1.0 / n as f64; n])
    }

    /// All weight on outcome `i`.
    pub fn point(n: usize, i: usize) -> Self {
        assert!(i < n, "point mass index out of range");
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn max_abs_diff(&self, other: &ProbVector) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "max_abs_diff: length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Conditional probabilities `P(E_j | R_i)`: row `j` is an outcome of the
/// measurement, column `i` a condition. Every column is a distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CondJson", into = "CondJson")]
pub struct CondMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CondJson {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<CondJson> for CondMatrix {
    type Error = Error;
    fn try_from(j: CondJson) -> Result<Self> {
        CondMatrix::new(j.rows, j.cols, j.entries)
    }
}

impl From<CondMatrix> for CondJson {
    fn from(c: CondMatrix) -> Self {
        CondJson {
            rows: c.rows,
            cols: c.cols,
            entries: c.entries,
        }
    }
}

impl CondMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tol(rows, cols, entries, DEFAULT_TOL)
    }

    /// `entries` is row-major `rows x cols`.
    pub fn with_tol(rows: usize, cols: usize, mut entries: Vec<f64>, tol: f64) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != entries.len() {
            return Err(Error::Shape {
                context: "CondMatrix",
                detail: format!("{rows}x{cols} with {} entries", entries.len()),
            });
        }
        for &x in &entries {
            if !(x >= -tol && x <= 1.0 + tol) {
                return Err(Error::InvalidObject {
                    kind: "CondMatrix",
                    predicate: "entries in [0, 1]",
                    magnitude: if x.is_finite() { (x - x.clamp(0.0, 1.0)).abs() } else { f64::INFINITY },
                });
            }
        }
        for i in 0..cols {
            let sum: f64 = (0..rows).map(|j| entries[j * cols + i]).sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidObject {
                    kind: "CondMatrix",
                    predicate: "columns sum to 1",
                    magnitude: (sum - 1.0).abs(),
                });
            }
        }
        entries.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for i in 0..cols {
                entries.push(f(j, i));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Number of measurement outcomes.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of conditions.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `P(E_j | R_i)`.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.entries[j * self.cols + i]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|j| self.get(j, i)).collect()
    }

    /// `P(E|R) · v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "CondMatrix::apply",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|j| (0..self.cols).map(|i| self.get(j, i) * v[i]).sum())
            .collect())
    }
}

//! Finite metric spaces with exact integer distances.

use alloc::vec::Vec;

use crate::dist::{Dist, DistMatrix, MAX_QUANTA};
use crate::error::MetricError;

/// Integer coordinates attached to a point, consumed by cross expressions.
pub type Label = Vec<i64>;

/// A validated metric on `n` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteMetric {
    dist: DistMatrix,
    scale_denominator: u64,
    labels: Option<Vec<Label>>,
}

impl FiniteMetric {
    /// Validates `dist` and wraps it. Rejects any axiom violation.
    pub fn new(dist: DistMatrix) -> Result<Self, MetricError> {
        check_cap(&dist)?;
        let report = validate_metric(&dist);
        if !report.ok {
            return Err(MetricError::NotAMetric { violations: report.violations.len() });
        }
        Ok(FiniteMetric { dist, scale_denominator: 1, labels: None })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, MetricError> {
        FiniteMetric::new(DistMatrix::from_rows(rows)?)
    }

    /// Skips validation; callers guarantee the metric axioms.
    pub(crate) fn new_unchecked(dist: DistMatrix) -> Self {
        FiniteMetric { dist, scale_denominator: 1, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self, MetricError> {
        if labels.len() != self.n() {
            return Err(MetricError::Labels { expected: self.n(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_scale_denominator(mut self, denom: u64) -> Result<Self, MetricError> {
        if denom == 0 {
            return Err(MetricError::ZeroScale);
        }
        self.scale_denominator = denom;
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dist.n()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> Dist {
        self.dist.get(i, j)
    }

    pub fn matrix(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn scale_denominator(&self) -> u64 {
        self.scale_denominator
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Restriction to the first `m` points (labels included).
    pub fn prefix(&self, m: usize) -> FiniteMetric {
        FiniteMetric {
            dist: self.dist.leading(m),
            scale_denominator: self.scale_denominator,
            labels: self.labels.as_ref().map(|l| l[..m].to_vec()),
        }
    }

    pub fn diameter(&self) -> Dist {
        self.dist.max_entry().unwrap_or(Dist::ZERO)
    }
}

fn check_cap(m: &DistMatrix) -> Result<(), MetricError> {
    for i in 0..m.n() {
        for (j, d) in m.row(i).iter().enumerate() {
            if d.0 > MAX_QUANTA {
                return Err(MetricError::TooLarge { i, j, value: d.0 });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ViolationKind {
    Diagonal,
    Symmetry,
    Positivity,
    Triangle,
}

/// One failed axiom. For triangles `indices = [i, j, k]` and the failing
/// inequality is `d(i,k) <= d(i,j) + d(j,k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub lhs: Dist,
    pub rhs: Dist,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Exhaustive check of the metric axioms. Violations come out sorted by
/// kind, then by indices.
pub fn validate_metric(m: &DistMatrix) -> ValidationReport {
    let n = m.n();
    let mut violations = Vec::new();
    for i in 0..n {
        if m.get(i, i) != Dist::ZERO {
            violations.push(Violation {
                kind: ViolationKind::Diagonal,
                indices: alloc::vec![i],
                lhs: m.get(i, i),
                rhs: Dist::ZERO,
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if m.get(i, j) != m.get(j, i) {
                violations.push(Violation {
                    kind: ViolationKind::Symmetry,
                    indices: alloc::vec![i, j],
                    lhs: m.get(i, j),
                    rhs: m.get(j, i),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m.get(i, j) == Dist::ZERO {
                violations.push(Violation {
                    kind: ViolationKind::Positivity,
                    indices: alloc::vec![i, j],
                    lhs: Dist::ZERO,
                    rhs: Dist::ONE,
                });
            }
        }
    }
    violations.extend(triangle_violations(m));
    ValidationReport { ok: violations.is_empty(), violations }
}

fn triangle_row(m: &DistMatrix, i: usize) -> Vec<Violation> {
    let n = m.n();
    let mut out = Vec::new();
    let row_i = m.row(i);
    for j in 0..n {
        let dij = row_i[j];
        let row_j = m.row(j);
        for k in 0..n {
            let lhs = row_i[k];
            let rhs = dij + row_j[k];
            if lhs > rhs {
                out.push(Violation { kind: ViolationKind::Triangle, indices: alloc::vec![i, j, k], lhs, rhs });
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn triangle_violations(m: &DistMatrix) -> Vec<Violation> {
    use rayon::prelude::*;
    let per_row: Vec<Vec<Violation>> = (0..m.n()).into_par_iter().map(|i| triangle_row(m, i)).collect();
    per_row.into_iter().flatten().collect()
}

#[cfg(not(feature = "parallel"))]
fn triangle_violations(m: &DistMatrix) -> Vec<Violation> {
    (0..m.n()).flat_map(|i| triangle_row(m, i)).collect()
}

/// Largest metric pointwise below `m`: Floyd-Warshall over the min-plus
/// semiring. Requires a symmetric input with zero diagonal and positive
/// off-diagonal entries.
pub fn metric_closure(m: &DistMatrix) -> Result<FiniteMetric, MetricError> {
    let n = m.n();
    check_cap(m)?;
    for i in 0..n {
        if m.get(i, i) != Dist::ZERO {
            return Err(MetricError::InvalidInput { i, j: i, reason: "nonzero diagonal" });
        }
        for j in 0..n {
            if i != j && m.get(i, j) == Dist::ZERO {
                return Err(MetricError::InvalidInput { i, j, reason: "zero off-diagonal entry" });
            }
            if m.get(i, j) != m.get(j, i) {
                return Err(MetricError::InvalidInput { i, j, reason: "asymmetric entry" });
            }
        }
    }
    let mut d = m.clone();
    for k in 0..n {
        let row_k: Vec<Dist> = d.row(k).to_vec();
        let slice = d.as_mut_slice();
        for i in 0..n {
            let dik = slice[i * n + k];
            let row_i = &mut slice[i * n..(i + 1) * n];
            for (dij, &dkj) in row_i.iter_mut().zip(&row_k) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        }
    }
    Ok(FiniteMetric::new_unchecked(d))
}

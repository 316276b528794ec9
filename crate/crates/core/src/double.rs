//! Metrics on the double `X ⊔ X'`, stored as a shared base plus the cross block.
//!
//! Both copies carry the base metric, so a double is determined by
//! `cross[i][j] = d(x_i, x'_j)`. Validity reduces to four families of
//! triangle inequalities that mix the two blocks, plus a floor of one
//! quantum between the copies:
//!
//! * (a) `cross[i][j] <= base[i][k] + cross[k][j]`
//! * (b) `cross[i][j] <= cross[i][k] + base[k][j]`
//! * (c) `base[i][j] <= cross[i][k] + cross[j][k]`
//! * (d) `base[i][j] <= cross[k][i] + cross[k][j]`

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::dist::{Dist, DistMatrix};
use crate::dsl::{eval_cross_expr, CrossExpr};
use crate::error::DoubleError;
use crate::metric::FiniteMetric;

/// Violations kept in a report; the total count is always exact.
pub const REPORT_LIMIT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Clause {
    Floor,
    A,
    B,
    C,
    D,
}

/// `indices` is `[i, j]` for the floor and `[i, j, k]` for the clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoubleViolation {
    pub clause: Clause,
    pub indices: Vec<usize>,
    pub lhs: Dist,
    pub rhs: Dist,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoubleValidationReport {
    pub ok: bool,
    /// The first [`REPORT_LIMIT`] violations in (clause, i, k, j) order.
    pub violations: Vec<DoubleViolation>,
    pub total_violations: u64,
}

impl fmt::Display for DoubleValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("valid");
        }
        write!(f, "{} violations", self.total_violations)?;
        if let Some(v) = self.violations.first() {
            write!(f, ", first: clause {:?} at {:?} ({} > {})", v.clause, v.indices, v.lhs, v.rhs)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct RowFindings {
    per_clause: [Vec<DoubleViolation>; 5],
    total: u64,
}

impl RowFindings {
    #[inline]
    fn record(&mut self, clause: Clause, indices: [usize; 3], lhs: Dist, rhs: Dist) {
        self.total += 1;
        let slot = &mut self.per_clause[clause as usize];
        if slot.len() < REPORT_LIMIT {
            let idx = if clause == Clause::Floor { indices[..2].to_vec() } else { indices.to_vec() };
            slot.push(DoubleViolation { clause, indices: idx, lhs, rhs });
        }
    }
}

fn check_row(base: &DistMatrix, cross: &DistMatrix, cross_t: &DistMatrix, i: usize) -> RowFindings {
    let n = base.n();
    let mut out = RowFindings::default();
    let base_i = base.row(i);
    let cross_i = cross.row(i);
    for (j, &c) in cross_i.iter().enumerate() {
        if c < Dist::ONE {
            out.record(Clause::Floor, [i, j, 0], c, Dist::ONE);
        }
    }
    for k in 0..n {
        let (b_ik, c_ik, c_ki) = (base_i[k], cross_i[k], cross_t.get(i, k));
        let base_k = base.row(k);
        let cross_k = cross.row(k);
        let cross_t_k = cross_t.row(k);
        for j in 0..n {
            let lhs = cross_i[j];
            let rhs = b_ik + cross_k[j];
            if lhs > rhs {
                out.record(Clause::A, [i, j, k], lhs, rhs);
            }
            let rhs = c_ik + base_k[j];
            if lhs > rhs {
                out.record(Clause::B, [i, j, k], lhs, rhs);
            }
            let lhs = base_i[j];
            let rhs = c_ik + cross_t_k[j];
            if lhs > rhs {
                out.record(Clause::C, [i, j, k], lhs, rhs);
            }
            let rhs = c_ki + cross_k[j];
            if lhs > rhs {
                out.record(Clause::D, [i, j, k], lhs, rhs);
            }
        }
    }
    out
}

/// Checks the floor and clauses (a)-(d) on `(base, cross)` without building
/// the `2n x 2n` matrix.
pub fn validate_double(base: &FiniteMetric, cross: &DistMatrix) -> DoubleValidationReport {
    let (bm, n) = (base.matrix(), base.n());
    assert_eq!(cross.n(), n, "cross block size must match the base");
    let cross_t = cross.transpose();
    let rows: Vec<RowFindings> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(|i| check_row(bm, cross, &cross_t, i)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(|i| check_row(bm, cross, &cross_t, i)).collect()
        }
    };
    let total: u64 = rows.iter().map(|r| r.total).sum();
    let mut violations = Vec::new();
    'outer: for clause in 0..5 {
        for r in &rows {
            for v in &r.per_clause[clause] {
                if violations.len() == REPORT_LIMIT {
                    break 'outer;
                }
                violations.push(v.clone());
            }
        }
    }
    DoubleValidationReport { ok: total == 0, violations, total_violations: total }
}

/// A valid metric on the double of `base`.
#[derive(Clone, PartialEq, Eq)]
pub struct DoubleMetric {
    base: Arc<FiniteMetric>,
    cross: DistMatrix,
}

impl fmt::Debug for DoubleMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleMetric").field("n", &self.n()).field("cross", &self.cross).finish()
    }
}

/// Validates `(base, cross)` and returns the double, or the violation report.
pub fn assemble_double(base: impl Into<Arc<FiniteMetric>>, cross: DistMatrix) -> Result<DoubleMetric, DoubleError> {
    let base = base.into();
    if cross.n() != base.n() {
        return Err(DoubleError::SizeMismatch { expected: base.n(), found: cross.n() });
    }
    let report = validate_double(&base, &cross);
    if !report.ok {
        return Err(DoubleError::Invalid(Box::new(report)));
    }
    Ok(DoubleMetric { base, cross })
}

impl DoubleMetric {
    /// Callers guarantee validity (restrictions, transposes, proven constructions).
    pub(crate) fn new_unchecked(base: Arc<FiniteMetric>, cross: DistMatrix) -> Self {
        debug_assert_eq!(base.n(), cross.n());
        DoubleMetric { base, cross }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &FiniteMetric {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<FiniteMetric> {
        &self.base
    }

    pub fn cross(&self) -> &DistMatrix {
        &self.cross
    }

    /// `d(x_i, x'_j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Dist {
        self.cross.get(i, j)
    }

    /// Smallest distance between the two copies.
    pub fn floor(&self) -> Dist {
        self.cross.min_entry().unwrap_or(Dist::ONE)
    }

    pub fn same_base(&self, other: &DoubleMetric) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base
    }

    /// Re-runs full validation.
    pub fn validate(&self) -> DoubleValidationReport {
        validate_double(&self.base, &self.cross)
    }

    /// Restriction to the first `m` points of both copies.
    pub fn prefix(&self, m: usize) -> DoubleMetric {
        DoubleMetric { base: Arc::new(self.base.prefix(m)), cross: self.cross.leading(m) }
    }

    /// Restriction onto a given prefix base (must equal `self.base().prefix(m)`).
    pub(crate) fn prefix_onto(&self, base: &Arc<FiniteMetric>) -> DoubleMetric {
        DoubleMetric { base: base.clone(), cross: self.cross.leading(base.n()) }
    }

    /// Adds `k` quanta to every cross distance; stays valid.
    pub fn offset(&self, k: Dist) -> DoubleMetric {
        DoubleMetric { base: self.base.clone(), cross: self.cross.offset(k) }
    }

    /// The full `2n x 2n` distance matrix, copy `X` first, then `X'`.
    pub fn to_full_matrix(&self) -> DistMatrix {
        let n = self.n();
        DistMatrix::from_fn(2 * n, |p, q| match (p < n, q < n) {
            (true, true) => self.base.d(p, q),
            (false, false) => self.base.d(p - n, q - n),
            (true, false) => self.cross.get(p, q - n),
            (false, true) => self.cross.get(q, p - n),
        })
    }
}

/// The pseudoinverse representative: `cross*[i][j] = cross[j][i]`.
pub fn transpose(d: &DoubleMetric) -> DoubleMetric {
    DoubleMetric { base: d.base.clone(), cross: d.cross.transpose() }
}

/// Constructors for the catalog of named doubles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogKind {
    /// `cross[i][j] = base[i][j] + lambda`.
    Lambda { lambda: Dist },
    /// `cross[i][j] = base[i][map[j]] + lambda`.
    Shift { map: Vec<usize>, lambda: Dist },
    /// `cross[i][j] = base[i][p] + base[p][j] + lambda`.
    Focused { point: usize, lambda: Dist },
    /// `cross[i][j] = expr(x = label_i, y = label_j, dxy = base[i][j])`.
    Dsl(CrossExpr),
}

/// Raw cross block of a catalog construction, before validation.
pub fn catalog_cross(base: &FiniteMetric, kind: &CatalogKind) -> Result<DistMatrix, DoubleError> {
    let n = base.n();
    Ok(match kind {
        CatalogKind::Lambda { lambda } => {
            check_lambda(*lambda)?;
            DistMatrix::from_fn(n, |i, j| base.d(i, j) + *lambda)
        }
        CatalogKind::Shift { map, lambda } => {
            check_lambda(*lambda)?;
            if map.len() != n {
                return Err(DoubleError::BadParams("shift map must have one entry per point"));
            }
            if map.iter().any(|&g| g >= n) {
                return Err(DoubleError::BadParams("shift map leaves the space"));
            }
            DistMatrix::from_fn(n, |i, j| base.d(i, map[j]) + *lambda)
        }
        CatalogKind::Focused { point, lambda } => {
            check_lambda(*lambda)?;
            if *point >= n {
                return Err(DoubleError::BadParams("focus point outside the space"));
            }
            DistMatrix::from_fn(n, |i, j| base.d(i, *point) + base.d(*point, j) + *lambda)
        }
        CatalogKind::Dsl(expr) => {
            let labels = base.labels().ok_or(DoubleError::MissingLabels)?;
            if let Some(index) = expr.max_coordinate() {
                if let Some(dim) = labels.iter().map(|l| l.len()).min().filter(|&d| index >= d) {
                    return Err(DoubleError::Dimension { index, dim });
                }
            }
            let mut data = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let v = eval_cross_expr(expr, &labels[i], &labels[j], base.d(i, j))
                        .map_err(|source| DoubleError::Eval { i, j, source })?;
                    data.push(v);
                }
            }
            DistMatrix::from_flat(n, data)?
        }
    })
}

fn check_lambda(lambda: Dist) -> Result<(), DoubleError> {
    if lambda < Dist::ONE {
        return Err(DoubleError::BadParams("lambda must be at least one quantum"));
    }
    Ok(())
}

/// Builds a catalog double and validates it.
pub fn make_catalog_double(
    base: impl Into<Arc<FiniteMetric>>,
    kind: &CatalogKind,
) -> Result<DoubleMetric, DoubleError> {
    let base = base.into();
    let cross = catalog_cross(&base, kind)?;
    assemble_double(base, cross)
}

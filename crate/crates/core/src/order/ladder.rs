//! Nested truncations of a prototype space and families of doubles over them.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dist::{Dist, DistMatrix};
use crate::double::{catalog_cross, make_catalog_double, transpose, CatalogKind, DoubleMetric};
use crate::dsl::{eval_cross_expr, parse_cross_expr};
use crate::error::{DoubleError, OrderError};
use crate::metric::FiniteMetric;
use crate::space::{generate_space, SpaceKind};
use crate::tropical::{compose, compose_chain, ComposeOptions};

/// Prefixes of one generated space at strictly increasing sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ladder {
    space: SpaceKind,
    levels: Vec<usize>,
    bases: Vec<Arc<FiniteMetric>>,
}

impl Ladder {
    pub fn new(space: SpaceKind, levels: Vec<usize>) -> Result<Self, OrderError> {
        if levels.is_empty() {
            return Err(OrderError::BadLadder("ladder needs at least one level"));
        }
        if levels[0] == 0 {
            return Err(OrderError::BadLadder("levels must be positive"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OrderError::BadLadder("level sizes must strictly increase"));
        }
        let top = generate_space(&space, *levels.last().expect("nonempty"))?;
        let mut bases: Vec<Arc<FiniteMetric>> =
            levels[..levels.len() - 1].iter().map(|&m| Arc::new(top.prefix(m))).collect();
        bases.push(Arc::new(top));
        Ok(Ladder { space, levels, bases })
    }

    /// Levels `base, 2 base, 4 base, ...` (`count` of them).
    pub fn doubling(space: SpaceKind, base: usize, count: usize) -> Result<Self, OrderError> {
        let levels = (0..count)
            .map(|k| base.checked_shl(k as u32).filter(|v| v >> k == base))
            .collect::<Option<Vec<_>>>()
            .ok_or(OrderError::BadLadder("level size overflow"))?;
        Ladder::new(space, levels)
    }

    pub fn space(&self) -> &SpaceKind {
        &self.space
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn top_size(&self) -> usize {
        *self.levels.last().expect("nonempty")
    }

    pub fn base(&self, level: usize) -> Result<&Arc<FiniteMetric>, OrderError> {
        self.bases.get(level).ok_or(OrderError::LevelOutOfRange { level, levels: self.len() })
    }

    pub fn top_base(&self) -> &Arc<FiniteMetric> {
        self.bases.last().expect("nonempty")
    }

    /// Index of the first level containing point `i`.
    pub fn level_of_point(&self, i: usize) -> Option<usize> {
        let l = self.levels.partition_point(|&m| m <= i);
        (l < self.levels.len()).then_some(l)
    }

    pub(crate) fn same_as(&self, other: &Ladder) -> bool {
        core::ptr::eq(self, other) || (self.space == other.space && self.levels == other.levels)
    }
}

/// A nonnegative function on `X x X'` observed on every level of a ladder.
///
/// Values are restriction coherent: level `l` sees the leading `levels[l]`
/// block of [`LadderFunction::values`].
pub trait LadderFunction {
    fn ladder(&self) -> &Ladder;
    /// Values on the top level.
    fn values(&self) -> &DistMatrix;

    fn value(&self, i: usize, j: usize) -> Dist {
        self.values().get(i, j)
    }
}

/// How a family was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyRule {
    Catalog(CatalogKind),
    /// Cross expression, kept as source text.
    Dsl(String),
    /// Built from other families; the text describes the construction.
    Derived(String),
}

impl FamilyRule {
    pub fn describe(&self) -> String {
        match self {
            FamilyRule::Catalog(CatalogKind::Lambda { lambda }) => alloc::format!("lambda({})", lambda.0),
            FamilyRule::Catalog(CatalogKind::Focused { point, lambda }) => {
                alloc::format!("focused(p={point}, lambda={})", lambda.0)
            }
            FamilyRule::Catalog(CatalogKind::Shift { lambda, .. }) => alloc::format!("shift(lambda={})", lambda.0),
            FamilyRule::Catalog(CatalogKind::Dsl(e)) => alloc::format!("{e}"),
            FamilyRule::Dsl(s) | FamilyRule::Derived(s) => s.clone(),
        }
    }
}

/// A double metric on every level of a ladder, restriction coherent by
/// construction: each level is the restriction of the top-level double.
#[derive(Clone, Debug)]
pub struct MetricFamily {
    ladder: Arc<Ladder>,
    rule: FamilyRule,
    top: DoubleMetric,
}

impl MetricFamily {
    fn from_top(ladder: Arc<Ladder>, rule: FamilyRule, top: DoubleMetric) -> Self {
        MetricFamily { ladder, rule, top }
    }

    /// Validated catalog family.
    pub fn catalog(ladder: Arc<Ladder>, kind: CatalogKind) -> Result<Self, OrderError> {
        let top_level = ladder.len() - 1;
        let top = make_catalog_double(ladder.top_base().clone(), &kind)
            .map_err(|source| OrderError::Level { level: top_level, source })?;
        Ok(Self::from_top(ladder, FamilyRule::Catalog(kind), top))
    }

    /// Validated family defined by a cross expression.
    pub fn dsl(ladder: Arc<Ladder>, source: &str) -> Result<Self, OrderError> {
        let top_level = ladder.len() - 1;
        let expr = parse_cross_expr(source)
            .map_err(|e| OrderError::Level { level: top_level, source: DoubleError::Parse(e) })?;
        let top = make_catalog_double(ladder.top_base().clone(), &CatalogKind::Dsl(expr))
            .map_err(|source| OrderError::Level { level: top_level, source })?;
        Ok(Self::from_top(ladder, FamilyRule::Dsl(source.into()), top))
    }

    /// Wraps an already valid top-level double whose base is the ladder's top base.
    pub fn from_double(ladder: Arc<Ladder>, description: String, top: DoubleMetric) -> Result<Self, OrderError> {
        if top.base() != &**ladder.top_base() {
            return Err(OrderError::LadderMismatch);
        }
        let top = DoubleMetric::new_unchecked(ladder.top_base().clone(), top.cross().clone());
        Ok(Self::from_top(ladder, FamilyRule::Derived(description), top))
    }

    pub fn ladder_arc(&self) -> &Arc<Ladder> {
        &self.ladder
    }

    pub fn rule(&self) -> &FamilyRule {
        &self.rule
    }

    pub fn describe(&self) -> String {
        self.rule.describe()
    }

    pub fn top(&self) -> &DoubleMetric {
        &self.top
    }

    /// The double on level `level`.
    pub fn level(&self, level: usize) -> Result<DoubleMetric, OrderError> {
        let base = self.ladder.base(level)?;
        Ok(self.top.prefix_onto(base))
    }

    fn check_same_ladder(&self, other: &MetricFamily) -> Result<(), OrderError> {
        if self.ladder.same_as(&other.ladder) {
            Ok(())
        } else {
            Err(OrderError::LadderMismatch)
        }
    }

    /// Levelwise product `self other`.
    pub fn compose(&self, other: &MetricFamily, opts: ComposeOptions) -> Result<Self, OrderError> {
        self.check_same_ladder(other)?;
        let top = compose(&self.top, &other.top, opts)?;
        let rule = FamilyRule::Derived(alloc::format!("({}) ({})", self.describe(), other.describe()));
        Ok(Self::from_top(self.ladder.clone(), rule, top))
    }

    /// Levelwise product of a chain, left to right.
    pub fn compose_chain(items: &[&MetricFamily], opts: ComposeOptions) -> Result<Self, OrderError> {
        let first = items.first().ok_or(crate::error::ComposeError::ChainTooShort { needed: 2, found: 0 })?;
        for f in items {
            first.check_same_ladder(f)?;
        }
        let doubles: Vec<&DoubleMetric> = items.iter().map(|f| &f.top).collect();
        let top = compose_chain(&doubles, opts)?;
        let desc: Vec<String> = items.iter().map(|f| alloc::format!("({})", f.describe())).collect();
        Ok(Self::from_top(first.ladder.clone(), FamilyRule::Derived(desc.join(" ")), top))
    }

    /// Levelwise pseudoinverse.
    pub fn transpose(&self) -> Self {
        let rule = FamilyRule::Derived(alloc::format!("({})*", self.describe()));
        Self::from_top(self.ladder.clone(), rule, transpose(&self.top))
    }

    pub fn offset(&self, k: Dist) -> Self {
        let rule = FamilyRule::Derived(alloc::format!("({}) + {}", self.describe(), k.0));
        Self::from_top(self.ladder.clone(), rule, self.top.offset(k))
    }

    /// Re-evaluates the defining rule on every level and compares it with the
    /// restriction of the top level. Derived families are coherent by
    /// construction and pass trivially.
    pub fn check_rule_coherence(&self) -> Result<(), OrderError> {
        let kind = match &self.rule {
            FamilyRule::Catalog(k) => k.clone(),
            FamilyRule::Dsl(s) => CatalogKind::Dsl(
                parse_cross_expr(s).map_err(|e| OrderError::Level { level: 0, source: DoubleError::Parse(e) })?,
            ),
            FamilyRule::Derived(_) => return Ok(()),
        };
        for level in 0..self.ladder.len() {
            let base = self.ladder.base(level)?;
            let kind = match &kind {
                CatalogKind::Shift { map, lambda } => {
                    CatalogKind::Shift { map: map[..base.n()].to_vec(), lambda: *lambda }
                }
                k => k.clone(),
            };
            let cross = catalog_cross(base, &kind).map_err(|source| OrderError::Level { level, source })?;
            if cross != self.top.cross().leading(base.n()) {
                let upper = self.ladder.len() - 1;
                return Err(OrderError::Incoherent { lower: level, upper });
            }
        }
        Ok(())
    }
}

impl LadderFunction for MetricFamily {
    fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    fn values(&self) -> &DistMatrix {
        self.top.cross()
    }
}

/// A ladder function that need not be a double metric (for example a
/// multiple of one).
#[derive(Clone, Debug)]
pub struct PairFunction {
    ladder: Arc<Ladder>,
    values: DistMatrix,
}

impl PairFunction {
    pub fn new(ladder: Arc<Ladder>, values: DistMatrix) -> Result<Self, OrderError> {
        if values.n() != ladder.top_size() {
            return Err(OrderError::LadderMismatch);
        }
        Ok(PairFunction { ladder, values })
    }

    /// Evaluates a cross expression on the top level without double validation.
    pub fn from_expr(ladder: Arc<Ladder>, source: &str) -> Result<Self, OrderError> {
        let top_level = ladder.len() - 1;
        let wrap = |source| OrderError::Level { level: top_level, source };
        let expr = parse_cross_expr(source).map_err(|e| wrap(DoubleError::Parse(e)))?;
        let base = ladder.top_base();
        let labels = base.labels().ok_or(wrap(DoubleError::MissingLabels))?;
        let n = base.n();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = eval_cross_expr(&expr, &labels[i], &labels[j], base.d(i, j))
                    .map_err(|source| wrap(DoubleError::Eval { i, j, source }))?;
                data.push(v);
            }
        }
        let values = DistMatrix::from_flat(n, data).map_err(|e| wrap(DoubleError::Shape(e)))?;
        Ok(PairFunction { ladder, values })
    }

    /// `k` times the values of `f`.
    pub fn scaled<F: LadderFunction + ?Sized>(f: &F, ladder: Arc<Ladder>, k: u64) -> Result<Self, OrderError> {
        if !ladder.same_as(f.ladder()) {
            return Err(OrderError::LadderMismatch);
        }
        let src = f.values();
        let values = DistMatrix::from_fn(src.n(), |i, j| Dist(src.get(i, j).0 * k));
        Ok(PairFunction { ladder, values })
    }
}

impl LadderFunction for PairFunction {
    fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    fn values(&self) -> &DistMatrix {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halfline(levels: &[usize]) -> Arc<Ladder> {
        Arc::new(Ladder::new(SpaceKind::Halfline, levels.to_vec()).unwrap())
    }

    #[test]
    fn ladder_rejects_bad_levels() {
        assert!(matches!(Ladder::new(SpaceKind::Halfline, vec![]), Err(OrderError::BadLadder(_))));
        assert!(matches!(Ladder::new(SpaceKind::Halfline, vec![4, 4]), Err(OrderError::BadLadder(_))));
        assert!(matches!(Ladder::new(SpaceKind::Halfline, vec![0, 4]), Err(OrderError::BadLadder(_))));
        let l = Ladder::doubling(SpaceKind::Line, 4, 3).unwrap();
        assert_eq!(l.levels(), &[4, 8, 16]);
        assert_eq!(l.level_of_point(0), Some(0));
        assert_eq!(l.level_of_point(4), Some(1));
        assert_eq!(l.level_of_point(16), None);
    }

    #[test]
    fn levels_restrict_the_top() {
        let ladder = halfline(&[4, 8, 16]);
        let f = MetricFamily::dsl(ladder.clone(), "abs(x0-y0)+min(x0,y0)+1").unwrap();
        f.check_rule_coherence().unwrap();
        let l1 = f.level(1).unwrap();
        assert_eq!(l1.n(), 8);
        assert_eq!(l1.at(3, 5), Dist(2 + 3 + 1));
        assert!(l1.validate().ok);
        assert!(matches!(f.level(3), Err(OrderError::LevelOutOfRange { .. })));
    }

    #[test]
    fn invalid_family_names_the_level() {
        let ladder = halfline(&[4, 8]);
        let err = MetricFamily::dsl(ladder, "1").unwrap_err();
        assert!(matches!(err, OrderError::Level { level: 1, source: DoubleError::Invalid(_) }));
    }

    #[test]
    fn derived_families_match_levelwise_operations() {
        let ladder = halfline(&[4, 8]);
        let a = MetricFamily::dsl(ladder.clone(), "abs(x0-y0)+min(x0,y0)+1").unwrap();
        let b = MetricFamily::catalog(ladder.clone(), CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
        let ab = a.compose(&b, ComposeOptions::PLAIN).unwrap();
        for level in 0..2 {
            let direct = compose(&a.level(level).unwrap(), &b.level(level).unwrap(), ComposeOptions::PLAIN).unwrap();
            // The top-level product restricted can only be smaller (more
            // intermediate points), never larger.
            assert!(ab.level(level).unwrap().cross().le_pointwise(direct.cross()));
        }
        assert_eq!(a.transpose().top().at(1, 3), a.top().at(3, 1));
    }

    #[test]
    fn mismatched_ladders_rejected() {
        let a = MetricFamily::catalog(halfline(&[4, 8]), CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
        let b = MetricFamily::catalog(halfline(&[4, 16]), CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
        assert!(matches!(a.compose(&b, ComposeOptions::PLAIN), Err(OrderError::LadderMismatch)));
    }

    #[test]
    fn scaled_pair_function() {
        let ladder = halfline(&[4, 8]);
        let c = MetricFamily::dsl(ladder.clone(), "abs(x0-y0)+min(x0,y0)+1").unwrap();
        let two_c = PairFunction::scaled(&c, ladder.clone(), 2).unwrap();
        assert_eq!(two_c.value(2, 5), Dist(12));
        let direct = PairFunction::from_expr(ladder, "2*(abs(x0-y0)+min(x0,y0)+1)").unwrap();
        assert_eq!(direct.values(), two_c.values());
    }
}

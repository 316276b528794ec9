//! Separating two classes by the action `e -> s e s*` on an idempotent.
//!
//! When `B` does not control `C`, a witness with `B` bounded and `C`
//! divergent is thinned out and turned into the separator
//! `a(x, y') = min_n [d(x, x_n) + d(y_n, y) + bound]`. Then `a b a*` stays
//! bounded along the witness diagonal while `a c a*` diverges there, and with
//! `e = a* a` the metrics `b e b*` and `c e c*` are not equivalent.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dist::{Dist, DistMatrix};
use crate::double::assemble_double;
use crate::error::{FundamentalError, OrderError};
use crate::order::{
    check_controls, check_equivalent, window_levels, CheckParams, EquivalenceStatus, EquivalenceVerdict, Ladder,
    MetricFamily, Verdict, Witness,
};
use crate::tropical::ComposeOptions;

/// Fewest points a sparse witness may keep.
pub const MIN_SPARSE_POINTS: usize = 4;

/// A failing control witness with the radii of both sequences per level.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtractedWitness {
    pub witness: Witness,
    /// Largest base distance from point 0 to an `x_n` present on each level.
    pub x_radius: Vec<Dist>,
    pub y_radius: Vec<Dist>,
}

fn suggest(ladder: &Ladder) -> Vec<usize> {
    let mut levels = ladder.levels().to_vec();
    let top = ladder.top_size();
    levels.push(top.saturating_mul(2));
    levels
}

fn inconclusive(stage: &'static str, reason: String, ladder: &Ladder) -> FundamentalError {
    FundamentalError::Inconclusive { stage, reason, suggested_levels: suggest(ladder) }
}

/// The witness of `B` failing to control `C`, checked to leave every ball.
pub fn extract_witness(
    b: &MetricFamily,
    c: &MetricFamily,
    params: &CheckParams,
) -> Result<ExtractedWitness, FundamentalError> {
    let ladder = b.ladder_arc().clone();
    let verdict = match check_controls(b, c, params) {
        Ok(v) => v,
        Err(OrderError::LadderTooShort { levels, window }) => {
            return Err(inconclusive(
                "extract",
                alloc::format!("{levels} levels cannot fill a stability window of {window}"),
                &ladder,
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let witness = match verdict {
        Verdict::Fails(w) => w,
        Verdict::Holds(_) => return Err(FundamentalError::ControlHolds),
        Verdict::Inconclusive(reason) => return Err(inconclusive("extract", reason, &ladder)),
    };
    let base = ladder.top_base();
    let radius = |pick: fn(&crate::order::WitnessEntry) -> usize| -> Vec<Dist> {
        (0..ladder.len())
            .map(|level| {
                witness.entries.iter().filter(|e| e.level <= level).map(|e| base.d(0, pick(e))).max().unwrap_or(Dist(0))
            })
            .collect()
    };
    let x_radius = radius(|e| e.i);
    let y_radius = radius(|e| e.j);
    let window = window_levels(&ladder, params.window)?;
    let grows = |r: &[Dist]| r[window.clone()].windows(2).all(|w| w[1] > w[0]);
    if !grows(&x_radius) {
        return Err(FundamentalError::BoundedWitness { side: "x" });
    }
    if !grows(&y_radius) {
        return Err(FundamentalError::BoundedWitness { side: "y" });
    }
    Ok(ExtractedWitness { witness, x_radius, y_radius })
}

/// One retained witness pair `(x_k, y'_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparsePoint {
    pub x: usize,
    pub y: usize,
    pub level: usize,
}

/// A witness thinned so that `d(x_k, {x_1..x_{k-1}}) > 2^k` and every mixed
/// pair has `c(x_n, y'_m) > bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseWitness {
    pub points: Vec<SparsePoint>,
    pub bound: Dist,
    /// The mixed-pair floor was verified over all retained pairs.
    pub separation_checked: bool,
}

impl SparseWitness {
    pub fn x_points(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.x).collect()
    }
}

/// `2^k` quanta, saturating.
fn spacing(k: usize) -> u64 {
    1u64.checked_shl(k as u32).unwrap_or(u64::MAX)
}

/// Greedy thinning: first by the `2^k` spacing of the `x_k`, then by the
/// mixed-pair floor of `c`.
pub fn sparsify_witness(w: &Witness, c: &MetricFamily) -> Result<SparseWitness, FundamentalError> {
    let ladder = c.ladder_arc();
    let base = ladder.top_base();
    let mut spaced: Vec<SparsePoint> = Vec::new();
    for e in &w.entries {
        let k = spaced.len() + 1;
        if spaced.iter().all(|p| base.d(e.i, p.x).0 > spacing(k)) {
            spaced.push(SparsePoint { x: e.i, y: e.j, level: e.level });
        }
    }
    let cv = c.top().cross();
    let mut kept: Vec<SparsePoint> = Vec::new();
    for p in spaced {
        let own = cv.get(p.x, p.y) > w.bound;
        if own && kept.iter().all(|m| cv.get(p.x, m.y) > w.bound && cv.get(m.x, p.y) > w.bound) {
            kept.push(p);
        }
    }
    if kept.len() < MIN_SPARSE_POINTS {
        return Err(FundamentalError::TooFewSurvivors { kept: kept.len(), needed: MIN_SPARSE_POINTS });
    }
    Ok(SparseWitness { points: kept, bound: w.bound, separation_checked: true })
}

/// `a(x, y') = min_n [d(x, x_n) + d(y_n, y) + bound]` on the ladder.
pub fn build_separating_metric(w: &SparseWitness, ladder: &Arc<Ladder>) -> Result<MetricFamily, FundamentalError> {
    let base = ladder.top_base();
    let cross = DistMatrix::from_fn(base.n(), |i, j| {
        w.points.iter().map(|p| base.d(i, p.x) + base.d(p.y, j) + w.bound).min().unwrap_or(Dist(u64::MAX))
    });
    let double = assemble_double(base.clone(), cross).map_err(FundamentalError::Internal)?;
    let xs: Vec<String> = w.points.iter().map(|p| alloc::format!("{}", p.x)).collect();
    let desc = alloc::format!("separator(bound={}, x=[{}])", w.bound.0, xs.join(","));
    Ok(MetricFamily::from_double(ladder.clone(), desc, double)?)
}

/// `s e s*`.
pub fn mu_action(s: &MetricFamily, e: &MetricFamily, opts: ComposeOptions) -> Result<MetricFamily, OrderError> {
    MetricFamily::compose_chain(&[s, e, &s.transpose()], opts)
}

/// Diagonal bounds and divergence of `a b a*` against `a c a*`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaMainReport {
    pub witness: SparseWitness,
    pub penalty: Dist,
    /// `(a b a*)(x_k, x'_k)` per retained `k`.
    pub diag_aba: Vec<Dist>,
    /// `(a c a*)(x_k, x'_k)` per retained `k`.
    pub diag_aca: Vec<Dist>,
    pub sup_diag_aba: Dist,
    /// `3 bound + 2 penalty`.
    pub aba_bound: Dist,
    /// `b(y_k, y'_k) + 2 bound + 2 penalty` per retained `k`.
    pub closed_form: Vec<Dist>,
    pub closed_form_ok: bool,
    pub aca_increasing: bool,
    /// `diag_aca` exceeds `3 bound + 2` from the third retained point on.
    pub aca_exceeds: bool,
    /// Top-level pairs with `a c a* >= a b a*`, over all pairs.
    pub dominance: (u64, u64),
    pub equivalence: EquivalenceVerdict,
}

impl LemmaMainReport {
    pub fn passed(&self) -> bool {
        self.sup_diag_aba <= self.aba_bound
            && self.closed_form_ok
            && self.aca_increasing
            && self.aca_exceeds
            && self.equivalence.status() == EquivalenceStatus::NotEquivalent
    }
}

/// Runs extraction, sparsification and the separator on `(B, C)` and checks
/// the diagonal behaviour of `a b a*` and `a c a*`.
pub fn verify_lemma_main(
    b: &MetricFamily,
    c: &MetricFamily,
    params: &CheckParams,
    opts: ComposeOptions,
) -> Result<LemmaMainReport, FundamentalError> {
    let extracted = extract_witness(b, c, params)?;
    let sparse = sparsify_witness(&extracted.witness, c)?;
    let a = build_separating_metric(&sparse, b.ladder_arc())?;
    lemma_report(&a, b, c, sparse, params, opts)
}

fn lemma_report(
    a: &MetricFamily,
    b: &MetricFamily,
    c: &MetricFamily,
    sparse: SparseWitness,
    params: &CheckParams,
    opts: ComposeOptions,
) -> Result<LemmaMainReport, FundamentalError> {
    let a_star = a.transpose();
    let aba = MetricFamily::compose_chain(&[a, b, &a_star], opts)?;
    let aca = MetricFamily::compose_chain(&[a, c, &a_star], opts)?;
    let (bound, penalty) = (sparse.bound, opts.junction_penalty);
    let diag_aba: Vec<Dist> = sparse.points.iter().map(|p| aba.top().at(p.x, p.x)).collect();
    let diag_aca: Vec<Dist> = sparse.points.iter().map(|p| aca.top().at(p.x, p.x)).collect();
    let sup_diag_aba = diag_aba.iter().copied().max().unwrap_or(Dist(0));
    let aba_bound = Dist(3 * bound.0 + 2 * penalty.0);
    let closed_form: Vec<Dist> =
        sparse.points.iter().map(|p| Dist(b.top().at(p.y, p.y).0 + 2 * bound.0 + 2 * penalty.0)).collect();
    let closed_form_ok = diag_aba.iter().zip(&closed_form).all(|(v, cap)| v <= cap);
    let aca_increasing = diag_aca.windows(2).all(|w| w[1] > w[0]);
    let aca_exceeds = diag_aca.iter().skip(2).all(|v| v.0 > 3 * bound.0 + 2);
    let (lo, hi) = (aba.top().cross().as_slice(), aca.top().cross().as_slice());
    let dominated = lo.iter().zip(hi).filter(|(l, h)| h >= l).count() as u64;
    let equivalence = check_equivalent(&aba, &aca, params)?;
    Ok(LemmaMainReport {
        witness: sparse,
        penalty,
        diag_aba,
        diag_aca,
        sup_diag_aba,
        aba_bound,
        closed_form,
        closed_form_ok,
        aca_increasing,
        aca_exceeds,
        dominance: (dominated, lo.len() as u64),
        equivalence,
    })
}

/// Which control question failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    /// `S` does not control `T`.
    SDoesNotControlT,
    /// `T` does not control `S`.
    TDoesNotControlS,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub failing_direction: Direction,
    pub extracted: ExtractedWitness,
    pub witness: SparseWitness,
    pub separator: MetricFamily,
    /// `a* a`.
    pub idempotent_e: MetricFamily,
    pub mu_s: MetricFamily,
    pub mu_t: MetricFamily,
    pub separation: EquivalenceVerdict,
}

impl ExperimentReport {
    pub fn separated(&self) -> bool {
        self.separation.status() == EquivalenceStatus::NotEquivalent
    }
}

/// Builds an idempotent `e` with `s e s*` and `t e t*` inequivalent.
pub fn fundamentality_experiment(
    s: &MetricFamily,
    t: &MetricFamily,
    params: &CheckParams,
    opts: ComposeOptions,
) -> Result<ExperimentReport, FundamentalError> {
    let ladder = s.ladder_arc().clone();
    let eq = match check_equivalent(s, t, params) {
        Ok(eq) => eq,
        Err(OrderError::LadderTooShort { levels, window }) => {
            return Err(inconclusive(
                "equivalence",
                alloc::format!("{levels} levels cannot fill a stability window of {window}"),
                &ladder,
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let (direction, b, c) = match (&eq.forward, &eq.backward) {
        (Verdict::Fails(_), _) => (Direction::SDoesNotControlT, s, t),
        (_, Verdict::Fails(_)) => (Direction::TDoesNotControlS, t, s),
        (Verdict::Holds(_), Verdict::Holds(_)) => return Err(FundamentalError::Equivalent),
        (Verdict::Inconclusive(r), _) | (_, Verdict::Inconclusive(r)) => {
            return Err(inconclusive("equivalence", r.clone(), &ladder))
        }
    };
    let extracted = extract_witness(b, c, params)?;
    let witness = sparsify_witness(&extracted.witness, c)?;
    let separator = build_separating_metric(&witness, &ladder)?;
    let idempotent_e = separator.transpose().compose(&separator, opts)?;
    let mu_s = mu_action(s, &idempotent_e, opts)?;
    let mu_t = mu_action(t, &idempotent_e, opts)?;
    let separation = check_equivalent(&mu_s, &mu_t, params)?;
    Ok(ExperimentReport {
        failing_direction: direction,
        extracted,
        witness,
        separator,
        idempotent_e,
        mu_s,
        mu_t,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double::CatalogKind;
    use crate::order::WitnessEntry;
    use crate::space::SpaceKind;

    const B_LINE: &str = "abs(x0-y0)+1";
    const C_WEDGE: &str = "abs(x0-y0)+min(x0,y0)+1";

    fn halfline() -> Arc<Ladder> {
        Arc::new(Ladder::doubling(SpaceKind::Halfline, 16, 5).unwrap())
    }

    fn fam(ladder: &Arc<Ladder>, src: &str) -> MetricFamily {
        MetricFamily::dsl(ladder.clone(), src).unwrap()
    }

    fn diagonal_witness(ladder: &Ladder, xs: impl IntoIterator<Item = usize>, bound: u64) -> Witness {
        let entries = xs
            .into_iter()
            .map(|x| WitnessEntry {
                level: ladder.level_of_point(x).unwrap(),
                i: x,
                j: x,
                f: Dist(1),
                g: Dist(x as u64 + 1),
            })
            .collect();
        Witness { bound: Dist(bound), entries }
    }

    #[test]
    fn extract_on_halfline() {
        let ladder = halfline();
        let ex = extract_witness(&fam(&ladder, B_LINE), &fam(&ladder, C_WEDGE), &CheckParams::default()).unwrap();
        assert_eq!(ex.witness.bound, Dist(2));
        assert!(ex.witness.entries.iter().all(|e| e.i == e.j));
        assert_eq!(ex.x_radius, vec![Dist(15), Dist(31), Dist(63), Dist(127), Dist(255)]);
        assert_eq!(ex.x_radius, ex.y_radius);
    }

    #[test]
    fn extract_refuses_self_control() {
        let ladder = halfline();
        let b = fam(&ladder, B_LINE);
        assert_eq!(extract_witness(&b, &b, &CheckParams::default()), Err(FundamentalError::ControlHolds));
    }

    #[test]
    fn extract_on_single_level_is_inconclusive() {
        let ladder = Arc::new(Ladder::new(SpaceKind::Halfline, vec![64]).unwrap());
        let err = extract_witness(&fam(&ladder, B_LINE), &fam(&ladder, C_WEDGE), &CheckParams::default());
        assert!(matches!(err, Err(FundamentalError::Inconclusive { stage: "extract", .. })));
    }

    #[test]
    fn sparsify_manual_witness() {
        // d(x_k, earlier) > 2^k greedily from 1: 1, 6 (>4), 15 (>8), 32 (>16), 65, 130.
        let ladder = halfline();
        let c = fam(&ladder, "abs(x0-y0)+min(x0,y0)+3");
        let w = diagonal_witness(&ladder, 1..256, 2);
        let s = sparsify_witness(&w, &c).unwrap();
        assert_eq!(s.x_points(), vec![1, 6, 15, 32, 65, 130]);
    }

    #[test]
    fn sparsify_keeps_spaced_witness() {
        let ladder = halfline();
        let c = fam(&ladder, "abs(x0-y0)+min(x0,y0)+3");
        let w = diagonal_witness(&ladder, [3, 16, 64, 255], 2);
        assert_eq!(sparsify_witness(&w, &c).unwrap().x_points(), vec![3, 16, 64, 255]);
    }

    #[test]
    fn sparsify_drops_floor_violations() {
        // c(1, 1') = 2 is not above the bound 2.
        let ladder = halfline();
        let c = fam(&ladder, C_WEDGE);
        let w = diagonal_witness(&ladder, [1, 16, 64, 130, 255], 2);
        assert_eq!(sparsify_witness(&w, &c).unwrap().x_points(), vec![16, 64, 130, 255]);
        let short = diagonal_witness(&ladder, [1, 16, 64, 130], 2);
        assert_eq!(sparsify_witness(&short, &c), Err(FundamentalError::TooFewSurvivors { kept: 3, needed: 4 }));
    }

    #[test]
    fn separator_values() {
        let ladder = halfline();
        let sparse = SparseWitness {
            points: [1, 6, 15].iter().map(|&x| SparsePoint { x, y: x, level: 0 }).collect(),
            bound: Dist(2),
            separation_checked: true,
        };
        let a = build_separating_metric(&sparse, &ladder).unwrap();
        assert_eq!(a.top().at(3, 7), Dist(6));
        assert_eq!(a.top().at(6, 6), Dist(2));
    }

    #[test]
    fn single_point_separator_is_focused() {
        let ladder = halfline();
        let sparse = SparseWitness {
            points: vec![SparsePoint { x: 5, y: 5, level: 0 }],
            bound: Dist(3),
            separation_checked: true,
        };
        let a = build_separating_metric(&sparse, &ladder).unwrap();
        let f = MetricFamily::catalog(ladder, CatalogKind::Focused { point: 5, lambda: Dist(3) }).unwrap();
        assert_eq!(a.top().cross(), f.top().cross());
    }

    #[test]
    fn mu_of_unit_adds_two() {
        let ladder = Arc::new(Ladder::doubling(SpaceKind::Halfline, 8, 2).unwrap());
        let e1 = MetricFamily::catalog(ladder, CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
        let mu = mu_action(&e1, &e1, ComposeOptions::PLAIN).unwrap();
        assert_eq!(mu.top().cross(), &e1.top().cross().offset(Dist(2)));
    }

    #[test]
    fn lemma_main_on_halfline() {
        let ladder = halfline();
        let (b, c) = (fam(&ladder, B_LINE), fam(&ladder, C_WEDGE));
        let params = CheckParams::default();
        let r0 = verify_lemma_main(&b, &c, &params, ComposeOptions::PLAIN).unwrap();
        assert_eq!(r0.witness.x_points(), vec![2, 7, 16, 33, 66, 131]);
        assert!(r0.sup_diag_aba <= Dist(6));
        assert!(r0.passed(), "{r0:?}");
        let r1 = verify_lemma_main(&b, &c, &params, ComposeOptions::with_penalty(1)).unwrap();
        assert!(r1.sup_diag_aba <= Dist(8));
        assert!(r1.passed());
    }

    #[test]
    fn experiment_separates_wedge_from_line_metric() {
        let ladder = halfline();
        let (s, t) = (fam(&ladder, C_WEDGE), fam(&ladder, B_LINE));
        let r = fundamentality_experiment(&s, &t, &CheckParams::default(), ComposeOptions::PLAIN).unwrap();
        assert_eq!(r.failing_direction, Direction::TDoesNotControlS);
        assert!(r.separated());
    }

    #[test]
    fn experiment_refuses_equivalent_classes() {
        let ladder = halfline();
        let b = fam(&ladder, B_LINE);
        let params = CheckParams::default();
        assert!(matches!(
            fundamentality_experiment(&b, &b, &params, ComposeOptions::PLAIN),
            Err(FundamentalError::Equivalent)
        ));
        let shifted = b.offset(Dist(5));
        assert!(matches!(
            fundamentality_experiment(&b, &shifted, &params, ComposeOptions::PLAIN),
            Err(FundamentalError::Equivalent)
        ));
    }
}

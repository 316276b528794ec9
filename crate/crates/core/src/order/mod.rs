//! The coarse order on ladder families: does `F` control `G`?
//!
//! `F` controls `G` when `G <= phi(F)` for some homeomorphism `phi` of
//! `[0, ∞)`. On a ladder this is decided from the control profile
//! `rho(t) = max { G(z) : F(z) <= t }` over a window of top levels: a profile
//! that is stable on the window yields a verified `phi`; a threshold whose
//! profile keeps growing yields a witness chain with `F` bounded and `G`
//! strictly increasing.

mod homeo;
mod ladder;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dist::Dist;
use crate::error::OrderError;
use crate::tropical::ComposeOptions;

pub use homeo::Homeomorphism;
pub use ladder::{FamilyRule, Ladder, LadderFunction, MetricFamily, PairFunction};

/// Tuning of [`check_controls`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckParams {
    /// Number of level steps the profile is compared over.
    pub window: usize,
    /// Growth per level step that counts as divergence.
    pub delta: Dist,
    /// Shortest witness chain accepted as a failure certificate.
    pub min_witness_len: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams { window: 3, delta: Dist(1), min_witness_len: 6 }
    }
}

/// `rho(t) = max { G(z) : F(z) <= t }` on one level, tabulated at the
/// distinct values of `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlProfile {
    pub level: usize,
    pub thresholds: Vec<Dist>,
    pub rho: Vec<Dist>,
}

impl ControlProfile {
    /// `rho(t)`, with 0 below the smallest threshold.
    pub fn at(&self, t: Dist) -> Dist {
        let idx = self.thresholds.partition_point(|&s| s <= t);
        if idx == 0 {
            Dist(0)
        } else {
            self.rho[idx - 1]
        }
    }
}

fn check_ladders<F, G>(f: &F, g: &G) -> Result<(), OrderError>
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    if f.ladder().same_as(g.ladder()) {
        Ok(())
    } else {
        Err(OrderError::LadderMismatch)
    }
}

/// Control profile of `F` over `G` on level `level`.
pub fn control_profile<F, G>(f: &F, g: &G, level: usize) -> Result<ControlProfile, OrderError>
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    check_ladders(f, g)?;
    let ladder = f.ladder();
    let n = *ladder.levels().get(level).ok_or(OrderError::LevelOutOfRange { level, levels: ladder.len() })?;
    let mut pairs: Vec<(Dist, Dist)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((f.value(i, j), g.value(i, j)));
        }
    }
    pairs.sort_unstable();
    let mut thresholds = Vec::new();
    let mut rho: Vec<Dist> = Vec::new();
    let mut running = Dist(0);
    for (fv, gv) in pairs {
        running = running.max(gv);
        if thresholds.last() == Some(&fv) {
            *rho.last_mut().expect("paired with thresholds") = running;
        } else {
            thresholds.push(fv);
            rho.push(running);
        }
    }
    Ok(ControlProfile { level, thresholds, rho })
}

/// One pair of a witness chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessEntry {
    /// First ladder level containing the pair.
    pub level: usize,
    pub i: usize,
    pub j: usize,
    pub f: Dist,
    pub g: Dist,
}

/// Pairs `(x_n, y'_n)` with `F < bound` and `G` strictly increasing, each
/// first seen on a level no lower than its predecessor's.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub bound: Dist,
    pub entries: Vec<WitnessEntry>,
}

impl Witness {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks the defining properties against the functions.
    pub fn verify<F, G>(&self, f: &F, g: &G) -> bool
    where
        F: LadderFunction + ?Sized,
        G: LadderFunction + ?Sized,
    {
        let levels = f.ladder().levels();
        let mut prev: Option<&WitnessEntry> = None;
        for e in &self.entries {
            let Some(&n) = levels.get(e.level) else { return false };
            if e.i >= n || e.j >= n || f.value(e.i, e.j) != e.f || g.value(e.i, e.j) != e.g || e.f >= self.bound {
                return false;
            }
            if let Some(p) = prev {
                if e.g <= p.g || e.level < p.level {
                    return false;
                }
            }
            prev = Some(e);
        }
        true
    }
}

/// Outcome of one control question.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Holds(Homeomorphism),
    Fails(Witness),
    Inconclusive(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    pub fn status(&self) -> Status {
        match self {
            Verdict::Holds(_) => Status::Holds,
            Verdict::Fails(_) => Status::Fails,
            Verdict::Inconclusive(_) => Status::Inconclusive,
        }
    }

    pub fn homeomorphism(&self) -> Option<&Homeomorphism> {
        match self {
            Verdict::Holds(h) => Some(h),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

/// Indices of the levels [`check_controls`] compares.
pub fn window_levels(ladder: &Ladder, window: usize) -> Result<core::ops::Range<usize>, OrderError> {
    if window == 0 {
        return Err(OrderError::ZeroWindow);
    }
    let len = ladder.len();
    if len < window + 1 {
        return Err(OrderError::LadderTooShort { levels: len, window });
    }
    Ok(len - 1 - window..len)
}

/// `phi` through `(t_k, max(rho_k, phi(t_{k-1}) + 1))` with unit tail slope,
/// so that `G <= phi(F)` wherever the profile was taken.
fn homeomorphism_from_profile(p: &ControlProfile) -> Homeomorphism {
    let mut points = Vec::with_capacity(p.thresholds.len());
    let mut last = Dist(0);
    for (&t, &r) in p.thresholds.iter().zip(&p.rho) {
        if t == Dist(0) {
            continue;
        }
        let v = r.max(Dist(last.0 + 1));
        points.push((t, v));
        last = v;
    }
    Homeomorphism::from_points(points, (1, 1))
}

/// `G <= phi(F)` on every pair of the top level, hence on every level.
fn certifies<F, G>(f: &F, g: &G, phi: &Homeomorphism) -> bool
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    let (fv, gv) = (f.values(), g.values());
    fv.as_slice().iter().zip(gv.as_slice()).all(|(&a, &b)| phi.bounds(a, b))
}

/// Longest chain of pairs with `F < bound` and `G > bound`, scanning levels
/// bottom-up and pairs new to each level by increasing `G`.
fn witness_chain<F, G>(f: &F, g: &G, bound: Dist) -> Witness
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    let levels = f.ladder().levels();
    let mut entries: Vec<WitnessEntry> = Vec::new();
    let mut last_g = bound;
    let mut prev_n = 0usize;
    for (level, &n) in levels.iter().enumerate() {
        let mut fresh: Vec<WitnessEntry> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i < prev_n && j < prev_n {
                    continue;
                }
                let (fv, gv) = (f.value(i, j), g.value(i, j));
                if fv < bound && gv > last_g {
                    fresh.push(WitnessEntry { level, i, j, f: fv, g: gv });
                }
            }
        }
        fresh.sort_by_key(|e| (e.g, e.i, e.j));
        for e in fresh {
            if e.g > last_g {
                last_g = e.g;
                entries.push(e);
            }
        }
        prev_n = n;
    }
    Witness { bound, entries }
}

/// Decides whether `F` controls `G` on the ladder.
pub fn check_controls<F, G>(f: &F, g: &G, params: &CheckParams) -> Result<Verdict, OrderError>
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    check_ladders(f, g)?;
    let window = window_levels(f.ladder(), params.window)?;
    let profiles = window.map(|level| control_profile(f, g, level)).collect::<Result<Vec<_>, _>>()?;
    let first = &profiles[0];
    let top = profiles.last().expect("window is nonempty");
    let diverging = first
        .thresholds
        .iter()
        .copied()
        .find(|&t| profiles.windows(2).all(|w| w[1].at(t).0 >= w[0].at(t).0.saturating_add(params.delta.0)));
    let Some(t) = diverging else {
        // Thresholds come from the lowest window level; the profile there may
        // still be cut off by the truncation, so stability is judged above it.
        let settled = &profiles[1..];
        let moved = first.thresholds.iter().copied().find(|&t| settled.iter().any(|p| p.at(t) != settled[0].at(t)));
        if let Some(moved) = moved {
            let trace: Vec<u64> = profiles.iter().map(|p| p.at(moved).0).collect();
            return Ok(Verdict::Inconclusive(alloc::format!(
                "profile at threshold {} changes across the window ({:?}) without growing by {} on every step; extend the ladder",
                moved.0,
                trace,
                params.delta.0
            )));
        }
        let phi = homeomorphism_from_profile(top);
        if certifies(f, g, &phi) {
            return Ok(Verdict::Holds(phi));
        }
        return Ok(Verdict::Inconclusive(String::from(
            "profile is stable but the derived homeomorphism failed verification",
        )));
    };
    let bound = Dist(t.0 + 1);
    let witness = witness_chain(f, g, bound);
    if witness.len() < params.min_witness_len {
        return Ok(Verdict::Inconclusive(alloc::format!(
            "profile diverges at threshold {} but the witness chain has {} < {} pairs; extend the ladder",
            t.0,
            witness.len(),
            params.min_witness_len
        )));
    }
    Ok(Verdict::Fails(witness))
}

/// Both directions of the coarse order.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceVerdict {
    /// `F` controls `G`.
    pub forward: Verdict,
    /// `G` controls `F`.
    pub backward: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EquivalenceStatus {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

impl fmt::Display for EquivalenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivalenceStatus::Equivalent => "equivalent",
            EquivalenceStatus::NotEquivalent => "not-equivalent",
            EquivalenceStatus::Inconclusive => "inconclusive",
        })
    }
}

impl EquivalenceVerdict {
    pub fn status(&self) -> EquivalenceStatus {
        match (self.forward.status(), self.backward.status()) {
            (Status::Holds, Status::Holds) => EquivalenceStatus::Equivalent,
            (Status::Fails, _) | (_, Status::Fails) => EquivalenceStatus::NotEquivalent,
            _ => EquivalenceStatus::Inconclusive,
        }
    }
}

/// `F ~ G`: each controls the other.
pub fn check_equivalent<F, G>(f: &F, g: &G, params: &CheckParams) -> Result<EquivalenceVerdict, OrderError>
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    Ok(EquivalenceVerdict { forward: check_controls(f, g, params)?, backward: check_controls(g, f, params)? })
}

/// A homeomorphism with `phi(n) < k_n` on every band, where `k_n` is the
/// least value of `F` over pairs with `n - 1 <= G <= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandCertificate {
    pub phi: Homeomorphism,
    /// `(n, k_n)` for every band met on the top level.
    pub bands: Vec<(u64, Dist)>,
}

/// Builds `phi` with `F >= phi(G)` from the band minima of `F`.
///
/// Requires that `F` controls `G`; otherwise the band where the minima stay
/// bounded is reported.
pub fn build_homeomorphism<F, G>(f: &F, g: &G, params: &CheckParams) -> Result<BandCertificate, OrderError>
where
    F: LadderFunction + ?Sized,
    G: LadderFunction + ?Sized,
{
    match check_controls(f, g, params)? {
        Verdict::Holds(_) => {}
        Verdict::Fails(w) => {
            let last = w.entries.last().map(|e| e.g.0).unwrap_or(0);
            return Err(OrderError::ControlFails { band: last, bound: w.bound });
        }
        Verdict::Inconclusive(reason) => return Err(OrderError::Undecided(reason)),
    }
    let (fv, gv) = (f.values(), g.values());
    let mut min_f_at_g: BTreeMap<u64, u64> = BTreeMap::new();
    for (&a, &b) in fv.as_slice().iter().zip(gv.as_slice()) {
        let slot = min_f_at_g.entry(b.0).or_insert(u64::MAX);
        *slot = (*slot).min(a.0);
    }
    let mut k: BTreeMap<u64, u64> = BTreeMap::new();
    for (&gval, &fmin) in &min_f_at_g {
        for band in [gval, gval + 1] {
            if band >= 1 {
                let slot = k.entry(band).or_insert(u64::MAX);
                *slot = (*slot).min(fmin);
            }
        }
    }
    let bands: Vec<(u64, Dist)> = k.iter().map(|(&n, &v)| (n, Dist(v))).collect();
    // Suffix minima m_n = min { k_m : m >= n } are nondecreasing in n.
    let mut m: Vec<u64> = bands.iter().map(|b| b.1 .0).collect();
    for idx in (0..m.len().saturating_sub(1)).rev() {
        m[idx] = m[idx].min(m[idx + 1]);
    }
    if let Some(idx) = m.iter().position(|&v| v == 0) {
        return Err(OrderError::NoRoom { band: bands[idx].0 });
    }
    // Runs of equal m: phi starts run r at m_{r-1} and stays below m_r until
    // the next run starts; one point past the last band closes the final run.
    let mut points: Vec<(Dist, Dist)> = Vec::new();
    let mut idx = 0;
    let mut prev_m = 0u64;
    while idx < bands.len() {
        let start = bands[idx].0;
        let value = m[idx];
        if idx > 0 {
            points.push((Dist(start), Dist(prev_m)));
        }
        while idx < bands.len() && m[idx] == value {
            idx += 1;
        }
        prev_m = value;
        if idx == bands.len() {
            points.push((Dist(bands[idx - 1].0 + 1), Dist(value)));
        }
    }
    let phi = Homeomorphism::from_points(points, (1, 1));
    let on_bands = bands.iter().all(|&(n, kn)| phi.strictly_below(Dist(n), kn));
    let on_pairs = fv.as_slice().iter().zip(gv.as_slice()).all(|(&a, &b)| phi.bounded_by(b, a));
    if !(on_bands && on_pairs) {
        return Err(OrderError::Undecided(String::from("band homeomorphism failed verification")));
    }
    Ok(BandCertificate { phi, bands })
}

/// `F^2 ~ F` and `F ~ F*`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdempotenceVerdict {
    pub square: EquivalenceVerdict,
    pub adjoint: EquivalenceVerdict,
}

impl IdempotenceVerdict {
    pub fn status(&self) -> Status {
        match (self.square.status(), self.adjoint.status()) {
            (EquivalenceStatus::Equivalent, EquivalenceStatus::Equivalent) => Status::Holds,
            (EquivalenceStatus::NotEquivalent, _) | (_, EquivalenceStatus::NotEquivalent) => Status::Fails,
            _ => Status::Inconclusive,
        }
    }
}

/// Whether the class of `F` is an idempotent projection.
pub fn is_idempotent(
    f: &MetricFamily,
    params: &CheckParams,
    opts: ComposeOptions,
) -> Result<IdempotenceVerdict, OrderError> {
    let square = f.compose(f, opts)?;
    Ok(IdempotenceVerdict {
        square: check_equivalent(&square, f, params)?,
        adjoint: check_equivalent(f, &f.transpose(), params)?,
    })
}

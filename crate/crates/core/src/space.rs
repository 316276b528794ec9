//! Prototype spaces enumerated so that every level is a prefix of the next.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{Dist, DistMatrix};
use crate::error::SpaceError;
use crate::metric::{metric_closure, FiniteMetric, Label};

/// Catalog of unbounded prototype spaces, truncated to their first `n` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SpaceKind {
    /// `{0, 1, 2, ...}` with `|i - j|`.
    Halfline,
    /// The integers enumerated `0, -1, 1, -2, 2, ...`.
    Line,
    /// Row-major quadrant lattice of the given width, L1 distance.
    Grid { width: usize },
    /// Rooted tree in BFS order, each node with `branching` children.
    Tree { branching: usize },
    /// Seeded distinct lattice points in `[0, extent)^dim`, ceiling of the
    /// Euclidean distance.
    Random { seed: u64, dim: usize, extent: i64 },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Halfline => "halfline",
            SpaceKind::Line => "line",
            SpaceKind::Grid { .. } => "grid",
            SpaceKind::Tree { .. } => "tree",
            SpaceKind::Random { .. } => "random",
        }
    }

    /// Coordinate dimension of the labels this space attaches.
    pub fn label_dim(&self) -> usize {
        match self {
            SpaceKind::Halfline | SpaceKind::Line => 1,
            SpaceKind::Grid { .. } | SpaceKind::Tree { .. } => 2,
            SpaceKind::Random { dim, .. } => *dim,
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Grid { width } => write!(f, "grid(width={width})"),
            SpaceKind::Tree { branching } => write!(f, "tree(branching={branching})"),
            SpaceKind::Random { seed, dim, extent } => {
                write!(f, "random(seed={seed}, dim={dim}, extent={extent})")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Parses the parameter-free kinds; parameterized kinds get defaults
/// (grid width 8, binary tree, random seed 0 in `[0,64)^2`).
impl FromStr for SpaceKind {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "halfline" => Ok(SpaceKind::Halfline),
            "line" => Ok(SpaceKind::Line),
            "grid" => Ok(SpaceKind::Grid { width: 8 }),
            "tree" => Ok(SpaceKind::Tree { branching: 2 }),
            "random" => Ok(SpaceKind::Random { seed: 0, dim: 2, extent: 64 }),
            other => Err(SpaceError::UnknownKind(other.into())),
        }
    }
}

fn line_coord(i: usize) -> i64 {
    let i = i as i64;
    if i % 2 == 1 {
        -(i + 1) / 2
    } else {
        i / 2
    }
}

fn tree_depth(mut i: usize, b: usize) -> usize {
    let mut depth = 0;
    while i > 0 {
        i = (i - 1) / b;
        depth += 1;
    }
    depth
}

fn tree_distance(mut i: usize, mut j: usize, b: usize) -> u64 {
    let (mut di, mut dj) = (tree_depth(i, b), tree_depth(j, b));
    let mut steps = 0u64;
    while di > dj {
        i = (i - 1) / b;
        di -= 1;
        steps += 1;
    }
    while dj > di {
        j = (j - 1) / b;
        dj -= 1;
        steps += 1;
    }
    while i != j {
        i = (i - 1) / b;
        j = (j - 1) / b;
        steps += 2;
    }
    steps
}

fn ceil_sqrt(q: u64) -> u64 {
    let s = q.isqrt();
    if s * s == q {
        s
    } else {
        s + 1
    }
}

fn random_points(seed: u64, dim: usize, extent: i64, n: usize) -> Vec<Label> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p: Label = (0..dim).map(|_| rng.random_range(0..extent)).collect();
        if seen.insert(p.clone()) {
            points.push(p);
        }
    }
    points
}

/// Builds the first `n` points of `kind`. Deterministic, and level `n` is
/// always the leading submatrix of level `m >= n`.
pub fn generate_space(kind: &SpaceKind, n: usize) -> Result<FiniteMetric, SpaceError> {
    if n == 0 {
        return Err(SpaceError::ZeroSize);
    }
    let (dist, labels): (DistMatrix, Vec<Label>) = match *kind {
        SpaceKind::Halfline => {
            (DistMatrix::from_fn(n, |i, j| Dist(i.abs_diff(j) as u64)), (0..n).map(|i| alloc::vec![i as i64]).collect())
        }
        SpaceKind::Line => (
            DistMatrix::from_fn(n, |i, j| Dist(line_coord(i).abs_diff(line_coord(j)))),
            (0..n).map(|i| alloc::vec![line_coord(i)]).collect(),
        ),
        SpaceKind::Grid { width } => {
            if width == 0 {
                return Err(SpaceError::BadParams { kind: "grid", reason: "width must be positive" });
            }
            let at = |i: usize| ((i % width) as i64, (i / width) as i64);
            (
                DistMatrix::from_fn(n, |i, j| {
                    let (a, b) = (at(i), at(j));
                    Dist(a.0.abs_diff(b.0) + a.1.abs_diff(b.1))
                }),
                (0..n).map(|i| alloc::vec![at(i).0, at(i).1]).collect(),
            )
        }
        SpaceKind::Tree { branching } => {
            if branching == 0 {
                return Err(SpaceError::BadParams { kind: "tree", reason: "branching must be positive" });
            }
            (
                DistMatrix::from_fn(n, |i, j| Dist(tree_distance(i, j, branching))),
                (0..n).map(|i| alloc::vec![tree_depth(i, branching) as i64, i as i64]).collect(),
            )
        }
        SpaceKind::Random { seed, dim, extent } => {
            if dim == 0 || extent <= 0 {
                return Err(SpaceError::BadParams { kind: "random", reason: "dim and extent must be positive" });
            }
            let capacity = (extent as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
            if capacity < n as u128 {
                return Err(SpaceError::BadParams {
                    kind: "random",
                    reason: "box holds fewer lattice points than requested",
                });
            }
            let pts = random_points(seed, dim, extent, n);
            let raw = DistMatrix::from_fn(n, |i, j| {
                let sq: u64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| a.abs_diff(*b).pow(2)).sum();
                Dist(ceil_sqrt(sq))
            });
            // Ceiling of a metric is again a metric, so the closure leaves the
            // matrix untouched and prefixes stay coherent.
            let closed = metric_closure(&raw)?;
            (closed.matrix().clone(), pts)
        }
    };
    Ok(FiniteMetric::new_unchecked(dist).with_labels(labels).expect("one label per generated point"))
}

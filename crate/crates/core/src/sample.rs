//! Seeded generators of valid bases and doubles for property checks and benches.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::dist::{Dist, DistMatrix};
use crate::double::{assemble_double, make_catalog_double, CatalogKind, DoubleMetric};
use crate::metric::{metric_closure, FiniteMetric};
use crate::space::{generate_space, SpaceKind};

/// A base on exactly `n` points: a catalog space or the closure of random weights.
pub fn random_base<R: Rng>(rng: &mut R, n: usize) -> FiniteMetric {
    let kind = match rng.random_range(0..6) {
        0 => SpaceKind::Halfline,
        1 => SpaceKind::Line,
        2 => SpaceKind::Grid { width: rng.random_range(1..=6) },
        3 => SpaceKind::Tree { branching: rng.random_range(1..=3) },
        4 => SpaceKind::Random { seed: rng.random(), dim: rng.random_range(1..=3), extent: (n as i64).max(40) },
        _ => {
            let mut w = DistMatrix::filled(n, Dist(0));
            for i in 0..n {
                for j in i + 1..n {
                    let v = Dist(rng.random_range(1..=20));
                    w.set(i, j, v);
                    w.set(j, i, v);
                }
            }
            return metric_closure(&w).expect("random weights are a valid closure input");
        }
    };
    generate_space(&kind, n).expect("catalog spaces accept any positive size")
}

/// Anchored cross block `min_r [d(i, p_r) + d(q_r, j) + lambda_r]`, optionally
/// with the diagonal anchor `d(i, j) + lambda0`. The `lambda_r` are raised
/// until the mixed clauses are guaranteed.
fn anchored<R: Rng>(rng: &mut R, base: &FiniteMetric, diagonal: Option<u64>) -> DistMatrix {
    let n = base.n();
    let count = rng.random_range(1..=4usize);
    let anchors: Vec<(usize, usize)> = (0..count).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    let mut lambdas: Vec<u64> = (0..count).map(|_| rng.random_range(1..=6)).collect();
    for r in 0..count {
        let (p, q) = anchors[r];
        let mut need = 0u64;
        for &(ps, qs) in &anchors {
            need = need.max(base.d(p, ps).0.abs_diff(base.d(q, qs).0));
        }
        if let Some(l0) = diagonal {
            need = need.max(base.d(p, q).0.saturating_sub(l0));
        }
        // lambda_r + lambda_s >= |d(p_r,p_s) - d(q_r,q_s)| holds once each is >= need.
        lambdas[r] = lambdas[r].max(need);
    }
    DistMatrix::from_fn(n, |i, j| {
        let mut best = diagonal.map(|l0| base.d(i, j).0 + l0).unwrap_or(u64::MAX);
        for (r, &(p, q)) in anchors.iter().enumerate() {
            best = best.min(base.d(i, p).0 + base.d(q, j).0 + lambdas[r]);
        }
        Dist(best)
    })
}

/// A random valid double over `base`.
pub fn random_double<R: Rng>(rng: &mut R, base: &Arc<FiniteMetric>) -> DoubleMetric {
    let n = base.n();
    let lambda = Dist(rng.random_range(1..=5));
    match rng.random_range(0..4) {
        0 => make_catalog_double(base.clone(), &CatalogKind::Lambda { lambda }),
        1 => make_catalog_double(base.clone(), &CatalogKind::Focused { point: rng.random_range(0..n), lambda }),
        2 => assemble_double(base.clone(), anchored(rng, base, None)),
        _ => {
            let l0 = rng.random_range(1..=4);
            assemble_double(base.clone(), anchored(rng, base, Some(l0)))
        }
    }
    .expect("sampled constructions are valid by construction")
}

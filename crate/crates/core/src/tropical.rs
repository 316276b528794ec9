//! Composition of doubles: the min-plus product of cross blocks.
//!
//! `(d1 d2)(x, y') = min_u [d1(x, u') + d2(u, y')]`, optionally plus a
//! constant junction penalty per product.

use alloc::boxed::Box;

use crate::dist::{Dist, DistMatrix};
use crate::double::DoubleMetric;
use crate::error::ComposeError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComposeOptions {
    /// Added once to every product (0 reproduces the plain min-plus formula).
    pub junction_penalty: Dist,
}

impl ComposeOptions {
    pub const PLAIN: ComposeOptions = ComposeOptions { junction_penalty: Dist(0) };

    pub fn with_penalty(k: u64) -> Self {
        ComposeOptions { junction_penalty: Dist(k) }
    }
}

const ROW_BLOCK: usize = 4;

/// Computes rows `i0..i0 + out.len() / n` of `a ⊗ b` into `out`.
fn minplus_rows(a: &DistMatrix, b: &DistMatrix, i0: usize, out: &mut [Dist]) {
    let n = a.n();
    let rows = out.len() / n;
    out.fill(Dist(u64::MAX));
    for u in 0..n {
        let b_row = b.row(u);
        for r in 0..rows {
            let a_iu = a.get(i0 + r, u).0;
            let o = &mut out[r * n..(r + 1) * n];
            for (o, &bj) in o.iter_mut().zip(b_row) {
                o.0 = o.0.min(a_iu + bj.0);
            }
        }
    }
}

/// Exact min-plus product of two square matrices of equal size.
///
/// Rows are processed in fixed blocks and each entry is a plain minimum, so
/// the result does not depend on how blocks are scheduled across threads.
pub fn minplus_product(a: &DistMatrix, b: &DistMatrix) -> DistMatrix {
    let n = a.n();
    assert_eq!(n, b.n(), "min-plus operands must have equal size");
    let mut out = DistMatrix::filled(n, Dist(0));
    if n == 0 {
        return out;
    }
    let block = ROW_BLOCK * n;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.as_mut_slice()
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(bi, chunk)| minplus_rows(a, b, bi * ROW_BLOCK, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (bi, chunk) in out.as_mut_slice().chunks_mut(block).enumerate() {
            minplus_rows(a, b, bi * ROW_BLOCK, chunk);
        }
    }
    out
}

fn product(d1: &DoubleMetric, d2: &DoubleMetric, opts: ComposeOptions) -> Result<DistMatrix, ComposeError> {
    if !d1.same_base(d2) {
        return Err(ComposeError::IncompatibleOperands);
    }
    let mut cross = minplus_product(d1.cross(), d2.cross());
    if opts.junction_penalty != Dist::ZERO {
        cross = cross.offset(opts.junction_penalty);
    }
    Ok(cross)
}

fn finish(base_of: &DoubleMetric, cross: DistMatrix) -> Result<DoubleMetric, ComposeError> {
    let report = crate::double::validate_double(base_of.base(), &cross);
    if !report.ok {
        return Err(ComposeError::InvalidResult(Box::new(report)));
    }
    Ok(DoubleMetric::new_unchecked(base_of.base_arc().clone(), cross))
}

/// The product `d1 d2`, fully re-validated.
pub fn compose(d1: &DoubleMetric, d2: &DoubleMetric, opts: ComposeOptions) -> Result<DoubleMetric, ComposeError> {
    let cross = product(d1, d2, opts)?;
    finish(d1, cross)
}

/// Product without the final validation pass. Products of valid doubles are
/// valid; used where the caller validates later or only needs the values.
pub fn compose_unvalidated(
    d1: &DoubleMetric,
    d2: &DoubleMetric,
    opts: ComposeOptions,
) -> Result<DoubleMetric, ComposeError> {
    let cross = product(d1, d2, opts)?;
    Ok(DoubleMetric::new_unchecked(d1.base_arc().clone(), cross))
}

/// Left fold `((d1 d2) d3) ...`; the final result is validated.
pub fn compose_chain(items: &[&DoubleMetric], opts: ComposeOptions) -> Result<DoubleMetric, ComposeError> {
    if items.len() < 2 {
        return Err(ComposeError::ChainTooShort { needed: 2, found: items.len() });
    }
    let mut acc = compose_unvalidated(items[0], items[1], opts)?;
    for d in &items[2..] {
        acc = compose_unvalidated(&acc, d, opts)?;
    }
    finish(items[0], acc.cross().clone())
}

/// Timing and checksum of one `n x n` min-plus product.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchReport {
    pub n: usize,
    pub threads: usize,
    pub seed: u64,
    pub elapsed_ns: u64,
    /// Wall time divided by `n^3` inner operations.
    pub ns_per_op: f64,
    /// Wrapping sum of every entry of the product.
    pub checksum: u64,
}

pub fn bench_operands(n: usize, seed: u64) -> (DistMatrix, DistMatrix) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: usize, _: usize| Dist(rng.random_range(1..=1u64 << 20));
    let a = DistMatrix::from_fn(n, &mut draw);
    let b = DistMatrix::from_fn(n, &mut draw);
    (a, b)
}

pub fn checksum(m: &DistMatrix) -> u64 {
    m.as_slice().iter().fold(0u64, |acc, d| acc.wrapping_add(d.0))
}

/// Runs one seeded `n x n` product on a pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn bench_minplus(n: usize, threads: usize, seed: u64) -> Result<BenchReport, rayon::ThreadPoolBuildError> {
    assert!(n <= 4096, "bench size capped at 4096");
    let (a, b) = bench_operands(n, seed);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let start = std::time::Instant::now();
    let out = pool.install(|| minplus_product(&a, &b));
    let elapsed_ns = start.elapsed().as_nanos() as u64;
    let ops = (n as f64).powi(3).max(1.0);
    Ok(BenchReport {
        n,
        threads: threads.max(1),
        seed,
        elapsed_ns,
        ns_per_op: elapsed_ns as f64 / ops,
        checksum: checksum(&out),
    })
}

/// Reference triple loop, used to cross-check the blocked kernel.
pub fn minplus_naive(a: &DistMatrix, b: &DistMatrix) -> DistMatrix {
    let n = a.n();
    DistMatrix::from_fn(n, |i, j| (0..n).map(|u| a.get(i, u) + b.get(u, j)).min().unwrap_or(Dist(u64::MAX)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double::{assemble_double, make_catalog_double, CatalogKind};
    use crate::metric::FiniteMetric;
    use crate::space::{generate_space, SpaceKind};
    use alloc::sync::Arc;

    #[test]
    fn single_point_infimum() {
        let base = Arc::new(FiniteMetric::from_rows(&[[0u64]]).unwrap());
        let d1 = assemble_double(base.clone(), DistMatrix::from_rows(&[[2u64]]).unwrap()).unwrap();
        let d2 = assemble_double(base, DistMatrix::from_rows(&[[3u64]]).unwrap()).unwrap();
        assert_eq!(compose(&d1, &d2, ComposeOptions::PLAIN).unwrap().cross().get(0, 0), Dist(5));
    }

    #[test]
    fn two_point_exhaustive() {
        // min over u of cross1[i][u] + cross2[u][j]: row 0 -> min(1+2, 3+2) = 3,
        // row 1 -> min(3+2, 1+2) = 3.
        let base = Arc::new(FiniteMetric::from_rows(&[[0u64, 2], [2, 0]]).unwrap());
        let d1 = assemble_double(base.clone(), DistMatrix::from_rows(&[[1u64, 3], [3, 1]]).unwrap()).unwrap();
        let d2 = assemble_double(base, DistMatrix::from_rows(&[[2u64, 2], [2, 2]]).unwrap()).unwrap();
        let c = compose(&d1, &d2, ComposeOptions::PLAIN).unwrap();
        assert_eq!(c.cross(), &DistMatrix::from_rows(&[[3u64, 3], [3, 3]]).unwrap());
    }

    #[test]
    fn penalty_added_once_per_product() {
        let base = generate_space(&SpaceKind::Halfline, 6).unwrap();
        let e = make_catalog_double(base, &CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
        let plain = compose(&e, &e, ComposeOptions::PLAIN).unwrap();
        let pen = compose(&e, &e, ComposeOptions::with_penalty(1)).unwrap();
        assert_eq!(pen.cross(), &plain.cross().offset(Dist(1)));
        let chain = compose_chain(&[&e, &e, &e], ComposeOptions::with_penalty(1)).unwrap();
        assert_eq!(chain.cross(), &e.cross().offset(Dist(4)));
    }

    #[test]
    fn mismatched_bases_rejected() {
        let a = make_catalog_double(
            generate_space(&SpaceKind::Halfline, 4).unwrap(),
            &CatalogKind::Lambda { lambda: Dist(1) },
        )
        .unwrap();
        let b =
            make_catalog_double(generate_space(&SpaceKind::Line, 4).unwrap(), &CatalogKind::Lambda { lambda: Dist(1) })
                .unwrap();
        assert_eq!(compose(&a, &b, ComposeOptions::PLAIN), Err(ComposeError::IncompatibleOperands));
        assert_eq!(
            compose_chain(&[&a], ComposeOptions::PLAIN),
            Err(ComposeError::ChainTooShort { needed: 2, found: 1 })
        );
    }

    #[test]
    fn chain_of_two_is_compose() {
        let base = Arc::new(generate_space(&SpaceKind::Grid { width: 3 }, 9).unwrap());
        let a = make_catalog_double(base.clone(), &CatalogKind::Focused { point: 4, lambda: Dist(2) }).unwrap();
        let b = make_catalog_double(base, &CatalogKind::Lambda { lambda: Dist(3) }).unwrap();
        let opts = ComposeOptions::PLAIN;
        assert_eq!(compose_chain(&[&a, &b], opts).unwrap(), compose(&a, &b, opts).unwrap());
    }

    #[test]
    fn blocked_kernel_matches_naive() {
        for n in [0usize, 1, 3, 4, 5, 17, 33] {
            let (a, b) = bench_operands(n, n as u64);
            assert_eq!(minplus_product(&a, &b), minplus_naive(&a, &b), "n={n}");
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn bench_single_point_checksum() {
        let (a, b) = bench_operands(1, 42);
        let r = bench_minplus(1, 1, 42).unwrap();
        assert_eq!(r.checksum, a.get(0, 0).0 + b.get(0, 0).0);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn bench_checksum_independent_of_threads() {
        let one = bench_minplus(96, 1, 5).unwrap();
        let four = bench_minplus(96, 4, 5).unwrap();
        assert_eq!(one.checksum, four.checksum);
    }
}

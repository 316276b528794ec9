//! Integer piecewise-linear homeomorphisms of `[0, ∞)` with exact evaluation.

use alloc::vec::Vec;

use crate::dist::Dist;

/// Strictly increasing piecewise-linear map through integer breakpoints,
/// starting at `(0, 0)` and continued past the last breakpoint with slope
/// `tail_slope.0 / tail_slope.1`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Homeomorphism {
    pub breakpoints: Vec<(Dist, Dist)>,
    pub tail_slope: (u64, u64),
}

/// `phi(t)` as the exact fraction `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac {
    num: u128,
    den: u128,
}

impl Homeomorphism {
    pub fn identity() -> Self {
        Homeomorphism { breakpoints: alloc::vec![(Dist(0), Dist(0))], tail_slope: (1, 1) }
    }

    /// Builds from breakpoints after `(0, 0)`, dropping collinear interior
    /// points. Panics unless both coordinates strictly increase.
    pub fn from_points(points: impl IntoIterator<Item = (Dist, Dist)>, tail_slope: (u64, u64)) -> Self {
        assert!(tail_slope.0 > 0 && tail_slope.1 > 0, "tail slope must be positive");
        let mut pts: Vec<(Dist, Dist)> = alloc::vec![(Dist(0), Dist(0))];
        for p in points {
            let last = *pts.last().expect("nonempty");
            assert!(p.0 > last.0 && p.1 > last.1, "breakpoints must strictly increase");
            pts.push(p);
        }
        let mut out: Vec<(Dist, Dist)> = Vec::with_capacity(pts.len());
        for p in pts {
            out.push(p);
            // Drop the previous point when it lies on the segment from its
            // predecessor to `p`.
            while out.len() >= 3 {
                let (a, b, c) = (out[out.len() - 3], out[out.len() - 2], out[out.len() - 1]);
                if collinear(a, b, c) {
                    out.remove(out.len() - 2);
                } else {
                    break;
                }
            }
        }
        // The last breakpoint is redundant when the tail continues its slope.
        while out.len() >= 2 {
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            let (dt, dv) = ((b.0 .0 - a.0 .0) as u128, (b.1 .0 - a.1 .0) as u128);
            if dv * tail_slope.1 as u128 == dt * tail_slope.0 as u128 {
                out.pop();
            } else {
                break;
            }
        }
        Homeomorphism { breakpoints: out, tail_slope }
    }

    pub fn is_identity(&self) -> bool {
        self.breakpoints == [(Dist(0), Dist(0))] && self.tail_slope.0 == self.tail_slope.1
    }

    fn eval(&self, t: Dist) -> Frac {
        let bp = &self.breakpoints;
        let idx = bp.partition_point(|p| p.0 <= t);
        let (t1, v1) = bp[idx - 1];
        let dt = (t.0 - t1.0) as u128;
        if idx == bp.len() {
            let (num, den) = (self.tail_slope.0 as u128, self.tail_slope.1 as u128);
            return Frac { num: v1.0 as u128 * den + num * dt, den };
        }
        let (t2, v2) = bp[idx];
        let span = (t2.0 - t1.0) as u128;
        Frac { num: v1.0 as u128 * span + (v2.0 - v1.0) as u128 * dt, den: span }
    }

    /// `g <= phi(t)`, exactly.
    pub fn bounds(&self, t: Dist, g: Dist) -> bool {
        let f = self.eval(t);
        g.0 as u128 * f.den <= f.num
    }

    /// `phi(t) <= f`, exactly.
    pub fn bounded_by(&self, t: Dist, f: Dist) -> bool {
        let v = self.eval(t);
        v.num <= f.0 as u128 * v.den
    }

    /// `phi(t) < f`, exactly.
    pub fn strictly_below(&self, t: Dist, f: Dist) -> bool {
        let v = self.eval(t);
        v.num < f.0 as u128 * v.den
    }

    /// `floor(phi(t))`.
    pub fn floor_at(&self, t: Dist) -> u64 {
        let v = self.eval(t);
        (v.num / v.den) as u64
    }

    /// `ceil(phi(t))`.
    pub fn ceil_at(&self, t: Dist) -> u64 {
        let v = self.eval(t);
        v.num.div_ceil(v.den) as u64
    }
}

fn collinear(a: (Dist, Dist), b: (Dist, Dist), c: (Dist, Dist)) -> bool {
    let (dt1, dv1) = ((b.0 .0 - a.0 .0) as u128, (b.1 .0 - a.1 .0) as u128);
    let (dt2, dv2) = ((c.0 .0 - b.0 .0) as u128, (c.1 .0 - b.1 .0) as u128);
    dv1 * dt2 == dv2 * dt1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(u64, u64)]) -> Vec<(Dist, Dist)> {
        v.iter().map(|&(a, b)| (Dist(a), Dist(b))).collect()
    }

    #[test]
    fn staircase_of_identity_collapses() {
        let h = Homeomorphism::from_points(pts(&[(1, 1), (2, 2), (5, 5)]), (1, 1));
        assert!(h.is_identity());
        assert_eq!(h.floor_at(Dist(37)), 37);
    }

    #[test]
    fn shift_by_seven() {
        let h = Homeomorphism::from_points(pts(&[(1, 8), (2, 9), (3, 10)]), (1, 1));
        assert_eq!(h.breakpoints, pts(&[(0, 0), (1, 8)]));
        assert!(h.bounds(Dist(10), Dist(17)));
        assert!(!h.bounds(Dist(10), Dist(18)));
    }

    #[test]
    fn fractional_interpolation() {
        let h = Homeomorphism::from_points(pts(&[(3, 1), (4, 5)]), (1, 1));
        // phi(1) = 1/3, phi(2) = 2/3.
        assert!(h.strictly_below(Dist(2), Dist(1)));
        assert!(!h.bounded_by(Dist(2), Dist(0)));
        assert_eq!((h.floor_at(Dist(2)), h.ceil_at(Dist(2))), (0, 1));
        assert_eq!(h.floor_at(Dist(4)), 5);
        assert_eq!(h.floor_at(Dist(9)), 10);
    }

    #[test]
    fn rational_tail() {
        let h = Homeomorphism::from_points(pts(&[(2, 2)]), (3, 2));
        assert_eq!(h.floor_at(Dist(4)), 5);
        assert!(h.bounds(Dist(4), Dist(5)));
        assert!(!h.bounds(Dist(4), Dist(6)));
    }

    #[test]
    #[should_panic(expected = "strictly increase")]
    fn rejects_flat_breakpoints() {
        Homeomorphism::from_points(pts(&[(1, 1), (2, 1)]), (1, 1));
    }
}

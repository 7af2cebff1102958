//! Rate-distortion curves and the lower convex envelope.

use crate::error::{RdError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub d: f64,
    /// bits per source symbol
    pub rate: f64,
}

impl RdPoint {
    pub fn new(d: f64, rate: f64) -> Self {
        Self { d, rate }
    }
}

/// Points sorted by distortion.
///
/// Distortions are nondecreasing; they are strictly increasing except on
/// degenerate channels with `D_max = 0`, where every sample sits at `d = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    points: Vec<RdPoint>,
    convex: bool,
}

/// Second-difference slack tolerated by [`RdCurve::is_convex`].
pub const CONVEXITY_TOL: f64 = 1e-9;

impl RdCurve {
    pub fn new(points: Vec<RdPoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].d >= w[0].d) {
                return Err(RdError::InvalidArgument(format!(
                    "curve distortions not sorted: {} then {}",
                    w[0].d, w[1].d
                )));
            }
        }
        if let Some(p) = points.iter().find(|p| !(p.rate >= 0.0) || !p.d.is_finite()) {
            return Err(RdError::InvalidArgument(format!(
                "invalid curve point (d = {}, rate = {})",
                p.d, p.rate
            )));
        }
        let convex = convexity_slack(&points) >= -CONVEXITY_TOL;
        Ok(Self { points, convex })
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether all second differences were `>= -1e-9` at construction.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].rate <= w[0].rate + tol)
    }

    pub fn first(&self) -> Option<RdPoint> {
        self.points.first().copied()
    }

    pub fn last(&self) -> Option<RdPoint> {
        self.points.last().copied()
    }

    /// Piecewise-linear interpolation; clamps outside the sampled range.
    pub fn interpolate(&self, d: f64) -> Option<f64> {
        interpolate(&self.points, d)
    }
}

/// Smallest normalized second difference (slope increment) over consecutive
/// triples. Nonnegative for convex curves; `+inf` with fewer than 3 points.
pub fn convexity_slack(points: &[RdPoint]) -> f64 {
    let mut slack = f64::INFINITY;
    for w in points.windows(3) {
        let (h0, h1) = (w[1].d - w[0].d, w[2].d - w[1].d);
        if h0 <= 0.0 || h1 <= 0.0 {
            continue;
        }
        let s0 = (w[1].rate - w[0].rate) / h0;
        let s1 = (w[2].rate - w[1].rate) / h1;
        slack = slack.min(s1 - s0);
    }
    slack
}

/// Lower convex hull of a point set (Andrew's monotone chain, lower half).
///
/// Input need not be sorted. At equal `d` only the lowest rate survives.
/// Collinear interior points are dropped.
pub fn lower_convex_hull(points: &[RdPoint]) -> Vec<RdPoint> {
    let mut sorted: Vec<RdPoint> = points.to_vec();
    sorted.sort_by(|l, r| l.d.total_cmp(&r.d).then(l.rate.total_cmp(&r.rate)));
    sorted.dedup_by(|next, kept| next.d == kept.d);

    let mut hull: Vec<RdPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let m = hull[hull.len() - 1];
            let cross = (m.d - o.d) * (p.rate - o.rate) - (m.rate - o.rate) * (p.d - o.d);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Lower hull truncated after its minimum-rate vertex, so the result is
/// convex and nonincreasing.
pub fn decreasing_hull(points: &[RdPoint]) -> Vec<RdPoint> {
    let mut hull = lower_convex_hull(points);
    if let Some(min_at) = hull
        .iter()
        .enumerate()
        .min_by(|l, r| l.1.rate.total_cmp(&r.1.rate).then(r.0.cmp(&l.0)))
        .map(|(i, _)| i)
    {
        hull.truncate(min_at + 1);
    }
    hull
}

/// Linear interpolation over sorted vertices, clamped at both ends.
pub fn interpolate(vertices: &[RdPoint], d: f64) -> Option<f64> {
    let first = vertices.first()?;
    let last = vertices.last()?;
    if d <= first.d {
        return Some(first.rate);
    }
    if d >= last.d {
        return Some(last.rate);
    }
    let k = vertices.partition_point(|p| p.d <= d);
    let (l, r) = (vertices[k - 1], vertices[k]);
    if r.d == l.d {
        return Some(l.rate.min(r.rate));
    }
    let w = (d - l.d) / (r.d - l.d);
    Some(l.rate + w * (r.rate - l.rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<RdPoint> {
        v.iter().map(|&(d, r)| RdPoint::new(d, r)).collect()
    }

    #[test]
    fn hull_drops_points_above_chord() {
        let h = lower_convex_hull(&pts(&[(0.0, 1.0), (0.5, 0.8), (1.0, 0.0), (0.25, 0.4)]));
        assert_eq!(h, pts(&[(0.0, 1.0), (0.25, 0.4), (1.0, 0.0)]));
    }

    #[test]
    fn hull_keeps_lowest_at_equal_d() {
        let h = lower_convex_hull(&pts(&[(0.0, 1.0), (0.0, 0.5), (1.0, 0.0)]));
        assert_eq!(h, pts(&[(0.0, 0.5), (1.0, 0.0)]));
    }

    #[test]
    fn decreasing_hull_cuts_rising_tail() {
        let h = decreasing_hull(&pts(&[(0.0, 1.0), (0.5, 0.0), (1.0, 0.3)]));
        assert_eq!(h, pts(&[(0.0, 1.0), (0.5, 0.0)]));
    }

    #[test]
    fn curve_rejects_unsorted_and_negative() {
        assert!(RdCurve::new(pts(&[(0.2, 0.0), (0.1, 0.0)])).is_err());
        assert!(RdCurve::new(pts(&[(0.0, -0.1)])).is_err());
        let c = RdCurve::new(pts(&[(0.0, 1.0), (0.5, 0.25), (1.0, 0.0)])).unwrap();
        assert!(c.is_convex());
        assert_eq!(c.interpolate(0.25), Some(0.625));
        assert_eq!(c.interpolate(2.0), Some(0.0));
    }

    proptest! {
        #[test]
        fn hull_is_convex_and_below_every_input(
            raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..60)
        ) {
            let input = pts(&raw);
            let hull = lower_convex_hull(&input);
            prop_assert!(convexity_slack(&hull) >= -1e-12);
            for p in &input {
                let v = interpolate(&hull, p.d).unwrap();
                prop_assert!(v <= p.rate + 1e-12, "hull {} above point {:?}", v, p);
            }
            // every vertex is an input point
            for v in &hull {
                prop_assert!(input.iter().any(|p| p == v));
            }
        }
    }
}

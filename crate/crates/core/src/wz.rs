//! Wyner-Ziv rate and distortion over a binary auxiliary channel, and the
//! bound obtained by minimizing the rate per distortion level and taking the
//! lower convex envelope.
//!
//! For a canonical correlation channel (`a <= b`, `a + b <= 1`) and a
//! canonical auxiliary channel (`p + q <= 1`) the argmax decoder is fixed on
//! the cells `(y, u) = (0, 0)` and `(1, 1)`. The remaining two cells are
//! decided by the signs of `b(1-q) - (1-a)p` and `a(1-p) - (1-b)q`, which
//! split the `(p, q)` triangle into four regions. In each region the
//! distortion is affine in `(p, q)`, so the level set `D = d` is a segment.

use rayon::prelude::*;

use crate::channel::{invert_channel, AuxChannel, CorrelationChannel};
use crate::curve::{interpolate, lower_convex_hull, RdCurve, RdPoint};
use crate::error::{RdError, Result};
use crate::predictive::distortion_grid;
use crate::prob::{h2, PROB_TOL};
use crate::rule::ReconstructionRule;
use crate::search::scan_then_golden;

/// Samples in the coarse scan along each constraint segment.
pub const SEGMENT_SCAN_POINTS: usize = 256;
/// Golden-section bracket width, in segment arc length.
pub const SEGMENT_XTOL: f64 = 1e-10;
/// Default number of distortion samples for [`wz_bound`].
pub const DEFAULT_GRID: usize = 512;
/// Minimum chord excess for a hull edge to count as a time-sharing segment.
pub const TANGENT_EXCESS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    I,
    II,
    III,
    IV,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::I, Region::II, Region::III, Region::IV];

    pub fn rule(self) -> ReconstructionRule {
        match self {
            Region::I => ReconstructionRule::HatU,
            Region::II => ReconstructionRule::HatOr,
            Region::III => ReconstructionRule::HatAnd,
            Region::IV => ReconstructionRule::HatY,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
        }
    }

    /// Regional closed form `D_1 .. D_4`; valid inside the region.
    pub fn distortion_form(self, ch: &CorrelationChannel, aux: &AuxChannel) -> f64 {
        let (a, b, p, q) = (ch.a(), ch.b(), aux.p(), aux.q());
        match self {
            Region::I => 0.5 * (p + q),
            Region::II => 0.5 * (b * q + (1.0 - a) * p + a),
            Region::III => 0.5 * ((1.0 - b) * q + a * p + b),
            Region::IV => 0.5 * (a + b),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionClassification {
    pub region: Region,
    pub rule: ReconstructionRule,
    /// The region's distortion form evaluated at the classified point.
    pub distortion: f64,
}

impl RegionClassification {
    fn new(region: Region, ch: &CorrelationChannel, aux: &AuxChannel) -> Self {
        Self {
            region,
            rule: region.rule(),
            distortion: region.distortion_form(ch, aux),
        }
    }
}

/// Classifies `(p, q)` by the decisions on cells `(0, 1)` and `(1, 0)`.
/// Ties resolve to `x̂ = 0`. Meaningful for canonical `(a, b)`.
pub fn classify_region(ch: &CorrelationChannel, aux: &AuxChannel) -> RegionClassification {
    let (a, b, p, q) = (ch.a(), ch.b(), aux.p(), aux.q());
    let one_at_y0_u1 = b * (1.0 - q) > (1.0 - a) * p;
    let one_at_y1_u0 = (1.0 - b) * q > a * (1.0 - p);
    let region = match (one_at_y0_u1, one_at_y1_u0) {
        (true, false) => Region::I,
        (true, true) => Region::II,
        (false, false) => Region::III,
        (false, true) => Region::IV,
    };
    RegionClassification::new(region, ch, aux)
}

#[inline]
fn rate_unchecked(a: f64, b: f64, p: f64, q: f64) -> f64 {
    let den0 = 1.0 - a + b;
    let den1 = a + 1.0 - b;
    0.5 * den0 * h2(((1.0 - a) * (1.0 - p) + b * q) / den0)
        + 0.5 * den1 * h2((a * (1.0 - p) + (1.0 - b) * q) / den1)
        - 0.5 * (h2(p) + h2(q))
}

/// `I(X; U | Y)` in bits for the binary test channel `(p, q)`.
pub fn wz_rate(ch: &CorrelationChannel, aux: &AuxChannel) -> Result<f64> {
    invert_channel(ch)?;
    let r = rate_unchecked(ch.a(), ch.b(), aux.p(), aux.q());
    if r < -PROB_TOL {
        return Err(RdError::Numerical(format!(
            "negative conditional information {r}"
        )));
    }
    Ok(r.max(0.0))
}

/// Distortion of the argmax decoder, `Σ_{y,u} min(p(0,y,u), p(1,y,u))`, with
/// the region classification of `(p, q)`.
///
/// In the canonical domain the `(0, 0)` and `(1, 1)` minima are `bq/2` and
/// `ap/2` and this is the four-case expression; outside it the full
/// four-cell sum is used, which keeps the value label-swap invariant.
pub fn wz_distortion(ch: &CorrelationChannel, aux: &AuxChannel) -> (f64, RegionClassification) {
    let (a, b, p, q) = (ch.a(), ch.b(), aux.p(), aux.q());
    let d = 0.5
        * (((1.0 - a) * (1.0 - p)).min(b * q)
            + ((1.0 - a) * p).min(b * (1.0 - q))
            + (a * (1.0 - p)).min((1.0 - b) * q)
            + (a * p).min((1.0 - b) * (1.0 - q)));
    (d, classify_region(ch, aux))
}

/// Distortion levels at which the feasible decoders change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Below `t1 = a / (2(1-b))` only `x̂ = u` reaches `d`.
    pub t1: f64,
    /// From `t2 = b / (2(1-a))` on, `x̂ = y ∧ u` is feasible too.
    pub t2: f64,
    pub d_max: f64,
}

impl Thresholds {
    /// Regions able to reach distortion exactly `d` (excluding the constant
    /// region IV).
    pub fn feasible_regions(&self, d: f64) -> Vec<Region> {
        let mut regions = vec![Region::I];
        if d >= self.t1 {
            regions.push(Region::II);
        }
        if d >= self.t2 {
            regions.push(Region::III);
        }
        regions
    }
}

pub fn region_thresholds(ch: &CorrelationChannel) -> Result<Thresholds> {
    ch.ensure_canonical()?;
    let (a, b) = (ch.a(), ch.b());
    if a >= 1.0 || b >= 1.0 {
        return Err(RdError::DegenerateChannel { a, b });
    }
    Ok(Thresholds {
        t1: a / (2.0 * (1.0 - b)),
        t2: b / (2.0 * (1.0 - a)),
        d_max: ch.d_max(),
    })
}

/// Half-plane `cp·p + cq·q + c0 >= 0`.
#[derive(Debug, Clone, Copy)]
struct HalfPlane(f64, f64, f64);

impl HalfPlane {
    fn negate(self) -> Self {
        HalfPlane(-self.0, -self.1, -self.2)
    }
}

/// Segment of the line `alpha·p + beta·q = gamma` inside a polygon, as
/// `origin + t·dir` for `t` in `[lo, hi]`, with `dir` a unit vector.
#[derive(Debug, Clone, Copy)]
struct Segment {
    origin: (f64, f64),
    dir: (f64, f64),
    lo: f64,
    hi: f64,
}

impl Segment {
    /// `eps` widens each half-plane; pairs with `planes`.
    fn clip(alpha: f64, beta: f64, gamma: f64, planes: &[(HalfPlane, f64)]) -> Option<Self> {
        let norm2 = alpha * alpha + beta * beta;
        if norm2 == 0.0 {
            return None;
        }
        let origin = (gamma * alpha / norm2, gamma * beta / norm2);
        let norm = norm2.sqrt();
        let dir = (beta / norm, -alpha / norm);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for &(HalfPlane(cp, cq, c0), eps) in planes {
            let slope = cp * dir.0 + cq * dir.1;
            let value = cp * origin.0 + cq * origin.1 + c0;
            if slope.abs() < 1e-15 {
                if value < -eps {
                    return None;
                }
            } else if slope > 0.0 {
                lo = lo.max((-eps - value) / slope);
            } else {
                hi = hi.min((-eps - value) / slope);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || lo > hi + 1e-12 {
            return None;
        }
        let hi = hi.max(lo);
        Some(Self {
            origin,
            dir,
            lo,
            hi,
        })
    }

    #[inline]
    fn at(&self, t: f64) -> (f64, f64) {
        (
            (self.origin.0 + t * self.dir.0).clamp(0.0, 1.0),
            (self.origin.1 + t * self.dir.1).clamp(0.0, 1.0),
        )
    }
}

fn region_segment(a: f64, b: f64, d: f64, region: Region) -> Option<Segment> {
    // (1-a)p <= b(1-q): decoder outputs 1 at (y, u) = (0, 1)
    let g1 = HalfPlane(-(1.0 - a), -b, b);
    // a(1-p) >= (1-b)q: decoder outputs 0 at (y, u) = (1, 0)
    let g2 = HalfPlane(-a, -(1.0 - b), a);
    let domain = [
        HalfPlane(1.0, 0.0, 0.0),
        HalfPlane(0.0, 1.0, 0.0),
        HalfPlane(-1.0, -1.0, 1.0),
    ];
    let (line, sides) = match region {
        Region::I => ((1.0, 1.0, 2.0 * d), [g1, g2]),
        Region::II => ((1.0 - a, b, 2.0 * d - a), [g1, g2.negate()]),
        Region::III => ((a, 1.0 - b, 2.0 * d - b), [g1.negate(), g2]),
        Region::IV => return None,
    };
    // Region sides are closed up to rounding; the probability simplex is exact
    // because the entropy terms are steep at its edges.
    const SIDE_EPS: f64 = 1e-13;
    let planes = [
        (domain[0], 0.0),
        (domain[1], 0.0),
        (domain[2], 0.0),
        (sides[0], SIDE_EPS),
        (sides[1], SIDE_EPS),
    ];
    Segment::clip(line.0, line.1, line.2, &planes)
}

/// Minimizer of the binary Wyner-Ziv rate at one distortion level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WzOptimum {
    pub d: f64,
    pub rate: f64,
    pub aux: AuxChannel,
    pub classification: RegionClassification,
}

/// Minimizes `wz_rate` over canonical `(p, q)` subject to the regional
/// distortion form being equal to `d`, across regions I to III. At `d = D_max`
/// region IV (rate 0 with `x̂ = y`) is a candidate too.
pub fn min_rate_at_distortion(ch: &CorrelationChannel, d: f64) -> Result<WzOptimum> {
    ch.ensure_canonical()?;
    invert_channel(ch)?;
    let d_max = ch.d_max();
    if !(d.is_finite() && d >= -PROB_TOL && d <= d_max + PROB_TOL) {
        return Err(RdError::DistortionOutOfRange { d, d_max });
    }
    let d = d.clamp(0.0, d_max);
    let (a, b) = (ch.a(), ch.b());

    let mut best: Option<(f64, (f64, f64), Region)> = None;
    for region in [Region::I, Region::II, Region::III] {
        let Some(seg) = region_segment(a, b, d, region) else {
            continue;
        };
        let f = |t: f64| {
            let (p, q) = seg.at(t);
            rate_unchecked(a, b, p, q)
        };
        let (t, rate) = scan_then_golden(f, seg.lo, seg.hi, SEGMENT_SCAN_POINTS, SEGMENT_XTOL);
        // near-ties go to the earlier region so the trajectory stays continuous
        if best.is_none_or(|(r, _, _)| rate < r - PROB_TOL) {
            best = Some((rate, seg.at(t), region));
        }
    }
    if d >= d_max && best.is_none_or(|(r, _, _)| r > PROB_TOL) {
        best = Some((0.0, (0.5, 0.5), Region::IV));
    }
    let (rate, (p, q), region) = best.ok_or_else(|| {
        RdError::Numerical(format!(
            "no region reaches distortion {d} for (a, b) = ({a}, {b})"
        ))
    })?;
    if rate < -PROB_TOL {
        return Err(RdError::Numerical(format!(
            "negative rate {rate} at d = {d}"
        )));
    }
    let aux = AuxChannel::from_arith(p, q)?;
    Ok(WzOptimum {
        d,
        rate: rate.max(0.0),
        aux,
        classification: RegionClassification::new(region, ch, &aux),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub d: f64,
    pub p: f64,
    pub q: f64,
    pub region: Region,
}

/// A hull edge bridging star-curve points that lie strictly above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeShare {
    pub start: RdPoint,
    pub end: RdPoint,
}

impl TimeShare {
    pub fn width(&self) -> f64 {
        self.end.d - self.start.d
    }

    pub fn contains_strictly(&self, d: f64) -> bool {
        d > self.start.d && d < self.end.d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WzBound {
    /// `R*_WZ(d)` on the distortion grid.
    pub star_curve: RdCurve,
    /// Lower convex envelope of `star_curve` and `(D_max, 0)`, sampled on the
    /// same grid.
    pub envelope: RdCurve,
    /// Widest time-sharing segment, if any.
    pub time_share: Option<TimeShare>,
    /// All time-sharing segments in increasing `d`.
    pub tangents: Vec<TimeShare>,
    /// Minimizer per grid point.
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Computes the binary Wyner-Ziv bound on `n_points` evenly spaced
/// distortions in `[0, D_max]`.
pub fn wz_bound(ch: &CorrelationChannel, n_points: usize) -> Result<WzBound> {
    if n_points < 16 {
        return Err(RdError::InvalidArgument(format!(
            "wz_bound needs at least 16 grid points, got {n_points}"
        )));
    }
    ch.ensure_canonical()?;
    let d_max = ch.d_max();
    let grid = distortion_grid(d_max, n_points);
    let optima: Vec<WzOptimum> = grid
        .par_iter()
        .map(|&d| min_rate_at_distortion(ch, d))
        .collect::<Result<_>>()?;

    let star: Vec<RdPoint> = optima.iter().map(|o| RdPoint::new(o.d, o.rate)).collect();
    let mut with_anchor = star.clone();
    with_anchor.push(RdPoint::new(d_max, 0.0));
    let hull = lower_convex_hull(&with_anchor);

    let envelope: Vec<RdPoint> = grid
        .iter()
        .map(|&d| RdPoint::new(d, interpolate(&hull, d).unwrap_or(0.0).max(0.0)))
        .collect();

    let mut tangents = Vec::new();
    for edge in hull.windows(2) {
        let (l, r) = (edge[0], edge[1]);
        let inner: Vec<&RdPoint> = star.iter().filter(|p| p.d > l.d && p.d < r.d).collect();
        if inner.is_empty() {
            continue;
        }
        let excess = inner
            .iter()
            .map(|p| p.rate - (l.rate + (p.d - l.d) / (r.d - l.d) * (r.rate - l.rate)))
            .fold(f64::NEG_INFINITY, f64::max);
        if excess > TANGENT_EXCESS {
            tangents.push(TimeShare { start: l, end: r });
        }
    }
    let time_share = tangents
        .iter()
        .copied()
        .max_by(|x, y| x.width().total_cmp(&y.width()));

    let trajectory = optima
        .iter()
        .map(|o| TrajectoryPoint {
            d: o.d,
            p: o.aux.p(),
            q: o.aux.q(),
            region: o.classification.region,
        })
        .collect();

    Ok(WzBound {
        star_curve: RdCurve::new(star)?,
        envelope: RdCurve::new(envelope)?,
        time_share,
        tangents,
        trajectory,
    })
}

/// Where the optimal region changes along increasing `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSwitch {
    pub before: TrajectoryPoint,
    pub after: TrajectoryPoint,
}

impl RegionSwitch {
    /// `max(|Δp|, |Δq|)` across the switch.
    pub fn jump(&self) -> f64 {
        (self.after.p - self.before.p)
            .abs()
            .max((self.after.q - self.before.q).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PqTrajectory {
    /// Optimal `(p, q)` at grid points outside every time-sharing segment.
    pub points: Vec<TrajectoryPoint>,
    pub time_share: Option<TimeShare>,
    /// First change of region along increasing `d`.
    pub switch: Option<RegionSwitch>,
}

impl WzBound {
    pub fn pq_trajectory(&self) -> PqTrajectory {
        let points: Vec<TrajectoryPoint> = self
            .trajectory
            .iter()
            .copied()
            .filter(|t| !self.tangents.iter().any(|ts| ts.contains_strictly(t.d)))
            .collect();
        let switch = points
            .windows(2)
            .find(|w| w[0].region != w[1].region)
            .map(|w| RegionSwitch {
                before: w[0],
                after: w[1],
            });
        PqTrajectory {
            points,
            time_share: self.time_share,
            switch,
        }
    }
}

pub fn optimal_pq_trajectory(ch: &CorrelationChannel, n_points: usize) -> Result<PqTrajectory> {
    Ok(wz_bound(ch, n_points)?.pq_trajectory())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::joint_pxyu;
    use crate::predictive::predictive_rate;
    use approx::assert_abs_diff_eq;

    fn ch(a: f64, b: f64) -> CorrelationChannel {
        CorrelationChannel::new(a, b).unwrap()
    }

    fn aux(p: f64, q: f64) -> AuxChannel {
        AuxChannel::new(p, q).unwrap()
    }

    #[test]
    fn rate_limits() {
        let c = ch(0.1, 0.4);
        assert_abs_diff_eq!(wz_rate(&c, &aux(0.5, 0.5)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            wz_rate(&c, &aux(0.0, 0.0)).unwrap(),
            predictive_rate(&c, 0.0).unwrap(),
            epsilon = 1e-15
        );
        // 30-digit mpmath evaluation of the rate display
        assert_abs_diff_eq!(
            wz_rate(&c, &aux(0.1, 0.1)).unwrap(),
            0.398_243_730_387_332_1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn classification_examples() {
        let c = ch(0.1, 0.4);
        let r = classify_region(&c, &aux(0.05, 0.05));
        assert_eq!((r.region, r.rule), (Region::I, ReconstructionRule::HatU));
        assert_abs_diff_eq!(r.distortion, 0.05, epsilon = 1e-15);

        let r = classify_region(&c, &aux(0.5, 0.5));
        assert_eq!((r.region, r.rule), (Region::IV, ReconstructionRule::HatY));
        assert_abs_diff_eq!(r.distortion, 0.25, epsilon = 1e-15);

        assert_eq!(classify_region(&c, &aux(0.0, 0.0)).region, Region::I);
        // a = 0 gives a tie on the (1, 0) cell, resolved to x̂ = 0
        assert_eq!(
            classify_region(&ch(0.0, 0.3), &aux(0.0, 0.0)).region,
            Region::I
        );
    }

    #[test]
    fn distortion_examples() {
        let c = ch(0.1, 0.4);
        let (d, r) = wz_distortion(&c, &aux(0.0, 0.0));
        assert_eq!(d, 0.0);
        assert_eq!(r.region, Region::I);
        let (d, _) = wz_distortion(&c, &aux(0.5, 0.5));
        assert_abs_diff_eq!(d, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn distortion_matches_brute_force_on_grid() {
        for i in 0..=10 {
            for j in 0..=10 {
                let c = ch(i as f64 / 10.0, j as f64 / 10.0);
                for k in 0..=8 {
                    for l in 0..=8 {
                        let x = aux(k as f64 / 8.0, l as f64 / 8.0);
                        let brute = joint_pxyu(&c, &x).sum_of_mins();
                        assert_abs_diff_eq!(wz_distortion(&c, &x).0, brute, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        let t = region_thresholds(&ch(0.1, 0.4)).unwrap();
        assert_abs_diff_eq!(t.t1, 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.t2, 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.d_max, 0.25, epsilon = 1e-15);
        assert_eq!(region_thresholds(&ch(0.0, 0.3)).unwrap().t1, 0.0);
        let t = region_thresholds(&ch(0.2, 0.2)).unwrap();
        assert_abs_diff_eq!(t.t1, 0.2 / 1.6, epsilon = 1e-15);
        assert_eq!(t.t1, t.t2);
        assert!(region_thresholds(&ch(0.4, 0.1)).is_err());
    }

    #[test]
    fn thresholds_match_segment_feasibility() {
        let c = ch(0.1, 0.4);
        let t = region_thresholds(&c).unwrap();
        for k in 0..=100 {
            let d = t.d_max * k as f64 / 100.0;
            for region in [Region::II, Region::III] {
                let reachable = region_segment(c.a(), c.b(), d, region).is_some();
                let predicted = t.feasible_regions(d).contains(&region);
                let near_edge = (d - t.t1).abs() < 1e-9 || (d - t.t2).abs() < 1e-9;
                if !near_edge {
                    assert_eq!(reachable, predicted, "{region} at d = {d}");
                }
            }
        }
    }

    #[test]
    fn min_rate_endpoints() {
        let c = ch(0.1, 0.4);
        let o = min_rate_at_distortion(&c, 0.0).unwrap();
        assert_abs_diff_eq!(o.rate, predictive_rate(&c, 0.0).unwrap(), epsilon = 1e-12);
        assert_eq!((o.aux.p(), o.aux.q()), (0.0, 0.0));
        assert_eq!(o.classification.region, Region::I);

        let o = min_rate_at_distortion(&c, 0.25).unwrap();
        assert_abs_diff_eq!(o.rate, 0.0, epsilon = 1e-12);

        assert!(min_rate_at_distortion(&c, 0.3).is_err());
        assert!(min_rate_at_distortion(&c, -0.1).is_err());
    }

    #[test]
    fn optimum_has_requested_distortion() {
        let c = ch(0.1, 0.4);
        for k in 0..=40 {
            let d = 0.25 * k as f64 / 40.0;
            let o = min_rate_at_distortion(&c, d).unwrap();
            let (dist, _) = wz_distortion(&c, &o.aux);
            assert_abs_diff_eq!(dist, d, epsilon = 1e-9);
            assert_abs_diff_eq!(wz_rate(&c, &o.aux).unwrap(), o.rate, epsilon = 1e-12);
        }
    }

    #[test]
    fn bound_rejects_small_grid() {
        assert!(wz_bound(&ch(0.1, 0.4), 8).is_err());
    }
}

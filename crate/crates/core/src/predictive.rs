//! Rate-distortion with the side information at both encoder and decoder.
//!
//! With `a <= b` the optimal split of the distortion budget across `Y = 0` and
//! `Y = 1` equalizes the per-symbol distortions until `d` reaches `b*`, after
//! which the `Y = 1` branch saturates at `b*` (output `x̂ = y` there) and the
//! remainder goes to `Y = 0`.

use crate::channel::{invert_channel, CorrelationChannel, InverseChannel};
use crate::curve::{RdCurve, RdPoint};
use crate::error::{RdError, Result};
use crate::joint::{conditional_mutual_information, Cube};
use crate::prob::{h2, Probability, PROB_TOL};

/// How the decoder forms `x̂` in the achieving scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictiveRule {
    /// `x̂ = u` for both values of `y`.
    AlwaysU,
    /// `x̂ = u` when `y = 0`, `x̂ = y` when `y = 1`.
    UWhenY0,
}

/// Test channel achieving the conditional rate-distortion function at `d`.
///
/// Given `Y = y`, `X` and `X̂` are related by a symmetric channel whose
/// crossover is `p0` on the `Y = 0` branch and `d1` on the `Y = 1` branch
/// (`d1 = p0` below `b*`, `d1 = b*` above).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveAchievability {
    pub p0: Probability,
    pub rule: PredictiveRule,
    /// Per-branch distortions `(d_{Y=0}, d_{Y=1})`.
    pub branch_distortion: (f64, f64),
}

impl PredictiveAchievability {
    /// Joint `p(x, y, x̂)` indexed `[x][y][x̂]`.
    pub fn joint(&self, ch: &CorrelationChannel) -> Result<Cube> {
        let inv = invert_channel(ch)?;
        let py = [inv.p_y0.value(), inv.p_y1.value()];
        // p(X=1 | Y=y)
        let theta = [inv.a_star.value(), 1.0 - inv.b_star.value()];
        let delta = [self.branch_distortion.0, self.branch_distortion.1];
        let mut cube = [[[0.0; 2]; 2]; 2];
        for y in 0..2 {
            let r1 = backward_output(theta[y], delta[y]);
            let pxhat = [1.0 - r1, r1];
            for xhat in 0..2 {
                for x in 0..2 {
                    let flip = if x == xhat { 1.0 - delta[y] } else { delta[y] };
                    cube[x][y][xhat] = py[y] * pxhat[xhat] * flip;
                }
            }
        }
        Ok(cube)
    }
}

/// `p(X̂=1)` such that `X = X̂ ⊕ Z`, `Z ~ Bern(delta)` gives `p(X=1) = theta`.
fn backward_output(theta: f64, delta: f64) -> f64 {
    let den = 1.0 - 2.0 * delta;
    if den.abs() < 1e-15 {
        // delta = 1/2 forces theta = 1/2; any output marginal works
        return 0.0;
    }
    ((theta - delta) / den).clamp(0.0, 1.0)
}

fn check_distortion(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(RdError::DistortionOutOfRange { d, d_max: f64::NAN })
    }
}

fn rate_with(inv: &InverseChannel, a: f64, d_max: f64, d: f64) -> f64 {
    let (py0, py1) = (inv.p_y0.value(), inv.p_y1.value());
    let (ha, hb) = (h2(inv.a_star.value()), h2(inv.b_star.value()));
    let b_star = inv.b_star.value();
    let r = if d >= d_max {
        0.0
    } else if d <= b_star {
        py0 * (ha - h2(d)) + py1 * (hb - h2(d))
    } else {
        py0 * (ha - h2((d - 0.5 * a) / py0))
    };
    r.max(0.0)
}

/// `R_{X|Y}(d)` in bits. Requires a canonical channel.
pub fn predictive_rate(ch: &CorrelationChannel, d: f64) -> Result<f64> {
    ch.ensure_canonical()?;
    check_distortion(d)?;
    let inv = invert_channel(ch)?;
    Ok(rate_with(&inv, ch.a(), ch.d_max(), d))
}

/// The achieving test channel at `d <= D_max`.
pub fn predictive_achievability(
    ch: &CorrelationChannel,
    d: f64,
) -> Result<PredictiveAchievability> {
    ch.ensure_canonical()?;
    check_distortion(d)?;
    let d_max = ch.d_max();
    if d > d_max + PROB_TOL {
        return Err(RdError::DistortionOutOfRange { d, d_max });
    }
    let d = d.min(d_max);
    let inv = invert_channel(ch)?;
    let b_star = inv.b_star.value();
    if d <= b_star {
        Ok(PredictiveAchievability {
            p0: Probability::from_arith("p0", d)?,
            rule: PredictiveRule::AlwaysU,
            branch_distortion: (d, d),
        })
    } else {
        let p0 = (d - inv.p_y1.value() * b_star) / inv.p_y0.value();
        let p0 = Probability::from_arith("p0", p0)?;
        Ok(PredictiveAchievability {
            p0,
            rule: PredictiveRule::UWhenY0,
            branch_distortion: (p0.value(), b_star),
        })
    }
}

/// Samples `R_{X|Y}` at `n_points` evenly spaced distortions in `[0, D_max]`.
pub fn predictive_curve(ch: &CorrelationChannel, n_points: usize) -> Result<RdCurve> {
    if n_points < 2 {
        return Err(RdError::InvalidArgument(format!(
            "need at least 2 curve points, got {n_points}"
        )));
    }
    ch.ensure_canonical()?;
    let inv = invert_channel(ch)?;
    let d_max = ch.d_max();
    let points = distortion_grid(d_max, n_points)
        .into_iter()
        .map(|d| RdPoint::new(d, rate_with(&inv, ch.a(), d_max, d)))
        .collect();
    RdCurve::new(points)
}

/// `n` evenly spaced values from 0 to `d_max`, with the last one exactly `d_max`.
pub fn distortion_grid(d_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                d_max
            } else {
                d_max * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Achieved `(distortion, I(X; X̂ | Y))` of an achievability configuration.
pub fn achieved_point(
    ch: &CorrelationChannel,
    ach: &PredictiveAchievability,
) -> Result<(f64, f64)> {
    let cube = ach.joint(ch)?;
    let mut dist = 0.0;
    for (x, plane) in cube.iter().enumerate() {
        for row in plane {
            dist += row[1 - x];
        }
    }
    Ok((dist, conditional_mutual_information(&cube)))
}

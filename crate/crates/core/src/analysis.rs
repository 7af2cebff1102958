//! Rate loss between the Wyner-Ziv bound and the conditional rate-distortion
//! function, crossover sweeps, closed forms for the symmetric channel, and
//! Monte-Carlo checks of the distortion formulas.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{AuxChannel, CorrelationChannel};
use crate::curve::{RdCurve, RdPoint};
use crate::error::{RdError, Result};
use crate::predictive::predictive_rate;
use crate::prob::{binary_convolution, h2};
use crate::rule::DecoderTable;
use crate::search::golden_section;
use crate::wz::{wz_bound, WzBound};

/// Rate loss of a channel sampled on the bound's distortion grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLossReport {
    pub channel: CorrelationChannel,
    /// `(d, R_bound(d) - R_{X|Y}(d))`
    pub delta_curve: Vec<(f64, f64)>,
    pub max_delta: f64,
    pub argmax_d: f64,
}

pub fn rate_loss(ch: &CorrelationChannel, n_points: usize) -> Result<RateLossReport> {
    let bound = wz_bound(ch, n_points)?;
    rate_loss_from_bound(ch, &bound)
}

/// Rate loss against an already computed bound.
pub fn rate_loss_from_bound(ch: &CorrelationChannel, bound: &WzBound) -> Result<RateLossReport> {
    let delta_curve = bound
        .envelope
        .points()
        .iter()
        .map(|p| Ok((p.d, p.rate - predictive_rate(ch, p.d)?)))
        .collect::<Result<Vec<_>>>()?;
    let (argmax_d, max_delta) =
        delta_curve
            .iter()
            .copied()
            .fold((0.0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    Ok(RateLossReport {
        channel: *ch,
        delta_curve,
        max_delta,
        argmax_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub max_delta: f64,
    pub argmax_d: f64,
}

impl SweepRow {
    fn from_report(r: &RateLossReport) -> Self {
        Self {
            a: r.channel.a(),
            b: r.channel.b(),
            max_delta: r.max_delta,
            argmax_d: r.argmax_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by `(a, b)`.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn peak(&self) -> Option<SweepRow> {
        self.rows
            .iter()
            .copied()
            .fold(None, |best: Option<SweepRow>, r| match best {
                Some(b) if b.max_delta >= r.max_delta => Some(b),
                _ => Some(r),
            })
    }
}

fn check_bsc_crossover(t: f64) -> Result<()> {
    if t > 0.0 && t <= 0.5 {
        Ok(())
    } else {
        Err(RdError::InvalidArgument(format!(
            "symmetric crossover must lie in (0, 0.5], got {t}"
        )))
    }
}

fn sweep(channels: Vec<CorrelationChannel>, n_points: usize) -> Result<SweepResult> {
    let mut rows: Vec<SweepRow> = channels
        .par_iter()
        .map(|ch| rate_loss(ch, n_points).map(|r| SweepRow::from_report(&r)))
        .collect::<Result<_>>()?;
    rows.sort_by(|l, r| l.a.total_cmp(&r.a).then(l.b.total_cmp(&r.b)));
    Ok(SweepResult { rows })
}

/// Rate loss of the symmetric channel `a = b = t` for each `t` in the grid.
pub fn bsc_sweep(crossover_grid: &[f64], n_points: usize) -> Result<SweepResult> {
    let channels = crossover_grid
        .iter()
        .map(|&t| {
            check_bsc_crossover(t)?;
            CorrelationChannel::bsc(t)
        })
        .collect::<Result<Vec<_>>>()?;
    sweep(channels, n_points)
}

/// Refines the peak of a symmetric-channel sweep by golden-section search on
/// the bracket formed by the neighbours of the best row.
pub fn refine_bsc_peak(coarse: &SweepResult, n_points: usize, xtol: f64) -> Result<SweepRow> {
    let rows = &coarse.rows;
    let best = coarse
        .peak()
        .ok_or_else(|| RdError::InvalidArgument("empty sweep".into()))?;
    let i = rows.iter().position(|r| r == &best).unwrap_or(0);
    let lo = rows[i.saturating_sub(1)].a;
    let hi = rows[(i + 1).min(rows.len() - 1)].a;
    if !(hi > lo) {
        return Ok(best);
    }
    let loss =
        |t: f64| -> Result<RateLossReport> { rate_loss(&CorrelationChannel::bsc(t)?, n_points) };
    // golden_section needs an infallible objective; errors are impossible for
    // t inside a bracket of valid sweep rows, but surface them anyway.
    let failure = RefCell::new(None);
    let (t, _) = golden_section(
        |t| match loss(t) {
            Ok(r) => -r.max_delta,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        xtol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let refined = SweepRow::from_report(&loss(t)?);
    Ok(if refined.max_delta >= best.max_delta {
        refined
    } else {
        best
    })
}

/// Channels with `a + b = 2 d_max`, from the Z-channel to the symmetric one.
pub fn fixed_dmax_sweep(d_max: f64, steps: usize, n_points: usize) -> Result<SweepResult> {
    if !(d_max > 0.0 && d_max <= 0.5) || steps < 2 {
        return Err(RdError::InvalidArgument(format!(
            "fixed-D_max sweep needs D_max in (0, 0.5] and >= 2 steps, got {d_max}, {steps}"
        )));
    }
    let channels = (0..steps)
        .map(|i| {
            let a = d_max * i as f64 / (steps - 1) as f64;
            CorrelationChannel::new(a, 2.0 * d_max - a)
        })
        .collect::<Result<Vec<_>>>()?;
    sweep(channels, n_points)
}

/// Conditional rate-distortion function of the symmetric channel:
/// `H(t) - H(d)` up to `d = t`, then 0.
pub fn bsc_predictive_oracle(t: f64, d: f64) -> Result<f64> {
    check_bsc_crossover(t)?;
    if d < 0.0 {
        return Err(RdError::DistortionOutOfRange { d, d_max: t });
    }
    Ok(if d <= t {
        (h2(t) - h2(d)).max(0.0)
    } else {
        0.0
    })
}

/// Wyner-Ziv function of the symmetric channel: the lower convex envelope of
/// `{(d, H(t ⋆ d) - H(d))}` over the grid together with `(t, 0)`, evaluated
/// at every grid point.
///
/// The envelope is computed by exhaustive search over bracketing point
/// pairs, O(n³), independent of the monotone-chain hull used elsewhere.
pub fn bsc_wz_oracle(t: f64, d_grid: &[f64]) -> Result<RdCurve> {
    check_bsc_crossover(t)?;
    if let Some(&d) = d_grid.iter().find(|&&d| !(0.0..=t).contains(&d)) {
        return Err(RdError::DistortionOutOfRange { d, d_max: t });
    }
    let mut set: Vec<(f64, f64)> = d_grid
        .iter()
        .map(|&d| (d, h2(binary_convolution(t, d)) - h2(d)))
        .collect();
    set.push((t, 0.0));

    let points = d_grid
        .iter()
        .map(|&d| {
            let mut best = f64::INFINITY;
            for &(dl, rl) in set.iter().filter(|p| p.0 <= d) {
                for &(dr, rr) in set.iter().filter(|p| p.0 >= d) {
                    let v = if dr == dl {
                        rl.min(rr)
                    } else {
                        rl + (d - dl) / (dr - dl) * (rr - rl)
                    };
                    best = best.min(v);
                }
            }
            RdPoint::new(d, best.max(0.0))
        })
        .collect();
    RdCurve::new(points)
}

/// Empirical Hamming distortion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub errors: u64,
    pub samples: u64,
}

impl McEstimate {
    /// `(estimate - analytic) / stderr`; 0 when both the difference and the
    /// standard error vanish.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let diff = self.estimate - analytic;
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Samples per independent RNG stream.
pub const MC_CHUNK: u64 = 1 << 16;

/// Simulates `n` uses of `X ~ Bern(1/2)`, `Y|X` through `ch`, `U|X` through
/// `aux`, and counts decoder errors.
///
/// Samples are drawn in chunks of [`MC_CHUNK`]; chunk `k` uses ChaCha8 seeded
/// with `seed` on stream `k`, and per sample draws `x`, then the `Y` flip,
/// then the `U` flip, each via `random_bool`. The result depends only on
/// `(seed, n)`, not on the number of threads.
pub fn monte_carlo_distortion(
    ch: &CorrelationChannel,
    aux: &AuxChannel,
    decoder: impl Into<DecoderTable>,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(RdError::InvalidArgument("sample count must be >= 1".into()));
    }
    let decoder = decoder.into();
    let y_flip = [ch.a(), ch.b()];
    let u_flip = [aux.p(), aux.q()];
    let chunks = n.div_ceil(MC_CHUNK);
    let errors: u64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_CHUNK.min(n - k * MC_CHUNK);
            let mut errs = 0u64;
            for _ in 0..len {
                let x = u8::from(rng.random_bool(0.5));
                let y = x ^ u8::from(rng.random_bool(y_flip[x as usize]));
                let u = x ^ u8::from(rng.random_bool(u_flip[x as usize]));
                errs += u64::from(decoder.decode(y, u) != x);
            }
            errs
        })
        .sum();
    let estimate = errors as f64 / n as f64;
    Ok(McEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / n as f64).sqrt(),
        errors,
        samples: n,
    })
}

//! Blahut-Arimoto style solvers for the Wyner-Ziv problem with an auxiliary
//! alphabet of arbitrary size, and for the conditional (side information at
//! both ends) problem.
//!
//! The Wyner-Ziv solver minimizes `I(X;U|Y) + λ E[d(X, f(U,Y))]` by cycling
//! through three steps, each of which can only lower the objective:
//!
//! 1. `f(u, y) = argmax_x p(x | u, y)` for the current test channel;
//! 2. `r(u|y) = p(u|y)`, the exact output conditional;
//! 3. `p(u|x) ∝ exp2( Σ_y p(y|x) [log2 r(u|y) - λ d(x, f(u,y))] )`.
//!
//! Rates are in bits and `λ` is in bits per unit distortion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{invert_channel, CorrelationChannel};
use crate::curve::{decreasing_hull, RdCurve, RdPoint};
use crate::error::{RdError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BaConfig {
    /// `|U|`, at least 2.
    pub aux_cardinality: usize,
    /// Slopes to sweep, all positive.
    pub lambda_grid: Vec<f64>,
    /// Stop once an iteration lowers the objective by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Random initializations per slope; the lowest objective wins.
    pub restarts: usize,
    pub seed: u64,
    /// `p(X = 1)`. Everything outside exploratory use keeps the default 1/2.
    pub source_p1: f64,
}

impl Default for BaConfig {
    fn default() -> Self {
        Self {
            aux_cardinality: 3,
            lambda_grid: log_spaced(1e-2, 1e3, 64),
            tol: 1e-10,
            max_iter: 10_000,
            restarts: 8,
            seed: 0,
            source_p1: 0.5,
        }
    }
}

impl BaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RdError::InvalidArgument(msg));
        if self.aux_cardinality < 2 {
            return bad(format!(
                "aux cardinality must be >= 2, got {}",
                self.aux_cardinality
            ));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be >= 1".into());
        }
        if self.restarts < 1 {
            return bad("restarts must be >= 1".into());
        }
        if let Some(l) = self
            .lambda_grid
            .iter()
            .find(|l| !(**l > 0.0 && l.is_finite()))
        {
            return bad(format!("lambda must be positive and finite, got {l}"));
        }
        if !(0.0..=1.0).contains(&self.source_p1) {
            return bad(format!("source prior {} outside [0, 1]", self.source_p1));
        }
        Ok(())
    }
}

/// `n` values from `lo` to `hi`, evenly spaced in log scale.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(RdError::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

/// One converged (or iteration-capped) Wyner-Ziv operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct BaPoint {
    pub lambda: f64,
    pub rate: f64,
    pub distortion: f64,
    /// `p(u|x)` indexed `[x][u]`.
    pub test_channel: [Vec<f64>; 2],
    /// `f(u, y)` indexed `[y][u]`.
    pub decoder: [Vec<u8>; 2],
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest per-iteration objective increase observed in the winning run
    /// (0 for an exactly monotone run).
    pub max_objective_increase: f64,
}

/// Source model shared by both solvers: `p(x)`, `p(y|x)` and `p(x, y)`.
#[derive(Debug, Clone, Copy)]
struct Model {
    pyx: [[f64; 2]; 2],
    pxy: [[f64; 2]; 2],
    py: [f64; 2],
}

impl Model {
    fn new(ch: &CorrelationChannel, source_p1: f64) -> Self {
        let pyx = ch.transition();
        let px = [1.0 - source_p1, source_p1];
        let pxy = [
            [px[0] * pyx[0][0], px[0] * pyx[0][1]],
            [px[1] * pyx[1][0], px[1] * pyx[1][1]],
        ];
        let py = [pxy[0][0] + pxy[1][0], pxy[0][1] + pxy[1][1]];
        Self { pyx, pxy, py }
    }
}

/// Rate and distortion of a test channel `p(u|x)` with decoder `f(u, y)`,
/// evaluated from scratch.
pub fn evaluate_test_channel(
    ch: &CorrelationChannel,
    source_p1: f64,
    test_channel: &[Vec<f64>; 2],
    decoder: &[Vec<u8>; 2],
) -> (f64, f64) {
    let model = Model::new(ch, source_p1);
    let k = test_channel[0].len();
    let mut rate = 0.0;
    let mut dist = 0.0;
    for y in 0..2 {
        for u in 0..k {
            let j = [
                model.pxy[0][y] * test_channel[0][u],
                model.pxy[1][y] * test_channel[1][u],
            ];
            let pyu = j[0] + j[1];
            if pyu <= 0.0 {
                continue;
            }
            let puy = pyu / model.py[y];
            for x in 0..2 {
                if j[x] > 0.0 {
                    rate += j[x] * (test_channel[x][u] / puy).log2();
                }
            }
            dist += j[1 - decoder[y][u] as usize];
        }
    }
    (rate.max(0.0), dist)
}

struct WzState {
    /// `[x][u]`
    q: [Vec<f64>; 2],
    /// `[y][u]`
    f: [Vec<u8>; 2],
    /// `[y][u]`
    puy: [Vec<f64>; 2],
    rate: f64,
    dist: f64,
}

impl WzState {
    fn new(q: [Vec<f64>; 2]) -> Self {
        let k = q[0].len();
        Self {
            q,
            f: [vec![0; k], vec![0; k]],
            puy: [vec![0.0; k], vec![0.0; k]],
            rate: 0.0,
            dist: 0.0,
        }
    }

    /// Refreshes `p(u|y)`, the argmax decoder, rate and distortion.
    fn refresh(&mut self, m: &Model) {
        let k = self.q[0].len();
        self.rate = 0.0;
        self.dist = 0.0;
        for y in 0..2 {
            for u in 0..k {
                let j0 = m.pxy[0][y] * self.q[0][u];
                let j1 = m.pxy[1][y] * self.q[1][u];
                // ties go to x̂ = 0
                let xhat = u8::from(j1 > j0);
                self.f[y][u] = xhat;
                self.dist += if xhat == 0 { j1 } else { j0 };
                let pyu = j0 + j1;
                self.puy[y][u] = if m.py[y] > 0.0 { pyu / m.py[y] } else { 0.0 };
                if pyu > 0.0 {
                    let puy = self.puy[y][u];
                    if j0 > 0.0 {
                        self.rate += j0 * (self.q[0][u] / puy).log2();
                    }
                    if j1 > 0.0 {
                        self.rate += j1 * (self.q[1][u] / puy).log2();
                    }
                }
            }
        }
    }

    fn update_test_channel(&mut self, m: &Model, lambda: f64) {
        let k = self.q[0].len();
        let mut expo = vec![0.0; k];
        for x in 0..2 {
            for (u, e) in expo.iter_mut().enumerate() {
                let mut s = 0.0;
                for y in 0..2 {
                    let w = m.pyx[x][y];
                    if w <= 0.0 {
                        continue;
                    }
                    let miss = f64::from(u8::from(self.f[y][u] as usize != x));
                    s += w * (self.puy[y][u].log2() - lambda * miss);
                }
                *e = s;
            }
            let top = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                continue;
            }
            let mut total = 0.0;
            for (u, e) in expo.iter().enumerate() {
                let v = (e - top).exp2();
                self.q[x][u] = v;
                total += v;
            }
            for v in self.q[x].iter_mut() {
                *v /= total;
            }
        }
    }
}

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|v| *v /= total);
    } else {
        row.fill(1.0 / k as f64);
    }
    row
}

fn run_wz(m: &Model, mut state: WzState, lambda: f64, cfg: &BaConfig) -> BaPoint {
    state.refresh(m);
    let mut objective = state.rate + lambda * state.dist;
    let mut max_increase: f64 = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        state.update_test_channel(m, lambda);
        state.refresh(m);
        let next = state.rate + lambda * state.dist;
        max_increase = max_increase.max(next - objective);
        let drop = objective - next;
        objective = next;
        if drop < cfg.tol {
            converged = true;
            break;
        }
    }
    BaPoint {
        lambda,
        rate: state.rate.max(0.0),
        distortion: state.dist,
        test_channel: state.q,
        decoder: state.f,
        objective,
        iterations,
        converged,
        max_objective_increase: max_increase,
    }
}

fn point_rng(cfg: &BaConfig, lambda: f64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ lambda.to_bits().rotate_left(23));
    rng.set_stream(restart as u64);
    rng
}

/// Best of `cfg.restarts` runs at slope `lambda`.
pub fn ba_wz_point(ch: &CorrelationChannel, lambda: f64, cfg: &BaConfig) -> Result<BaPoint> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let m = Model::new(ch, cfg.source_p1);
    let k = cfg.aux_cardinality;
    let mut best: Option<BaPoint> = None;
    for r in 0..cfg.restarts {
        let mut rng = point_rng(cfg, lambda, r);
        let q = [dirichlet_row(&mut rng, k), dirichlet_row(&mut rng, k)];
        let run = run_wz(&m, WzState::new(q), lambda, cfg);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaResult {
    /// Lower convex hull of the operating points, nonincreasing.
    pub points: RdCurve,
    /// One entry per slope, in `lambda_grid` order.
    pub per_point: Vec<BaPoint>,
}

impl BaResult {
    pub fn all_converged(&self) -> bool {
        self.per_point.iter().all(|p| p.converged)
    }
}

pub fn ba_wz_curve(ch: &CorrelationChannel, cfg: &BaConfig) -> Result<BaResult> {
    cfg.validate()?;
    let per_point: Vec<BaPoint> = cfg
        .lambda_grid
        .par_iter()
        .map(|&l| ba_wz_point(ch, l, cfg))
        .collect::<Result<_>>()?;
    let raw: Vec<RdPoint> = per_point
        .iter()
        .map(|p| RdPoint::new(p.distortion, p.rate))
        .collect();
    Ok(BaResult {
        points: RdCurve::new(decreasing_hull(&raw))?,
        per_point,
    })
}

/// Operating point of the conditional rate-distortion problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaConditionalPoint {
    pub lambda: f64,
    pub rate: f64,
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_objective_increase: f64,
}

/// Classic binary-reproduction BA on a single source `theta = p(X=1)`.
/// Returns `(rate, distortion, iterations, converged, max_increase)`.
fn ba_binary_source(theta: f64, lambda: f64, cfg: &BaConfig) -> (f64, f64, usize, bool, f64) {
    let px = [1.0 - theta, theta];
    let penalty = (-lambda).exp2();
    let mut r = [0.5, 0.5];
    let eval = |r: &[f64; 2]| {
        // Q(x̂|x) ∝ r(x̂) 2^{-λ d(x, x̂)}
        let mut q = [[0.0; 2]; 2];
        for x in 0..2 {
            let w = [
                r[0] * if x == 0 { 1.0 } else { penalty },
                r[1] * if x == 1 { 1.0 } else { penalty },
            ];
            let s = w[0] + w[1];
            q[x] = [w[0] / s, w[1] / s];
        }
        let out = [
            px[0] * q[0][0] + px[1] * q[1][0],
            px[0] * q[0][1] + px[1] * q[1][1],
        ];
        let mut rate = 0.0;
        for x in 0..2 {
            for xh in 0..2 {
                let j = px[x] * q[x][xh];
                if j > 0.0 {
                    rate += j * (q[x][xh] / out[xh]).log2();
                }
            }
        }
        let dist = px[0] * q[0][1] + px[1] * q[1][0];
        (rate.max(0.0), dist, out)
    };
    let (mut rate, mut dist, mut out) = eval(&r);
    let mut objective = rate + lambda * dist;
    let mut max_increase: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        r = out;
        (rate, dist, out) = eval(&r);
        let next = rate + lambda * dist;
        max_increase = max_increase.max(next - objective);
        let drop = objective - next;
        objective = next;
        if drop < cfg.tol {
            converged = true;
            break;
        }
    }
    (rate, dist, iterations, converged, max_increase)
}

/// Conditional rate-distortion point at slope `lambda`: one BA run per value
/// of `y` on the source `p(x|y)`, combined with weights `p(y)`.
pub fn ba_conditional_point(
    ch: &CorrelationChannel,
    lambda: f64,
    cfg: &BaConfig,
) -> Result<BaConditionalPoint> {
    check_lambda(lambda)?;
    cfg.validate()?;
    let inv = invert_channel(ch)?;
    let branches = [
        (inv.p_y0.value(), inv.a_star.value()),
        (inv.p_y1.value(), 1.0 - inv.b_star.value()),
    ];
    let mut point = BaConditionalPoint {
        lambda,
        rate: 0.0,
        distortion: 0.0,
        iterations: 0,
        converged: true,
        max_objective_increase: 0.0,
    };
    for (py, theta) in branches {
        if py <= 0.0 {
            continue;
        }
        let (rate, dist, it, conv, inc) = ba_binary_source(theta, lambda, cfg);
        point.rate += py * rate;
        point.distortion += py * dist;
        point.iterations = point.iterations.max(it);
        point.converged &= conv;
        point.max_objective_increase = point.max_objective_increase.max(inc);
    }
    Ok(point)
}

/// Hull of [`ba_conditional_point`] over `cfg.lambda_grid`.
pub fn ba_conditional_curve(ch: &CorrelationChannel, cfg: &BaConfig) -> Result<RdCurve> {
    cfg.validate()?;
    let pts: Vec<RdPoint> = cfg
        .lambda_grid
        .par_iter()
        .map(|&l| ba_conditional_point(ch, l, cfg).map(|p| RdPoint::new(p.distortion, p.rate)))
        .collect::<Result<_>>()?;
    RdCurve::new(decreasing_hull(&pts))
}

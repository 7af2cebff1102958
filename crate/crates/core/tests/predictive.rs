use binrd::curve::convexity_slack;
use binrd::predictive::achieved_point;
use binrd::prob::h2;
use binrd::{
    canonicalize_correlation, invert_channel, predictive_achievability, predictive_rate,
    CorrelationChannel, RdPoint,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

prop_compose! {
    fn canonical()(a in 0.0..1.0f64, b in 0.0..1.0f64) -> CorrelationChannel {
        canonicalize_correlation(&CorrelationChannel::new(a, b).unwrap()).0
    }
}

fn random_canonical(rng: &mut ChaCha8Rng) -> CorrelationChannel {
    canonicalize_correlation(&CorrelationChannel::new(rng.random(), rng.random()).unwrap()).0
}

proptest! {
    #[test]
    fn nonincreasing_and_convex_on_fine_grid(ch in canonical()) {
        let d_max = ch.d_max();
        let n = (d_max / 1e-3).floor() as usize;
        let mut pts: Vec<RdPoint> = (0..=n)
            .map(|i| {
                let d = i as f64 * 1e-3;
                RdPoint::new(d, predictive_rate(&ch, d).unwrap())
            })
            .collect();
        pts.push(RdPoint::new(d_max, predictive_rate(&ch, d_max).unwrap()));
        prop_assert!(pts.windows(2).all(|w| w[1].rate <= w[0].rate));
        prop_assert!(convexity_slack(&pts) >= -1e-9);
    }

    #[test]
    fn branches_meet_at_b_star(ch in canonical()) {
        let inv = invert_channel(&ch).unwrap();
        let (py0, py1) = (inv.p_y0.value(), inv.p_y1.value());
        let (ha, b_star) = (h2(inv.a_star.value()), inv.b_star.value());
        let left = py0 * (ha - h2(b_star)) + py1 * (h2(b_star) - h2(b_star));
        let right = py0 * (ha - h2((b_star - ch.a() / 2.0) / py0));
        prop_assert!((left - right).abs() < 1e-12);
    }

    #[test]
    fn zero_distortion_is_conditional_entropy(ch in canonical()) {
        let h = invert_channel(&ch).unwrap().conditional_entropy();
        prop_assert_eq!(predictive_rate(&ch, 0.0).unwrap(), h.max(0.0));
    }

    #[test]
    fn invariant_under_label_swaps(a in 0.0..1.0f64, b in 0.0..1.0f64, s in 0.0..1.0f64) {
        let rate = |a: f64, b: f64| {
            let ch = canonicalize_correlation(&CorrelationChannel::new(a, b).unwrap()).0;
            predictive_rate(&ch, s * ch.d_max()).unwrap()
        };
        let base = rate(a, b);
        prop_assert!((base - rate(b, a)).abs() < 1e-12);
        prop_assert!((base - rate(1.0 - a, 1.0 - b)).abs() < 1e-12);
    }
}

#[test]
fn achieving_channel_reproduces_rate_and_distortion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let ch = random_canonical(&mut rng);
        let d = rng.random::<f64>() * ch.d_max();
        let ach = predictive_achievability(&ch, d).unwrap();
        let (dist, info) = achieved_point(&ch, &ach).unwrap();
        let rate = predictive_rate(&ch, d).unwrap();
        assert!((dist - d).abs() < 1e-9, "{ch:?} d={d}: distortion {dist}");
        assert!((info - rate).abs() < 1e-9, "{ch:?} d={d}: {info} vs {rate}");
    }
}

/// `H(X|Y) - max p_y0 H(d0) + p_y1 H(d1)` over splits of `d` with
/// `d0 <= a*`, `d1 <= b*`, scanned over `d0` at step 1e-4.
fn rate_by_split_search(ch: &CorrelationChannel, d: f64) -> f64 {
    let inv = invert_channel(ch).unwrap();
    let (py0, py1) = (inv.p_y0.value(), inv.p_y1.value());
    let (a_star, b_star) = (inv.a_star.value(), inv.b_star.value());
    let mut best = f64::NEG_INFINITY;
    let steps = (a_star / 1e-4).ceil() as usize;
    for i in 0..=steps {
        let d0 = (i as f64 * 1e-4).min(a_star);
        let d1 = (d - py0 * d0) / py1;
        if !(0.0..=b_star).contains(&d1) {
            continue;
        }
        best = best.max(py0 * h2(d0) + py1 * h2(d1));
    }
    inv.conditional_entropy() - best
}

#[test]
fn no_split_of_the_budget_beats_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 100 {
        let ch = random_canonical(&mut rng);
        if ch.a() < 1e-3 || ch.d_max() > 0.49 {
            continue;
        }
        let d = rng.random::<f64>() * ch.d_max();
        let closed = predictive_rate(&ch, d).unwrap();
        let searched = rate_by_split_search(&ch, d);
        assert!(
            closed <= searched + 1e-6,
            "{ch:?} d={d}: {closed} > {searched}"
        );
        // the grid search can only approach the optimum from above
        assert!(
            searched - closed < 1e-3,
            "{ch:?} d={d}: {closed} vs {searched}"
        );
        checked += 1;
    }
}

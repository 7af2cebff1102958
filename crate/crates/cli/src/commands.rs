use std::path::Path;

use binrd::analysis::{
    bsc_sweep, monte_carlo_distortion, rate_loss as channel_rate_loss, refine_bsc_peak, SweepRow,
};
use binrd::ba::log_spaced;
use binrd::wz::{region_thresholds, TimeShare};
use binrd::{
    ba_wz_curve, canonicalize_correlation, canonicalize_pair, classify_region, joint_pxyu,
    predictive_curve, wz_bound, AuxChannel, BaConfig, CorrelationChannel, DecoderTable,
    LabelTransform, RdCurve,
};
use serde_json::{json, Map, Value};

use crate::output::{
    gnuplot_stub, num, provenance, to_pretty, write_file, Format, OutputRecord, Sink,
};
use crate::{
    BaArgs, ChannelArgs, CliError, Common, PredictiveArgs, RateLossArgs, RuleChoice, SimulateArgs,
    WzArgs,
};

type CmdResult = Result<(), CliError>;

fn channel(
    a: f64,
    b: f64,
) -> Result<(CorrelationChannel, CorrelationChannel, LabelTransform), CliError> {
    let raw = CorrelationChannel::new(a, b)?;
    let (canon, t) = canonicalize_correlation(&raw);
    Ok((raw, canon, t))
}

fn channel_from(
    args: &ChannelArgs,
) -> Result<(CorrelationChannel, CorrelationChannel, LabelTransform), CliError> {
    channel(args.a, args.b)
}

fn curve_record(schema: &'static str, curve: &RdCurve) -> OutputRecord {
    let mut rec = OutputRecord::new(schema, &["d", "rate"]);
    for p in curve.points() {
        rec.push(vec![p.d.into(), p.rate.into()]);
    }
    rec
}

fn meta(key: &str, value: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(key.into(), value);
    m
}

/// Writes a single table. In CSV mode the metadata goes to `meta_path`, or a
/// sibling `<stem>.<meta_suffix>.json` of the output file, or stderr.
fn emit(
    common: &Common,
    rec: &OutputRecord,
    sink: &Sink,
    extra: Map<String, Value>,
    meta_suffix: &str,
    meta_path: Option<&Path>,
) -> CmdResult {
    match common.format {
        Format::Json => sink.write(&rec.render(Format::Json, extra))?,
        Format::Csv => {
            sink.write(&rec.to_csv())?;
            let doc = to_pretty(&Value::Object(extra));
            match meta_path
                .map(Path::to_path_buf)
                .or_else(|| sink.sibling(&format!("{meta_suffix}.json")))
            {
                Some(path) => write_file(&path, &doc)?,
                None => eprint!("{doc}"),
            }
        }
    }
    Ok(())
}

fn emit_stub(common: &Common, sink: &Sink, script: impl FnOnce(&str) -> String) -> CmdResult {
    if !common.gnuplot_stub {
        return Ok(());
    }
    match (sink, sink.sibling("gp")) {
        (Sink::File(data), Some(gp)) => {
            let name = data
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            write_file(&gp, &script(&name))?;
        }
        _ => eprintln!("binrd: --gnuplot-stub needs --out; skipped"),
    }
    Ok(())
}

fn check_csv_for_stub(common: &Common) -> CmdResult {
    if common.gnuplot_stub && common.format != Format::Csv {
        return Err(CliError::Input("--gnuplot-stub needs --format csv".into()));
    }
    Ok(())
}

pub fn predictive(common: &Common, args: PredictiveArgs) -> CmdResult {
    check_csv_for_stub(common)?;
    let (raw, canon, t) = channel_from(&args.channel)?;
    let curve = predictive_curve(&canon, args.points)?;
    let rec = curve_record("predictive_curve", &curve);
    let prov = provenance(
        "predictive",
        &raw,
        &canon,
        &t,
        None,
        json!({ "points": args.points }),
    );
    let sink = Sink::from_option(args.out);
    emit(
        common,
        &rec,
        &sink,
        meta("provenance", prov),
        "provenance",
        None,
    )?;
    emit_stub(common, &sink, |file| {
        gnuplot_stub(
            "Conditional rate-distortion function",
            "d",
            "rate (bits)",
            &[(file, 1, 2)],
        )
    })
}

fn time_share_json(ts: &TimeShare) -> Value {
    json!({
        "start": { "d": num(ts.start.d), "rate": num(ts.start.rate) },
        "end": { "d": num(ts.end.d), "rate": num(ts.end.rate) },
    })
}

pub fn wz(common: &Common, args: WzArgs) -> CmdResult {
    check_csv_for_stub(common)?;
    if args.regions && args.grid == 0 {
        return Err(CliError::Input("--grid must be at least 1".into()));
    }
    let (raw, canon, t) = channel_from(&args.channel)?;
    let bound = wz_bound(&canon, args.points)?;
    let ext = common.format.extension();
    let dir = &args.out;
    let write = |name: &str, rec: &OutputRecord| -> CmdResult {
        write_file(
            &dir.join(format!("{name}.{ext}")),
            &rec.render(common.format, Map::new()),
        )?;
        Ok(())
    };

    write("star", &curve_record("wz_star_curve", &bound.star_curve))?;
    write("envelope", &curve_record("wz_envelope", &bound.envelope))?;

    let mut traj = OutputRecord::new("wz_trajectory", &["d", "p", "q", "region"]);
    for p in &bound.trajectory {
        traj.push(vec![
            p.d.into(),
            p.p.into(),
            p.q.into(),
            p.region.label().into(),
        ]);
    }
    write("trajectory", &traj)?;

    if args.regions {
        let g = args.grid;
        let mut map = OutputRecord::new("wz_regions", &["p", "q", "region"]);
        for i in 0..g {
            for j in 0..g {
                // cell centres keep the map off the region boundaries
                let p = (i as f64 + 0.5) / g as f64;
                let q = (j as f64 + 0.5) / g as f64;
                let region = classify_region(&canon, &AuxChannel::new(p, q)?).region;
                map.push(vec![p.into(), q.into(), region.label().into()]);
            }
        }
        write("regions", &map)?;
    }

    let pq = bound.pq_trajectory();
    let thresholds = region_thresholds(&canon)
        .ok()
        .map(|th| json!({ "t1": num(th.t1), "t2": num(th.t2), "d_max": num(th.d_max) }));
    let switch = pq.switch.map(|s| {
        json!({
            "before": { "d": num(s.before.d), "p": num(s.before.p), "q": num(s.before.q), "region": s.before.region.label() },
            "after": { "d": num(s.after.d), "p": num(s.after.p), "q": num(s.after.q), "region": s.after.region.label() },
            "jump": num(s.jump()),
        })
    });
    let summary = json!({
        "d_max": num(canon.d_max()),
        "thresholds": thresholds,
        "time_share": bound.time_share.as_ref().map(time_share_json),
        "tangents": bound.tangents.iter().map(time_share_json).collect::<Vec<_>>(),
        "region_switch": switch,
        "labels": "trajectory and region map use canonical labels; see provenance.transform",
        "provenance": provenance(
            "wz",
            &raw,
            &canon,
            &t,
            None,
            json!({ "points": args.points, "regions_grid": args.regions.then_some(args.grid) }),
        ),
    });
    write_file(&dir.join("summary.json"), &to_pretty(&summary))?;

    if common.gnuplot_stub {
        let mut script = gnuplot_stub(
            "Wyner-Ziv bound",
            "d",
            "rate (bits)",
            &[("star.csv", 1, 2), ("envelope.csv", 1, 2)],
        );
        script.push_str("\npause -1\n");
        script.push_str(&gnuplot_stub(
            "Optimal p(d) and q(d)",
            "d",
            "crossover",
            &[("trajectory.csv", 1, 2), ("trajectory.csv", 1, 3)],
        ));
        write_file(&dir.join("plot.gp"), &script)?;
    }
    Ok(())
}

pub fn ba(common: &Common, args: BaArgs) -> CmdResult {
    check_csv_for_stub(common)?;
    let (raw, canon, t) = channel_from(&args.channel)?;
    if args.lambdas == 0 || !(args.lambda_min > 0.0 && args.lambda_max >= args.lambda_min) {
        return Err(CliError::Input(
            "need --lambdas >= 1 and 0 < --lambda-min <= --lambda-max".into(),
        ));
    }
    let cfg = BaConfig {
        aux_cardinality: args.card,
        lambda_grid: log_spaced(args.lambda_min, args.lambda_max, args.lambdas),
        tol: args.tol,
        max_iter: args.max_iter,
        restarts: args.restarts,
        seed: args.seed,
        ..BaConfig::default()
    };
    cfg.validate()?;
    let res = ba_wz_curve(&canon, &cfg)?;
    let ext = common.format.extension();
    let dir = &args.out;
    write_file(
        &dir.join(format!("curve.{ext}")),
        &curve_record("ba_curve", &res.points).render(common.format, Map::new()),
    )?;

    let per_lambda: Vec<Value> = res
        .per_point
        .iter()
        .map(|p| {
            json!({
                "lambda": num(p.lambda),
                "rate": num(p.rate),
                "distortion": num(p.distortion),
                "objective": num(p.objective),
                "iterations": p.iterations,
                "converged": p.converged,
                "max_objective_increase": num(p.max_objective_increase),
            })
        })
        .collect();
    let unconverged = res.per_point.iter().filter(|p| !p.converged).count();
    let log = json!({
        "all_converged": unconverged == 0,
        "unconverged": unconverged,
        "points": per_lambda,
        "provenance": provenance(
            "ba",
            &raw,
            &canon,
            &t,
            None,
            json!({
                "card": args.card,
                "seed": args.seed,
                "lambdas": args.lambdas,
                "lambda_min": num(args.lambda_min),
                "lambda_max": num(args.lambda_max),
                "restarts": args.restarts,
                "max_iter": args.max_iter,
                "tol": num(args.tol),
            }),
        ),
    });
    write_file(&dir.join("log.json"), &to_pretty(&log))?;
    if common.gnuplot_stub {
        write_file(
            &dir.join("plot.gp"),
            &gnuplot_stub(
                "Blahut-Arimoto Wyner-Ziv curve",
                "d",
                "rate (bits)",
                &[("curve.csv", 1, 2)],
            ),
        )?;
    }
    if unconverged > 0 {
        eprintln!("binrd: {unconverged} slope(s) reached --max-iter without converging");
        if args.strict {
            return Err(CliError::Numerical(format!(
                "{unconverged} slope(s) did not converge"
            )));
        }
    }
    Ok(())
}

fn sweep_row_json(r: &SweepRow) -> Value {
    json!({
        "a": num(r.a),
        "b": num(r.b),
        "max_delta": num(r.max_delta),
        "argmax_d": num(r.argmax_d),
    })
}

pub fn rate_loss(common: &Common, args: RateLossArgs) -> CmdResult {
    check_csv_for_stub(common)?;
    let sink = Sink::from_option(args.out);
    if let Some(spec) = args.bsc_sweep {
        let sweep = bsc_sweep(&spec.grid(), args.points)?;
        let mut rec =
            OutputRecord::new("bsc_rate_loss_sweep", &["a", "b", "max_delta", "argmax_d"]);
        for r in &sweep.rows {
            rec.push(vec![
                r.a.into(),
                r.b.into(),
                r.max_delta.into(),
                r.argmax_d.into(),
            ]);
        }
        let coarse = sweep.peak();
        let refined = refine_bsc_peak(&sweep, args.points, 1e-5)?;
        let summary = json!({
            "coarse_peak": coarse.as_ref().map(sweep_row_json),
            "peak": sweep_row_json(&refined),
            "settings": {
                "t0": num(spec.t0),
                "t1": num(spec.t1),
                "steps": spec.steps,
                "points": args.points,
                "refinement_xtol": num(1e-5),
            },
        });
        emit(
            common,
            &rec,
            &sink,
            meta("summary", summary),
            "summary",
            args.summary.as_deref(),
        )?;
        return emit_stub(common, &sink, |file| {
            gnuplot_stub(
                "Rate loss of symmetric channels",
                "crossover",
                "max rate loss (bits)",
                &[(file, 1, 3)],
            )
        });
    }

    let (a, b) = args.a.zip(args.b).expect("clap enforces --a with --b");
    let (raw, canon, t) = channel(a, b)?;
    let report = channel_rate_loss(&canon, args.points)?;
    let mut rec = OutputRecord::new("rate_loss", &["d", "delta"]);
    for &(d, delta) in &report.delta_curve {
        rec.push(vec![d.into(), delta.into()]);
    }
    let summary = json!({
        "max_delta": num(report.max_delta),
        "argmax_d": num(report.argmax_d),
        "provenance": provenance("rate-loss", &raw, &canon, &t, None, json!({ "points": args.points })),
    });
    emit(
        common,
        &rec,
        &sink,
        meta("summary", summary),
        "summary",
        args.summary.as_deref(),
    )?;
    emit_stub(common, &sink, |file| {
        gnuplot_stub("Rate loss", "d", "rate loss (bits)", &[(file, 1, 2)])
    })
}

pub fn simulate(common: &Common, args: SimulateArgs) -> CmdResult {
    if common.gnuplot_stub {
        eprintln!("binrd: simulate has nothing to plot; --gnuplot-stub ignored");
    }
    if args.n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let raw = CorrelationChannel::new(args.a, args.b)?;
    let raw_aux = AuxChannel::new(args.p, args.q)?;
    let (canon, canon_aux, t) = canonicalize_pair(&raw, &raw_aux);

    // auto picks the argmax rule in canonical labels and maps it back;
    // a named rule applies to the labels as given
    let (rule_name, region, table): (&str, Option<&str>, DecoderTable) = match args.rule {
        RuleChoice::Auto => {
            let class = classify_region(&canon, &canon_aux);
            (
                class.rule.name(),
                Some(class.region.label()),
                t.decanonicalize(class.rule.into()),
            )
        }
        RuleChoice::Fixed(rule) => (rule.name(), None, rule.into()),
    };
    let analytic = joint_pxyu(&raw, &raw_aux).expected_distortion(table);
    let est = monte_carlo_distortion(&raw, &raw_aux, table, args.n, args.seed)?;
    let z = est.z_score(analytic);

    let mut rec = OutputRecord::new(
        "simulation",
        &[
            "rule", "analytic", "estimate", "stderr", "z_score", "samples",
        ],
    );
    rec.push(vec![
        rule_name.into(),
        analytic.into(),
        est.estimate.into(),
        est.stderr.into(),
        z.into(),
        (est.samples as usize).into(),
    ]);
    let prov = provenance(
        "simulate",
        &raw,
        &canon,
        &t,
        Some((&raw_aux, &canon_aux)),
        json!({ "rule": rule_name, "n": args.n, "seed": args.seed }),
    );
    let sink = Sink::from_option(args.out);
    match common.format {
        Format::Json => {
            let report = json!({
                "schema": "simulation",
                "rule": rule_name,
                "region": region,
                "decoder": table.0,
                "analytic": num(analytic),
                "estimate": num(est.estimate),
                "stderr": num(est.stderr),
                "z_score": num(z),
                "errors": est.errors,
                "samples": est.samples,
                "provenance": prov,
            });
            sink.write(&to_pretty(&report))?;
            Ok(())
        }
        Format::Csv => emit(
            common,
            &rec,
            &sink,
            meta("provenance", prov),
            "provenance",
            None,
        ),
    }
}

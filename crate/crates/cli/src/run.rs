use co2fronts_core::characteristics::{
    char_field, corner_path, shock_formation_time, smooth_solve, CharField, CharGrid, FieldSource,
};
use co2fronts_core::flux::TwoFlux;
use co2fronts_core::interactions::{classify_pair_detailed, Representation};
use co2fronts_core::oracle::{compare_l1, fv_solve, GridSolution, Sampled};
use co2fronts_core::riemann::solve_riemann;
use co2fronts_core::tracker::{approximate_initial, diagnostics, track, PiecewiseConstantState, Trace};
use co2fronts_core::{Error, RiemannSolution};
use serde_json::{json, Value};

use crate::config::{Mode, Scenario};

/// File name and contents.
pub type Artifact = (&'static str, Vec<u8>);

pub struct Outputs {
    pub artifacts: Vec<Artifact>,
    pub window: (f64, f64),
    pub summary: Value,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Intervals `(lo, hi, u)` of `value` over `window`, split at `breaks`.
fn intervals(window: (f64, f64), breaks: &[f64], value: impl Fn(f64) -> f64) -> Vec<(f64, f64, f64)> {
    let mut pts = vec![window.0];
    pts.extend(breaks.iter().copied().filter(|&b| b > window.0 && b < window.1));
    pts.push(window.1);
    pts.windows(2)
        .map(|w| (w[0], w[1], value(0.5 * (w[0] + w[1]))))
        .collect()
}

fn snapshot_rows(t: f64, cells: Vec<(f64, f64, f64)>) -> impl Iterator<Item = Vec<String>> {
    cells
        .into_iter()
        .map(move |(a, b, u)| vec![num(t), num(a), num(b), num(u)])
}

const SNAPSHOT_HEADER: [&str; 4] = ["t", "x_lo", "x_hi", "u"];

fn default_window(s: &Scenario, a: f64, b: f64) -> (f64, f64) {
    if let Some([lo, hi]) = s.run.window {
        return (lo, hi);
    }
    let reach = s.params.max_speed() * s.horizon + 0.5;
    (a - reach, b + reach)
}

fn char_grid(s: &Scenario, window: (f64, f64)) -> CharGrid {
    s.run.chars.unwrap_or(CharGrid {
        x_min: window.0,
        x_max: window.1,
        n_x: 41,
        n_front: 4,
        n_t: 50,
    })
}

fn chars_csv(field: &CharField) -> Artifact {
    let rows = field.polylines.iter().flat_map(|p| {
        p.points
            .iter()
            .map(move |&(t, x)| vec![p.id.to_string(), p.family.label().to_string(), num(t), num(x)])
    });
    ("chars.csv", table(&["polyline_id", "family", "t", "x"], rows))
}

fn initial_state(s: &Scenario) -> Result<PiecewiseConstantState, Error> {
    let window = s.run.window.map(|[a, b]| (a, b));
    approximate_initial(&s.initial, s.run.delta.unwrap_or(1.0), window)
}

fn tracked(s: &Scenario, h: f64) -> Result<(Trace, Outputs), Error> {
    let state = initial_state(s)?;
    let trace = track(&s.params, &state, h, s.horizon)?;
    let (a, b) = match (state.breakpoints.first(), state.breakpoints.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    let window = default_window(s, a, b);
    let eps = s.params.epsilon();

    let fronts = trace.segments.iter().map(|g| {
        vec![
            g.id.to_string(),
            num(g.t_start),
            num(g.t_end),
            num(g.x_start),
            num(g.x_end),
            num(g.u_left),
            num(g.u_right),
            g.kind.label().to_string(),
            g.regime.sigma(eps).map(num).unwrap_or_default(),
            num(g.speed),
        ]
    });
    let fronts = table(
        &[
            "front_id", "t_start", "t_end", "x_start", "x_end", "u_left", "u_right", "kind", "sigma", "speed",
        ],
        fronts,
    );
    let ids = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
    let events = trace.events.iter().map(|e| {
        vec![
            num(e.t),
            num(e.x),
            e.kind.label().to_string(),
            ids(&e.incoming),
            ids(&e.outgoing),
            num(e.tv_before),
            num(e.tv_after),
        ]
    });
    let events = table(
        &["t", "x", "type", "in_ids", "out_ids", "tv_before", "tv_after"],
        events,
    );

    let mut snaps = Vec::new();
    for &t in &s.snapshot_times {
        let st = trace.state_at(t)?;
        snaps.extend(snapshot_rows(t, intervals(window, &st.breakpoints, |x| st.value_at(x))));
    }
    let snapshots = table(&SNAPSHOT_HEADER, snaps);

    let mut times = s.snapshot_times.clone();
    times.extend(trace.event_times());
    times.push(s.horizon);
    let d = diagnostics(&s.params, &trace, &times)?;
    let diag = table(
        &["t", "tv", "front_count", "plume_area", "support_width"],
        d.series.iter().map(|p| {
            vec![
                num(p.t),
                num(p.tv),
                p.front_count.to_string(),
                num(p.plume_area),
                num(p.support_width),
            ]
        }),
    );
    let field = char_field(&s.params, FieldSource::Tracked(&trace), &char_grid(s, window))?;

    let final_live = trace.live_at(s.horizon)?;
    let summary = json!({
        "initial_fronts": trace.series[0].front_count,
        "final_fronts": final_live.len(),
        "events": trace.events.len(),
        "initial_tv": trace.initial.total_variation(),
        "final_tv": trace.series.last().map(|p| p.tv),
        "tv_non_increasing": d.tv_non_increasing,
        "count_non_increasing": d.count_non_increasing,
        "lipschitz": d.lipschitz,
        "max_abs_speed": d.max_abs_speed,
    });
    let outputs = Outputs {
        artifacts: vec![
            ("fronts.csv", fronts),
            ("events.csv", events),
            ("snapshots.csv", snapshots),
            ("diag.csv", diag),
            chars_csv(&field),
        ],
        window,
        summary,
    };
    Ok((trace, outputs))
}

fn riemann(s: &Scenario) -> Result<Outputs, Error> {
    let (_, vals) = s.initial.steps().expect("checked");
    let sol = solve_riemann(&s.params, vals[0], vals[1])?;
    // Shocks need no h; it only sets the fan resolution.
    let h = s.run.h.unwrap_or(1.0);
    let (_, mut out) = tracked(s, h)?;
    let wave = match sol {
        RiemannSolution::Constant(u) => json!({"kind": "constant", "u": u}),
        RiemannSolution::Shock(f) => json!({
            "kind": "shock",
            "speed": f.speed,
            "regime": f.regime,
            "sigma": f.sigma(s.params.epsilon()),
        }),
        RiemannSolution::Rarefaction(fan) => json!({
            "kind": "rarefaction",
            "trailing_speed": fan.trailing_speed(&s.params),
            "leading_speed": fan.leading_speed(&s.params),
            "split": fan.split,
        }),
    };
    out.summary["wave"] = wave;
    Ok(out)
}

fn interact(s: &Scenario) -> Result<Outputs, Error> {
    let (_, vals) = s.initial.steps().expect("checked");
    let h = s.run.h.expect("checked");
    let c = classify_pair_detailed(&s.params, vals[0], vals[1], vals[2], Representation::Expansion(h))?;
    let (_, mut out) = tracked(s, h)?;
    out.summary["pair"] = json!({
        "case": c.case.label(),
        "interacts": c.case.interacts(),
        "left_speed": c.left_speed,
        "right_speed": c.right_speed,
        "inferred": c.inferred,
    });
    Ok(out)
}

fn grid_cells(sol: &GridSolution, values: &[f64]) -> Vec<(f64, f64, f64)> {
    let edges = sol.edges();
    values
        .iter()
        .enumerate()
        .map(|(i, &u)| (edges[i], edges[i + 1], u))
        .collect()
}

fn oracle_compare(s: &Scenario) -> Result<Outputs, Error> {
    let h = s.run.h.expect("checked");
    let cfg = s.run.grid.expect("checked");
    let (trace, mut out) = tracked(s, h)?;
    let sol = fv_solve(&s.params, &s.initial, &cfg, s.horizon, &s.snapshot_times)?;
    let mut fv_rows = Vec::new();
    let mut cmp_rows = Vec::new();
    let window = (out.window.0.max(cfg.x_min), out.window.1.min(cfg.x_max));
    for (k, &t) in sol.times.iter().enumerate() {
        fv_rows.extend(snapshot_rows(t, grid_cells(&sol, &sol.values[k])));
        let a = Sampled::from_grid(&sol, t).expect("stored time");
        let b = Sampled::PiecewiseConstant(trace.state_at(t)?);
        cmp_rows.push(vec![num(t), num(compare_l1(&a, &b, window)?)]);
    }
    out.artifacts
        .push(("fv_snapshots.csv", table(&SNAPSHOT_HEADER, fv_rows)));
    out.artifacts.push(("compare.csv", table(&["t", "l1"], cmp_rows)));
    out.summary["fv"] = json!({
        "grid": cfg,
        "cells": sol.centers.len(),
        "steps": sol.steps,
        "sigma_rule": sol.sigma_rule,
        "compare_window": [window.0, window.1],
    });
    Ok(out)
}

fn characteristics(s: &Scenario) -> Result<Outputs, Error> {
    let (a, b) = s.initial.support_window().unwrap_or((-1.0, 1.0));
    let window = default_window(s, a, b);
    let field = char_field(
        &s.params,
        FieldSource::Smooth {
            profile: &s.initial,
            horizon: s.horizon,
        },
        &char_grid(s, window),
    )?;
    let t_break = shock_formation_time(&s.params, &s.initial)?;
    let n = 400;
    let dx = (window.1 - window.0) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| window.0 + (i as f64 + 0.5) * dx).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &t in &s.snapshot_times {
        if t >= t_break {
            skipped.push(t);
            continue;
        }
        let u = smooth_solve(&s.params, &s.initial, t, &xs)?;
        let cells = u
            .iter()
            .enumerate()
            .map(|(i, &v)| (window.0 + i as f64 * dx, window.0 + (i + 1) as f64 * dx, v));
        rows.extend(snapshot_rows(t, cells.collect()));
    }
    let mut artifacts = vec![chars_csv(&field), ("snapshots.csv", table(&SNAPSHOT_HEADER, rows))];
    let mut summary = json!({
        "polylines": field.polylines.len(),
        "shock_formation_time": t_break.is_finite().then_some(t_break),
        "skipped_snapshot_times": skipped,
    });
    if let Some(x_bar) = s.run.corner {
        let path = corner_path(&s.params, &s.initial, x_bar, s.horizon)?;
        let rows = (0..path.t.len()).map(|k| {
            vec![
                num(path.t[k]),
                num(path.gamma[k]),
                num(path.speed[k]),
                num(path.ux_minus[k]),
                num(path.ux_plus[k]),
            ]
        });
        artifacts.push((
            "corner.csv",
            table(&["t", "gamma", "speed", "ux_minus", "ux_plus"], rows),
        ));
        summary["corner"] = json!({
            "x_bar": x_bar,
            "initial_speed": path.speed[0],
            "richardson_initial_speed": path.initial_speed_richardson(),
            "shock_formation": path.shock_formation,
        });
    }
    Ok(Outputs {
        artifacts,
        window,
        summary,
    })
}

pub fn execute(s: &Scenario) -> Result<Outputs, Error> {
    match s.mode {
        Mode::Riemann => riemann(s),
        Mode::Interact => interact(s),
        Mode::Track => tracked(s, s.run.h.expect("checked")).map(|(_, o)| o),
        Mode::OracleCompare => oracle_compare(s),
        Mode::Characteristics => characteristics(s),
    }
}

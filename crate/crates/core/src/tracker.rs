//! Wave-front tracking. Initial data is replaced by a step function, each
//! jump by shocks or fans of expansion shocks, and the fronts are advanced
//! exactly from one binary collision to the next.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{check_state, Regime, TwoFlux};
use crate::interactions::{collision_time, resolve_collision};
use crate::profile::Profile;
use crate::riemann::{discretize_rarefaction, Front, FrontKind, RarefactionFan};

/// Relative tolerance for treating event times (and positions) as equal.
pub const EVENT_TOL: f64 = 1e-12;

/// A step function: `values[0]` on `(-inf, breakpoints[0])`, `values[i]` on
/// `[breakpoints[i-1], breakpoints[i])`, `values[n]` on the right tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantState {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstantState {
    pub fn constant(u: f64) -> Result<Self> {
        Ok(Self {
            breakpoints: Vec::new(),
            values: vec![check_state(u)?],
        })
    }

    /// Builds a state, merging equal neighbouring values and coincident
    /// breakpoints. Breakpoints must be non-decreasing.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("breakpoints must be finite and sorted".into()));
        }
        let values = values.into_iter().map(check_state).collect::<Result<Vec<_>>>()?;
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut vals = vec![values[0]];
        for (i, &x) in breakpoints.iter().enumerate() {
            let v = values[i + 1];
            if bp.last() == Some(&x) {
                // Coincident breakpoint: the interval in between is empty.
                bp.pop();
                vals.pop();
            }
            if *vals.last().unwrap() != v {
                bp.push(x);
                vals.push(v);
            }
        }
        Ok(Self {
            breakpoints: bp,
            values: vals,
        })
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact `L1` distance; infinite when the tails differ.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        if self.values[0] != other.values[0] || self.values.last() != other.values.last() {
            return f64::INFINITY;
        }
        let mut pts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * (self.value_at(mid) - other.value_at(mid)).abs()
            })
            .sum()
    }

    /// `int u dx` between the outermost breakpoints.
    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[1] - w[0]) * self.values[i + 1])
            .sum()
    }
}

/// Approximates initial data by a step function.
///
/// Step data is converted exactly. Other profiles are point-sampled at the
/// midpoints of cells of width `delta` tiling `window`, with the tails taken
/// from the profile at the window ends and equal neighbours merged.
pub fn approximate_initial(
    profile: &Profile,
    delta: f64,
    window: Option<(f64, f64)>,
) -> Result<PiecewiseConstantState> {
    profile.validate()?;
    if let Some((pts, vals)) = profile.steps() {
        return PiecewiseConstantState::new(pts, vals);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let (a, b) = window
        .or_else(|| profile.support_window())
        .ok_or_else(|| Error::InvalidArgument("profile needs a sampling window".into()))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("empty sampling window [{a}, {b}]")));
    }
    let n = ((b - a) / delta - 1e-9).ceil().max(1.0) as usize;
    let edges: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + i as f64 * delta }).collect();
    let mut vals = Vec::with_capacity(n + 2);
    vals.push(profile.value(a));
    vals.extend(edges.windows(2).map(|w| profile.value(0.5 * (w[0] + w[1]))));
    vals.push(profile.value(b));
    PiecewiseConstantState::new(edges, vals)
}

/// Replaces every jump of `state` by the fronts solving its Riemann problem:
/// one shock per up-jump, a fan of expansion shocks of size at most `h` per
/// down-jump. Fronts come out in spatial order; members of a fan share a
/// position and are ordered by speed.
pub fn initialize_fronts<P: TwoFlux + ?Sized>(
    params: &P,
    state: &PiecewiseConstantState,
    h: f64,
) -> Result<Vec<Front>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
    }
    let mut out = Vec::new();
    for (i, &x) in state.breakpoints.iter().enumerate() {
        let (l, r) = (state.values[i], state.values[i + 1]);
        if l < r {
            out.push(Front::new(params, x, l, r)?);
        } else {
            let fan = RarefactionFan::new(params, l, r, (x, 0.0))?;
            out.extend(discretize_rarefaction(params, &fan, h)?);
        }
    }
    Ok(out)
}

/// One front over its whole life.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub kind: FrontKind,
    pub regime: Regime,
    pub speed: f64,
}

impl Segment {
    pub fn position(&self, t: f64) -> f64 {
        self.x_start + self.speed * (t - self.t_start)
    }

    pub fn jump(&self) -> f64 {
        (self.u_right - self.u_left).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Collision,
    Annihilation,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Collision => "collision",
            EventKind::Annihilation => "annihilation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub kind: EventKind,
    pub incoming: [usize; 2],
    pub outgoing: Vec<usize>,
    pub tv_before: f64,
    pub tv_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub tv: f64,
    pub front_count: usize,
}

/// Live fronts, in spatial order, from `t` until the next epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub t: f64,
    pub live: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub initial: PiecewiseConstantState,
    pub horizon: f64,
    pub h: f64,
    /// Indexed by front id.
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
    pub series: Vec<SeriesPoint>,
    pub epochs: Vec<Epoch>,
}

fn segment_from(id: usize, f: &Front, t: f64) -> Segment {
    Segment {
        id,
        t_start: t,
        t_end: f64::INFINITY,
        x_start: f.x,
        x_end: f64::NAN,
        u_left: f.u_left,
        u_right: f.u_right,
        kind: f.kind,
        regime: f.regime,
        speed: f.speed,
    }
}

fn front_at(seg: &Segment, t: f64) -> Front {
    Front {
        x: seg.position(t),
        u_left: seg.u_left,
        u_right: seg.u_right,
        speed: seg.speed,
        kind: seg.kind,
        regime: seg.regime,
    }
}

/// Advances `fronts` (given at `t = 0` in spatial order) up to `horizon`.
///
/// Each step predicts the next collision of every adjacent pair, handles the
/// earliest one and recomputes. Ties within [`EVENT_TOL`] go to the leftmost
/// pair, then to the pair with the largest speed difference.
pub fn evolve<P: TwoFlux + ?Sized>(
    params: &P,
    initial: &PiecewiseConstantState,
    fronts: Vec<Front>,
    horizon: f64,
    h: f64,
) -> Result<Trace> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon T = {horizon} must be positive"
        )));
    }
    for w in fronts.windows(2) {
        if w[1].x < w[0].x || (w[0].u_right - w[1].u_left).abs() > 1e-12 {
            return Err(Error::InconsistentMiddle {
                left: w[0].u_right,
                right: w[1].u_left,
            });
        }
    }
    let mut segments: Vec<Segment> = fronts
        .iter()
        .enumerate()
        .map(|(i, f)| segment_from(i, f, 0.0))
        .collect();
    let mut live: Vec<usize> = (0..segments.len()).collect();
    let mut events = Vec::new();
    let tv_of = |segs: &[Segment], live: &[usize]| live.iter().map(|&i| segs[i].jump()).sum::<f64>();
    let mut series = vec![SeriesPoint {
        t: 0.0,
        tv: tv_of(&segments, &live),
        front_count: live.len(),
    }];
    let mut epochs = vec![Epoch {
        t: 0.0,
        live: live.clone(),
    }];
    let mut now = 0.0f64;

    loop {
        // (t, x, closing speed, index of left member in `live`)
        let mut best: Option<(f64, f64, f64, usize)> = None;
        for k in 0..live.len().saturating_sub(1) {
            let (a, b) = (&segments[live[k]], &segments[live[k + 1]]);
            let Some((t, x)) = collision_time(&front_at(a, now), &front_at(b, now), now) else {
                continue;
            };
            if t > horizon {
                continue;
            }
            let closing = a.speed - b.speed;
            best = match best {
                None => Some((t, x, closing, k)),
                Some(cur) => {
                    let ttol = EVENT_TOL * (1.0 + cur.0.abs());
                    let xtol = EVENT_TOL * (1.0 + cur.1.abs());
                    let better = if t < cur.0 - ttol {
                        true
                    } else if t > cur.0 + ttol {
                        false
                    } else if x < cur.1 - xtol {
                        true
                    } else if x > cur.1 + xtol {
                        false
                    } else {
                        closing > cur.2
                    };
                    if better {
                        Some((t, x, closing, k))
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        let Some((t, x, _, k)) = best else { break };
        let t = t.max(now);
        let (il, ir) = (live[k], live[k + 1]);
        let out = resolve_collision(
            params,
            &front_at(&segments[il], t),
            &front_at(&segments[ir], t),
            (t, x),
            h,
        )?;
        for &i in &[il, ir] {
            segments[i].t_end = t;
            segments[i].x_end = segments[i].position(t);
        }
        let mut new_ids = Vec::with_capacity(out.outgoing.len());
        for f in &out.outgoing {
            let id = segments.len();
            segments.push(segment_from(id, f, t));
            new_ids.push(id);
        }
        live.splice(k..k + 2, new_ids.iter().copied());
        events.push(Event {
            t,
            x,
            kind: if new_ids.is_empty() {
                EventKind::Annihilation
            } else {
                EventKind::Collision
            },
            incoming: [il, ir],
            outgoing: new_ids,
            tv_before: out.tv_before,
            tv_after: out.tv_after,
        });
        series.push(SeriesPoint {
            t,
            tv: tv_of(&segments, &live),
            front_count: live.len(),
        });
        epochs.push(Epoch { t, live: live.clone() });
        now = t;
    }
    for &i in &live {
        segments[i].t_end = horizon;
        segments[i].x_end = segments[i].position(horizon);
    }
    Ok(Trace {
        initial: initial.clone(),
        horizon,
        h,
        segments,
        events,
        series,
        epochs,
    })
}

/// Convenience pipeline: initialize and evolve.
pub fn track<P: TwoFlux + ?Sized>(params: &P, state: &PiecewiseConstantState, h: f64, horizon: f64) -> Result<Trace> {
    let fronts = initialize_fronts(params, state, h)?;
    evolve(params, state, fronts, horizon, h)
}

impl Trace {
    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn epoch_at(&self, t: f64) -> &Epoch {
        let i = self.epochs.partition_point(|e| e.t <= t);
        &self.epochs[i.saturating_sub(1)]
    }

    /// Fronts alive at `t`, in spatial order.
    pub fn live_at(&self, t: f64) -> Result<Vec<&Segment>> {
        self.check_time(t)?;
        Ok(self.epoch_at(t).live.iter().map(|&i| &self.segments[i]).collect())
    }

    /// The step function at time `t`.
    pub fn state_at(&self, t: f64) -> Result<PiecewiseConstantState> {
        let live = self.live_at(t)?;
        if live.is_empty() {
            return PiecewiseConstantState::new(Vec::new(), vec![self.initial.values[0]]);
        }
        let mut bp = Vec::with_capacity(live.len());
        let mut vals = vec![live[0].u_left];
        let mut last = f64::NEG_INFINITY;
        for s in &live {
            // Guard against round-off inversions of nearly coincident fronts.
            last = s.position(t).max(last);
            bp.push(last);
            vals.push(s.u_right);
        }
        PiecewiseConstantState::new(bp, vals)
    }

    /// Samples the solution at time `t` at each of `xs`.
    pub fn sample_solution(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let live = self.live_at(t)?;
        if live.is_empty() {
            return Ok(vec![self.initial.values[0]; xs.len()]);
        }
        let mut pos = Vec::with_capacity(live.len());
        let mut last = f64::NEG_INFINITY;
        for s in &live {
            last = s.position(t).max(last);
            pos.push(last);
        }
        Ok(xs
            .iter()
            .map(|&x| {
                let k = pos.partition_point(|&p| p <= x);
                if k == 0 {
                    live[0].u_left
                } else {
                    live[k - 1].u_right
                }
            })
            .collect())
    }

    /// Ids of the successive fronts produced by repeated collisions of `id`,
    /// starting with `id` itself.
    pub fn follow(&self, id: usize) -> Vec<usize> {
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(e) = self.events.iter().find(|e| e.incoming.contains(&cur)) {
            match e.outgoing.first() {
                Some(&next) => {
                    chain.push(next);
                    cur = next;
                }
                None => break,
            }
        }
        chain
    }

    /// Event and horizon times, for snapshot selection.
    pub fn event_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagPoint {
    pub t: f64,
    pub tv: f64,
    pub front_count: usize,
    /// `int u dx` between the outermost fronts.
    pub plume_area: f64,
    /// Distance between the outermost fronts.
    pub support_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    /// `TV(u0) sup |f'|`.
    pub bound: f64,
    /// Largest observed `||u(t2) - u(t1)||_1 / |t2 - t1|`.
    pub observed: f64,
    pub pairs: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub series: Vec<DiagPoint>,
    pub lipschitz: LipschitzCheck,
    pub tv_non_increasing: bool,
    pub count_non_increasing: bool,
    pub max_abs_speed: f64,
}

/// Diagnostic series at `times` (clamped to the horizon, sorted) and the
/// pairwise `L1` Lipschitz check over those times.
pub fn diagnostics<P: TwoFlux + ?Sized>(params: &P, trace: &Trace, times: &[f64]) -> Result<Diagnostics> {
    let mut ts: Vec<f64> = times.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let states = ts.iter().map(|&t| trace.state_at(t)).collect::<Result<Vec<_>>>()?;
    let series = ts
        .iter()
        .zip(&states)
        .map(|(&t, s)| {
            let count = trace.epoch_at(t).live.len();
            let width = match (s.breakpoints.first(), s.breakpoints.last()) {
                (Some(a), Some(b)) => b - a,
                _ => 0.0,
            };
            DiagPoint {
                t,
                tv: s.total_variation(),
                front_count: count,
                plume_area: s.integral(),
                support_width: width,
            }
        })
        .collect();
    let bound = trace.initial.total_variation() * params.max_speed();
    let mut observed = 0.0f64;
    let mut pairs = 0;
    let mut holds = true;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let dt = ts[j] - ts[i];
            let d = states[i].l1_distance(&states[j]);
            pairs += 1;
            if d > bound * dt * (1.0 + 1e-9) + 1e-12 {
                holds = false;
            }
            if dt > 0.0 {
                observed = observed.max(d / dt);
            }
        }
    }
    let tol = 1e-12;
    let tv_non_increasing = trace.series.windows(2).all(|w| w[1].tv <= w[0].tv + tol)
        && trace.events.iter().all(|e| e.tv_after <= e.tv_before + tol);
    let count_non_increasing = trace.series.windows(2).all(|w| w[1].front_count < w[0].front_count);
    let max_abs_speed = trace.segments.iter().map(|s| s.speed.abs()).fold(0.0, f64::max);
    Ok(Diagnostics {
        series,
        lipschitz: LipschitzCheck {
            bound,
            observed,
            pairs,
            holds,
        },
        tv_non_increasing,
        count_non_increasing,
        max_abs_speed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxParams;
    use crate::riemann::chord;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(m: f64, eps: f64) -> FluxParams {
        FluxParams::new(m, eps).unwrap()
    }

    fn pcs(bp: &[f64], v: &[f64]) -> PiecewiseConstantState {
        PiecewiseConstantState::new(bp.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn box_plume_approximation() {
        let s = approximate_initial(&Profile::boxed(0.0, 1.0, 0.6), 0.1, None).unwrap();
        assert_eq!(s.breakpoints, vec![0.0, 1.0]);
        assert_eq!(s.values, vec![0.0, 0.6, 0.0]);
        assert_abs_diff_eq!(s.total_variation(), 1.2, epsilon = 1e-15);
    }

    #[test]
    fn hat_approximation() {
        let hat = Profile::Hat {
            center: 0.0,
            peak: 0.5,
            half_width: 1.0,
        };
        let s = approximate_initial(&hat, 0.5, None).unwrap();
        assert_eq!(s.breakpoints, vec![-1.0, -0.5, 0.5, 1.0]);
        assert_eq!(s.values, vec![0.0, 0.125, 0.375, 0.125, 0.0]);
        assert!(s.total_variation() <= 1.0);
        for delta in [0.3, 0.1, 0.01] {
            let s = approximate_initial(&hat, delta, None).unwrap();
            assert!(s.total_variation() <= 1.0 + 1e-12);
            assert!(s.min_value() >= 0.0 && s.max_value() <= 0.5);
        }
    }

    #[test]
    fn constant_state() {
        let s = approximate_initial(&Profile::riemann(0.4, 0.4, 0.0), 0.1, None).unwrap();
        assert!(s.breakpoints.is_empty());
        assert_eq!(s.values, vec![0.4]);
        assert_eq!(s.total_variation(), 0.0);
    }

    #[test]
    fn state_merging_and_l1() {
        let s = pcs(&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.6, 0.4, 0.2, 0.0]);
        assert_eq!(s.breakpoints, vec![0.0, 1.0]);
        assert_eq!(s.values, vec![0.0, 0.2, 0.0]);
        let a = pcs(&[0.0], &[1.0, 0.0]);
        let b = pcs(&[0.25], &[1.0, 0.0]);
        assert_abs_diff_eq!(a.l1_distance(&b), 0.25, epsilon = 1e-15);
        assert_eq!(a.l1_distance(&pcs(&[0.0], &[0.5, 0.0])), f64::INFINITY);
    }

    #[test]
    fn box_plume_fronts() {
        let q = p(1.0, 0.4);
        let fronts = initialize_fronts(&q, &pcs(&[0.0, 1.0], &[0.0, 0.6, 0.0]), 0.2).unwrap();
        assert_eq!(fronts.len(), 4);
        assert_eq!(fronts[0].kind, FrontKind::AdmissibleShock);
        assert_abs_diff_eq!(fronts[0].speed, 0.4, epsilon = 1e-12);
        let expected = [
            (0.6, 0.4, 0.0, Regime::Stationary),
            (0.4, 0.2, 0.24, Regime::Lower),
            (0.2, 0.0, 0.48, Regime::Lower),
        ];
        for (f, (l, r, s, reg)) in fronts[1..].iter().zip(expected) {
            assert_eq!(f.kind, FrontKind::ExpansionShock);
            assert_eq!(f.x, 1.0);
            assert_abs_diff_eq!(f.u_left, l, epsilon = 1e-12);
            assert_abs_diff_eq!(f.u_right, r, epsilon = 1e-12);
            assert_abs_diff_eq!(f.speed, s, epsilon = 1e-12);
            assert_eq!(f.regime, reg);
        }
    }

    #[test]
    fn decreasing_staircase_never_interacts() {
        let q = p(3.0, 0.5);
        let s = pcs(&[0.0, 1.0, 2.0], &[0.9, 0.6, 0.3, 0.1]);
        let tr = track(&q, &s, 0.05, 100.0).unwrap();
        assert!(tr.events.is_empty());
        assert!(tr.segments.iter().all(|g| g.kind == FrontKind::ExpansionShock));
    }

    #[test]
    fn two_shock_merger() {
        let q = p(1.0, 0.4);
        let s = pcs(&[0.0, 1.0], &[0.1, 0.2, 1.0]);
        let tr = track(&q, &s, 0.1, 5.0).unwrap();
        assert_eq!(tr.events.len(), 1);
        let e = &tr.events[0];
        assert_abs_diff_eq!(e.t, 1.0 / 0.82, epsilon = 1e-12);
        assert_eq!(e.kind, EventKind::Collision);
        let out = &tr.segments[e.outgoing[0]];
        assert_abs_diff_eq!(out.speed, -0.06, epsilon = 1e-14);
        assert_abs_diff_eq!(e.tv_before, 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!(e.tv_after, 0.9, epsilon = 1e-14);
    }

    #[test]
    fn separating_case_c_has_no_events() {
        let q = p(1.0, 0.4);
        let s = pcs(&[0.0, 1.0], &[0.5, 0.3, 0.46]);
        let tr = track(&q, &s, 0.01, 1000.0).unwrap();
        assert!(tr.events.is_empty(), "{:?}", tr.events.first());
    }

    #[test]
    fn annihilation_drops_tv_by_twice_the_jump() {
        let q = p(1.0, 0.4);
        let s = pcs(&[0.0, 0.5], &[0.2, 0.5, 0.2]);
        let tr = track(&q, &s, 1.0, 10.0).unwrap();
        let e = &tr.events[0];
        assert_eq!(e.kind, EventKind::Annihilation);
        assert_abs_diff_eq!(e.tv_before - e.tv_after, 0.6, epsilon = 1e-14);
        assert_eq!(tr.state_at(10.0).unwrap().values, vec![0.2]);
    }

    #[test]
    fn sampling() {
        let q = p(1.0, 0.0);
        // Shock 0.1 | 0.4 has speed f-chord 0.5.
        let s = pcs(&[0.0], &[0.1, 0.4]);
        let tr = track(&q, &s, 0.1, 2.0).unwrap();
        assert_abs_diff_eq!(tr.segments[0].speed, 0.5, epsilon = 1e-14);
        assert_eq!(tr.sample_solution(2.0, &[0.9, 1.1]).unwrap(), vec![0.1, 0.4]);
        assert!(matches!(
            tr.sample_solution(2.5, &[0.0]),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(tr.sample_solution(-0.1, &[0.0]).is_err());

        let s = pcs(&[0.0, 1.0], &[0.0, 0.6, 0.0]);
        let tr = track(&p(1.0, 0.4), &s, 0.01, 1.0).unwrap();
        assert_eq!(tr.state_at(0.0).unwrap(), s);
    }

    #[test]
    fn case_a_terminates_in_single_shock() {
        let q = p(1.0, 0.4);
        let s = pcs(&[0.0, 1.0], &[0.2, 1.0, 0.3]);
        let tr = track(&q, &s, 0.01, 400.0).unwrap();
        let end = tr.state_at(400.0).unwrap();
        assert_eq!(end.values, vec![0.2, 0.3]);
        let live = tr.live_at(400.0).unwrap();
        assert_eq!(live.len(), 1);
        assert_abs_diff_eq!(live[0].speed, chord(&q, 0.2, 0.3), epsilon = 1e-12);
        assert_abs_diff_eq!(live[0].speed, 0.5, epsilon = 1e-12);
        let chain = tr.follow(0);
        assert_eq!(*chain.last().unwrap(), live[0].id);
    }

    #[test]
    fn deterministic() {
        let q = p(4.0, 0.3);
        let s = pcs(&[0.0, 0.4, 1.0, 1.7], &[0.1, 0.8, 0.3, 0.9, 0.0]);
        let a = track(&q, &s, 0.02, 20.0).unwrap();
        let b = track(&q, &s, 0.02, 20.0).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    fn random_state() -> impl Strategy<Value = (f64, f64, PiecewiseConstantState, f64)> {
        (
            1.0f64..20.0,
            0.0f64..=1.0,
            prop::collection::vec((0.01f64..1.0, 0.0f64..=1.0), 1..8),
            0.0f64..=1.0,
            0.03f64..0.3,
        )
            .prop_map(|(m, eps, jumps, v0, h)| {
                let mut x = 0.0;
                let mut bp = Vec::new();
                let mut vals = vec![v0];
                for (dx, v) in jumps {
                    x += dx;
                    bp.push(x);
                    vals.push(v);
                }
                (m, eps, PiecewiseConstantState::new(bp, vals).unwrap(), h)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn tracking_invariants((m, eps, state, h) in random_state()) {
            let q = p(m, eps);
            let horizon = 30.0;
            let tr = track(&q, &state, h, horizon).unwrap();
            let mut times: Vec<f64> = (0..=10).map(|i| horizon * i as f64 / 10.0).collect();
            times.extend(tr.event_times());
            let d = diagnostics(&q, &tr, &times).unwrap();
            prop_assert!(d.tv_non_increasing);
            prop_assert!(d.count_non_increasing);
            prop_assert!(d.lipschitz.holds, "{:?}", d.lipschitz);
            prop_assert!(d.max_abs_speed <= q.max_speed() + 1e-12);
            prop_assert!(tr.events.len() <= tr.series[0].front_count);
            prop_assert!(tr.events.windows(2).all(|w| w[1].t >= w[0].t));
            let levels: Vec<f64> = tr.segments[..tr.series[0].front_count]
                .iter()
                .flat_map(|g| [g.u_left, g.u_right])
                .collect();
            for t in [0.0, 1.0, 10.0, horizon] {
                let s = tr.state_at(t).unwrap();
                for v in &s.values {
                    prop_assert!(*v >= state.min_value() && *v <= state.max_value());
                    prop_assert!(levels.contains(v));
                }
            }
        }
    }
}

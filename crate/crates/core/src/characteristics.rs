//! Characteristics for smooth data: the corner carried by a maximum, the
//! constant plateau opened by a minimum, pre-shock solution by inversion of
//! the characteristic map, and ray fields for plotting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::TwoFlux;
use crate::profile::Profile;
use crate::roots::bisect;
use crate::tracker::Trace;

/// Floor on `1 + sigma u0' f'' t` below which gradients are taken to blow up.
pub const BLOWUP_FLOOR: f64 = 1e-8;
/// Speeds `|f'(u0(x_bar))|` at or below this are rejected by [`corner_path`].
pub const DEGENERATE_SPEED: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerPath {
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
    pub speed: Vec<f64>,
    pub ux_minus: Vec<f64>,
    pub ux_plus: Vec<f64>,
    /// Time at which a one-sided slope blew up, if before the horizon.
    pub shock_formation: Option<f64>,
}

/// Switch factors left and right of a maximum. Left of it `u_x > 0`, so
/// `u_t = -sigma f' u_x` has the sign of `-c`.
fn corner_sigmas(c: f64, eps: f64) -> (f64, f64) {
    if c > 0.0 {
        (1.0, 1.0 - eps)
    } else {
        (1.0 - eps, 1.0)
    }
}

/// Foot point of the characteristic with switch `sigma` reaching `x` at `t`,
/// nearest to `x_bar` on its left (`left`) or right, together with the
/// smallest gradient denominator `1 + sigma u0' f'' t` met between the two.
fn foot<P: TwoFlux + ?Sized>(
    params: &P,
    u0: &Profile,
    x_bar: f64,
    sigma: f64,
    x: f64,
    t: f64,
    left: bool,
) -> Result<(f64, f64)> {
    let g = |xi: f64| xi + sigma * params.dflux(u0.value(xi)) * t - x;
    let den = |xi: f64| 1.0 + sigma * u0.derivative(xi) * params.d2flux(u0.value(xi)) * t;
    let dir = if left { -1.0 } else { 1.0 };
    let at_bar = g(x_bar);
    // The corner can sit on the foot of the extremum itself (eps = 0).
    if dir * at_bar >= 0.0 {
        return Ok((x_bar, den(x_bar)));
    }
    let reach = params.max_speed() * t + (x - x_bar).abs() + 1.0;
    let n = 400;
    let step = reach / n as f64;
    let mut min_den = den(x_bar);
    let mut prev = x_bar;
    for k in 1..=n {
        let xi = x_bar + dir * step * k as f64;
        min_den = min_den.min(den(xi));
        if dir * g(xi) >= 0.0 {
            let root = bisect(g, prev, xi, 1e-15 * (1.0 + x_bar.abs()), 0.0)?;
            return Ok((root, min_den.min(den(root))));
        }
        prev = xi;
    }
    Err(Error::NoRoot(format!("no characteristic foot for x = {x} at t = {t}")))
}

struct CornerState {
    speed: f64,
    ux_minus: f64,
    ux_plus: f64,
    min_denominator: f64,
}

fn corner_state<P: TwoFlux + ?Sized>(
    params: &P,
    u0: &Profile,
    x_bar: f64,
    c: f64,
    t: f64,
    gamma: f64,
) -> Result<CornerState> {
    let eps = params.epsilon();
    let (sm, sp) = corner_sigmas(c, eps);
    let (xl, min_l) = foot(params, u0, x_bar, sm, gamma, t, true)?;
    let (xr, min_r) = foot(params, u0, x_bar, sp, gamma, t, false)?;
    let (ul, ur) = (u0.value(xl), u0.value(xr));
    let (dl, dr) = (u0.derivative(xl), u0.derivative(xr));
    let den_l = 1.0 + sm * dl * params.d2flux(ul) * t;
    let den_r = 1.0 + sp * dr * params.d2flux(ur) * t;
    let ux_minus = dl / den_l;
    let ux_plus = dr / den_r;
    let fp = params.dflux(0.5 * (ul + ur));
    let gap = ux_minus - ux_plus;
    let speed = if gap > 0.0 {
        fp * (sm * ux_minus - sp * ux_plus) / gap
    } else {
        (1.0 - 0.5 * eps) * fp
    };
    Ok(CornerState {
        speed,
        ux_minus,
        ux_plus,
        min_denominator: min_l.min(min_r),
    })
}

/// Integrates the path of the corner started by a strict maximum of `u0` at
/// `x_bar` with classical RK4 at step `1e-3 T`.
///
/// The right-hand side `f'(u) (s- u_x- - s+ u_x+) / (u_x- - u_x+)` is 0/0 at
/// `t = 0`; the first stage uses its limit `(1 - eps/2) c` instead.
pub fn corner_path<P: TwoFlux + ?Sized>(params: &P, u0: &Profile, x_bar: f64, horizon: f64) -> Result<CornerPath> {
    u0.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon T = {horizon} must be positive"
        )));
    }
    let top = u0.value(x_bar);
    let probe = 1e-4 * (1.0 + x_bar.abs());
    if u0.derivative(x_bar).abs() > 1e-9 || !(u0.value(x_bar - probe) < top && u0.value(x_bar + probe) < top) {
        return Err(Error::InvalidArgument(format!(
            "x_bar = {x_bar} is not a strict maximum"
        )));
    }
    let c = params.dflux(top);
    if c.abs() <= DEGENERATE_SPEED {
        return Err(Error::Degenerate(format!(
            "maximum value {top} sits at u* where f' vanishes"
        )));
    }
    let eps = params.epsilon();
    let dt = 1e-3 * horizon;
    let steps = 1000;
    let v0 = (1.0 - 0.5 * eps) * c;
    let mut path = CornerPath {
        t: vec![0.0],
        gamma: vec![x_bar],
        speed: vec![v0],
        ux_minus: vec![0.0],
        ux_plus: vec![0.0],
        shock_formation: None,
    };
    let rhs = |t: f64, g: f64| -> Result<CornerState> { corner_state(params, u0, x_bar, c, t, g) };
    let mut g = x_bar;
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = if k == 0 { v0 } else { *path.speed.last().unwrap() };
        let k2 = rhs(t + 0.5 * dt, g + 0.5 * dt * k1)?.speed;
        let k3 = rhs(t + 0.5 * dt, g + 0.5 * dt * k2)?.speed;
        let k4 = rhs(t + dt, g + dt * k3)?.speed;
        g += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let tn = (k + 1) as f64 * dt;
        let st = rhs(tn, g)?;
        if st.min_denominator < BLOWUP_FLOOR {
            path.shock_formation = Some(tn);
            break;
        }
        path.t.push(tn);
        path.gamma.push(g);
        path.speed.push(st.speed);
        path.ux_minus.push(st.ux_minus);
        path.ux_plus.push(st.ux_plus);
    }
    Ok(path)
}

impl CornerPath {
    /// Richardson estimate of `gamma'(0)` from the first grid points:
    /// `2 D(2 dt) - D(4 dt)` with `D(s) = (gamma(s) - gamma(0)) / s`.
    pub fn initial_speed_richardson(&self) -> Option<f64> {
        if self.t.len() < 5 {
            return None;
        }
        let d = |k: usize| (self.gamma[k] - self.gamma[0]) / (self.t[k] - self.t[0]);
        Some(2.0 * d(2) - d(4))
    }
}

/// A strictly monotone piece `[a, b]` of the profile, or a knot.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    increasing: bool,
}

/// Monotone pieces of the profile on its support window together with the
/// interior minima.
fn monotone_pieces(u0: &Profile) -> Result<(f64, f64, Vec<Piece>, Vec<f64>)> {
    let (a, b) = u0
        .support_window()
        .ok_or_else(|| Error::InvalidArgument("profile has no bounded support window".into()))?;
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mut knots = vec![a];
    let mut minima = Vec::new();
    let sign = |x: f64| {
        let d = u0.derivative(x);
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    };
    // Interior samples only; the window ends may sit on kinks.
    let mut prev = sign(xs[1]);
    let mut prev_x = xs[1];
    for &x in &xs[2..n] {
        let s = sign(x);
        if s != 0 && prev != 0 && s != prev {
            let root =
                bisect(|y| u0.derivative(y), prev_x, x, 1e-15 * (1.0 + x.abs()), 0.0).unwrap_or(0.5 * (prev_x + x));
            knots.push(root);
            if prev < 0 {
                minima.push(root);
            }
        }
        if s != 0 {
            prev = s;
            prev_x = x;
        }
    }
    knots.push(b);
    let pieces = knots
        .windows(2)
        .map(|w| Piece {
            a: w[0],
            b: w[1],
            increasing: u0.value(w[1]) > u0.value(w[0]),
        })
        .collect();
    Ok((a, b, pieces, minima))
}

/// Switch for characteristics leaving a point where `u0' != 0`:
/// draining (`u_t < 0`) iff `f'(u) u0'` is positive.
fn branch_sigma<P: TwoFlux + ?Sized>(params: &P, u: f64, increasing: bool) -> f64 {
    let fp = params.dflux(u);
    let draining = (fp > 0.0) == increasing;
    if draining || fp == 0.0 {
        1.0
    } else {
        1.0 - params.epsilon()
    }
}

/// Earliest time at which `1 + sigma u0' f'' t` reaches [`BLOWUP_FLOOR`]
/// along a characteristic, estimated on a fine sample of the support.
pub fn shock_formation_time<P: TwoFlux + ?Sized>(params: &P, u0: &Profile) -> Result<f64> {
    let (a, b, _, _) = monotone_pieces(u0)?;
    let n = 8000;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let d = u0.derivative(x);
        if d == 0.0 {
            continue;
        }
        let u = u0.value(x);
        let rate = branch_sigma(params, u, d > 0.0) * d * params.d2flux(u);
        if rate < 0.0 {
            best = best.min((1.0 - BLOWUP_FLOOR) / -rate);
        }
    }
    Ok(best)
}

/// Solves the Cauchy problem for smooth data at time `t`, before any
/// gradient blow-up.
///
/// Each monotone piece is mapped forward with its own switch. Minima open a
/// constant plateau between the two characteristic speeds; near maxima the
/// two pieces overlap and the smaller candidate is the one left of the
/// corner's trace.
pub fn smooth_solve<P: TwoFlux + ?Sized>(params: &P, u0: &Profile, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
    u0.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t = {t} must be non-negative")));
    }
    if u0.is_piecewise_constant() {
        return Err(Error::InvalidArgument("smooth_solve needs a smooth profile".into()));
    }
    if t == 0.0 {
        return Ok(xs.iter().map(|&x| u0.value(x)).collect());
    }
    let t_break = shock_formation_time(params, u0)?;
    if t >= t_break {
        return Err(Error::ShockFormation(t_break));
    }
    let (a, b, pieces, minima) = monotone_pieces(u0)?;
    let (va, vb) = (u0.value(a), u0.value(b));
    let left_edge = a + params.char_speeds(va).faster * t;
    let right_edge = b + params.char_speeds(vb).slower * t;
    let map = |xi: f64, inc: bool| {
        let u = u0.value(xi);
        xi + branch_sigma(params, u, inc) * params.dflux(u) * t
    };
    let images: Vec<(f64, f64)> = pieces
        .iter()
        .map(|p| (map(p.a, p.increasing), map(p.b, p.increasing)))
        .collect();
    xs.iter()
        .map(|&x| {
            let mut best = f64::INFINITY;
            if x <= left_edge {
                best = best.min(va);
            }
            if x >= right_edge {
                best = best.min(vb);
            }
            for &m in &minima {
                let v = u0.value(m);
                let s = params.char_speeds(v);
                if x >= m + s.slower * t && x <= m + s.faster * t {
                    best = best.min(v);
                }
            }
            for (p, &(xa, xb)) in pieces.iter().zip(&images) {
                if x >= xa && x <= xb {
                    let xi = bisect(|y| map(y, p.increasing) - x, p.a, p.b, 1e-15 * (1.0 + x.abs()), 0.0)?;
                    best = best.min(u0.value(xi));
                }
            }
            if best.is_finite() {
                Ok(best)
            } else {
                Err(Error::NoRoot(format!("no characteristic reaches x = {x} at t = {t}")))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Fast,
    Slow,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Fast => "fast",
            Family::Slow => "slow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub id: usize,
    pub family: Family,
    /// `(t, x)` vertices.
    pub points: Vec<(f64, f64)>,
    /// Seeded inside a constant region (one member of a cross-hatch pair).
    pub constant_region: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CharField {
    pub polylines: Vec<Polyline>,
}

/// Seed layout for [`char_field`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharGrid {
    pub x_min: f64,
    pub x_max: f64,
    /// Seeds along `t = 0`.
    pub n_x: usize,
    /// Seeds along each expansion shock.
    #[serde(default = "default_fan_seeds")]
    pub n_front: usize,
    /// Vertices per ray for smooth sources.
    #[serde(default = "default_n_t")]
    pub n_t: usize,
}

fn default_fan_seeds() -> usize {
    4
}

fn default_n_t() -> usize {
    50
}

pub enum FieldSource<'a> {
    Tracked(&'a Trace),
    Smooth { profile: &'a Profile, horizon: f64 },
}

impl CharField {
    fn push(&mut self, family: Family, points: Vec<(f64, f64)>, constant_region: bool) {
        let id = self.polylines.len();
        self.polylines.push(Polyline {
            id,
            family,
            points,
            constant_region,
        });
    }

    pub fn speeds(&self) -> impl Iterator<Item = (Family, f64)> + '_ {
        self.polylines.iter().filter_map(|p| {
            let (a, b) = (p.points.first()?, p.points.last()?);
            (b.0 > a.0).then(|| (p.family, (b.1 - a.1) / (b.0 - a.0)))
        })
    }
}

/// First time after `t0` at which the ray `x0 + s (t - t0)` meets a front of
/// the trace, capped at the horizon.
fn ray_end(trace: &Trace, t0: f64, x0: f64, s: f64, skip: Option<usize>) -> f64 {
    let mut end = trace.horizon;
    for seg in &trace.segments {
        if Some(seg.id) == skip || seg.t_end <= t0 {
            continue;
        }
        let rel = s - seg.speed;
        if rel.abs() < 1e-14 {
            continue;
        }
        let t = (seg.x_start - x0 + s * t0 - seg.speed * seg.t_start) / rel;
        let lo = seg.t_start.max(t0 + 1e-12 * (1.0 + t0.abs()));
        if t > lo && t <= seg.t_end && t < end {
            end = t;
        }
    }
    end
}

/// Builds characteristic rays for plotting. In constant regions both
/// families are drawn; in smooth non-constant regions only the family the
/// switch selects. Rays stop where they enter a front (or stop carrying the
/// solution value, for smooth sources).
pub fn char_field<P: TwoFlux + ?Sized>(params: &P, source: FieldSource<'_>, grid: &CharGrid) -> Result<CharField> {
    if !(grid.x_min < grid.x_max) || grid.n_x < 2 {
        return Err(Error::InvalidArgument(
            "char grid needs x_min < x_max and n_x >= 2".into(),
        ));
    }
    let seeds: Vec<f64> = (0..grid.n_x)
        .map(|i| grid.x_min + (grid.x_max - grid.x_min) * i as f64 / (grid.n_x - 1) as f64)
        .collect();
    let mut field = CharField::default();
    match source {
        FieldSource::Tracked(trace) => {
            let starts: Vec<f64> = trace.live_at(0.0)?.iter().map(|s| s.x_start).collect();
            let u_at0 = trace.sample_solution(0.0, &seeds)?;
            for (&x0, &u) in seeds.iter().zip(&u_at0) {
                if starts.iter().any(|&p| (p - x0).abs() < 1e-12) {
                    continue;
                }
                let sp = params.char_speeds(u);
                for (fam, s) in [(Family::Fast, sp.faster), (Family::Slow, sp.slower)] {
                    let t1 = ray_end(trace, 0.0, x0, s, None);
                    field.push(fam, vec![(0.0, x0), (t1, x0 + s * t1)], true);
                }
            }
            for seg in trace
                .segments
                .iter()
                .filter(|s| s.kind == crate::riemann::FrontKind::ExpansionShock)
            {
                let t_end = seg.t_end.min(trace.horizon);
                for k in 0..grid.n_front {
                    let t0 = seg.t_start + (t_end - seg.t_start) * (k as f64 + 0.5) / grid.n_front as f64;
                    let x0 = seg.position(t0);
                    for (u, right) in [(seg.u_left, false), (seg.u_right, true)] {
                        let sp = params.char_speeds(u);
                        for (fam, s) in [(Family::Fast, sp.faster), (Family::Slow, sp.slower)] {
                            let leaves = if right { s > seg.speed } else { s < seg.speed };
                            if !leaves {
                                continue;
                            }
                            let t1 = ray_end(trace, t0, x0, s, Some(seg.id));
                            field.push(fam, vec![(t0, x0), (t1, x0 + s * (t1 - t0))], true);
                        }
                    }
                }
            }
        }
        FieldSource::Smooth { profile, horizon } => {
            let t_max = horizon.min(shock_formation_time(params, profile)? * (1.0 - 1e-6));
            let steps = grid.n_t.max(2);
            for &x0 in &seeds {
                let u = profile.value(x0);
                let d = profile.derivative(x0);
                let sp = params.char_speeds(u);
                let fams: Vec<(Family, f64, bool)> = if d.abs() < 1e-12 {
                    vec![(Family::Fast, sp.faster, true), (Family::Slow, sp.slower, true)]
                } else {
                    let s = branch_sigma(params, u, d > 0.0) * params.dflux(u);
                    let fam = if (s - sp.faster).abs() <= (s - sp.slower).abs() {
                        Family::Fast
                    } else {
                        Family::Slow
                    };
                    vec![(fam, s, false)]
                };
                for (fam, s, constant) in fams {
                    let mut pts = vec![(0.0, x0)];
                    for k in 1..=steps {
                        let t = t_max * k as f64 / steps as f64;
                        let x = x0 + s * t;
                        let v = smooth_solve(params, profile, t, &[x])?[0];
                        if (v - u).abs() > 1e-6 {
                            break;
                        }
                        pts.push((t, x));
                    }
                    if pts.len() > 1 {
                        field.push(fam, pts, constant);
                    }
                }
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxParams;
    use crate::tracker::{track, PiecewiseConstantState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(m: f64, eps: f64) -> FluxParams {
        FluxParams::new(m, eps).unwrap()
    }

    fn parabola(peak: f64) -> Profile {
        Profile::Parabola {
            center: 0.0,
            peak,
            curvature: 1.0,
        }
    }

    /// Corner position from continuity alone: the left and right
    /// characteristics arriving at the same point carry equal values.
    fn corner_by_continuity(q: &FluxParams, u0: &Profile, t: f64) -> f64 {
        let c = q.dflux(u0.value(0.0));
        let (sm, sp) = corner_sigmas(c, q.epsilon());
        // Parametrize by the level v: each side has a unique foot on its branch.
        let peak = u0.value(0.0);
        let branch = |v: f64, left: bool| {
            let r = ((peak - v).max(0.0)).sqrt();
            if left {
                -r
            } else {
                r
            }
        };
        let gap = |v: f64| {
            let xl = branch(v, true) + sm * q.dflux(v) * t;
            let xr = branch(v, false) + sp * q.dflux(v) * t;
            xl - xr
        };
        let v = bisect(gap, (peak - 0.25).max(1e-6), peak, 1e-15, 0.0).unwrap();
        branch(v, true) + sm * q.dflux(v) * t
    }

    #[test]
    fn corner_initial_speed() {
        let q = p(1.0, 0.4);
        let path = corner_path(&q, &parabola(0.3), 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(path.speed[0], 0.32, epsilon = 1e-15);
        let r = path.initial_speed_richardson().unwrap();
        assert!((r - 0.32).abs() < 0.01 * 0.32, "{r}");
        assert!(path.shock_formation.is_none());
    }

    #[test]
    fn corner_without_trapping_is_a_characteristic() {
        let q = p(1.0, 0.0);
        let path = corner_path(&q, &parabola(0.3), 0.0, 0.5).unwrap();
        for (&t, &g) in path.t.iter().zip(&path.gamma) {
            assert_abs_diff_eq!(g, 0.4 * t, epsilon = 1e-9);
        }
    }

    #[test]
    fn corner_matches_continuity_oracle() {
        for (m, eps, peak) in [(1.0, 0.4, 0.3), (2.0, 0.7, 0.2), (1.0, 0.5, 0.8), (5.0, 0.3, 0.9)] {
            let q = p(m, eps);
            let u0 = parabola(peak);
            let path = corner_path(&q, &u0, 0.0, 0.2).unwrap();
            let c = q.dflux(peak);
            for k in [100, 500, path.t.len() - 1] {
                let t = path.t[k];
                let oracle = corner_by_continuity(&q, &u0, t);
                assert!(
                    (path.gamma[k] - oracle).abs() < 1e-7,
                    "M={m} eps={eps} t={t}: {} vs {oracle}",
                    path.gamma[k]
                );
                let lo = c.min((1.0 - eps) * c) - 1e-9;
                let hi = c.max((1.0 - eps) * c) + 1e-9;
                assert!(path.speed[k] >= lo && path.speed[k] <= hi);
                assert!(path.ux_minus[k] > 0.0 && path.ux_plus[k] < 0.0);
            }
        }
    }

    #[test]
    fn corner_rejections() {
        let q = p(1.0, 0.4);
        assert!(matches!(
            corner_path(&q, &parabola(0.5), 0.0, 1.0),
            Err(Error::Degenerate(_))
        ));
        assert!(corner_path(&q, &parabola(0.3), 0.2, 1.0).is_err());
    }

    #[test]
    fn corner_flags_blowup() {
        let q = p(1.0, 0.4);
        let u0 = Profile::Gaussian {
            center: 0.0,
            amplitude: 0.9,
            width: 0.05,
            base: 0.0,
        };
        let path = corner_path(&q, &u0, 0.0, 5.0).unwrap();
        let tb = path.shock_formation.expect("blow-up expected");
        assert!(tb < 5.0);
    }

    #[test]
    fn constant_data() {
        let q = p(2.0, 0.3);
        let u0 = Profile::Tanh {
            center: 0.0,
            left: 0.4,
            right: 0.4,
            width: 1.0,
        };
        let v = smooth_solve(&q, &u0, 3.0, &[-2.0, 0.0, 5.0]).unwrap();
        assert_eq!(v, vec![0.4, 0.4, 0.4]);
    }

    fn valley(depth_to: f64) -> Profile {
        Profile::Gaussian {
            center: 0.0,
            amplitude: depth_to - 0.6,
            width: 0.5,
            base: 0.6,
        }
    }

    #[test]
    fn minimum_opens_plateau() {
        let q = p(1.0, 0.4);
        let u0 = valley(0.2);
        let xs: Vec<f64> = (0..=100).map(|i| 0.3 + 0.004 * i as f64).collect();
        let v = smooth_solve(&q, &u0, 1.0, &xs).unwrap();
        for (&x, &u) in xs.iter().zip(&v) {
            if (0.36..=0.6).contains(&x) {
                assert_abs_diff_eq!(u, 0.2, epsilon = 1e-12);
            } else if x < 0.36 - 1e-3 || x > 0.6 + 1e-3 {
                assert!(u > 0.2, "x={x} u={u}");
            }
        }
    }

    #[test]
    fn rarefaction_corner_slope_scaling() {
        // Decreasing data through u*: the slope jumps where f' changes sign,
        // the two one-sided slopes differing by the factor 1 - eps.
        let q = p(1.0, 0.4);
        let u0 = Profile::Tanh {
            center: 0.0,
            left: 0.9,
            right: 0.1,
            width: 0.5,
        };
        let t = 0.2;
        let x0 = 0.0; // u0(0) = 0.5 = u*, a fixed point of both maps
        let d = 1e-5;
        let v = smooth_solve(&q, &u0, t, &[x0 - d, x0, x0 + d]).unwrap();
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-12);
        let left = (v[1] - v[0]) / d;
        let right = (v[2] - v[1]) / d;
        // u_x = u0' / (1 + sigma u0' f'' t) at u*, sigma = 1 (left, u > u*) and 1 - eps.
        let s = u0.derivative(0.0);
        let expect_l = s / (1.0 + s * -2.0 * t);
        let expect_r = s / (1.0 + 0.6 * s * -2.0 * t);
        assert!((left - expect_l).abs() < 1e-3 * expect_l.abs(), "{left} {expect_l}");
        assert!((right - expect_r).abs() < 1e-3 * expect_r.abs(), "{right} {expect_r}");
    }

    #[test]
    fn post_shock_queries_rejected() {
        let q = p(1.0, 0.4);
        let u0 = Profile::Tanh {
            center: 0.0,
            left: 0.1,
            right: 0.9,
            width: 0.5,
        };
        let tb = shock_formation_time(&q, &u0).unwrap();
        assert!(tb.is_finite());
        assert!(smooth_solve(&q, &u0, 0.9 * tb, &[0.0]).is_ok());
        assert!(matches!(
            smooth_solve(&q, &u0, 1.1 * tb, &[0.0]),
            Err(Error::ShockFormation(_))
        ));
    }

    #[test]
    fn cross_hatch_on_constant_state() {
        let q = p(1.0, 0.4);
        let tr = track(&q, &PiecewiseConstantState::constant(0.2).unwrap(), 0.1, 1.0).unwrap();
        let grid = CharGrid {
            x_min: 0.0,
            x_max: 1.0,
            n_x: 5,
            n_front: 2,
            n_t: 10,
        };
        let field = char_field(&q, FieldSource::Tracked(&tr), &grid).unwrap();
        assert_eq!(field.polylines.len(), 10);
        for (fam, s) in field.speeds() {
            match fam {
                Family::Fast => assert_abs_diff_eq!(s, 0.6, epsilon = 1e-12),
                Family::Slow => assert_abs_diff_eq!(s, 0.36, epsilon = 1e-12),
            }
        }
        let tr = track(&q, &PiecewiseConstantState::constant(0.5).unwrap(), 0.1, 1.0).unwrap();
        let field = char_field(&q, FieldSource::Tracked(&tr), &grid).unwrap();
        assert!(field.speeds().all(|(_, s)| s == 0.0));
    }

    #[test]
    fn rays_stop_at_shocks() {
        let q = p(1.0, 0.4);
        let s = PiecewiseConstantState::new(vec![0.0], vec![0.2, 1.0]).unwrap();
        let tr = track(&q, &s, 0.1, 2.0).unwrap();
        let grid = CharGrid {
            x_min: -1.0,
            x_max: 1.0,
            n_x: 9,
            n_front: 2,
            n_t: 10,
        };
        let field = char_field(&q, FieldSource::Tracked(&tr), &grid).unwrap();
        for pl in &field.polylines {
            let &(t, x) = pl.points.last().unwrap();
            if t < 2.0 {
                assert_abs_diff_eq!(x, -0.12 * t, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn smooth_field_families() {
        let q = p(1.0, 0.4);
        let u0 = Profile::Tanh {
            center: 0.0,
            left: 0.1,
            right: 0.3,
            width: 0.5,
        };
        let grid = CharGrid {
            x_min: -1.0,
            x_max: 1.0,
            n_x: 11,
            n_front: 0,
            n_t: 10,
        };
        let field = char_field(
            &q,
            FieldSource::Smooth {
                profile: &u0,
                horizon: 0.2,
            },
            &grid,
        )
        .unwrap();
        // Increasing data below u*: draining side, the faster family.
        assert_eq!(field.polylines.len(), 11);
        assert!(field
            .polylines
            .iter()
            .all(|p| p.family == Family::Fast && !p.constant_region));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn values_are_carried_along_characteristics(
            m in 1.0f64..10.0, eps in 0.0f64..1.0, l in 0.0f64..=1.0, r in 0.0f64..=1.0,
            xi in -1.0f64..1.0, frac in 0.0f64..0.9,
        ) {
            prop_assume!((l - r).abs() > 0.05);
            let q = p(m, eps);
            let u0 = Profile::Tanh { center: 0.0, left: l, right: r, width: 0.5 };
            let tb = shock_formation_time(&q, &u0).unwrap();
            let t = (frac * tb).min(5.0);
            let u = u0.value(xi);
            let s = branch_sigma(&q, u, u0.derivative(xi) > 0.0);
            let x = xi + s * q.dflux(u) * t;
            let v = smooth_solve(&q, &u0, t, &[x]).unwrap()[0];
            prop_assert!((v - u).abs() < 1e-8, "u={} v={}", u, v);
        }

        #[test]
        fn plateau_width_grows_linearly(m in 1.0f64..10.0, eps in 0.05f64..0.95, low in 0.05f64..0.55, t in 0.05f64..0.5) {
            let q = p(m, eps);
            let u0 = valley(low);
            prop_assume!(t < shock_formation_time(&q, &u0).unwrap());
            let s = q.char_speeds(low);
            let width = (s.faster - s.slower) * t;
            prop_assert!((width - eps * q.dflux(low).abs() * t).abs() < 1e-12);
            let inside = smooth_solve(&q, &u0, t, &[s.slower * t + 1e-9, s.faster * t - 1e-9]).unwrap();
            prop_assert!((inside[0] - low).abs() < 1e-6 && (inside[1] - low).abs() < 1e-6);
        }
    }
}

//! Reference solutions used to check the tracker: the exact path of a shock
//! crossing a centered fan (an ODE in time), a first-order Godunov scheme on
//! a uniform grid, and `L1` distances between sampled solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{check_state, Regime, TwoFlux};
use crate::interactions::{case_c_fate, CaseCFate};
use crate::profile::Profile;
use crate::riemann::{classify_sigma, fan_value, shock_speed, RarefactionFan, RiemannSolution};
use crate::tracker::PiecewiseConstantState;

/// Which side of the fan the constant state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `u_out | fan`: the shock enters through the trailing edge.
    Left,
    /// `fan | u_out`: the shock enters through the leading edge.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathStatus {
    /// The shock crossed the whole fan at `t`.
    Absorbed {
        t: f64,
    },
    /// The shock speed came within `1e-4` of the limit speed at `t`.
    Asymptotic {
        t: f64,
        limit_speed: f64,
    },
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockPath {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub speed: Vec<f64>,
    /// State on the fan side of the shock.
    pub adjacent: Vec<f64>,
    pub regime: Vec<Regime>,
    pub status: PathStatus,
    pub fan: RarefactionFan,
    pub u_out: f64,
    pub side: Side,
}

impl ShockPath {
    /// Position at `t` by cubic Hermite interpolation of the stored points.
    pub fn position_at(&self, t: f64) -> Option<f64> {
        let n = self.t.len();
        if n == 0 || t < self.t[0] || t > self.t[n - 1] {
            return None;
        }
        let k = self.t.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let hh = t1 - t0;
        if hh <= 0.0 {
            return Some(self.y[k]);
        }
        let s = (t - t0) / hh;
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        Some(h00 * self.y[k - 1] + h10 * hh * self.speed[k - 1] + h01 * self.y[k] + h11 * hh * self.speed[k])
    }
}

const REL_TOL: f64 = 1e-8;
const ASYMPTOTIC_TOL: f64 = 1e-4;

/// Follows a shock between the constant state `u_out` and the centered fan
/// `fan`, starting at `y0` at the fan's birth time, up to `horizon`.
///
/// The shock first runs straight to the near fan edge, then across the fan
/// with the adjacent value read from the exact fan (adaptive RK4 with step
/// doubling), then straight again once it leaves the far edge.
pub fn shock_through_rarefaction<P: TwoFlux + ?Sized>(
    params: &P,
    u_out: f64,
    side: Side,
    fan: &RarefactionFan,
    y0: f64,
    horizon: f64,
) -> Result<ShockPath> {
    let u_out = check_state(u_out)?;
    let (x0, t0) = fan.center;
    if !(horizon > t0) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must exceed the fan birth time {t0}"
        )));
    }
    let (near_state, far_state, near_edge, far_edge) = match side {
        Side::Left => (
            fan.u_left,
            fan.u_right,
            fan.trailing_speed(params),
            fan.leading_speed(params),
        ),
        Side::Right => (
            fan.u_right,
            fan.u_left,
            fan.leading_speed(params),
            fan.trailing_speed(params),
        ),
    };
    let pair = |v: f64| match side {
        Side::Left => (u_out, v),
        Side::Right => (v, u_out),
    };
    if pair(near_state).0 >= pair(near_state).1 {
        return Err(Error::InvalidArgument(
            "the constant state and the fan must form a shock".into(),
        ));
    }
    let approaching = match side {
        Side::Left => y0 < x0,
        Side::Right => y0 > x0,
    };
    if !approaching {
        return Err(Error::InvalidArgument("shock must start outside the fan".into()));
    }
    let speed_of = |v: f64| -> Result<(f64, Regime)> {
        let (l, r) = pair(v);
        if l == r {
            return Ok((0.0, Regime::Stationary));
        }
        Ok((shock_speed(params, l, r)?, classify_sigma(params, l, r)?))
    };
    let limit_speed = match side {
        Side::Right => match case_c_fate(params, fan.u_left, fan.u_right, u_out)? {
            CaseCFate::Persistent { speed, .. } => Some(speed),
            CaseCFate::Absorbed => None,
        },
        Side::Left => None,
    };

    let mut path = ShockPath {
        t: vec![t0],
        y: vec![y0],
        speed: Vec::new(),
        adjacent: vec![near_state],
        regime: Vec::new(),
        status: PathStatus::HorizonReached,
        fan: *fan,
        u_out,
        side,
    };
    let (s1, r1) = speed_of(near_state)?;
    path.speed.push(s1);
    path.regime.push(r1);

    // Phase 1: constant speed until the near edge.
    let closing = match side {
        Side::Left => s1 - near_edge,
        Side::Right => near_edge - s1,
    };
    if closing <= 0.0 {
        return Err(Error::InvalidArgument("shock and fan do not approach".into()));
    }
    let t_hit = t0 + (y0 - x0).abs() / closing;
    if t_hit >= horizon {
        path.t.push(horizon);
        path.y.push(y0 + s1 * (horizon - t0));
        path.speed.push(s1);
        path.adjacent.push(near_state);
        path.regime.push(r1);
        return Ok(path);
    }
    let y_hit = x0 + near_edge * (t_hit - t0);
    path.t.push(t_hit);
    path.y.push(y_hit);
    path.adjacent.push(near_state);
    path.speed.push(s1);
    path.regime.push(r1);

    // Phase 2: inside the fan.
    let rhs = |t: f64, y: f64| -> Result<f64> {
        let v = fan_value(params, fan, (y - x0) / (t - t0));
        Ok(speed_of(v)?.0)
    };
    // Signed distance past the far edge, positive once the shock has left.
    let beyond = |t: f64, y: f64| {
        let zeta = (y - x0) / (t - t0);
        match side {
            Side::Left => zeta - far_edge,
            Side::Right => far_edge - zeta,
        }
    };
    let rk4 = |t: f64, y: f64, dt: f64| -> Result<f64> {
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)?;
        let k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)?;
        let k4 = rhs(t + dt, y + dt * k3)?;
        Ok(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    };
    let mut t = t_hit;
    let mut y = y_hit;
    let mut dt = 1e-3 * (t_hit - t0).max(1e-3);
    let mut exited = false;
    while t < horizon {
        dt = dt.min(horizon - t);
        let full = rk4(t, y, dt)?;
        let half = rk4(t + 0.5 * dt, rk4(t, y, 0.5 * dt)?, 0.5 * dt)?;
        let err = (full - half).abs();
        let scale = REL_TOL * (1.0 + half.abs());
        if err > scale && dt > 1e-12 {
            dt *= 0.5;
            continue;
        }
        let (mut tn, mut yn) = (t + dt, half + (half - full) / 15.0);
        if beyond(tn, yn) > 0.0 {
            // Land on the far edge by bisection in the step size.
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let ym = rk4(t, y, mid)?;
                if beyond(t + mid, ym) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            tn = t + hi;
            yn = rk4(t, y, hi)?;
            exited = true;
        }
        t = tn;
        y = yn;
        let v = if exited {
            far_state
        } else {
            fan_value(params, fan, (y - x0) / (t - t0))
        };
        let (s, r) = speed_of(v)?;
        path.t.push(t);
        path.y.push(y);
        path.adjacent.push(v);
        path.speed.push(s);
        path.regime.push(r);
        if exited {
            path.status = PathStatus::Absorbed { t };
            break;
        }
        if let Some(lim) = limit_speed {
            if (s - lim).abs() < ASYMPTOTIC_TOL {
                path.status = PathStatus::Asymptotic { t, limit_speed: lim };
                return Ok(path);
            }
        }
        if err < 0.1 * scale {
            dt *= 2.0;
        }
    }
    // Phase 3: a single shock from the far state, straight to the horizon.
    if exited && t < horizon {
        let s = *path.speed.last().unwrap();
        let r = *path.regime.last().unwrap();
        path.t.push(horizon);
        path.y.push(y + s * (horizon - t));
        path.adjacent.push(far_state);
        path.speed.push(s);
        path.regime.push(r);
    }
    Ok(path)
}

/// Uniform-grid settings for [`fv_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Peclet number of the optional diffusion; `None` is the hyperbolic limit.
    #[serde(default)]
    pub pe: Option<f64>,
}

fn default_cfl() -> f64 {
    0.9
}

/// Cell averages on a uniform grid at a list of output times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub x_min: f64,
    pub dx: f64,
    pub centers: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub steps: usize,
    /// How the switch factor is chosen on the grid.
    pub sigma_rule: String,
}

pub const FV_SIGMA_RULE: &str = "per-cell sigma multiplying the whole update; pass 1 uses the previous \
step's sigma, pass 2 takes sigma = 1 where the predicted update is negative and 1 - eps where it is \
positive (unchanged where zero), then re-applies";

impl GridSolution {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.centers.len())
            .map(|i| self.x_min + i as f64 * self.dx)
            .collect()
    }

    pub fn snapshot(&self, t: f64) -> Option<&[f64]> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|i| self.values[i].as_slice())
    }
}

/// Godunov flux of a concave `f` with maximum at `u*`.
fn godunov<P: TwoFlux + ?Sized>(params: &P, a: f64, b: f64, f_star: f64, star: f64) -> f64 {
    if a <= b {
        params.flux(a).min(params.flux(b))
    } else if a > star && star > b {
        f_star
    } else {
        params.flux(a).max(params.flux(b))
    }
}

fn initial_cells(u0: &Profile, x_min: f64, dx: f64, n: usize) -> Vec<f64> {
    match u0.steps() {
        // Exact cell averages of step data.
        Some((pts, vals)) => (0..n)
            .map(|i| {
                let (a, b) = (x_min + i as f64 * dx, x_min + (i + 1) as f64 * dx);
                let mut acc = 0.0;
                let mut lo = a;
                let k0 = pts.partition_point(|&p| p <= a);
                for (k, &p) in pts.iter().enumerate().skip(k0) {
                    if p >= b {
                        break;
                    }
                    acc += (p - lo) * vals[k];
                    lo = p;
                }
                if lo == a {
                    return vals[k0];
                }
                let k_end = pts.partition_point(|&p| p < b);
                acc += (b - lo) * vals[k_end.max(k0)];
                acc / dx
            })
            .collect(),
        None => (0..n).map(|i| u0.value(x_min + (i as f64 + 0.5) * dx)).collect(),
    }
}

/// First-order finite volumes for `u_t = -sigma (f(u)_x - Pe^-1 (f(u) u_x)_x)`
/// with transmissive boundaries and `dt = cfl dx / sup |f'|` (further limited
/// by the explicit diffusion bound when `pe` is set).
pub fn fv_solve<P: TwoFlux + ?Sized>(
    params: &P,
    u0: &Profile,
    cfg: &FvConfig,
    horizon: f64,
    outputs: &[f64],
) -> Result<GridSolution> {
    u0.validate()?;
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::Cfl(cfg.cfl));
    }
    if !(cfg.dx > 0.0 && cfg.x_min < cfg.x_max && horizon >= 0.0) {
        return Err(Error::InvalidArgument("need dx > 0, x_min < x_max and T >= 0".into()));
    }
    if let Some(pe) = cfg.pe {
        if !(pe > 0.0) {
            return Err(Error::InvalidArgument(format!("Pe = {pe} must be positive")));
        }
    }
    let n = ((cfg.x_max - cfg.x_min) / cfg.dx).round().max(1.0) as usize;
    let dx = (cfg.x_max - cfg.x_min) / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| cfg.x_min + (i as f64 + 0.5) * dx).collect();
    let mut u = initial_cells(u0, cfg.x_min, dx, n);

    let eps = params.epsilon();
    let star = params.ustar();
    let f_star = params.flux(star);
    let mut dt_max = cfg.cfl * dx / params.max_speed();
    if let Some(pe) = cfg.pe {
        dt_max = dt_max.min(0.5 * cfg.cfl * pe * dx * dx / f_star.max(1e-300));
    }
    let mut outs: Vec<f64> = outputs.iter().copied().filter(|&t| t >= 0.0 && t <= horizon).collect();
    outs.sort_by(f64::total_cmp);
    outs.dedup();

    let mut sol = GridSolution {
        x_min: cfg.x_min,
        dx,
        centers,
        times: Vec::new(),
        values: Vec::new(),
        steps: 0,
        sigma_rule: FV_SIGMA_RULE.to_string(),
    };
    let mut next_out = 0;
    let mut t = 0.0;
    let mut sigma = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    let mut flux = vec![0.0; n + 1];
    loop {
        while next_out < outs.len() && outs[next_out] <= t + 1e-12 * (1.0 + t) {
            sol.times.push(outs[next_out]);
            sol.values.push(u.clone());
            next_out += 1;
        }
        if t >= horizon - 1e-12 * (1.0 + horizon) {
            break;
        }
        let mut dt = dt_max.min(horizon - t);
        if next_out < outs.len() {
            dt = dt.min(outs[next_out] - t);
        }
        let cell = |i: isize| u[i.clamp(0, n as isize - 1) as usize];
        for (k, fl) in flux.iter_mut().enumerate() {
            let (a, b) = (cell(k as isize - 1), cell(k as isize));
            let mut v = godunov(params, a, b, f_star, star);
            if let Some(pe) = cfg.pe {
                v -= params.flux(0.5 * (a + b)) * (b - a) / (pe * dx);
            }
            *fl = v;
        }
        for i in 0..n {
            rhs[i] = -(flux[i + 1] - flux[i]) / dx;
        }
        // Pass 1 (previous sigma) only serves to predict the sign of the
        // update; with sigma per cell that sign does not depend on sigma.
        for i in 0..n {
            let predicted = sigma[i] * rhs[i];
            if predicted < 0.0 {
                sigma[i] = 1.0;
            } else if predicted > 0.0 {
                sigma[i] = 1.0 - eps;
            }
        }
        for i in 0..n {
            let v = u[i] + dt * sigma[i] * rhs[i];
            if !v.is_finite() {
                return Err(Error::NonFinite(t));
            }
            u[i] = v.clamp(0.0, 1.0);
        }
        t += dt;
        sol.steps += 1;
    }
    Ok(sol)
}

/// A sampled solution for [`compare_l1`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    PiecewiseConstant(PiecewiseConstantState),
    /// Cell values on `[x_min + i dx, x_min + (i + 1) dx]`.
    Grid {
        x_min: f64,
        dx: f64,
        values: Vec<f64>,
    },
    /// Linear interpolation between nodes, constant beyond them.
    Linear {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Sampled {
    pub fn from_grid(sol: &GridSolution, t: f64) -> Option<Self> {
        Some(Sampled::Grid {
            x_min: sol.x_min,
            dx: sol.dx,
            values: sol.snapshot(t)?.to_vec(),
        })
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            Sampled::Grid { x_min, dx, values } => (*x_min, x_min + dx * values.len() as f64),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            Sampled::PiecewiseConstant(s) => s.breakpoints.clone(),
            Sampled::Grid { x_min, dx, values } => (0..=values.len()).map(|i| x_min + i as f64 * dx).collect(),
            Sampled::Linear { xs, .. } => xs.clone(),
        }
    }

    /// One-sided value at an end of `[x0, x1]`, an interval free of knots.
    fn inner(&self, x0: f64, x1: f64, left: bool) -> f64 {
        match self {
            Sampled::Linear { .. } => self.value(if left { x0 } else { x1 }),
            _ => self.value(0.5 * (x0 + x1)),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Sampled::PiecewiseConstant(s) => s.value_at(x),
            Sampled::Grid { x_min, dx, values } => {
                let i = ((x - x_min) / dx).floor().clamp(0.0, (values.len() - 1) as f64);
                values[i as usize]
            }
            Sampled::Linear { xs, values } => {
                let k = xs.partition_point(|&p| p <= x);
                if k == 0 {
                    values[0]
                } else if k == xs.len() {
                    values[k - 1]
                } else {
                    let s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    values[k - 1] + s * (values[k] - values[k - 1])
                }
            }
        }
    }
}

/// Integral of `|p|` for `p` linear on `[a, b]` with end values `pa`, `pb`.
fn abs_linear(a: f64, b: f64, pa: f64, pb: f64) -> f64 {
    let w = b - a;
    if pa * pb >= 0.0 {
        0.5 * w * (pa.abs() + pb.abs())
    } else {
        0.5 * w * (pa * pa + pb * pb) / (pa.abs() + pb.abs())
    }
}

/// `L1` distance of two sampled solutions over `window`, exact for the
/// piecewise constant and piecewise linear representations.
pub fn compare_l1(a: &Sampled, b: &Sampled, window: (f64, f64)) -> Result<f64> {
    let (da, db) = (a.domain(), b.domain());
    let lo = window.0.max(da.0).max(db.0);
    let hi = window.1.min(da.1).min(db.1);
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] does not overlap both domains",
            window.0, window.1
        )));
    }
    let mut pts: Vec<f64> = a
        .knots()
        .into_iter()
        .chain(b.knots())
        .filter(|&p| p > lo && p < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let pa = a.inner(x0, x1, true) - b.inner(x0, x1, true);
        let pb = a.inner(x0, x1, false) - b.inner(x0, x1, false);
        total += abs_linear(x0, x1, pa, pb);
    }
    Ok(total)
}

/// `L1` distance between a sampled solution and a function, by Gauss
/// quadrature on a refinement of the knots of `a` and `breaks`.
pub fn l1_to_function<F: Fn(f64) -> f64>(a: &Sampled, f: F, window: (f64, f64), breaks: &[f64]) -> f64 {
    let (lo, hi) = window;
    let mut pts: Vec<f64> = a
        .knots()
        .into_iter()
        .chain(breaks.iter().copied())
        .filter(|&p| p > lo && p < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    const NODES: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    let sub = 32;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let step = (w[1] - w[0]) / sub as f64;
        for j in 0..sub {
            let c = w[0] + (j as f64 + 0.5) * step;
            for (z, wt) in NODES {
                let x = c + 0.5 * step * z;
                total += 0.5 * step * wt * (a.value(x) - f(x)).abs();
            }
        }
    }
    total
}

/// Value of a Riemann solution at `(x, t)`.
pub fn riemann_value<P: TwoFlux + ?Sized>(params: &P, sol: &RiemannSolution, x: f64, t: f64) -> f64 {
    match sol {
        RiemannSolution::Constant(u) => *u,
        RiemannSolution::Shock(front) => {
            if x < front.x + front.speed * t {
                front.u_left
            } else {
                front.u_right
            }
        }
        RiemannSolution::Rarefaction(fan) => {
            let (x0, t0) = fan.center;
            if t <= t0 {
                return if x < x0 { fan.u_left } else { fan.u_right };
            }
            fan_value(params, fan, (x - x0) / (t - t0))
        }
    }
}

/// Positions where a Riemann solution at time `t` is not smooth.
pub fn riemann_kinks<P: TwoFlux + ?Sized>(params: &P, sol: &RiemannSolution, t: f64) -> Vec<f64> {
    match sol {
        RiemannSolution::Constant(_) => Vec::new(),
        RiemannSolution::Shock(front) => vec![front.x + front.speed * t],
        RiemannSolution::Rarefaction(fan) => {
            let (x0, t0) = fan.center;
            let dt = (t - t0).max(0.0);
            vec![
                x0 + fan.trailing_speed(params) * dt,
                x0,
                x0 + fan.leading_speed(params) * dt,
            ]
        }
    }
}

//! Single Riemann problems: switch selection, Rankine-Hugoniot speeds,
//! admissibility, exact rarefaction fans and their expansion-shock
//! discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{check_state, Regime, TwoFlux};
use crate::roots::bisect;

/// Chord slopes with magnitude at or below this are treated as zero.
pub const STATIONARY_TOL: f64 = 1e-12;
/// Slack applied to the admissibility speed inequalities.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;
/// Residual target for rarefaction inversion.
pub const FAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrontKind {
    AdmissibleShock,
    ExpansionShock,
}

impl FrontKind {
    pub fn label(self) -> &'static str {
        match self {
            FrontKind::AdmissibleShock => "shock",
            FrontKind::ExpansionShock => "expansion",
        }
    }
}

/// A propagating jump between two constant states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    /// Position at the front's reference time.
    pub x: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub speed: f64,
    pub kind: FrontKind,
    pub regime: Regime,
}

impl Front {
    /// Builds the jump `u_left | u_right` located at `x`, with speed and
    /// regime fixed by the switch rule.
    pub fn new<P: TwoFlux + ?Sized>(params: &P, x: f64, u_left: f64, u_right: f64) -> Result<Self> {
        let u_left = check_state(u_left)?;
        let u_right = check_state(u_right)?;
        let regime = classify_sigma(params, u_left, u_right)?;
        let speed = speed_for(params, u_left, u_right, regime);
        let kind = if u_left < u_right {
            FrontKind::AdmissibleShock
        } else {
            FrontKind::ExpansionShock
        };
        Ok(Self {
            x,
            u_left,
            u_right,
            speed,
            kind,
            regime,
        })
    }

    pub fn jump(&self) -> f64 {
        (self.u_right - self.u_left).abs()
    }

    pub fn sigma(&self, epsilon: f64) -> Option<f64> {
        self.regime.sigma(epsilon)
    }
}

/// A centered rarefaction `u_left > u_right` emanating from `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RarefactionFan {
    pub u_left: f64,
    pub u_right: f64,
    /// `(x0, t0)`.
    pub center: (f64, f64),
    /// Whether the fan straddles `u*` and so carries an internal corner.
    pub split: bool,
}

impl RarefactionFan {
    pub fn new<P: TwoFlux + ?Sized>(params: &P, u_left: f64, u_right: f64, center: (f64, f64)) -> Result<Self> {
        let u_left = check_state(u_left)?;
        let u_right = check_state(u_right)?;
        if u_left <= u_right {
            return Err(Error::InvalidArgument(format!(
                "a rarefaction needs u_left > u_right (got {u_left} <= {u_right})"
            )));
        }
        let star = params.ustar();
        Ok(Self {
            u_left,
            u_right,
            center,
            split: u_right < star && star < u_left,
        })
    }

    fn sigma_left<P: TwoFlux + ?Sized>(&self, params: &P) -> f64 {
        if self.u_left > params.ustar() {
            1.0
        } else {
            1.0 - params.epsilon()
        }
    }

    fn sigma_right<P: TwoFlux + ?Sized>(&self, params: &P) -> f64 {
        if self.u_right < params.ustar() {
            1.0 - params.epsilon()
        } else {
            1.0
        }
    }

    /// Speed of the trailing (left) edge.
    pub fn trailing_speed<P: TwoFlux + ?Sized>(&self, params: &P) -> f64 {
        self.sigma_left(params) * params.dflux(self.u_left)
    }

    /// Speed of the leading (right) edge.
    pub fn leading_speed<P: TwoFlux + ?Sized>(&self, params: &P) -> f64 {
        self.sigma_right(params) * params.dflux(self.u_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RiemannSolution {
    Constant(f64),
    Shock(Front),
    Rarefaction(RarefactionFan),
}

/// Raw chord slope `(f(b) - f(a)) / (b - a)` of the base flux.
pub fn chord<P: TwoFlux + ?Sized>(params: &P, a: f64, b: f64) -> f64 {
    (params.flux(b) - params.flux(a)) / (b - a)
}

/// Picks the flux curve for a jump `u_left | u_right`.
///
/// The sign of the raw chord fixes the direction of travel, and the
/// direction together with the sign of the jump fixes the sign of `u_t` seen
/// by an observer the front passes.
pub fn classify_sigma<P: TwoFlux + ?Sized>(params: &P, u_left: f64, u_right: f64) -> Result<Regime> {
    if u_left == u_right {
        return Err(Error::NoWave(u_left));
    }
    let s = chord(params, u_left, u_right);
    if s.abs() <= STATIONARY_TOL {
        return Ok(Regime::Stationary);
    }
    let up = u_left < u_right;
    Ok(if (s > 0.0) == up { Regime::Upper } else { Regime::Lower })
}

fn speed_for<P: TwoFlux + ?Sized>(params: &P, u_left: f64, u_right: f64, regime: Regime) -> f64 {
    match params.sigma(regime) {
        Some(sigma) => sigma * chord(params, u_left, u_right),
        None => 0.0,
    }
}

/// Rankine-Hugoniot speed with the switch factor from [`classify_sigma`].
pub fn shock_speed<P: TwoFlux + ?Sized>(params: &P, u_left: f64, u_right: f64) -> Result<f64> {
    let u_left = check_state(u_left)?;
    let u_right = check_state(u_right)?;
    let regime = classify_sigma(params, u_left, u_right)?;
    Ok(speed_for(params, u_left, u_right, regime))
}

/// Solves the Riemann problem with the jump at `x = 0`, `t = 0`.
pub fn solve_riemann<P: TwoFlux + ?Sized>(params: &P, u_left: f64, u_right: f64) -> Result<RiemannSolution> {
    solve_riemann_at(params, u_left, u_right, (0.0, 0.0))
}

/// Solves the Riemann problem with the jump centered at `(x0, t0)`.
pub fn solve_riemann_at<P: TwoFlux + ?Sized>(
    params: &P,
    u_left: f64,
    u_right: f64,
    center: (f64, f64),
) -> Result<RiemannSolution> {
    let u_left = check_state(u_left)?;
    let u_right = check_state(u_right)?;
    Ok(if u_left == u_right {
        RiemannSolution::Constant(u_left)
    } else if u_left < u_right {
        RiemannSolution::Shock(Front::new(params, center.0, u_left, u_right)?)
    } else {
        RiemannSolution::Rarefaction(RarefactionFan::new(params, u_left, u_right, center)?)
    })
}

/// Value of the fan at similarity coordinate `y = (x - x0) / (t - t0)`.
///
/// Inverts `y = sigma f'(u)` on the branch selected by the sign of `y`.
pub fn sample_rarefaction<P: TwoFlux + ?Sized>(params: &P, fan: &RarefactionFan, y: f64) -> Result<f64> {
    let lo = fan.trailing_speed(params);
    let hi = fan.leading_speed(params);
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if !(y >= lo - slack && y <= hi + slack) {
        return Err(Error::OutsideFan { y, lo, hi });
    }
    Ok(invert_fan(params, fan, y))
}

/// Same as [`sample_rarefaction`] but clamps `y` to the fan instead of
/// rejecting it; outside the fan the adjacent constant state is returned.
pub fn fan_value<P: TwoFlux + ?Sized>(params: &P, fan: &RarefactionFan, y: f64) -> f64 {
    if y <= fan.trailing_speed(params) {
        fan.u_left
    } else if y >= fan.leading_speed(params) {
        fan.u_right
    } else {
        invert_fan(params, fan, y)
    }
}

fn invert_fan<P: TwoFlux + ?Sized>(params: &P, fan: &RarefactionFan, y: f64) -> f64 {
    let star = params.ustar();
    let eps = params.epsilon();
    let (sigma, a, b) = if y < 0.0 {
        (1.0, fan.u_right.max(star), fan.u_left)
    } else if y > 0.0 {
        (1.0 - eps, fan.u_right, fan.u_left.min(star))
    } else {
        return star.clamp(fan.u_right, fan.u_left);
    };
    if sigma == 0.0 || a >= b {
        // Degenerate branch (eps = 1 or the fan does not reach this side).
        return if y < 0.0 { fan.u_left } else { fan.u_right };
    }
    let g = |u: f64| sigma * params.dflux(u) - y;
    // g is decreasing in u; clamp to the end states when y sits at an edge.
    if g(a) <= 0.0 {
        return a;
    }
    if g(b) >= 0.0 {
        return b;
    }
    bisect(g, a, b, 0.0, FAN_TOL).unwrap_or(0.5 * (a + b))
}

/// Jump in `u_x` across the center of a split fan at time `tau` after its
/// birth, in the closed form `1 / (tau eps f''(u*))`.
pub fn slope_jump<P: TwoFlux + ?Sized>(params: &P, tau: f64) -> Result<f64> {
    let eps = params.epsilon();
    if eps <= 0.0 {
        return Err(Error::Degenerate("slope jump needs eps > 0".into()));
    }
    if tau <= 0.0 {
        return Err(Error::Degenerate("slope jump needs tau > 0".into()));
    }
    Ok(1.0 / (tau * eps * params.d2flux(params.ustar())))
}

/// Jump in `u_x` across the fan center obtained by differentiating the fan
/// profile itself: the left branch has `du/dy = 1 / f''` and the right
/// branch `du/dy = 1 / ((1 - eps) f'')`, so the jump is
/// `eps / ((1 - eps) tau f''(u*))`.
pub fn fan_slope_jump<P: TwoFlux + ?Sized>(params: &P, tau: f64) -> Result<f64> {
    let eps = params.epsilon();
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Degenerate("fan slope jump needs 0 < eps < 1".into()));
    }
    if tau <= 0.0 {
        return Err(Error::Degenerate("slope jump needs tau > 0".into()));
    }
    Ok(eps / ((1.0 - eps) * tau * params.d2flux(params.ustar())))
}

/// Outcome of [`check_admissibility`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    /// Faster characteristics enter from both sides.
    pub admissible: bool,
    /// Both families on the right enter the shock.
    pub right_slower_enters: bool,
    /// The slower family on the left leaves the shock.
    pub left_slower_leaves: bool,
    /// Some characteristic family travels exactly at the shock speed.
    pub grazing: bool,
}

/// Generalized Lax check: the faster family must enter from both sides.
/// Contact at equal speed counts as entering.
pub fn check_admissibility<P: TwoFlux + ?Sized>(params: &P, front: &Front) -> Admissibility {
    let lam = front.speed;
    let left = params.char_speeds(front.u_left);
    let right = params.char_speeds(front.u_right);
    let tol = ADMISSIBILITY_TOL * (1.0 + lam.abs());
    let is_jump_up = front.u_left < front.u_right;
    let admissible = is_jump_up && left.faster >= lam - tol && lam >= right.faster - tol;
    let grazing = [left.faster, left.slower, right.faster, right.slower]
        .iter()
        .any(|s| (s - lam).abs() <= tol);
    Admissibility {
        admissible,
        right_slower_enters: lam >= right.slower - tol,
        left_slower_leaves: left.slower < lam - tol,
        grazing,
    }
}

/// Replaces a fan by `ceil((uL - uR) / h)` expansion shocks through equally
/// spaced intermediate values, ordered left to right.
pub fn discretize_rarefaction<P: TwoFlux + ?Sized>(params: &P, fan: &RarefactionFan, h: f64) -> Result<Vec<Front>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step bound h = {h} must be positive")));
    }
    let span = fan.u_left - fan.u_right;
    let n = ((span / h) - 1e-9).ceil().max(1.0) as usize;
    let step = span / n as f64;
    let levels: Vec<f64> = (0..=n)
        .map(|k| {
            if k == n {
                fan.u_right
            } else {
                fan.u_left - k as f64 * step
            }
        })
        .collect();
    levels
        .windows(2)
        .map(|w| Front::new(params, fan.center.0, w[0], w[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxParams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(m: f64, eps: f64) -> FluxParams {
        FluxParams::new(m, eps).unwrap()
    }

    #[test]
    fn sigma_classification() {
        let q = p(1.0, 0.4);
        assert_eq!(classify_sigma(&q, 0.2, 0.3).unwrap(), Regime::Upper);
        assert_eq!(classify_sigma(&q, 0.2, 1.0).unwrap(), Regime::Lower);
        assert_eq!(classify_sigma(&q, 0.4, 0.6).unwrap(), Regime::Stationary);
        assert!(matches!(classify_sigma(&q, 0.3, 0.3), Err(Error::NoWave(_))));
    }

    #[test]
    fn speeds() {
        let q = p(1.0, 0.4);
        assert_abs_diff_eq!(shock_speed(&q, 0.2, 1.0).unwrap(), -0.12, epsilon = 1e-15);
        assert_abs_diff_eq!(shock_speed(&q, 0.2, 0.3).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(shock_speed(&q, 0.4, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn riemann_structure() {
        let q = p(1.0, 0.4);
        assert_eq!(solve_riemann(&q, 0.4, 0.4).unwrap(), RiemannSolution::Constant(0.4));
        match solve_riemann(&q, 0.2, 1.0).unwrap() {
            RiemannSolution::Shock(s) => {
                assert_abs_diff_eq!(s.speed, -0.12, epsilon = 1e-15);
                assert_eq!(s.regime, Regime::Lower);
                assert!(check_admissibility(&q, &s).admissible);
            }
            other => panic!("expected shock, got {other:?}"),
        }
        match solve_riemann(&q, 0.8, 0.2).unwrap() {
            RiemannSolution::Rarefaction(fan) => {
                assert!(fan.split);
                assert_abs_diff_eq!(fan.trailing_speed(&q), -0.6, epsilon = 1e-15);
                assert_abs_diff_eq!(fan.leading_speed(&q), 0.36, epsilon = 1e-15);
            }
            other => panic!("expected fan, got {other:?}"),
        }
    }

    #[test]
    fn fan_sampling() {
        let q = p(1.0, 0.4);
        let fan = RarefactionFan::new(&q, 0.8, 0.2, (0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(sample_rarefaction(&q, &fan, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sample_rarefaction(&q, &fan, -0.2).unwrap(), 0.6, epsilon = 1e-11);
        assert_abs_diff_eq!(sample_rarefaction(&q, &fan, 0.24).unwrap(), 0.3, epsilon = 1e-11);
        assert_abs_diff_eq!(sample_rarefaction(&q, &fan, -0.6).unwrap(), 0.8, epsilon = 1e-11);
        assert_abs_diff_eq!(sample_rarefaction(&q, &fan, 0.36).unwrap(), 0.2, epsilon = 1e-11);
        assert!(matches!(
            sample_rarefaction(&q, &fan, 0.5),
            Err(Error::OutsideFan { .. })
        ));
    }

    #[test]
    fn fan_is_continuous_at_center() {
        for (m, eps) in [(1.0, 0.4), (10.0, 0.7), (3.0, 0.1)] {
            let q = p(m, eps);
            let fan = RarefactionFan::new(&q, 0.9, 0.05, (0.0, 0.0)).unwrap();
            let l = sample_rarefaction(&q, &fan, -1e-13).unwrap();
            let r = sample_rarefaction(&q, &fan, 1e-13).unwrap();
            assert!((l - r).abs() < 1e-10);
            assert_abs_diff_eq!(l, q.ustar(), epsilon = 1e-10);
        }
    }

    #[test]
    fn slope_jump_closed_form() {
        assert_abs_diff_eq!(slope_jump(&p(1.0, 0.4), 1.0).unwrap(), -1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(
            slope_jump(&p(10.0, 0.4), 2.0).unwrap(),
            -(10f64.sqrt()) / 1.6,
            epsilon = 1e-14
        );
        assert!(slope_jump(&p(1.0, 0.4), 1e9).unwrap().abs() < 1e-8);
        assert!(slope_jump(&p(1.0, 0.0), 1.0).is_err());
        assert!(slope_jump(&p(1.0, 0.4), 0.0).is_err());
    }

    /// One-sided difference quotients of the sampled fan in `x` at the center.
    fn measured_jump(q: &FluxParams, tau: f64) -> f64 {
        let fan = RarefactionFan::new(q, 0.95, 0.02, (0.0, 0.0)).unwrap();
        let dx = 1e-5 * tau;
        let u = |x: f64| sample_rarefaction(q, &fan, x / tau).unwrap();
        let right = (u(dx) - u(0.0)) / dx;
        let left = (u(0.0) - u(-dx)) / dx;
        right - left
    }

    #[test]
    fn differentiated_fan_matches_fan_slope_jump() {
        for m in [1.0, 10.0] {
            for eps in [0.4, 0.7] {
                for tau in [0.5, 1.0, 2.0] {
                    let q = p(m, eps);
                    let expected = fan_slope_jump(&q, tau).unwrap();
                    let got = measured_jump(&q, tau);
                    assert!(
                        ((got - expected) / expected).abs() < 0.01,
                        "M={m} eps={eps} tau={tau}: {got} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let q = p(1.0, 0.4);
        let s = Front::new(&q, 0.0, 0.2, 1.0).unwrap();
        let a = check_admissibility(&q, &s);
        assert!(a.admissible && a.right_slower_enters && !a.left_slower_leaves);

        let bad = Front::new(&q, 0.0, 1.0, 0.2).unwrap();
        assert!(!check_admissibility(&q, &bad).admissible);

        let graze = Front::new(&q, 0.0, 0.2, 0.44).unwrap();
        assert_abs_diff_eq!(graze.speed, 0.36, epsilon = 1e-14);
        let a = check_admissibility(&q, &graze);
        assert!(a.admissible && a.grazing && !a.left_slower_leaves);
    }

    #[test]
    fn discretization_examples() {
        let q = p(1.0, 0.4);
        let fan = RarefactionFan::new(&q, 0.8, 0.2, (0.0, 0.0)).unwrap();
        let fronts = discretize_rarefaction(&q, &fan, 0.2).unwrap();
        assert_eq!(fronts.len(), 3);
        let expect = [(0.8, 0.6, -0.4), (0.6, 0.4, 0.0), (0.4, 0.2, 0.24)];
        for (fr, (l, r, s)) in fronts.iter().zip(expect) {
            assert_abs_diff_eq!(fr.u_left, l, epsilon = 1e-14);
            assert_abs_diff_eq!(fr.u_right, r, epsilon = 1e-14);
            assert_abs_diff_eq!(fr.speed, s, epsilon = 1e-12);
            assert_eq!(fr.kind, FrontKind::ExpansionShock);
        }
        assert_eq!(fronts[1].regime, Regime::Stationary);

        let one = discretize_rarefaction(&q, &RarefactionFan::new(&q, 0.5, 0.4, (0.0, 0.0)).unwrap(), 0.2).unwrap();
        assert_eq!(one.len(), 1);

        let single = p(1.0, 0.0);
        let speeds: Vec<f64> = discretize_rarefaction(
            &single,
            &RarefactionFan::new(&single, 0.8, 0.2, (0.0, 0.0)).unwrap(),
            0.2,
        )
        .unwrap()
        .iter()
        .map(|f| f.speed)
        .collect();
        for (s, e) in speeds.iter().zip([-0.4, 0.0, 0.4]) {
            assert_abs_diff_eq!(*s, e, epsilon = 1e-12);
        }
        assert!(discretize_rarefaction(&q, &fan, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn admissible_shock_speed_inequalities(m in 1.0f64..20.0, eps in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let q = p(m, eps);
            let (ul, ur) = (a.min(b), a.max(b));
            let s = Front::new(&q, 0.0, ul, ur).unwrap();
            let l = q.char_speeds(ul);
            let r = q.char_speeds(ur);
            let tol = 1e-12;
            prop_assert!(l.faster >= s.speed - tol && s.speed >= r.faster - tol);
            prop_assert!(s.speed >= r.slower - tol);
            prop_assert!(check_admissibility(&q, &s).admissible);
        }

        #[test]
        fn expansion_shock_speed_inequalities(m in 1.0f64..20.0, eps in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let q = p(m, eps);
            let (ul, ur) = (a.max(b), a.min(b));
            let s = Front::new(&q, 0.0, ul, ur).unwrap();
            let tol = 1e-12;
            prop_assert!(q.char_speeds(ul).slower <= s.speed + tol);
            prop_assert!(s.speed <= q.char_speeds(ur).slower + tol);
            prop_assert!(s.speed <= q.char_speeds(ur).faster + tol);
        }

        #[test]
        fn discretized_speeds_increase(m in 1.0f64..20.0, eps in 0.0f64..0.999, ul in 0.05f64..=1.0, frac in 0.0f64..0.95, h in 0.01f64..0.3) {
            let q = p(m, eps);
            let ur = ul * frac;
            let fan = RarefactionFan::new(&q, ul, ur, (0.0, 0.0)).unwrap();
            let fronts = discretize_rarefaction(&q, &fan, h).unwrap();
            prop_assert!(fronts.iter().all(|f| f.jump() <= h + 1e-12));
            for w in fronts.windows(2) {
                prop_assert!(w[1].speed > w[0].speed);
                prop_assert_eq!(w[0].u_right, w[1].u_left);
            }
            prop_assert!(fronts[0].speed >= fan.trailing_speed(&q) - 1e-12);
            prop_assert!(fronts.last().unwrap().speed <= fan.leading_speed(&q) + 1e-12);
        }
    }
}

//! Initial-data descriptions shared by the tracker, the characteristic
//! solver and the finite-volume oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::check_state;

/// A constant value on `[lo, hi)`; a missing bound extends to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    pub value: f64,
}

impl Interval {
    fn contains(&self, x: f64) -> bool {
        self.lo.map_or(true, |a| x >= a) && self.hi.map_or(true, |b| x < b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// `background` everywhere except on the listed disjoint intervals.
    Steps {
        #[serde(default)]
        background: f64,
        intervals: Vec<Interval>,
    },
    /// `peak * max(0, 1 - |x - center| / half_width)`.
    Hat { center: f64, peak: f64, half_width: f64 },
    /// `max(0, peak - curvature (x - center)^2)`.
    Parabola { center: f64, peak: f64, curvature: f64 },
    /// `base + amplitude exp(-(x - center)^2 / (2 width^2))`.
    Gaussian {
        center: f64,
        amplitude: f64,
        width: f64,
        #[serde(default)]
        base: f64,
    },
    /// Smooth step from `left` to `right`:
    /// `left + (right - left) (1 + tanh((x - center) / width)) / 2`.
    Tanh {
        center: f64,
        left: f64,
        right: f64,
        width: f64,
    },
}

impl Profile {
    /// The piecewise-constant profile `left` on `(-inf, x0)`, `right` after.
    pub fn riemann(left: f64, right: f64, x0: f64) -> Self {
        Profile::Steps {
            background: left,
            intervals: vec![Interval {
                lo: Some(x0),
                hi: None,
                value: right,
            }],
        }
    }

    /// `value` on `[lo, hi)`, zero elsewhere.
    pub fn boxed(lo: f64, hi: f64, value: f64) -> Self {
        Profile::Steps {
            background: 0.0,
            intervals: vec![Interval {
                lo: Some(lo),
                hi: Some(hi),
                value,
            }],
        }
    }

    /// Checks parameters and that every value lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let finite = |v: f64, name: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} = {v} is not finite")))
            }
        };
        match self {
            Profile::Steps { background, intervals } => {
                check_state(*background)?;
                let mut spans: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
                for iv in intervals {
                    check_state(iv.value)?;
                    let a = iv.lo.unwrap_or(f64::NEG_INFINITY);
                    let b = iv.hi.unwrap_or(f64::INFINITY);
                    if a.is_nan() || b.is_nan() || a >= b {
                        return bad(format!("empty interval [{a}, {b})"));
                    }
                    spans.push((a, b));
                }
                spans.sort_by(|p, q| p.0.total_cmp(&q.0));
                if spans.windows(2).any(|w| w[1].0 < w[0].1) {
                    return bad("intervals overlap".into());
                }
            }
            Profile::Hat {
                center,
                peak,
                half_width,
            } => {
                finite(*center, "center")?;
                check_state(*peak)?;
                if !(*half_width > 0.0) {
                    return bad(format!("half_width = {half_width} must be positive"));
                }
            }
            Profile::Parabola {
                center,
                peak,
                curvature,
            } => {
                finite(*center, "center")?;
                check_state(*peak)?;
                if !(curvature.is_finite() && *curvature >= 0.0) {
                    return bad(format!("curvature = {curvature} must be non-negative"));
                }
            }
            Profile::Gaussian {
                center,
                amplitude,
                width,
                base,
            } => {
                finite(*center, "center")?;
                check_state(*base)?;
                check_state(base + amplitude)?;
                if !(*width > 0.0) {
                    return bad(format!("width = {width} must be positive"));
                }
            }
            Profile::Tanh {
                center,
                left,
                right,
                width,
            } => {
                finite(*center, "center")?;
                check_state(*left)?;
                check_state(*right)?;
                if !(*width > 0.0) {
                    return bad(format!("width = {width} must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, Profile::Steps { .. })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Steps { background, intervals } => intervals
                .iter()
                .find(|iv| iv.contains(x))
                .map_or(*background, |iv| iv.value),
            Profile::Hat {
                center,
                peak,
                half_width,
            } => peak * (1.0 - (x - center).abs() / half_width).max(0.0),
            Profile::Parabola {
                center,
                peak,
                curvature,
            } => (peak - curvature * (x - center).powi(2)).max(0.0),
            Profile::Gaussian {
                center,
                amplitude,
                width,
                base,
            } => base + amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
            Profile::Tanh {
                center,
                left,
                right,
                width,
            } => left + (right - left) * 0.5 * (1.0 + ((x - center) / width).tanh()),
        }
    }

    /// First derivative; zero for step data and one-sided (right) at kinks.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Steps { .. } => 0.0,
            Profile::Hat {
                center,
                peak,
                half_width,
            } => {
                let d = x - center;
                if d.abs() >= *half_width {
                    0.0
                } else if d >= 0.0 {
                    -peak / half_width
                } else {
                    peak / half_width
                }
            }
            Profile::Parabola {
                center,
                peak,
                curvature,
            } => {
                if peak - curvature * (x - center).powi(2) > 0.0 {
                    -2.0 * curvature * (x - center)
                } else {
                    0.0
                }
            }
            Profile::Gaussian {
                center,
                amplitude,
                width,
                ..
            } => {
                let d = x - center;
                -amplitude * d / (width * width) * (-d * d / (2.0 * width * width)).exp()
            }
            Profile::Tanh {
                center,
                left,
                right,
                width,
            } => {
                let s = 1.0 / ((x - center) / width).cosh();
                (right - left) * 0.5 * s * s / width
            }
        }
    }

    /// A window outside which the profile is constant, or numerically so.
    pub fn support_window(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Steps { intervals, .. } => {
                let mut pts = intervals.iter().flat_map(|iv| [iv.lo, iv.hi]).flatten();
                let first = pts.next()?;
                let (a, b) = pts.fold((first, first), |(a, b), p| (a.min(p), b.max(p)));
                Some((a, b))
            }
            Profile::Hat { center, half_width, .. } => Some((center - half_width, center + half_width)),
            Profile::Parabola {
                center,
                peak,
                curvature,
            } => {
                if *curvature == 0.0 {
                    None
                } else {
                    let r = (peak / curvature).sqrt();
                    Some((center - r, center + r))
                }
            }
            Profile::Gaussian { center, width, .. } => Some((center - 10.0 * width, center + 10.0 * width)),
            Profile::Tanh { center, width, .. } => Some((center - 20.0 * width, center + 20.0 * width)),
        }
    }

    /// Positions of the jumps and the value on each side, for step data.
    pub fn steps(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let Profile::Steps { background, intervals } = self else {
            return None;
        };
        let mut pts: Vec<f64> = intervals.iter().flat_map(|iv| [iv.lo, iv.hi]).flatten().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut values = Vec::with_capacity(pts.len() + 1);
        let probe = |x: f64| {
            intervals
                .iter()
                .find(|iv| iv.contains(x))
                .map_or(*background, |iv| iv.value)
        };
        if pts.is_empty() {
            values.push(probe(0.0));
            return Some((pts, values));
        }
        values.push(probe(pts[0] - 1.0));
        values.extend(pts.iter().map(|&p| probe(p)));
        Some((pts, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_layout() {
        let p = Profile::boxed(0.0, 1.0, 0.6);
        let (pts, vals) = p.steps().unwrap();
        assert_eq!(pts, vec![0.0, 1.0]);
        assert_eq!(vals, vec![0.0, 0.6, 0.0]);
        assert_eq!(p.value(0.5), 0.6);
        assert_eq!(p.value(1.0), 0.0);

        let r = Profile::riemann(0.2, 1.0, 0.0);
        assert_eq!(r.steps().unwrap(), (vec![0.0], vec![0.2, 1.0]));

        let l = Profile::Steps {
            background: 0.0,
            intervals: vec![Interval {
                lo: None,
                hi: Some(0.0),
                value: 0.7,
            }],
        };
        assert_eq!(l.steps().unwrap(), (vec![0.0], vec![0.7, 0.0]));
    }

    #[test]
    fn validation() {
        assert!(Profile::boxed(0.0, 1.0, 1.5).validate().is_err());
        assert!(Profile::boxed(1.0, 0.0, 0.5).validate().is_err());
        let overlap = Profile::Steps {
            background: 0.0,
            intervals: vec![
                Interval {
                    lo: Some(0.0),
                    hi: Some(2.0),
                    value: 0.3,
                },
                Interval {
                    lo: Some(1.0),
                    hi: Some(3.0),
                    value: 0.4,
                },
            ],
        };
        assert!(overlap.validate().is_err());
        assert!(Profile::Hat {
            center: 0.0,
            peak: 0.5,
            half_width: 1.0
        }
        .validate()
        .is_ok());
        assert!(Profile::Gaussian {
            center: 0.0,
            amplitude: 0.9,
            width: 1.0,
            base: 0.2
        }
        .validate()
        .is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let profiles = [
            Profile::Parabola {
                center: 0.1,
                peak: 0.3,
                curvature: 1.0,
            },
            Profile::Gaussian {
                center: 0.0,
                amplitude: 0.5,
                width: 0.7,
                base: 0.1,
            },
            Profile::Tanh {
                center: 0.0,
                left: 0.9,
                right: 0.1,
                width: 0.3,
            },
        ];
        for p in &profiles {
            for i in 0..20 {
                let x = -0.4 + 0.04 * i as f64 + 0.013;
                let d = 1e-6;
                let fd = (p.value(x + d) - p.value(x - d)) / (2.0 * d);
                assert!((fd - p.derivative(x)).abs() < 1e-7, "{p:?} at {x}");
            }
        }
    }
}

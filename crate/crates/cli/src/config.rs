use std::fmt;

use clap::ValueEnum;
use co2fronts_core::characteristics::CharGrid;
use co2fronts_core::oracle::FvConfig;
use co2fronts_core::{FluxParams, Profile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Riemann,
    Interact,
    Track,
    Characteristics,
    OracleCompare,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Riemann => "riemann",
            Mode::Interact => "interact",
            Mode::Track => "track",
            Mode::Characteristics => "characteristics",
            Mode::OracleCompare => "oracle-compare",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    /// Finite-volume grid for `oracle-compare`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<FvConfig>,
    /// Seeds for chars.csv.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chars: Option<CharGrid>,
    /// Spatial window for snapshots and comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Location of a strict maximum whose corner path goes to corner.csv.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<Model>,
    pub initial: Option<Profile>,
    pub run: Option<RunSpec>,
}

/// A config that passed [`check`], with every required field present.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: FluxParams,
    pub initial: Profile,
    pub mode: Mode,
    pub run: RunSpec,
    pub horizon: f64,
    pub snapshot_times: Vec<f64>,
    /// The config as run, with the mode filled in.
    pub echo: Config,
}

/// Parses either a config or a run manifest (whose `config` field is one).
pub fn parse(text: &str) -> Result<Config, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let inner = match value.get("config") {
        Some(c) if value.get("tool").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| e.to_string())
}

fn jumps(p: &Profile) -> Option<usize> {
    p.steps().map(|(pts, _)| pts.len())
}

/// Every schema and domain violation of `cfg`. `mode` is the mode requested
/// on the command line, if any.
pub fn violations(cfg: &Config, mode: Option<Mode>) -> Vec<String> {
    let mut out = Vec::new();
    let mut v = |s: String| out.push(s);
    match &cfg.model {
        None => v("model required".into()),
        Some(model) => {
            match model.m {
                None => v("model.M required".into()),
                Some(m) if !(m >= 1.0 && m.is_finite()) => v(format!("model.M = {m}: M ≥ 1 required")),
                _ => {}
            }
            match model.epsilon {
                None => v("model.epsilon required".into()),
                Some(e) if !(0.0..=1.0).contains(&e) => v(format!("model.epsilon = {e}: 0 ≤ epsilon ≤ 1 required")),
                _ => {}
            }
        }
    }
    let run = cfg.run.clone().unwrap_or_default();
    if cfg.run.is_none() {
        v("run required".into());
    }
    let chosen = match (run.mode, mode) {
        (Some(a), Some(b)) if a != b => {
            v(format!("run.mode = {a} does not match the requested mode {b}"));
            None
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => {
            v("mode required".into());
            None
        }
    };
    let horizon = match run.horizon {
        None => {
            v("run.T required".into());
            None
        }
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            v(format!("run.T = {t}: T > 0 required"));
            None
        }
        Some(t) => Some(t),
    };
    if let (Some(ts), Some(t)) = (&run.snapshot_times, horizon) {
        for s in ts {
            if !(*s >= 0.0 && *s <= t) {
                v(format!("run.snapshot_times: {s} outside [0, T]"));
            }
        }
    }
    let positive = |name: &str, x: Option<f64>| -> Option<String> {
        match x {
            Some(h) if !(h > 0.0 && h.is_finite()) => Some(format!("run.{name} = {h}: {name} > 0 required")),
            _ => None,
        }
    };
    if let Some(msg) = positive("h", run.h) {
        v(msg);
    }
    if let Some(msg) = positive("delta", run.delta) {
        v(msg);
    }
    if let Some([a, b]) = run.window {
        if !(a < b && a.is_finite() && b.is_finite()) {
            v(format!("run.window = [{a}, {b}]: finite lo < hi required"));
        }
    }
    let initial = match &cfg.initial {
        None => {
            v("initial required".into());
            None
        }
        Some(p) => {
            if let Err(e) = p.validate() {
                v(format!("initial: {e}"));
            }
            Some(p)
        }
    };
    let (Some(mode), Some(p)) = (chosen, initial) else {
        return out;
    };
    let needs_h = |v: &mut dyn FnMut(String)| {
        if run.h.is_none() {
            v(format!("run.h required for mode {mode}"));
        }
    };
    match mode {
        Mode::Riemann => match p.steps() {
            Some((pts, vals)) if pts.len() == 1 => {
                if vals[0] > vals[1] {
                    needs_h(&mut v);
                }
            }
            _ => v("initial: riemann mode needs step data with exactly one jump".into()),
        },
        Mode::Interact => {
            if jumps(p) != Some(2) {
                v("initial: interact mode needs step data with exactly two jumps".into());
            }
            needs_h(&mut v);
        }
        Mode::Track | Mode::OracleCompare => {
            needs_h(&mut v);
            if !p.is_piecewise_constant() && run.delta.is_none() {
                v(format!("run.delta required for mode {mode} with a non-step profile"));
            }
            if mode == Mode::OracleCompare {
                match &run.grid {
                    None => v("run.grid required for mode oracle-compare".into()),
                    Some(g) => {
                        if !(g.dx > 0.0 && g.x_min < g.x_max) {
                            v("run.grid: dx > 0 and x_min < x_max required".into());
                        }
                        if !(g.cfl > 0.0 && g.cfl <= 1.0) {
                            v(format!("run.grid.cfl = {}: 0 < cfl ≤ 1 required", g.cfl));
                        }
                        if let Some(pe) = g.pe {
                            if !(pe > 0.0) {
                                v(format!("run.grid.pe = {pe}: pe > 0 required"));
                            }
                        }
                    }
                }
            }
        }
        Mode::Characteristics => {
            if p.is_piecewise_constant() {
                v("initial: characteristics mode needs a smooth profile".into());
            }
        }
    }
    if let Some(c) = &run.chars {
        if !(c.x_min < c.x_max && c.n_x >= 2) {
            v("run.chars: x_min < x_max and n_x ≥ 2 required".into());
        }
    }
    out
}

/// Checks `cfg` and returns the scenario to run, or the violations.
pub fn check(cfg: &Config, mode: Option<Mode>) -> Result<Scenario, Vec<String>> {
    let errs = violations(cfg, mode);
    if !errs.is_empty() {
        return Err(errs);
    }
    let model = cfg.model.as_ref().unwrap();
    let params = FluxParams::new(model.m.unwrap(), model.epsilon.unwrap()).map_err(|e| vec![e.to_string()])?;
    let mut run = cfg.run.clone().unwrap();
    let mode = run.mode.or(mode).unwrap();
    run.mode = Some(mode);
    let horizon = run.horizon.unwrap();
    let mut snapshot_times = run.snapshot_times.clone().unwrap_or_else(|| vec![0.0, horizon]);
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();
    let echo = Config {
        model: cfg.model.clone(),
        initial: cfg.initial.clone(),
        run: Some(run.clone()),
    };
    Ok(Scenario {
        params,
        initial: cfg.initial.clone().unwrap(),
        mode,
        run,
        horizon,
        snapshot_times,
        echo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        parse(text).unwrap()
    }

    const RIEMANN: &str = r#"{
        "model": {"M": 1, "epsilon": 0.4},
        "initial": {"type": "steps", "background": 0.2, "intervals": [{"lo": 0, "value": 1.0}]},
        "run": {"mode": "riemann", "T": 1}
    }"#;

    #[test]
    fn valid_riemann() {
        assert!(violations(&cfg(RIEMANN), None).is_empty());
        let s = check(&cfg(RIEMANN), Some(Mode::Riemann)).unwrap();
        assert_eq!(s.snapshot_times, vec![0.0, 1.0]);
    }

    #[test]
    fn reports_every_violation() {
        let c = cfg(
            r#"{"model": {"M": 0.5, "epsilon": 1.5}, "initial": {"type": "steps", "intervals": []}, "run": {"T": -1}}"#,
        );
        let v = violations(&c, None);
        assert!(v.iter().any(|s| s.contains("M ≥ 1")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("epsilon")));
        assert!(v.iter().any(|s| s == "mode required"));
        assert!(v.iter().any(|s| s.contains("run.T")));
    }

    #[test]
    fn mode_mismatch_and_requirements() {
        let v = violations(&cfg(RIEMANN), Some(Mode::Track));
        assert!(v.iter().any(|s| s.contains("does not match")));
        let c = cfg(r#"{"model": {"M": 1, "epsilon": 0.4},
            "initial": {"type": "gaussian", "center": 0, "amplitude": 0.5, "width": 1},
            "run": {"mode": "track", "T": 1, "h": 0.1}}"#);
        assert_eq!(
            violations(&c, None),
            vec!["run.delta required for mode track with a non-step profile"]
        );
        let c = cfg(r#"{"model": {"M": 1, "epsilon": 0.4},
            "initial": {"type": "steps", "background": 0.9, "intervals": [{"lo": 0, "value": 0.1}]},
            "run": {"mode": "riemann", "T": 1}}"#);
        assert_eq!(violations(&c, None), vec!["run.h required for mode riemann"]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse("{").is_err());
        assert!(parse(r#"{"model": {"M": "one"}}"#).is_err());
        assert!(parse(r#"{"run": {"mode": "bogus", "T": 1}}"#).is_err());
        assert!(parse(r#"{"extra": 1}"#).is_err());
    }

    #[test]
    fn manifest_echo_round_trips() {
        let s = check(&cfg(RIEMANN), None).unwrap();
        let manifest = serde_json::json!({"tool": "co2fronts", "config": s.echo});
        let back = parse(&manifest.to_string()).unwrap();
        assert!(violations(&back, None).is_empty());
        assert_eq!(back, s.echo);
    }
}

//! Flat `key = value` configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Angles are in degrees (or `absent`), everything else is SI. Windows accept
//! `inf`. [`RunConfig::to_text`] writes every key and re-parses to an
//! identical value.
//!
//! ```text
//! theta1 = 0
//! theta2 = 22.5
//! theta3 = absent
//! theta4 = absent
//! T = 1e-12
//! window34 = 5e-14
//! seed = 7
//! ```

use std::fmt::Write as _;

use crate::elements::{
    BeamSplitterSpec, ExperimentConfig, FrequencySpec, Geometry, PolarizerSetting, ReflectionPhase, TimingSpec,
};
use crate::error::ConfigError;
use crate::montecarlo::{MonteCarloConfig, Window};

/// Every key in the order written by [`RunConfig::to_text`].
pub const KEYS: &[&str] = &[
    "theta1", "theta2", "theta3", "theta4", "Tx", "Ty", "Rx", "Ry", "reflection", "r1", "r2", "r3", "r4", "rI",
    "rII", "c", "omega1", "omega2", "omega3", "omega4", "t01", "t02", "t1", "t2", "t3", "t4", "T", "sigma_s",
    "window34", "window12", "efficiency1", "efficiency2", "efficiency3", "efficiency4", "n_events", "seed",
    "scan_points",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Polarizer angles in degrees; `None` when absent.
    pub theta_deg: [Option<f64>; 4],
    pub tx: f64,
    pub ty: f64,
    pub rx: f64,
    pub ry: f64,
    pub reflection: ReflectionPhase,
    pub geometry: Geometry,
    pub timing: TimingSpec,
    pub omega: [f64; 4],
    pub coherence_time: f64,
    pub sigma_s: f64,
    pub window34: Window,
    pub window12: Window,
    pub efficiency: [f64; 4],
    pub n_events: u64,
    pub seed: Option<u64>,
    /// Number of `theta1` values in the Monte Carlo fringe scan.
    pub scan_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mc = MonteCarloConfig::default();
        RunConfig {
            theta_deg: [Some(0.0); 4],
            tx: 0.5,
            ty: 0.5,
            rx: 0.5,
            ry: 0.5,
            reflection: ReflectionPhase::default(),
            geometry: Geometry::default(),
            timing: TimingSpec::default(),
            omega: FrequencySpec::default().omega,
            coherence_time: mc.coherence_time,
            sigma_s: mc.sigma_s,
            window34: mc.window34,
            window12: mc.window12,
            efficiency: mc.efficiency,
            n_events: mc.n_events,
            seed: None,
            scan_points: mc.settings.len(),
        }
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| ConfigError::Parse {
        line,
        key: key.to_string(),
        message: format!("expected a number, got `{value}`"),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::Parse {
            line,
            key: key.to_string(),
            message: "value must be finite".into(),
        });
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        key: key.to_string(),
        message: format!("expected a non-negative integer, got `{value}`"),
    })
}

fn parse_window(key: &str, value: &str, line: usize) -> Result<Window, ConfigError> {
    match value {
        "inf" | "unbounded" => Ok(Window::Unbounded),
        _ => Ok(Window::Finite(parse_f64(key, value, line)?)),
    }
}

fn index_of(key: &str, prefix: &str) -> Option<usize> {
    let rest = key.strip_prefix(prefix)?;
    match rest {
        "1" => Some(0),
        "2" => Some(1),
        "3" => Some(2),
        "4" => Some(3),
        _ => None,
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|s| s == key) {
                return Err(ConfigError::Parse {
                    line,
                    key: key.to_string(),
                    message: "duplicate key".into(),
                });
            }
            cfg.set(key, value, line)?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    /// Assigns one key; `line` is used for diagnostics (0 for command-line overrides).
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        if let Some(i) = index_of(key, "theta") {
            self.theta_deg[i] = match value {
                "absent" => None,
                _ => Some(parse_f64(key, value, line)?),
            };
            return Ok(());
        }
        if let Some(i) = index_of(key, "omega") {
            self.omega[i] = parse_f64(key, value, line)?;
            return Ok(());
        }
        if let Some(i) = index_of(key, "efficiency") {
            self.efficiency[i] = parse_f64(key, value, line)?;
            return Ok(());
        }
        let g = &mut self.geometry;
        let t = &mut self.timing;
        let slot = match key {
            "Tx" => &mut self.tx,
            "Ty" => &mut self.ty,
            "Rx" => &mut self.rx,
            "Ry" => &mut self.ry,
            "r1" => &mut g.r1,
            "r2" => &mut g.r2,
            "r3" => &mut g.r3,
            "r4" => &mut g.r4,
            "rI" => &mut g.r_i,
            "rII" => &mut g.r_ii,
            "c" => &mut g.c,
            "t01" => &mut t.t0_i,
            "t02" => &mut t.t0_ii,
            "t1" => &mut t.t1,
            "t2" => &mut t.t2,
            "t3" => &mut t.t3,
            "t4" => &mut t.t4,
            "T" => &mut self.coherence_time,
            "sigma_s" => &mut self.sigma_s,
            "efficiency" => {
                self.efficiency = [parse_f64(key, value, line)?; 4];
                return Ok(());
            }
            "window34" => {
                self.window34 = parse_window(key, value, line)?;
                return Ok(());
            }
            "window12" => {
                self.window12 = parse_window(key, value, line)?;
                return Ok(());
            }
            "reflection" => {
                self.reflection = match value {
                    "+i" | "i" => ReflectionPhase::PlusI,
                    "-i" => ReflectionPhase::MinusI,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            key: key.into(),
                            message: format!("expected `+i` or `-i`, got `{value}`"),
                        })
                    }
                };
                return Ok(());
            }
            "n_events" => {
                self.n_events = parse_int(key, value, line)?;
                return Ok(());
            }
            "seed" => {
                self.seed = Some(parse_int(key, value, line)?);
                return Ok(());
            }
            "scan_points" => {
                self.scan_points = parse_int(key, value, line)?;
                return Ok(());
            }
            _ => {
                return Err(ConfigError::Parse {
                    line,
                    key: key.into(),
                    message: "unknown key".into(),
                })
            }
        };
        *slot = parse_f64(key, value, line)?;
        Ok(())
    }

    /// Every key, one per line, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, th) in self.theta_deg.iter().enumerate() {
            match th {
                Some(d) => writeln!(s, "theta{} = {d}", i + 1),
                None => writeln!(s, "theta{} = absent", i + 1),
            }
            .unwrap();
        }
        let reflection = match self.reflection {
            ReflectionPhase::PlusI => "+i",
            ReflectionPhase::MinusI => "-i",
        };
        let window = |w: Window| match w {
            Window::Finite(x) => format!("{x:e}"),
            Window::Unbounded => "inf".to_string(),
        };
        let g = &self.geometry;
        let t = &self.timing;
        let reals = [
            ("Tx", self.tx),
            ("Ty", self.ty),
            ("Rx", self.rx),
            ("Ry", self.ry),
        ];
        for (k, v) in reals {
            writeln!(s, "{k} = {v}").unwrap();
        }
        writeln!(s, "reflection = {reflection}").unwrap();
        let si = [
            ("r1", g.r1),
            ("r2", g.r2),
            ("r3", g.r3),
            ("r4", g.r4),
            ("rI", g.r_i),
            ("rII", g.r_ii),
            ("c", g.c),
            ("omega1", self.omega[0]),
            ("omega2", self.omega[1]),
            ("omega3", self.omega[2]),
            ("omega4", self.omega[3]),
            ("t01", t.t0_i),
            ("t02", t.t0_ii),
            ("t1", t.t1),
            ("t2", t.t2),
            ("t3", t.t3),
            ("t4", t.t4),
            ("T", self.coherence_time),
            ("sigma_s", self.sigma_s),
        ];
        for (k, v) in si {
            writeln!(s, "{k} = {v:e}").unwrap();
        }
        writeln!(s, "window34 = {}", window(self.window34)).unwrap();
        writeln!(s, "window12 = {}", window(self.window12)).unwrap();
        for (i, e) in self.efficiency.iter().enumerate() {
            writeln!(s, "efficiency{} = {e}", i + 1).unwrap();
        }
        writeln!(s, "n_events = {}", self.n_events).unwrap();
        if let Some(seed) = self.seed {
            writeln!(s, "seed = {seed}").unwrap();
        }
        writeln!(s, "scan_points = {}", self.scan_points).unwrap();
        s
    }

    pub fn polarizers(&self) -> [PolarizerSetting; 4] {
        self.theta_deg.map(|d| match d {
            Some(d) => PolarizerSetting::degrees(d),
            None => PolarizerSetting::Absent,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let cfg = ExperimentConfig {
            polarizers: self.polarizers(),
            beam_splitter: BeamSplitterSpec::new(self.tx, self.ty, self.rx, self.ry)?.with_reflection(self.reflection),
            geometry: self.geometry,
            timing: self.timing,
            frequencies: FrequencySpec { omega: self.omega },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Monte Carlo settings with a `theta1` fringe scan; a seed is required.
    pub fn monte_carlo(&self) -> Result<MonteCarloConfig, ConfigError> {
        let seed = self.seed.ok_or(ConfigError::Invalid {
            name: "seed",
            reason: "Monte Carlo runs need an explicit seed".into(),
        })?;
        if self.scan_points < 8 {
            return Err(ConfigError::Invalid {
                name: "scan_points",
                reason: format!("need at least 8 fringe points, got {}", self.scan_points),
            });
        }
        let mc = MonteCarloConfig {
            n_events: self.n_events,
            seed,
            coherence_time: self.coherence_time,
            omega0: self.omega,
            sigma_s: self.sigma_s,
            window34: self.window34,
            window12: self.window12,
            efficiency: self.efficiency,
            settings: MonteCarloConfig::fringe_scan(self.scan_points),
        };
        mc.validate()?;
        Ok(mc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_keys() {
        let text = "# run\ntheta1 = 90  # vertical\ntheta3=absent\n\nT = 2e-12\nwindow34 = inf\nseed = 9\nefficiency = 0.5\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.theta_deg[0], Some(90.0));
        assert_eq!(cfg.theta_deg[2], None);
        assert_eq!(cfg.coherence_time, 2e-12);
        assert_eq!(cfg.window34, Window::Unbounded);
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.efficiency, [0.5; 4]);
    }

    #[test]
    fn diagnostics_carry_line_and_key() {
        let err = RunConfig::parse("theta1 = 0\nTx = abc\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 2,
                key: "Tx".into(),
                message: "expected a number, got `abc`".into()
            }
        );
        assert!(matches!(RunConfig::parse("bogus = 1").unwrap_err(), ConfigError::Parse { line: 1, .. }));
        assert!(matches!(RunConfig::parse("T 1").unwrap_err(), ConfigError::Parse { line: 1, .. }));
        assert!(matches!(RunConfig::parse("T = 1\nT = 2").unwrap_err(), ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = RunConfig {
            theta_deg: [Some(22.5), None, Some(1.0 / 3.0), Some(179.9)],
            window34: Window::Finite(5e-14),
            seed: Some(u64::MAX),
            ..RunConfig::default()
        };
        cfg.geometry.r1 = 0.1 + 0.2;
        cfg.reflection = ReflectionPhase::MinusI;
        let text = cfg.to_text();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        for key in KEYS {
            assert!(text.lines().any(|l| l.starts_with(&format!("{key} ="))), "{key}");
        }
    }

    #[test]
    fn builds_physics_configs() {
        let cfg = RunConfig::parse("theta2 = 90\nTx = 0.7\nRx = 0.3").unwrap();
        let exp = cfg.experiment().unwrap();
        assert!((exp.polarizers[1].theta().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(exp.beam_splitter.tx(), 0.7);
        assert!(RunConfig::parse("Tx = 0.7").unwrap().experiment().is_err());
        assert!(cfg.monte_carlo().is_err());
        let mc = RunConfig::parse("seed = 1").unwrap().monte_carlo().unwrap();
        assert_eq!(mc.settings.len(), 8);
    }
}

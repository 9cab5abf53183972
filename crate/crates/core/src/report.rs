//! CSV and summary output.
//!
//! Every file starts with `#` comment lines holding the run manifest: the
//! subcommand, tool version, seed and the full configuration. Numbers use
//! `{:.16e}` (17 significant digits) and lines end in LF.

use std::fmt::Write as _;

use crate::bell::{ChshSettings, ChshValue};
use crate::config::RunConfig;
use crate::error::ConfigError;
use crate::montecarlo::{CoincidenceStats, Histogram};
use crate::wavepacket::SweepRow;

const CONFIG_PREFIX: &str = "# config: ";

/// Full round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
    /// Extra `key = value` annotations.
    pub notes: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &RunConfig) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# subcommand = {}", self.subcommand).unwrap();
        writeln!(s, "# version = {}", self.version).unwrap();
        match self.seed {
            Some(seed) => writeln!(s, "# seed = {seed}").unwrap(),
            None => writeln!(s, "# seed = none").unwrap(),
        }
        for (k, v) in &self.notes {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        for line in self.config.to_text().lines() {
            writeln!(s, "{CONFIG_PREFIX}{line}").unwrap();
        }
        s
    }
}

/// Re-reads the configuration echoed in an output file's header.
pub fn config_from_header(text: &str) -> Result<RunConfig, ConfigError> {
    let body: String = text
        .lines()
        .filter_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .map(|l| format!("{l}\n"))
        .collect();
    RunConfig::parse(&body)
}

/// One row of the analytic-versus-oracle table; angles in degrees, `None` when absent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticRow {
    pub theta_deg: [Option<f64>; 4],
    pub analytic: f64,
    pub oracle: f64,
}

impl AnalyticRow {
    pub fn abs_diff(&self) -> f64 {
        (self.analytic - self.oracle).abs()
    }
}

pub fn analytic_csv(manifest: &RunManifest, rows: &[AnalyticRow]) -> String {
    let mut s = manifest.header();
    s.push_str("theta1,theta2,theta3,theta4,P_analytic,P_oracle,abs_diff\n");
    for r in rows {
        for th in r.theta_deg {
            match th {
                Some(d) => write!(s, "{},", num(d)).unwrap(),
                None => s.push_str("absent,"),
            }
        }
        writeln!(s, "{},{},{}", num(r.analytic), num(r.oracle), num(r.abs_diff())).unwrap();
    }
    s
}

pub fn sweep_csv(manifest: &RunManifest, rows: &[SweepRow]) -> String {
    let mut s = manifest.header();
    s.push_str("tauS_over_T,tau34_over_T,theta_diff,density,visibility,in_bell_region,quad_rel_err\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.tau_s_over_t),
            num(r.tau34_over_t),
            num(r.theta_diff),
            num(r.density),
            num(r.visibility),
            r.in_bell_region as u8,
            num(r.quad_rel_err)
        )
        .unwrap();
    }
    s
}

/// Flat `key = value` block.
pub fn montecarlo_summary(manifest: &RunManifest, stats: &CoincidenceStats) -> String {
    let t = manifest.config.coherence_time;
    let mut s = manifest.header();
    writeln!(s, "n_emitted = {}", stats.n_emitted).unwrap();
    writeln!(s, "n_one_one = {}", stats.n_one_one).unwrap();
    writeln!(s, "n_two_photon_d3 = {}", stats.n_two_photon[0]).unwrap();
    writeln!(s, "n_two_photon_d4 = {}", stats.n_two_photon[1]).unwrap();
    writeln!(s, "n_quad_detected = {}", stats.n_quad_detected).unwrap();
    writeln!(s, "n_in_window = {}", stats.n_in_window).unwrap();
    writeln!(s, "one_one_fraction = {}", num(stats.one_one_fraction())).unwrap();
    writeln!(s, "acceptance_rate = {}", num(stats.acceptance_rate)).unwrap();
    writeln!(s, "postselect_fraction = {}", num(stats.postselect_fraction)).unwrap();
    match stats.visibility {
        Some((v, err)) => {
            writeln!(s, "visibility = {}", num(v)).unwrap();
            writeln!(s, "visibility_stderr = {}", num(err)).unwrap();
        }
        None => {
            writeln!(s, "visibility = nan").unwrap();
            writeln!(s, "visibility_stderr = nan").unwrap();
        }
    }
    writeln!(s, "predicted_visibility = {}", num(stats.predicted_visibility)).unwrap();
    writeln!(s, "mean_abs_tau34 = {}", num(stats.mean_abs_tau34)).unwrap();
    writeln!(s, "mean_abs_tau34_over_T = {}", num(stats.mean_abs_tau34 / t)).unwrap();
    writeln!(s, "rms_tau34_over_T = {}", num(stats.rms_tau34 / t)).unwrap();
    writeln!(s, "quoted_mean_tau34_over_T = {}", num(std::f64::consts::SQRT_2)).unwrap();
    for (k, c) in stats.settings.iter().enumerate() {
        let [pp, po, op, oo] = c.tally.0;
        writeln!(
            s,
            "setting{k} = theta1 {} theta2 {} counts {pp} {po} {op} {oo}",
            num(c.a.to_degrees()),
            num(c.b.to_degrees())
        )
        .unwrap();
    }
    s
}

pub fn histogram_csv(manifest: &RunManifest, hist: &Histogram) -> String {
    let mut s = manifest.header();
    writeln!(s, "# underflow = {}", hist.underflow).unwrap();
    writeln!(s, "# overflow = {}", hist.overflow).unwrap();
    s.push_str("tau34_over_T,count\n");
    for (x, n) in hist.rows() {
        writeln!(s, "{},{n}", num(x)).unwrap();
    }
    s
}

/// Angles written in degrees.
pub fn chsh_csv(manifest: &RunManifest, settings: &ChshSettings, value: &ChshValue) -> String {
    let mut s = manifest.header();
    s.push_str("a,a_prime,b,b_prime,E_ab,E_ab',E_a'b,E_a'b',S,stderr\n");
    let [e0, e1, e2, e3] = value.correlations;
    writeln!(
        s,
        "{},{},{},{},{},{},{},{},{},{}",
        num(settings.a.to_degrees()),
        num(settings.a_prime.to_degrees()),
        num(settings.b.to_degrees()),
        num(settings.b_prime.to_degrees()),
        num(e0),
        num(e1),
        num(e2),
        num(e3),
        num(value.s),
        value.stderr.map_or("nan".to_string(), num)
    )
    .unwrap();
    s
}

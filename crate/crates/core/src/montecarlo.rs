//! Event-level simulation of the four-photon experiment.
//!
//! Polarizers sit only on the left and are read out in both ports (a
//! polarizing beam splitter in front of each of D1 and D2), so every emission
//! ends in one of four left outcomes. The right photons are detected without
//! polarizers; they leave either one per port (the 1-1 channel, a candidate
//! quadruple coincidence) or both through the same port.
//!
//! Per event, in units of the coherence time `T`:
//!
//! 1. `tau_s ~ N(0, sigma_s^2)`; the left outcome is drawn uniformly (each
//!    left photon is unpolarized).
//! 2. A candidate 1-1 detection is drawn from the envelope
//!    `F (cosh(tau_s tau34) + 1)`, whose total mass is `(1 + e^{-tau_s^2/2})/2`
//!    over the four outcomes; the remainder is a 2-photon-channel event.
//! 3. The candidate is accepted with probability `density / envelope`, the
//!    density being the closed-form wave-packet density. Rejections also
//!    become 2-photon-channel events, which keeps the total per left outcome
//!    at exactly `1/4`.
//! 4. Detector efficiencies thin the firings.
//!
//! Detection times are measured from the packet centers with zero path
//! lengths; frequencies are not drawn per event because the time density
//! already integrates over the spectra coherently.
//!
//! Batches of [`BATCH_SIZE`] events each use their own ChaCha stream, and
//! batch statistics are merged in batch order, so results do not depend on
//! the thread count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bell::{chsh_s, ChshSettings, ChshValue, CorrelationSource, OutcomeTally, SettingCounts};
use crate::elements::{Geometry, TimingSpec};
use crate::error::{ConfigError, Result, SimulationError};
use crate::wavepacket::{closed_density_no_right, WavePacketParams};

/// Events per RNG stream.
pub const BATCH_SIZE: u64 = 1024;

/// Histogram bin width in units of `T`.
pub const HIST_BIN_WIDTH: f64 = 0.1;
/// Histogram range `[-HIST_HALF_RANGE, HIST_HALF_RANGE)` in units of `T`.
pub const HIST_HALF_RANGE: f64 = 6.0;

/// Relative slack before `density > envelope` counts as a violation.
const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// Accept `|dt| <= width` (s).
    Finite(f64),
    Unbounded,
}

impl Window {
    pub fn contains(self, dt: f64) -> bool {
        match self {
            Window::Finite(w) => dt.abs() <= w,
            Window::Unbounded => true,
        }
    }

    fn validate(self, name: &'static str) -> Result<(), ConfigError> {
        match self {
            Window::Finite(w) if w.is_nan() || w <= 0.0 => Err(ConfigError::Invalid {
                name,
                reason: format!("window must be positive or unbounded, got {w}"),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub n_events: u64,
    pub seed: u64,
    /// Coherence time `T` (s).
    pub coherence_time: f64,
    /// Central angular frequencies of photons 1..4 (rad/s).
    pub omega0: [f64; 4],
    /// Standard deviation of the emission offset `tau_s` (s).
    pub sigma_s: f64,
    pub window34: Window,
    pub window12: Window,
    /// Efficiencies of D1..D4.
    pub efficiency: [f64; 4],
    /// Left analyzer settings `(theta1, theta2)`, cycled over the events.
    pub settings: Vec<(f64, f64)>,
}

impl MonteCarloConfig {
    /// `theta2 = 0` and `theta1` on `points` equally spaced angles of `[0, pi)`.
    pub fn fringe_scan(points: usize) -> Vec<(f64, f64)> {
        (0..points).map(|k| (PI * k as f64 / points as f64, 0.0)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_events == 0 {
            return Err(ConfigError::Invalid {
                name: "n_events",
                reason: "need at least one event".into(),
            });
        }
        if !(self.coherence_time > 0.0 && self.coherence_time.is_finite()) {
            return Err(ConfigError::Invalid {
                name: "T",
                reason: format!("coherence time must be positive, got {}", self.coherence_time),
            });
        }
        if !(self.sigma_s >= 0.0 && self.sigma_s.is_finite()) {
            return Err(ConfigError::Invalid {
                name: "sigma_s",
                reason: format!("must be non-negative, got {}", self.sigma_s),
            });
        }
        for (k, eta) in self.efficiency.iter().enumerate() {
            if !(0.0..=1.0).contains(eta) {
                return Err(ConfigError::CoefficientRange {
                    name: ["efficiency1", "efficiency2", "efficiency3", "efficiency4"][k],
                    value: *eta,
                });
            }
        }
        if self.omega0.iter().any(|w| !w.is_finite()) {
            return Err(ConfigError::Invalid {
                name: "omega",
                reason: "frequencies must be finite".into(),
            });
        }
        if self.settings.is_empty() {
            return Err(ConfigError::Invalid {
                name: "settings",
                reason: "need at least one analyzer setting".into(),
            });
        }
        self.window34.validate("window34")?;
        self.window12.validate("window12")
    }
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            n_events: 100_000,
            seed: 0,
            coherence_time: 1e-12,
            omega0: [crate::elements::FrequencySpec::default().omega[0]; 4],
            sigma_s: 0.0,
            window34: Window::Unbounded,
            window12: Window::Unbounded,
            efficiency: [1.0; 4],
            settings: MonteCarloConfig::fringe_scan(8),
        }
    }
}

/// What the right side registered.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RightOutcome {
    /// One photon at each of D3 and D4, detection times in s.
    OneOne { t3: f64, t4: f64 },
    /// Both photons in the same port.
    TwoPhoton { to_d3: bool },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionRecord {
    pub index: u64,
    /// Index into [`MonteCarloConfig::settings`].
    pub setting: usize,
    /// Emission offset `t0_I - t0_II` (s).
    pub tau_s: f64,
    pub t1: f64,
    pub t2: f64,
    /// Left analyzer ports: `true` for the setting angle, `false` for the orthogonal one.
    pub pass1: bool,
    pub pass2: bool,
    pub right: RightOutcome,
    /// Firings of D1..D4 after efficiency thinning.
    pub fired: [bool; 4],
    /// Whether the candidate came from the envelope, before acceptance.
    pub proposed: bool,
}

impl DetectionRecord {
    pub fn is_quad(&self) -> bool {
        matches!(self.right, RightOutcome::OneOne { .. }) && self.fired.iter().all(|&f| f)
    }

    pub fn tau34(&self) -> Option<f64> {
        match self.right {
            RightOutcome::OneOne { t3, t4 } => Some(t3 - t4),
            RightOutcome::TwoPhoton { .. } => None,
        }
    }

    pub fn in_window(&self, cfg: &MonteCarloConfig) -> bool {
        self.is_quad()
            && self.tau34().is_some_and(|d| cfg.window34.contains(d))
            && cfg.window12.contains(self.t1 - self.t2)
    }
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

/// Draws one event. `index` selects the analyzer setting.
pub fn sample_event(cfg: &MonteCarloConfig, rng: &mut ChaCha8Rng, index: u64) -> Result<DetectionRecord> {
    let t = cfg.coherence_time;
    let setting = (index % cfg.settings.len() as u64) as usize;
    let (theta1, theta2) = cfg.settings[setting];

    let tau_s = normal(rng, 0.0, 1.0) * cfg.sigma_s / t;
    let pass1 = rng.gen::<bool>();
    let pass2 = rng.gen::<bool>();
    let theta1_eff = if pass1 { theta1 } else { theta1 + FRAC_PI_2 };
    let theta2_eff = if pass2 { theta2 } else { theta2 + FRAC_PI_2 };

    let overlap = (-0.5 * tau_s * tau_s).exp();
    let envelope_mass = 0.5 * (1.0 + overlap);
    let proposed = rng.gen::<f64>() < envelope_mass;
    let t1 = normal(rng, tau_s / 2.0, 0.5);
    let t2 = normal(rng, -tau_s / 2.0, 0.5);

    let mut right = RightOutcome::TwoPhoton { to_d3: false };
    if proposed {
        let (m3, m4) = if rng.gen::<f64>() < 1.0 / (1.0 + overlap) {
            if rng.gen::<bool>() {
                (tau_s / 2.0, -tau_s / 2.0)
            } else {
                (-tau_s / 2.0, tau_s / 2.0)
            }
        } else {
            (0.0, 0.0)
        };
        let t3 = normal(rng, m3, 0.5);
        let t4 = normal(rng, m4, 0.5);
        let params = WavePacketParams {
            omega0: cfg.omega0,
            coherence_time: t,
            geometry: Geometry::default(),
            timing: TimingSpec {
                t0_i: tau_s * t / 2.0,
                t0_ii: -tau_s * t / 2.0,
                t1: t1 * t,
                t2: t2 * t,
                t3: t3 * t,
                t4: t4 * t,
            },
        };
        let q = closed_density_no_right(theta1_eff, theta2_eff, &params)?;
        let envelope = q.damping_f / t.powi(4) * (q.cosh_term + 1.0);
        // F underflows and cosh overflows far from the packet centers, so the
        // ratio is formed from the bracket alone
        let ratio = (1.0 - q.interference / q.cosh_term) / (1.0 + 1.0 / q.cosh_term);
        if ratio > 1.0 + ENVELOPE_SLACK || (envelope > 0.0 && q.density > envelope * (1.0 + ENVELOPE_SLACK)) {
            return Err(SimulationError::EnvelopeViolation {
                target: q.density,
                envelope,
            }
            .into());
        }
        if rng.gen::<f64>() < ratio {
            right = RightOutcome::OneOne { t3: t3 * t, t4: t4 * t };
        }
    }
    if let RightOutcome::TwoPhoton { ref mut to_d3 } = right {
        *to_d3 = rng.gen::<bool>();
    }

    let eta = cfg.efficiency;
    let mut fired = [false; 4];
    fired[0] = rng.gen::<f64>() < eta[0];
    fired[1] = rng.gen::<f64>() < eta[1];
    match right {
        RightOutcome::OneOne { .. } => {
            fired[2] = rng.gen::<f64>() < eta[2];
            fired[3] = rng.gen::<f64>() < eta[3];
        }
        RightOutcome::TwoPhoton { to_d3 } => {
            let k = if to_d3 { 2 } else { 3 };
            fired[k] = rng.gen::<f64>() < 1.0 - (1.0 - eta[k]).powi(2);
        }
    }

    Ok(DetectionRecord {
        index,
        setting,
        tau_s: tau_s * t,
        t1: t1 * t,
        t2: t2 * t,
        pass1,
        pass2,
        right,
        fired,
        proposed,
    })
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn batch_count(n_events: u64) -> u64 {
    n_events.div_ceil(BATCH_SIZE)
}

/// The events of one batch, in order.
pub fn sample_batch(cfg: &MonteCarloConfig, batch: u64) -> Result<Vec<DetectionRecord>> {
    let start = batch * BATCH_SIZE;
    let end = (start + BATCH_SIZE).min(cfg.n_events);
    let mut rng = batch_rng(cfg.seed, batch);
    (start..end).map(|i| sample_event(cfg, &mut rng, i)).collect()
}

/// Every event of the run, serially.
pub fn sample_all(cfg: &MonteCarloConfig) -> Result<Vec<DetectionRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n_events as usize);
    for b in 0..batch_count(cfg.n_events) {
        out.extend(sample_batch(cfg, b)?);
    }
    Ok(out)
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Histogram of `tau34 / T` with bins of [`HIST_BIN_WIDTH`].
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    fn new() -> Self {
        let bins = (2.0 * HIST_HALF_RANGE / HIST_BIN_WIDTH).round() as usize;
        Histogram {
            lo: -HIST_HALF_RANGE,
            bin_width: HIST_BIN_WIDTH,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    fn record(&mut self, x: f64) {
        let k = ((x - self.lo) / self.bin_width).floor();
        if k < 0.0 {
            self.underflow += 1;
        } else if k as usize >= self.counts.len() {
            self.overflow += 1;
        } else {
            self.counts[k as usize] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    /// `(bin center, count)` pairs.
    pub fn rows(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &n)| (self.lo + (k as f64 + 0.5) * self.bin_width, n))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

#[derive(Clone, Debug)]
struct Accumulator {
    n_emitted: u64,
    n_proposed: u64,
    n_one_one: u64,
    n_two_photon: [u64; 2],
    n_quad_detected: u64,
    n_in_window: u64,
    tallies: Vec<OutcomeTally>,
    sum_abs_tau34: CompensatedSum,
    sum_sq_tau34: CompensatedSum,
    // weights 1/(4 cosh - 2 K) undo the outcome-summed density of accepted events
    w: CompensatedSum,
    w_cosh: CompensatedSum,
    w_beat: CompensatedSum,
    histogram: Histogram,
}

impl Accumulator {
    fn new(settings: usize) -> Self {
        Accumulator {
            n_emitted: 0,
            n_proposed: 0,
            n_one_one: 0,
            n_two_photon: [0; 2],
            n_quad_detected: 0,
            n_in_window: 0,
            tallies: vec![OutcomeTally::default(); settings],
            sum_abs_tau34: CompensatedSum::default(),
            sum_sq_tau34: CompensatedSum::default(),
            w: CompensatedSum::default(),
            w_cosh: CompensatedSum::default(),
            w_beat: CompensatedSum::default(),
            histogram: Histogram::new(),
        }
    }

    fn record(&mut self, rec: &DetectionRecord, cfg: &MonteCarloConfig) {
        self.n_emitted += 1;
        self.n_proposed += rec.proposed as u64;
        match rec.right {
            RightOutcome::OneOne { .. } => self.n_one_one += 1,
            RightOutcome::TwoPhoton { to_d3 } => self.n_two_photon[(!to_d3) as usize] += 1,
        }
        if !rec.is_quad() {
            return;
        }
        self.n_quad_detected += 1;
        if !rec.in_window(cfg) {
            return;
        }
        self.n_in_window += 1;
        self.tallies[rec.setting].record(rec.pass1, rec.pass2);
        let t = cfg.coherence_time;
        let tau34 = rec.tau34().expect("quad events are 1-1") / t;
        self.sum_abs_tau34.add(tau34.abs());
        self.sum_sq_tau34.add(tau34 * tau34);
        self.histogram.record(tau34);
        let cosh = (rec.tau_s / t * tau34).cosh();
        let beat = ((cfg.omega0[2] - cfg.omega0[3]) * t * tau34).cos();
        let w = 1.0 / (4.0 * cosh - 2.0 * beat);
        self.w.add(w);
        self.w_cosh.add(w * cosh);
        self.w_beat.add(w * beat);
    }

    fn merge(&mut self, o: &Accumulator) {
        self.n_emitted += o.n_emitted;
        self.n_proposed += o.n_proposed;
        self.n_one_one += o.n_one_one;
        self.n_two_photon[0] += o.n_two_photon[0];
        self.n_two_photon[1] += o.n_two_photon[1];
        self.n_quad_detected += o.n_quad_detected;
        self.n_in_window += o.n_in_window;
        for (a, b) in self.tallies.iter_mut().zip(&o.tallies) {
            a.merge(b);
        }
        self.sum_abs_tau34.merge(&o.sum_abs_tau34);
        self.sum_sq_tau34.merge(&o.sum_sq_tau34);
        self.w.merge(&o.w);
        self.w_cosh.merge(&o.w_cosh);
        self.w_beat.merge(&o.w_beat);
        self.histogram.merge(&o.histogram);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceStats {
    pub n_emitted: u64,
    /// 1-1 channel events before efficiency thinning.
    pub n_one_one: u64,
    /// 2-photon channel events in D3 and D4.
    pub n_two_photon: [u64; 2],
    pub n_quad_detected: u64,
    pub n_in_window: u64,
    /// Accepted over proposed 1-1 candidates.
    pub acceptance_rate: f64,
    /// `n_in_window / n_quad_detected`.
    pub postselect_fraction: f64,
    /// Fringe visibility fitted from the in-window tallies; `None` unless the
    /// settings resolve a `cos 2(theta1 - theta2)` fringe.
    pub visibility: Option<(f64, f64)>,
    /// `<K>/(2<cosh> - <K>)` over the in-window `(tau_s, tau34)` distribution,
    /// `K = cos((w30 - w40) tau34)`.
    pub predicted_visibility: f64,
    /// Mean `|tau34|` over in-window quadruples (s).
    pub mean_abs_tau34: f64,
    /// Root mean square of `tau34` over in-window quadruples (s).
    pub rms_tau34: f64,
    pub histogram: Histogram,
    pub settings: Vec<SettingCounts>,
}

impl CoincidenceStats {
    pub fn one_one_fraction(&self) -> f64 {
        self.n_one_one as f64 / self.n_emitted as f64
    }

    pub fn correlations(&self) -> CorrelationSource {
        CorrelationSource::Counts(self.settings.clone())
    }
}

/// Visibility of `E = -v cos 2(theta1 - theta2)` by least squares over the
/// settings, with the binomial standard error.
pub fn fringe_visibility(settings: &[SettingCounts]) -> Option<(f64, f64)> {
    let src = CorrelationSource::Counts(settings.to_vec());
    let (mut num, mut den, mut var) = (0.0, 0.0, 0.0);
    for s in settings {
        let e = crate::bell::correlation(&src, s.a, s.b).ok()?;
        let c = (2.0 * (s.a - s.b)).cos();
        num -= e * c;
        den += c * c;
        var += c * c * (1.0 - e * e) / s.tally.total() as f64;
    }
    if den < 1e-12 {
        return None;
    }
    Some((num / den, var.sqrt() / den))
}

/// Simulates `cfg.n_events` emissions.
pub fn run(cfg: &MonteCarloConfig) -> Result<CoincidenceStats> {
    cfg.validate()?;
    let batches: Vec<Accumulator> = (0..batch_count(cfg.n_events))
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(cfg.settings.len());
            for rec in sample_batch(cfg, b)? {
                acc.record(&rec, cfg);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut acc = Accumulator::new(cfg.settings.len());
    for b in &batches {
        acc.merge(b);
    }

    if acc.n_in_window == 0 {
        return Err(SimulationError::StatisticsUnavailable {
            n_emitted: acc.n_emitted,
            n_quad_detected: acc.n_quad_detected,
            n_in_window: acc.n_in_window,
        }
        .into());
    }
    let n = acc.n_in_window as f64;
    let t = cfg.coherence_time;
    let settings: Vec<SettingCounts> = cfg
        .settings
        .iter()
        .zip(&acc.tallies)
        .map(|(&(a, b), &tally)| SettingCounts { a, b, tally })
        .collect();
    let mean_cosh = acc.w_cosh.value() / acc.w.value();
    let mean_beat = acc.w_beat.value() / acc.w.value();
    Ok(CoincidenceStats {
        n_emitted: acc.n_emitted,
        n_one_one: acc.n_one_one,
        n_two_photon: acc.n_two_photon,
        n_quad_detected: acc.n_quad_detected,
        n_in_window: acc.n_in_window,
        acceptance_rate: if acc.n_proposed > 0 {
            acc.n_one_one as f64 / acc.n_proposed as f64
        } else {
            0.0
        },
        postselect_fraction: n / acc.n_quad_detected as f64,
        visibility: fringe_visibility(&settings),
        predicted_visibility: mean_beat / (2.0 * mean_cosh - mean_beat),
        mean_abs_tau34: acc.sum_abs_tau34.value() / n * t,
        rms_tau34: (acc.sum_sq_tau34.value() / n).sqrt() * t,
        histogram: acc.histogram,
        settings,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChshRun {
    pub settings: ChshSettings,
    pub value: ChshValue,
    pub stats: CoincidenceStats,
}

/// CHSH on the left pair: the four setting pairs are cycled over the events
/// and `window12` is left unbounded.
pub fn chsh_experiment(cfg: &MonteCarloConfig, settings: ChshSettings) -> Result<ChshRun> {
    let mut cfg = cfg.clone();
    cfg.window12 = Window::Unbounded;
    cfg.settings = settings.pairs().to_vec();
    let stats = run(&cfg)?;
    let value = chsh_s(&stats.correlations(), &settings).map_err(SimulationError::from)?;
    Ok(ChshRun { settings, value, stats })
}

//! Closed-form coincidence probabilities (plane-wave photons).
//!
//! All probabilities are per emitted four-photon event with ideal detectors.

use num_complex::Complex64;

use crate::elements::{BeamSplitterSpec, ExperimentConfig, FrequencySpec, Geometry, TimingSpec};
use crate::error::Result;

/// `T_ij = sqrt(Tx) cos(ti) cos(tj) + sqrt(Ty) sin(ti) sin(tj)`
pub fn t_coeff(theta_i: f64, theta_j: f64, bs: &BeamSplitterSpec) -> f64 {
    bs.tx().sqrt() * theta_i.cos() * theta_j.cos() + bs.ty().sqrt() * theta_i.sin() * theta_j.sin()
}

/// `R_ij = sqrt(Rx) cos(ti) cos(tj) + sqrt(Ry) sin(ti) sin(tj)`
pub fn r_coeff(theta_i: f64, theta_j: f64, bs: &BeamSplitterSpec) -> f64 {
    bs.rx().sqrt() * theta_i.cos() * theta_j.cos() + bs.ry().sqrt() * theta_i.sin() * theta_j.sin()
}

/// Phases of the two interfering histories and the common global phase.
struct Phases {
    global: f64,
    /// photon 3 transmitted to D4, photon 4 transmitted to D3
    transmitted: f64,
    /// both reflected
    reflected: f64,
}

fn phases(geom: &Geometry, timing: &TimingSpec, freq: &FrequencySpec) -> Phases {
    let c = geom.c;
    let [w1, w2, w3, w4] = freq.omega;
    Phases {
        global: w1 * (geom.r1 / c + timing.t0_i - timing.t1)
            + w2 * (geom.r2 / c + timing.t0_ii - timing.t2)
            + w3 * (geom.r_i / c + timing.t0_i)
            + w4 * (geom.r_ii / c + timing.t0_ii),
        transmitted: w3 * (geom.r4 / c - timing.t4) + w4 * (geom.r3 / c - timing.t3),
        reflected: w3 * (geom.r3 / c - timing.t3) + w4 * (geom.r4 / c - timing.t4),
    }
}

/// `(omega3 - omega4) ((r4 - r3)/c + t3 - t4)`: the phase between the two histories.
pub fn beat_phase(freq: &FrequencySpec, geom: &Geometry, timing: &TimingSpec) -> f64 {
    let p = phases(geom, timing, freq);
    p.transmitted - p.reflected
}

/// Vacuum amplitude of `E4 E3 E2 E1 |Psi>`.
///
/// The overall `1/2` is the product of the two pair normalizations of the
/// initial state. Reflection contributes `r^2 = -1` to the second history.
pub fn quad_amplitude(config: &ExperimentConfig) -> Result<Complex64> {
    config.validate()?;
    let [t1, t2, t3, t4] = config.definite_angles()?;
    let bs = &config.beam_splitter;
    let p = phases(&config.geometry, &config.timing, &config.frequencies);
    let r = bs.reflection().factor();
    let bracket = Complex64::from_polar(t_coeff(t1, t4, bs) * t_coeff(t2, t3, bs), p.transmitted)
        + r * r * Complex64::from_polar(r_coeff(t2, t4, bs) * r_coeff(t1, t3, bs), p.reflected);
    Ok(0.5 * Complex64::from_polar(1.0, p.global) * bracket)
}

/// A quadruple-coincidence probability with its interference contribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadProbability {
    pub value: f64,
    /// The cross term between the two histories (zero without interference).
    pub interference_term: f64,
}

/// `|quad_amplitude|^2`, summing absent polarizers over `{reference, reference + pi/2}`.
pub fn quad_probability(config: &ExperimentConfig, reference: f64) -> Result<QuadProbability> {
    config.validate()?;
    let bs = &config.beam_splitter;
    let p = phases(&config.geometry, &config.timing, &config.frequencies);
    let r2 = (bs.reflection().factor() * bs.reflection().factor()).re;
    let cos_beat = (p.transmitted - p.reflected).cos();
    let mut value = 0.0;
    let mut interference = 0.0;
    for t1 in config.polarizers[0].resolve(reference) {
        for t2 in config.polarizers[1].resolve(reference) {
            for t3 in config.polarizers[2].resolve(reference) {
                for t4 in config.polarizers[3].resolve(reference) {
                    let x = t_coeff(t1, t4, bs) * t_coeff(t2, t3, bs);
                    let y = r2 * r_coeff(t2, t4, bs) * r_coeff(t1, t3, bs);
                    let cross = 0.25 * 2.0 * x * y * cos_beat;
                    value += 0.25 * (x * x + y * y) + cross;
                    interference += cross;
                }
            }
        }
    }
    Ok(QuadProbability {
        value,
        interference_term: interference,
    })
}

/// `(1/16) sin^2(t1 - t2) sin^2(t3 - t4)`: balanced splitter, equal paths and frequencies.
pub fn quad_coincidence_prob(t1: f64, t2: f64, t3: f64, t4: f64) -> f64 {
    let a = (t1 - t2).sin();
    let b = (t3 - t4).sin();
    a * a * b * b / 16.0
}

/// No polarizers on the left: `(1/8){1 - cos^2(t3 - t4) cos(beat)}`.
pub fn prob_no_left_polarizers(
    theta3: f64,
    theta4: f64,
    freq: &FrequencySpec,
    geom: &Geometry,
    timing: &TimingSpec,
) -> f64 {
    let c = (theta3 - theta4).cos();
    (1.0 - c * c * beat_phase(freq, geom, timing).cos()) / 8.0
}

/// No polarizers on the right: `(1/8){1 - cos^2(t1 - t2) cos(beat)}`.
pub fn prob_no_right_polarizers(
    theta1: f64,
    theta2: f64,
    freq: &FrequencySpec,
    geom: &Geometry,
    timing: &TimingSpec,
) -> f64 {
    prob_no_left_polarizers(theta1, theta2, freq, geom, timing)
}

/// Both right photons at D3 behind polarizer `t3`: `(1/4) cos^2(t1 - t3) cos^2(t2 - t3)`.
///
/// This is the normally ordered second moment, which for a doubly occupied
/// mode is twice the occupation probability.
pub fn prob_both_same_beam(t1: f64, t2: f64, t3: f64) -> f64 {
    let a = (t1 - t3).cos();
    let b = (t2 - t3).cos();
    a * a * b * b / 4.0
}

/// Both two-photon channels, no right polarizers: `[1 + cos^2(t1 - t2)]/8`.
pub fn prob_two_photon_channels_no_right(t1: f64, t2: f64) -> f64 {
    let c = (t1 - t2).cos();
    (1.0 + c * c) / 8.0
}

/// The 1-1 channel at equal frequencies, no right polarizers: `sin^2(t1 - t2)/8`.
pub fn prob_one_one_channel_no_right(t1: f64, t2: f64) -> f64 {
    let s = (t1 - t2).sin();
    s * s / 8.0
}

/// Frequency-resolved detection: `(1/2) cos^2(t1 - t3) cos^2(t2 - t4)`.
pub fn prob_filtered(t1: f64, t2: f64, t3: f64, t4: f64) -> f64 {
    let a = (t1 - t3).cos();
    let b = (t2 - t4).cos();
    a * a * b * b / 2.0
}

/// Standard pair probability `(1/2) cos^2(ta - tb)`.
pub fn bell_pair_prob(ta: f64, tb: f64) -> f64 {
    let c = (ta - tb).cos();
    c * c / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{PolarizerSetting, ReflectionPhase};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    const EPS: f64 = 1e-15;

    #[test]
    fn coefficient_cases() {
        let bs = BeamSplitterSpec::balanced();
        assert!((t_coeff(0.0, 0.0, &bs) - FRAC_1_SQRT_2).abs() < EPS);
        assert!(t_coeff(0.0, FRAC_PI_2, &bs).abs() < EPS);
        assert!(r_coeff(0.0, FRAC_PI_2, &BeamSplitterSpec::new(0.2, 0.6, 0.8, 0.4).unwrap()).abs() < EPS);
        assert!((t_coeff(FRAC_PI_4, FRAC_PI_4, &bs) - FRAC_1_SQRT_2).abs() < EPS);
    }

    #[test]
    fn eq3_values() {
        assert!((quad_coincidence_prob(0.0, FRAC_PI_2, 0.0, FRAC_PI_2) - 1.0 / 16.0).abs() < EPS);
        assert_eq!(quad_coincidence_prob(0.7, 0.7, 0.1, 1.0), 0.0);
        assert!((quad_coincidence_prob(0.0, FRAC_PI_4, 0.0, FRAC_PI_4) - 1.0 / 64.0).abs() < EPS);
    }

    #[test]
    fn amplitude_reproduces_eq3() {
        let cfg = ExperimentConfig::symmetric([0.0, FRAC_PI_2, 0.0, FRAC_PI_2]);
        assert!((quad_amplitude(&cfg).unwrap().norm_sqr() - 1.0 / 16.0).abs() < EPS);
    }

    #[test]
    fn exact_cancellation() {
        // T14 T23 = R24 R13 with equal phases
        let cfg = ExperimentConfig::symmetric([0.4, 0.4, 1.1, 1.1]);
        assert!(quad_amplitude(&cfg).unwrap().norm() < 1e-16);
    }

    fn beat_timing(beat: f64) -> (FrequencySpec, Geometry, TimingSpec) {
        let freq = FrequencySpec { omega: [1.0, 1.0, 3.0, 2.0] };
        let timing = TimingSpec { t3: beat, ..TimingSpec::default() };
        (freq, Geometry { c: 1.0, ..Geometry::default() }, timing)
    }

    #[test]
    fn eq4_values() {
        let (f, g, t) = beat_timing(0.0);
        assert!(prob_no_left_polarizers(0.3, 0.3, &f, &g, &t).abs() < EPS);
        let (f, g, t) = beat_timing(1.234);
        assert!((prob_no_left_polarizers(0.3, 0.3 + FRAC_PI_2, &f, &g, &t) - 0.125).abs() < EPS);
        let (f, g, t) = beat_timing(PI);
        assert!((beat_phase(&f, &g, &t) - PI).abs() < EPS);
        assert!((prob_no_left_polarizers(0.3, 0.3, &f, &g, &t) - 0.25).abs() < EPS);
    }

    #[test]
    fn eq5_values() {
        let (f, g, t) = beat_timing(0.0);
        assert!(prob_no_right_polarizers(1.0, 1.0, &f, &g, &t).abs() < EPS);
        assert!((prob_no_right_polarizers(0.0, FRAC_PI_2, &f, &g, &t) - 0.125).abs() < EPS);
    }

    #[test]
    fn general_probability_matches_eq4_with_phases() {
        let freq = FrequencySpec { omega: [2.0, 5.0, 3.0, 1.7] };
        let geom = Geometry { r3: 0.4, r4: 1.3, r_i: 0.2, r_ii: 0.9, r1: 0.1, r2: 0.3, c: 1.5 };
        let timing = TimingSpec { t0_i: 0.1, t0_ii: 0.35, t1: 2.0, t2: 3.0, t3: 1.1, t4: 0.2 };
        let cfg = ExperimentConfig {
            polarizers: [
                PolarizerSetting::Absent,
                PolarizerSetting::Absent,
                PolarizerSetting::Angle(0.4),
                PolarizerSetting::Angle(1.0),
            ],
            beam_splitter: BeamSplitterSpec::balanced(),
            geometry: geom,
            timing,
            frequencies: freq,
        };
        let q = quad_probability(&cfg, 0.0).unwrap();
        let closed = prob_no_left_polarizers(0.4, 1.0, &freq, &geom, &timing);
        assert!((q.value - closed).abs() < 1e-15);
        let sign = cfg.beam_splitter.with_reflection(ReflectionPhase::MinusI);
        let q2 = quad_probability(&ExperimentConfig { beam_splitter: sign, ..cfg }, 0.0).unwrap();
        assert_eq!(q.value, q2.value);
    }

    #[test]
    fn channel_formulas() {
        assert!((prob_both_same_beam(0.5, 0.5, 0.5) - 0.25).abs() < EPS);
        assert!(prob_both_same_beam(FRAC_PI_2, 0.3, 0.0).abs() < EPS);
        assert!((prob_both_same_beam(0.0, FRAC_PI_4, 0.0) - 0.125).abs() < EPS);
        assert!((prob_two_photon_channels_no_right(0.2, 0.2) - 0.25).abs() < EPS);
        assert!((prob_two_photon_channels_no_right(0.0, FRAC_PI_2) - 0.125).abs() < EPS);
        for t in [0.0, 0.3, 1.0, 2.5] {
            let sum = prob_two_photon_channels_no_right(t, 0.1) + prob_one_one_channel_no_right(t, 0.1);
            assert!((sum - 0.25).abs() < EPS);
        }
    }

    #[test]
    fn filtered_and_pair_formulas() {
        assert!((prob_filtered(0.3, 1.0, 0.3, 1.0) - 0.5).abs() < EPS);
        assert!(prob_filtered(0.0, 0.2, FRAC_PI_2, 0.9).abs() < EPS);
        // drop polarizer 1: sum over orthogonal settings
        let (t2, t3, t4) = (0.2, 0.5, 1.3);
        let marginal = prob_filtered(0.0, t2, t3, t4) + prob_filtered(FRAC_PI_2, t2, t3, t4);
        assert!((marginal - bell_pair_prob(t2, t4)).abs() < EPS);
        assert!((bell_pair_prob(0.4, 0.4) - 0.5).abs() < EPS);
        assert!(bell_pair_prob(0.0, FRAC_PI_2).abs() < EPS);
        assert!((bell_pair_prob(0.0, FRAC_PI_4) - 0.25).abs() < EPS);
    }
}

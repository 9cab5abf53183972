//! Brute-force probabilities computed on the Fock-space state.
//!
//! These never use a closed form: every number comes from applying the
//! detection operators to the initial state and taking a squared norm.
//! Absent polarizers are handled by summing over two orthogonal settings.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::elements::{beamsplitter_detector_ops, detector_ops, initial_state, ExperimentConfig};
use crate::error::Result;
use crate::fock::{apply, expectation_abs2, vacuum, inner_product, FockState, OperatorExpr};

fn after_left(config: &ExperimentConfig, theta1: f64, theta2: f64) -> Result<FockState> {
    let [e1, e2, _, _] = detector_ops(config, [theta1, theta2, 0.0, 0.0])?;
    Ok(apply(&(&e2 * &e1), &initial_state())?)
}

/// Vacuum amplitude of `E4 E3 E2 E1 |Psi>` at definite angles.
pub fn quad_amplitude(config: &ExperimentConfig) -> Result<Complex64> {
    let expr = crate::elements::quad_detection_expr(config)?;
    let out = apply(&expr, &initial_state())?;
    Ok(inner_product(&vacuum(), &out))
}

/// Quadruple coincidence probability; absent polarizers are summed over
/// `{reference, reference + pi/2}`.
pub fn quad_probability(config: &ExperimentConfig, reference: f64) -> Result<f64> {
    config.validate()?;
    let psi = initial_state();
    let mut total = 0.0;
    for t1 in config.polarizers[0].resolve(reference) {
        for t2 in config.polarizers[1].resolve(reference) {
            for t3 in config.polarizers[2].resolve(reference) {
                for t4 in config.polarizers[3].resolve(reference) {
                    let [e1, e2, e3, e4] = detector_ops(config, [t1, t2, t3, t4])?;
                    let expr = &(&(&e4 * &e3) * &e2) * &e1;
                    total += expectation_abs2(&expr, &psi)?;
                }
            }
        }
    }
    Ok(total)
}

fn right_op(config: &ExperimentConfig, to_d3: bool, theta: f64) -> Result<OperatorExpr> {
    let (e3, e4) = beamsplitter_detector_ops(
        &config.beam_splitter,
        theta,
        theta,
        &config.geometry,
        &config.timing,
        &config.frequencies,
    )?;
    Ok(if to_d3 { e3 } else { e4 })
}

/// `<Psi| E1' E2' E3' E3' E3 E3 E2 E1 |Psi>` with one polarizer angle on D3:
/// the normally ordered second moment of the D3 arm.
pub fn same_beam_moment(config: &ExperimentConfig, theta1: f64, theta2: f64, theta3: f64) -> Result<f64> {
    let left = after_left(config, theta1, theta2)?;
    let e3 = right_op(config, true, theta3)?;
    Ok(expectation_abs2(&(&e3 * &e3), &left)?)
}

/// Probability that both right photons leave through the same port, summed
/// over both ports, with polarizers only on the left.
///
/// For one port this is `(1/2) sum_{p,q} ||b_p b_q phi||^2` over an
/// orthogonal polarization basis `{reference, reference + pi/2}`.
pub fn two_photon_channels_no_right(config: &ExperimentConfig, theta1: f64, theta2: f64, reference: f64) -> Result<f64> {
    let left = after_left(config, theta1, theta2)?;
    let mut total = 0.0;
    for to_d3 in [true, false] {
        let ops = [right_op(config, to_d3, reference)?, right_op(config, to_d3, reference + FRAC_PI_2)?];
        for p in &ops {
            for q in &ops {
                total += 0.5 * expectation_abs2(&(p * q), &left)?;
            }
        }
    }
    Ok(total)
}

/// One photon at each of D3 and D4, polarizers only on the left.
pub fn one_one_channel_no_right(config: &ExperimentConfig, theta1: f64, theta2: f64, reference: f64) -> Result<f64> {
    use crate::elements::PolarizerSetting::{Absent, Angle};
    let cfg = config.with_polarizers([Angle(theta1), Angle(theta2), Absent, Absent]);
    quad_probability(&cfg, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::PolarizerSetting;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn absent_sum_is_basis_independent() {
        let cfg = ExperimentConfig::symmetric([0.3, 1.2, 0.0, 0.0]).with_polarizers([
            PolarizerSetting::Angle(0.3),
            PolarizerSetting::Angle(1.2),
            PolarizerSetting::Absent,
            PolarizerSetting::Absent,
        ]);
        let a = quad_probability(&cfg, 0.0).unwrap();
        let b = quad_probability(&cfg, 0.77).unwrap();
        assert!((a - b).abs() < 1e-15, "{a} {b}");
    }

    #[test]
    fn channels_exhaust_left_detection_probability() {
        let cfg = ExperimentConfig::default();
        for (t1, t2) in [(0.0, 0.0), (0.2, 1.4), (FRAC_PI_4, 0.0)] {
            let two = two_photon_channels_no_right(&cfg, t1, t2, 0.4).unwrap();
            let one = one_one_channel_no_right(&cfg, t1, t2, 0.0).unwrap();
            assert!((one + two - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn same_beam_moment_doubles_the_probability() {
        // both photons in D3 with x polarization: probability 1/8, moment 1/4
        let m = same_beam_moment(&ExperimentConfig::default(), 0.0, 0.0, 0.0).unwrap();
        assert!((m - 0.25).abs() < 1e-15);
    }
}

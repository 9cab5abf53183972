//! Gaussian wave-packet description of the four photons.
//!
//! Each photon has the spectral amplitude
//! `f(w) = T^{1/2} pi^{-1/4} exp(-(w - w0)^2 T^2 / 2)` with a common coherence
//! time `T`. The plane-wave amplitude of `E4 E3 E2 E1 |Psi>` is weighted by the
//! four spectral amplitudes and integrated over the four frequencies; the
//! squared modulus is a probability density in the four detection times.
//!
//! Time-domain amplitudes use the unitary Fourier convention, one factor
//! `(2 pi)^{-1/2}` per frequency integral, so that a single photon's
//! detection-time density integrates to one.
//!
//! With the spectral integrals done in closed form the density with no
//! polarizers on one side reads
//!
//! ```text
//! rho = (F / T^4) { cosh(tau_s tau34 / T^2) - cos^2(dtheta) cos((w30 - w40) tau34) }
//! F   = exp(-(d1^2 + d2^2 + M) / T^2) / (8 pi^2)
//! ```
//!
//! where `d1`, `d2` are the left photons' retarded delays
//! (`r/c + t_emit - t_detect`) and `M` is the mean of the squared delays of the
//! two interfering right-side histories. `F` holds every dependence on the
//! left detection times and on how well the packets are centered.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use gauss_quad::GaussHermite;
use num_complex::Complex64;

use crate::analytic::{r_coeff, t_coeff};
use crate::elements::{BeamSplitterSpec, Geometry, PolarizerSetting, TimingSpec};
use crate::error::{ConfigError, NumericalError, Result};

/// Default Gauss-Hermite order.
pub const DEFAULT_ORDER: usize = 40;

/// Convergence threshold on the relative change between successive orders.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// The product bound on `tau_s tau34 / T^2` as commonly quoted for this setup.
pub const QUOTED_PRODUCT_BOUND: f64 = 0.663;

/// Wave-packet parameters: central frequencies, coherence time, and the
/// geometry and timing that fix the packet delays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavePacketParams {
    /// Central angular frequencies of photons 1..4 (rad/s).
    pub omega0: [f64; 4],
    /// Coherence time `T` (s).
    pub coherence_time: f64,
    pub geometry: Geometry,
    pub timing: TimingSpec,
}

impl WavePacketParams {
    /// Zero path lengths, sources emitting at `+-tau_s/2`, left detections at
    /// the packet centers and right detections at `+-tau34/2`.
    pub fn centered(coherence_time: f64, omega0: [f64; 4], tau_s: f64, tau34: f64) -> Self {
        WavePacketParams {
            omega0,
            coherence_time,
            geometry: Geometry::default(),
            timing: TimingSpec {
                t0_i: tau_s / 2.0,
                t0_ii: -tau_s / 2.0,
                t1: tau_s / 2.0,
                t2: -tau_s / 2.0,
                t3: tau34 / 2.0,
                t4: -tau34 / 2.0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.coherence_time > 0.0 && self.coherence_time.is_finite()) {
            return Err(ConfigError::Invalid {
                name: "T",
                reason: format!("coherence time must be positive, got {}", self.coherence_time),
            });
        }
        self.geometry.validate()
    }

    pub fn tau_s(&self) -> f64 {
        self.timing.tau_s()
    }

    pub fn tau34(&self) -> f64 {
        self.timing.tau34()
    }

    /// Emission offset as seen at the beam splitter, including the path difference `(rI - rII)/c`.
    pub fn effective_tau_s(&self) -> f64 {
        self.tau_s() + (self.geometry.r_i - self.geometry.r_ii) / self.geometry.c
    }

    /// `tau_s tau34 / T^2` (with the effective emission offset).
    pub fn product(&self) -> f64 {
        self.effective_tau_s() * self.tau34() / (self.coherence_time * self.coherence_time)
    }

    fn delays(&self) -> Delays {
        let g = &self.geometry;
        let t = &self.timing;
        Delays {
            d1: g.r1 / g.c + t.t0_i - t.t1,
            d2: g.r2 / g.c + t.t0_ii - t.t2,
            d3_trans: (g.r_i + g.r4) / g.c + t.t0_i - t.t4,
            d4_trans: (g.r_ii + g.r3) / g.c + t.t0_ii - t.t3,
            d3_refl: (g.r_i + g.r3) / g.c + t.t0_i - t.t3,
            d4_refl: (g.r_ii + g.r4) / g.c + t.t0_ii - t.t4,
        }
    }

    fn require_equal_arms(&self) -> Result<(), ConfigError> {
        if (self.geometry.r3 - self.geometry.r4).abs() > 1e-12 * self.geometry.r3.abs().max(1.0) {
            return Err(ConfigError::Invalid {
                name: "r3",
                reason: "closed-form densities require r3 = r4".into(),
            });
        }
        Ok(())
    }
}

/// Retarded delays `r/c + t_emit - t_detect` of each photon (s).
/// The transmitted history sends photon 3 to D4 and photon 4 to D3.
#[derive(Clone, Copy, Debug)]
struct Delays {
    d1: f64,
    d2: f64,
    d3_trans: f64,
    d4_trans: f64,
    d3_refl: f64,
    d4_refl: f64,
}

/// A quadruple-detection probability density, `density = (F/T^4)(cosh_term - interference)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadDensity {
    /// Probability density in the four detection times (s^-4).
    pub density: f64,
    /// Dimensionless damping factor `F`.
    pub damping_f: f64,
    pub cosh_term: f64,
    pub interference: f64,
}

/// `f(w; w0, T) = T^{1/2} pi^{-1/4} exp(-(w - w0)^2 T^2 / 2)`
pub fn gaussian_amp(omega: f64, omega0: f64, coherence_time: f64) -> f64 {
    let x = (omega - omega0) * coherence_time;
    coherence_time.sqrt() * PI.powf(-0.25) * (-0.5 * x * x).exp()
}

/// Dimensionless damping factor `F` (see module docs).
pub fn damping_factor(params: &WavePacketParams) -> f64 {
    let d = params.delays();
    let t = params.coherence_time;
    let mean_sq = 0.5
        * (d.d3_trans * d.d3_trans + d.d4_trans * d.d4_trans + d.d3_refl * d.d3_refl + d.d4_refl * d.d4_refl);
    let arg = (d.d1 * d.d1 + d.d2 * d.d2 + mean_sq) / (t * t);
    (-arg).exp() / (8.0 * PI * PI)
}

fn closed_density(dtheta: f64, params: &WavePacketParams) -> Result<QuadDensity> {
    params.validate()?;
    params.require_equal_arms()?;
    let t = params.coherence_time;
    let f = damping_factor(params);
    let cosh_term = params.product().cosh();
    let c = dtheta.cos();
    let interference = c * c * ((params.omega0[2] - params.omega0[3]) * params.tau34()).cos();
    Ok(QuadDensity {
        density: f / t.powi(4) * (cosh_term - interference),
        damping_f: f,
        cosh_term,
        interference,
    })
}

/// Closed-form density with no polarizers in front of D1 and D2.
pub fn closed_density_no_left(theta3: f64, theta4: f64, params: &WavePacketParams) -> Result<QuadDensity> {
    closed_density(theta3 - theta4, params)
}

/// Closed-form density with no polarizers in front of D3 and D4.
pub fn closed_density_no_right(theta1: f64, theta2: f64, params: &WavePacketParams) -> Result<QuadDensity> {
    closed_density(theta1 - theta2, params)
}

/// `v = 1 / (2 cosh(tau_s tau34 / T^2) - 1)`, valid when `(w30 - w40) tau34 = 0`.
pub fn visibility(tau_s: f64, tau34: f64, coherence_time: f64) -> f64 {
    let x = tau_s * tau34 / (coherence_time * coherence_time);
    1.0 / (2.0 * x.cosh() - 1.0)
}

/// Fringe visibility `(max - min)/(max + min)` of the closed-form no-right
/// density, found by scanning the left angle difference on `steps` points of `[0, pi/2]`.
pub fn scanned_visibility(params: &WavePacketParams, steps: usize) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=steps {
        let dtheta = std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
        let rho = closed_density_no_right(dtheta, 0.0, params)?.density;
        lo = lo.min(rho);
        hi = hi.max(rho);
    }
    Ok((hi - lo) / (hi + lo))
}

/// The Bell-violation region `tau_s tau34 < x* T^2` where `v(x*) = 2^{-1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellRegionBound {
    /// `x* = arccosh((1 + sqrt2)/2)`.
    pub x_star: f64,
    /// Root of `v(x) = 2^{-1/2}` by bisection.
    pub x_star_bisection: f64,
    /// Largest admissible `|tau_s tau34|` in s^2.
    pub product_limit: f64,
    pub quoted: f64,
    /// `(quoted - x*) / x*`
    pub relative_discrepancy: f64,
}

/// Analytic threshold `arccosh((1 + sqrt2)/2)`.
pub fn threshold_analytic() -> f64 {
    ((1.0 + SQRT_2) / 2.0).acosh()
}

/// Bisection on `v(x) - 2^{-1/2}` over `[0, 2]`.
pub fn threshold_by_bisection(tol: f64) -> Result<f64> {
    let g = |x: f64| visibility(x, 1.0, 1.0) - FRAC_1_SQRT_2;
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    if g(lo).signum() == g(hi).signum() {
        return Err(NumericalError::NoBracket { lo, hi }.into());
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn bell_region_bound(coherence_time: f64) -> Result<BellRegionBound> {
    if coherence_time.is_nan() || coherence_time <= 0.0 {
        return Err(ConfigError::Invalid {
            name: "T",
            reason: "coherence time must be positive".into(),
        }
        .into());
    }
    let x_star = threshold_analytic();
    Ok(BellRegionBound {
        x_star,
        x_star_bisection: threshold_by_bisection(1e-13)?,
        product_limit: x_star * coherence_time * coherence_time,
        quoted: QUOTED_PRODUCT_BOUND,
        relative_discrepancy: (QUOTED_PRODUCT_BOUND - x_star) / x_star,
    })
}

/// Gauss-Hermite rules for the spectral integrals, at a base order and its doublings.
pub struct SpectralQuadrature {
    rules: Vec<Vec<(f64, f64)>>,
}

impl SpectralQuadrature {
    /// Rules at `order`, `2 order`, `4 order`, `8 order`.
    pub fn new(order: usize) -> Result<Self> {
        if order < 20 {
            return Err(ConfigError::Invalid {
                name: "order",
                reason: format!("quadrature order must be >= 20, got {order}"),
            }
            .into());
        }
        let rules = (0..4)
            .map(|k| {
                GaussHermite::new(order << k)
                    .expect("order >= 2")
                    .as_node_weight_pairs()
                    .to_vec()
            })
            .collect();
        Ok(SpectralQuadrature { rules })
    }

    pub fn base_order(&self) -> usize {
        self.rules[0].len()
    }

    /// `(2 pi)^{-1/2} int f(w; w0, T) e^{i w d} dw` on rule `level`.
    fn transform(&self, level: usize, delay: f64, omega0: f64, coherence_time: f64) -> Complex64 {
        spectral_transform(&self.rules[level], delay, omega0, coherence_time)
    }
}

impl Default for SpectralQuadrature {
    fn default() -> Self {
        SpectralQuadrature::new(DEFAULT_ORDER).expect("default order is valid")
    }
}

fn spectral_transform(rule: &[(f64, f64)], delay: f64, omega0: f64, coherence_time: f64) -> Complex64 {
    let k = SQRT_2 * delay / coherence_time;
    let sum: Complex64 = rule
        .iter()
        .map(|&(y, w)| Complex64::from_polar(w, k * y))
        .sum();
    let scale = coherence_time.powf(-0.5) * PI.powf(-0.75);
    Complex64::from_polar(scale, omega0 * delay) * sum
}

/// Closed form of the spectral transform:
/// `T^{-1/2} pi^{-1/4} exp(i w0 d) exp(-d^2 / (2 T^2))`.
pub fn spectral_transform_exact(delay: f64, omega0: f64, coherence_time: f64) -> Complex64 {
    let x = delay / coherence_time;
    Complex64::from_polar(
        coherence_time.powf(-0.5) * PI.powf(-0.25) * (-0.5 * x * x).exp(),
        omega0 * delay,
    )
}

/// Amplitudes of the two right-side histories at definite angles.
fn history_amplitudes<F>(thetas: [f64; 4], bs: &BeamSplitterSpec, d: &Delays, transform: F) -> (Complex64, Complex64)
where
    F: Fn(usize, f64) -> Complex64,
{
    let [t1, t2, t3, t4] = thetas;
    let r = bs.reflection().factor();
    let left = 0.5 * transform(0, d.d1) * transform(1, d.d2);
    let trans = left * t_coeff(t1, t4, bs) * t_coeff(t2, t3, bs) * transform(2, d.d3_trans) * transform(3, d.d4_trans);
    let refl = left * r * r * r_coeff(t2, t4, bs) * r_coeff(t1, t3, bs) * transform(2, d.d3_refl) * transform(3, d.d4_refl);
    (trans, refl)
}

/// Sums `|A|^2` over resolved polarizer settings; returns (density, incoherent part, cross part).
fn density_parts<F>(polarizers: &[PolarizerSetting; 4], bs: &BeamSplitterSpec, d: &Delays, transform: F) -> (f64, f64, f64)
where
    F: Fn(usize, f64) -> Complex64 + Copy,
{
    let mut density = 0.0;
    let mut incoherent = 0.0;
    let mut cross = 0.0;
    for t1 in polarizers[0].resolve(0.0) {
        for t2 in polarizers[1].resolve(0.0) {
            for t3 in polarizers[2].resolve(0.0) {
                for t4 in polarizers[3].resolve(0.0) {
                    let (a, b) = history_amplitudes([t1, t2, t3, t4], bs, d, transform);
                    density += (a + b).norm_sqr();
                    incoherent += a.norm_sqr() + b.norm_sqr();
                    cross += 2.0 * (a * b.conj()).re;
                }
            }
        }
    }
    (density, incoherent, cross)
}

fn to_quad_density(params: &WavePacketParams, density: f64, incoherent: f64, cross: f64) -> QuadDensity {
    let t4 = params.coherence_time.powi(4);
    let cosh_term = params.product().cosh();
    let damping_f = incoherent * t4 / cosh_term;
    let interference = if damping_f > 0.0 { -cross * t4 / damping_f } else { 0.0 };
    QuadDensity {
        density,
        damping_f,
        cosh_term,
        interference,
    }
}

/// Quadruple density by numerical integration over the four frequencies.
///
/// The integrand factorizes per photon within each history, so the 4-D
/// integral is evaluated as products of 1-D Gauss-Hermite integrals in the
/// scaled variable `(w - w0) T`. The order is doubled until the density
/// changes by less than [`CONVERGENCE_TOL`] relative to its incoherent part.
///
/// `damping_f`, `cosh_term` and `interference` are read off assuming the
/// one-side-without-polarizers structure; `density` is always exact.
pub fn integrate_quad_density(
    polarizers: &[PolarizerSetting; 4],
    bs: &BeamSplitterSpec,
    params: &WavePacketParams,
    quad: &SpectralQuadrature,
) -> Result<QuadDensity> {
    params.validate()?;
    let d = params.delays();
    let t = params.coherence_time;
    let eval = |level: usize| {
        density_parts(polarizers, bs, &d, |photon, delay| quad.transform(level, delay, params.omega0[photon], t))
    };
    let mut prev = eval(0);
    let mut change = f64::INFINITY;
    for level in 1..quad.rules.len() {
        let cur = eval(level);
        let scale = cur.1.max(f64::MIN_POSITIVE);
        change = (cur.0 - prev.0).abs() / scale;
        if change < CONVERGENCE_TOL {
            return Ok(to_quad_density(params, cur.0, cur.1, cur.2));
        }
        prev = cur;
    }
    Err(NumericalError::QuadratureNotConverged {
        order: quad.rules.last().map_or(0, Vec::len),
        change,
    }
    .into())
}

/// The same density from a full tensor-product quadrature over all four
/// frequencies, without using the per-photon factorization. Cost grows as
/// `order^4`; meant for cross-checking.
pub fn integrate_quad_density_tensor(
    polarizers: &[PolarizerSetting; 4],
    bs: &BeamSplitterSpec,
    params: &WavePacketParams,
    order: usize,
) -> Result<f64> {
    params.validate()?;
    let rule = GaussHermite::new(order)
        .map_err(|_| ConfigError::Invalid {
            name: "order",
            reason: "tensor quadrature order must be >= 2".into(),
        })?
        .as_node_weight_pairs()
        .to_vec();
    let d = params.delays();
    let t = params.coherence_time;
    let w0 = params.omega0;
    let r = bs.reflection().factor();
    // per-node phase offsets relative to the central frequencies, scaled variable y
    let scale = (t.powf(-0.5) * PI.powf(-0.75)).powi(4);
    let mut density = 0.0;
    for t1 in polarizers[0].resolve(0.0) {
        for t2 in polarizers[1].resolve(0.0) {
            for t3 in polarizers[2].resolve(0.0) {
                for t4 in polarizers[3].resolve(0.0) {
                    let x = t_coeff(t1, t4, bs) * t_coeff(t2, t3, bs);
                    let y = r_coeff(t2, t4, bs) * r_coeff(t1, t3, bs);
                    let mut amp = Complex64::default();
                    for &(y1, wt1) in &rule {
                        let om1 = w0[0] + SQRT_2 * y1 / t;
                        for &(y2, wt2) in &rule {
                            let om2 = w0[1] + SQRT_2 * y2 / t;
                            let left = om1 * d.d1 + om2 * d.d2;
                            for &(y3, wt3) in &rule {
                                let om3 = w0[2] + SQRT_2 * y3 / t;
                                for &(y4, wt4) in &rule {
                                    let om4 = w0[3] + SQRT_2 * y4 / t;
                                    let bracket = Complex64::from_polar(x, om3 * d.d3_trans + om4 * d.d4_trans)
                                        + r * r * Complex64::from_polar(y, om3 * d.d3_refl + om4 * d.d4_refl);
                                    amp += wt1 * wt2 * wt3 * wt4 * Complex64::from_polar(1.0, left) * bracket;
                                }
                            }
                        }
                    }
                    density += (0.5 * scale * amp).norm_sqr();
                }
            }
        }
    }
    Ok(density)
}

/// One point of a `(tau_s/T, tau34/T, dtheta)` sweep of the no-right density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub tau_s_over_t: f64,
    pub tau34_over_t: f64,
    pub theta_diff: f64,
    pub density: f64,
    pub visibility: f64,
    pub in_bell_region: bool,
    /// Relative difference between quadrature and closed form.
    pub quad_rel_err: f64,
}

/// Sweeps centered packets over the given grids (times in units of `T`).
pub fn sweep(
    coherence_time: f64,
    omega0: [f64; 4],
    tau_s_over_t: &[f64],
    tau34_over_t: &[f64],
    theta_diffs: &[f64],
    quad: &SpectralQuadrature,
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let points: Vec<(f64, f64, f64)> = tau_s_over_t
        .iter()
        .flat_map(|&s| tau34_over_t.iter().flat_map(move |&u| theta_diffs.iter().map(move |&d| (s, u, d))))
        .collect();
    let x_star = threshold_analytic();
    let no_right = |dtheta: f64| {
        [
            PolarizerSetting::Angle(dtheta),
            PolarizerSetting::Angle(0.0),
            PolarizerSetting::Absent,
            PolarizerSetting::Absent,
        ]
    };
    points
        .par_iter()
        .map(|&(s, u, dtheta)| {
            let params = WavePacketParams::centered(coherence_time, omega0, s * coherence_time, u * coherence_time);
            let closed = closed_density_no_right(dtheta, 0.0, &params)?;
            let numeric = integrate_quad_density(&no_right(dtheta), &BeamSplitterSpec::balanced(), &params, quad)?;
            // guard against exact zeros of the density with the incoherent scale
            let scale = closed.damping_f * closed.cosh_term / coherence_time.powi(4);
            let denom = if closed.density > 0.0 { closed.density } else { scale };
            Ok(SweepRow {
                tau_s_over_t: s,
                tau34_over_t: u,
                theta_diff: dtheta,
                density: closed.density,
                visibility: visibility(s, u, 1.0),
                in_bell_region: (s * u).abs() < x_star,
                quad_rel_err: (numeric.density - closed.density).abs() / denom,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const T: f64 = 1.5e-12;
    const W: [f64; 4] = [2.3e15, 2.31e15, 2.2e15, 2.2e15];

    fn no_left() -> [PolarizerSetting; 4] {
        [PolarizerSetting::Absent, PolarizerSetting::Absent, PolarizerSetting::Angle(0.0), PolarizerSetting::Angle(0.0)]
    }

    #[test]
    fn gaussian_amp_values() {
        let peak = T.sqrt() / PI.powf(0.25);
        assert!((gaussian_amp(1e15, 1e15, T) - peak).abs() < 1e-15 * peak);
        let one_off = gaussian_amp(1e15 + 1.0 / T, 1e15, T);
        assert!((one_off - peak * (-0.5f64).exp()).abs() < 1e-12 * peak);
    }

    #[test]
    fn gaussian_amp_is_normalized() {
        // |f|^2 over the scaled variable by Gauss-Hermite: weight e^{-x^2} is exactly |f|^2 up to constants
        let gh = GaussHermite::new(30).unwrap();
        let integral = gh.integrate(|_| 1.0) / PI.sqrt();
        assert!((integral - 1.0).abs() < 1e-10);
        // and by brute-force trapezoid in omega
        let n = 20_000;
        let span = 12.0 / T;
        let h = span / n as f64;
        let sum: f64 = (0..=n)
            .map(|k| {
                let w = 1e15 - span / 2.0 + k as f64 * h;
                let f = gaussian_amp(w, 1e15, T);
                let edge = if k == 0 || k == n { 0.5 } else { 1.0 };
                edge * f * f * h
            })
            .sum();
        assert!((sum - 1.0).abs() < 1e-10, "{sum}");
    }

    #[test]
    fn spectral_transform_matches_closed_form() {
        let q = SpectralQuadrature::default();
        for d_over_t in [-2.5, -0.3, 0.0, 0.7, 1.9] {
            let d = d_over_t * T;
            let num = q.transform(0, d, 2.2e15, T);
            let exact = spectral_transform_exact(d, 2.2e15, T);
            assert!((num - exact).norm() < 1e-12 * exact.norm().max(1e-3 * T.powf(-0.5)));
        }
    }

    #[test]
    fn closed_density_special_cases() {
        let omega = [2.2e15; 4];
        for (s, u) in [(0.0, 0.8), (1.3, 0.0)] {
            let p = WavePacketParams::centered(T, omega, s * T, u * T);
            let rho = closed_density_no_left(0.4, 0.4, &p).unwrap();
            assert!(rho.density.abs() < 1e-15 * rho.damping_f / T.powi(4));
        }
        let p = WavePacketParams::centered(T, omega, 0.9 * T, 1.1 * T);
        let rho = closed_density_no_left(0.0, FRAC_PI_2, &p).unwrap();
        let expected = rho.damping_f / T.powi(4) * (0.99f64).cosh();
        assert!((rho.density - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn centered_packets_have_maximal_damping() {
        // tau_s = tau34 = 0: every delay vanishes, F = 1/(8 pi^2)
        let p = WavePacketParams::centered(T, W, 0.0, 0.0);
        assert!((damping_factor(&p) - 1.0 / (8.0 * PI * PI)).abs() < 1e-18);
        // orthogonal polarizers on the right: rho = F/T^4
        let rho = closed_density_no_left(0.0, FRAC_PI_2, &p).unwrap();
        assert!((rho.density - rho.damping_f / T.powi(4)).abs() < 1e-12 * rho.density);
    }

    #[test]
    fn quadrature_matches_closed_form_off_center() {
        let q = SpectralQuadrature::default();
        let mut p = WavePacketParams::centered(T, W, 0.6 * T, -0.9 * T);
        p.timing.t1 += 0.4 * T;
        p.timing.t2 -= 0.8 * T;
        p.geometry = Geometry { r1: 1e-4, r2: 2e-4, r3: 5e-5, r4: 5e-5, ..Geometry::default() };
        for dtheta in [0.0, 0.3, 1.2] {
            let pol = [
                PolarizerSetting::Absent,
                PolarizerSetting::Absent,
                PolarizerSetting::Angle(dtheta),
                PolarizerSetting::Angle(0.0),
            ];
            let num = integrate_quad_density(&pol, &BeamSplitterSpec::balanced(), &p, &q).unwrap();
            let closed = closed_density_no_left(dtheta, 0.0, &p).unwrap();
            assert!((num.density - closed.density).abs() < 1e-9 * closed.density, "{num:?} {closed:?}");
            assert!((num.damping_f - closed.damping_f).abs() < 1e-9 * closed.damping_f);
            assert!((num.interference - closed.interference).abs() < 1e-9);
        }
    }

    #[test]
    fn separable_and_tensor_quadrature_agree() {
        let p = WavePacketParams::centered(T, W, 0.5 * T, 0.7 * T);
        let order = 20;
        let q = SpectralQuadrature::new(order).unwrap();
        let d = p.delays();
        let (sep, _, _) = density_parts(&no_left(), &BeamSplitterSpec::balanced(), &d, |photon, delay| {
            q.transform(0, delay, p.omega0[photon], T)
        });
        let tensor = integrate_quad_density_tensor(&no_left(), &BeamSplitterSpec::balanced(), &p, order).unwrap();
        assert!((sep - tensor).abs() < 1e-10 * sep, "{sep} {tensor}");
    }

    #[test]
    fn closed_form_symmetries() {
        for (s, u) in [(0.4, 1.2), (-1.1, 0.3), (2.0, -0.5)] {
            let a = closed_density_no_left(0.3, 1.1, &WavePacketParams::centered(T, W, s * T, u * T)).unwrap();
            let b = closed_density_no_left(0.3, 1.1, &WavePacketParams::centered(T, W, -s * T, -u * T)).unwrap();
            let c = closed_density_no_left(1.1, 0.3, &WavePacketParams::centered(T, W, s * T, u * T)).unwrap();
            assert!((a.density - b.density).abs() <= 1e-14 * a.density);
            assert!((a.density - c.density).abs() <= 1e-14 * a.density);
            assert!(a.density >= 0.0);
        }
    }

    #[test]
    fn unequal_right_arms_are_rejected() {
        let mut p = WavePacketParams::centered(T, W, 0.0, 0.0);
        p.geometry.r3 = 1.0;
        assert!(closed_density_no_left(0.0, 0.0, &p).is_err());
    }

    #[test]
    fn visibility_values() {
        assert_eq!(visibility(0.0, 3.0, 1.0), 1.0);
        assert!((visibility(1.0, 1.0, 1.0) - 1.0 / (2.0 * 1f64.cosh() - 1.0)).abs() < 1e-15);
        assert!((visibility(1.0, 1.0, 1.0) - 0.4793).abs() < 1e-4);
        let x = threshold_analytic();
        assert!((visibility(x, 1.0, 1.0) - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(visibility(3.0, 1.0, 1.0) < 0.1);
    }

    #[test]
    fn scanned_visibility_matches_formula() {
        let omega = [2.2e15; 4];
        for (s, u) in [(0.0, 0.0), (0.5, 0.9), (1.2, -1.4)] {
            let p = WavePacketParams::centered(T, omega, s * T, u * T);
            let v = scanned_visibility(&p, 64).unwrap();
            assert!((v - visibility(s, u, 1.0)).abs() < 1e-8, "{s} {u}: {v}");
        }
    }

    #[test]
    fn bell_bound_values() {
        let b = bell_region_bound(T).unwrap();
        assert!((b.x_star - 0.633).abs() < 1e-3);
        assert!((b.x_star_bisection - b.x_star).abs() < 1e-9);
        assert!(b.relative_discrepancy.abs() < 0.05);
        assert!((b.product_limit - b.x_star * T * T).abs() < 1e-40);
        assert!(bell_region_bound(0.0).is_err());
    }

    #[test]
    fn low_order_is_rejected() {
        assert!(SpectralQuadrature::new(10).is_err());
    }
}

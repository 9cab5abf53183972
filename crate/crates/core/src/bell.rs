//! CHSH statistics, the zero-coincidence witness and a local hidden-variable
//! baseline.
//!
//! Correlations use the ratio form: each setting pair contributes the four
//! orthogonal outcome combinations (each analyzer is read out in both output
//! ports), and `E` is normalized by their sum so common efficiency factors cancel.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{bell_pair_prob, quad_coincidence_prob};
use crate::elements::normalize_angle;
use crate::error::BellError;

/// Analyzer angles on the two sides, normalized to `[0, pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSettings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        ChshSettings {
            a: normalize_angle(a),
            a_prime: normalize_angle(a_prime),
            b: normalize_angle(b),
            b_prime: normalize_angle(b_prime),
        }
    }

    /// `(0, pi/4, pi/8, 3pi/8)`, maximal for `E = +-cos 2(a - b)`.
    pub fn canonical() -> Self {
        ChshSettings::new(0.0, FRAC_PI_4, FRAC_PI_8, 3.0 * FRAC_PI_8)
    }

    /// The four setting pairs in CHSH order: `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Tallies for one setting pair, ordered
/// `[pass/pass, pass/orth, orth/pass, orth/orth]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct OutcomeTally(pub [u64; 4]);

impl OutcomeTally {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn record(&mut self, pass_a: bool, pass_b: bool) {
        let idx = match (pass_a, pass_b) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        self.0[idx] += 1;
    }

    pub fn merge(&mut self, other: &OutcomeTally) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingCounts {
    pub a: f64,
    pub b: f64,
    pub tally: OutcomeTally,
}

/// Where correlations come from.
pub enum CorrelationSource {
    /// Joint probability of passing both analyzers at `(theta_a, theta_b)`.
    Analytic(Box<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    Counts(Vec<SettingCounts>),
}

fn same_axis(x: f64, y: f64) -> bool {
    let d = (normalize_angle(x) - normalize_angle(y)).abs();
    d < 1e-9 || (PI - d) < 1e-9
}

impl CorrelationSource {
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        CorrelationSource::Analytic(Box::new(f))
    }

    fn outcomes(&self, a: f64, b: f64) -> Result<([f64; 4], Option<u64>), BellError> {
        match self {
            CorrelationSource::Analytic(p) => Ok((
                [
                    p(a, b),
                    p(a, b + FRAC_PI_2),
                    p(a + FRAC_PI_2, b),
                    p(a + FRAC_PI_2, b + FRAC_PI_2),
                ],
                None,
            )),
            CorrelationSource::Counts(list) => {
                let entry = list
                    .iter()
                    .find(|c| same_axis(c.a, a) && same_axis(c.b, b))
                    .ok_or(BellError::MissingSetting { a, b })?;
                Ok((entry.tally.0.map(|n| n as f64), Some(entry.tally.total())))
            }
        }
    }
}

/// `E = [P(a,b) + P(a',b') - P(a,b') - P(a',b)] / sum`, primes denoting the orthogonal port.
pub fn correlation(src: &CorrelationSource, a: f64, b: f64) -> Result<f64, BellError> {
    Ok(correlation_with_count(src, a, b)?.0)
}

fn correlation_with_count(src: &CorrelationSource, a: f64, b: f64) -> Result<(f64, Option<u64>), BellError> {
    let ([pp, po, op, oo], n) = src.outcomes(a, b)?;
    let total = pp + po + op + oo;
    if total.is_nan() || total <= 0.0 {
        return Err(BellError::UndefinedCorrelation { a, b });
    }
    Ok(((pp + oo - po - op) / total, n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshValue {
    /// `E(a,b), E(a,b'), E(a',b), E(a',b')`
    pub correlations: [f64; 4],
    pub s: f64,
    /// Binomial standard error; `None` for analytic sources.
    pub stderr: Option<f64>,
}

/// `S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|`
pub fn chsh_s(src: &CorrelationSource, settings: &ChshSettings) -> Result<ChshValue, BellError> {
    let mut e = [0.0; 4];
    let mut var = Some(0.0);
    for (k, (a, b)) in settings.pairs().into_iter().enumerate() {
        let (ek, n) = correlation_with_count(src, a, b)?;
        e[k] = ek;
        var = match (var, n) {
            (Some(v), Some(n)) => Some(v + (1.0 - ek * ek) / n as f64),
            _ => None,
        };
    }
    Ok(ChshValue {
        correlations: e,
        s: (e[0] - e[1] + e[2] + e[3]).abs(),
        stderr: var.map(f64::sqrt),
    })
}

/// Left-pair probability of the 1-1 channel at equal frequencies, `sin^2(ta - tb)/8`.
pub fn one_one_left_probability(ta: f64, tb: f64) -> f64 {
    crate::analytic::prob_one_one_channel_no_right(ta, tb)
}

/// Quadruple probability at four equal angles. Identically zero.
pub fn zero_coincidence_witness(theta: f64) -> f64 {
    quad_coincidence_prob(theta, theta, theta, theta)
}

/// The two standard pair probabilities and the quadruple probability at
/// `theta2 = theta1`, `theta4 = theta3`: `(P(t1,t3), P(t2,t4), P(t1,t2,t3,t4))`.
///
/// Independent pairs would give `P(t1,t3) P(t2,t4)` times a routing factor for
/// the quadruple rate; the interference makes it vanish instead.
pub fn incompatibility_triple(theta1: f64, theta3: f64) -> (f64, f64, f64) {
    (
        bell_pair_prob(theta1, theta3),
        bell_pair_prob(theta1, theta3),
        quad_coincidence_prob(theta1, theta1, theta3, theta3),
    )
}

/// Hidden polarization carried by each pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LhvLambda {
    /// Uniform on `[0, pi)`, independently for the two sources.
    Uniform,
    /// The same fixed polarization for every pair.
    Fixed(f64),
}

impl LhvLambda {
    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            LhvLambda::Uniform => rng.gen::<f64>() * PI,
            LhvLambda::Fixed(l) => l,
        }
    }
}

/// Rate of one fringe point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringePoint {
    pub theta: f64,
    pub hits: u64,
    pub trials: u64,
}

impl FringePoint {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LhvResult {
    pub fringe: Vec<FringePoint>,
    pub visibility: f64,
    pub visibility_stderr: f64,
    pub chsh: ChshValue,
}

/// Fits `R(theta) = A + B cos 2theta + C sin 2theta` to equally spaced points on
/// `[0, pi)` and returns `sqrt(B^2 + C^2)/A` with a delta-method standard error.
pub fn fit_fringe_visibility(points: &[FringePoint]) -> (f64, f64) {
    let k = points.len() as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    // covariance of (A, B, C) from independent binomial rates
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let r = p.rate();
        let var = r * (1.0 - r) / p.trials as f64;
        let basis = [1.0 / k, 2.0 * (2.0 * p.theta).cos() / k, 2.0 * (2.0 * p.theta).sin() / k];
        a += basis[0] * r;
        b += basis[1] * r;
        c += basis[2] * r;
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += basis[i] * basis[j] * var;
            }
        }
    }
    let amp = b.hypot(c);
    let v = amp / a;
    let grad = if amp > 0.0 {
        [-amp / (a * a), b / (amp * a), c / (amp * a)]
    } else {
        [0.0, 1.0 / a, 0.0]
    };
    let mut var_v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var_v += grad[i] * cov[i][j] * grad[j];
        }
    }
    (v, var_v.sqrt())
}

/// Local realistic model: each pair carries a polarization `lambda`, every
/// photon passes its polarizer with Malus probability `cos^2(theta - lambda)`
/// and the beam splitter routes photons 3 and 4 independently at random.
///
/// The fringe scans `theta1` over `scan_points` equally spaced angles of
/// `[0, pi)` with the other three polarizers at 0 and counts 1-1 quadruple
/// coincidences. CHSH is evaluated at `settings` on the 1-3 pair with both ports of each
/// analyzer read out. `n_events` is spent on each of the two parts.
pub fn lhv_baseline(
    n_events: u64,
    seed: u64,
    scan_points: usize,
    settings: &ChshSettings,
    lambda: LhvLambda,
) -> LhvResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scan_points = scan_points.max(2);
    let mut fringe: Vec<FringePoint> = (0..scan_points)
        .map(|k| FringePoint {
            theta: PI * k as f64 / scan_points as f64,
            hits: 0,
            trials: 0,
        })
        .collect();
    for i in 0..n_events {
        let point = &mut fringe[(i % scan_points as u64) as usize];
        point.trials += 1;
        let l1 = lambda.draw(&mut rng);
        let l2 = lambda.draw(&mut rng);
        let pass = |rng: &mut ChaCha8Rng, theta: f64, l: f64| rng.gen::<f64>() < (theta - l).cos().powi(2);
        let p1 = pass(&mut rng, point.theta, l1);
        let p2 = pass(&mut rng, 0.0, l2);
        let p3 = pass(&mut rng, 0.0, l1);
        let p4 = pass(&mut rng, 0.0, l2);
        let split = rng.gen::<bool>() != rng.gen::<bool>();
        if p1 && p2 && p3 && p4 && split {
            point.hits += 1;
        }
    }
    let (visibility, visibility_stderr) = fit_fringe_visibility(&fringe);

    let pairs = settings.pairs();
    let mut tallies = [OutcomeTally::default(); 4];
    for i in 0..n_events {
        let k = (i % 4) as usize;
        let (a, b) = pairs[k];
        let l = lambda.draw(&mut rng);
        let pass_a = rng.gen::<f64>() < (a - l).cos().powi(2);
        let pass_b = rng.gen::<f64>() < (b - l).cos().powi(2);
        tallies[k].record(pass_a, pass_b);
    }
    let counts = pairs
        .iter()
        .zip(tallies)
        .map(|(&(a, b), tally)| SettingCounts { a, b, tally })
        .collect();
    let chsh = chsh_s(&CorrelationSource::Counts(counts), settings).expect("every setting has events");
    LhvResult {
        fringe,
        visibility,
        visibility_stderr,
        chsh,
    }
}

/// Monte Carlo quadruple-coincidence rate of the local model at definite angles.
pub fn lhv_quad_rate(thetas: [f64; 4], n_events: u64, seed: u64, lambda: LhvLambda) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..n_events {
        let l1 = lambda.draw(&mut rng);
        let l2 = lambda.draw(&mut rng);
        // photon 3 reaches D3 or D4; 1-1 needs photon 4 at the other one
        let three_to_d3 = rng.gen::<bool>();
        let four_to_d3 = rng.gen::<bool>();
        if three_to_d3 == four_to_d3 {
            continue;
        }
        let (th3, th4) = if three_to_d3 { (thetas[2], thetas[3]) } else { (thetas[3], thetas[2]) };
        let probs = [
            (thetas[0] - l1).cos().powi(2),
            (thetas[1] - l2).cos().powi(2),
            (th3 - l1).cos().powi(2),
            (th4 - l2).cos().powi(2),
        ];
        if probs.iter().all(|&p| rng.gen::<f64>() < p) {
            hits += 1;
        }
    }
    hits as f64 / n_events as f64
}

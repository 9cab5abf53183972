//! The experiment's input state and detection operators.
//!
//! Source I emits photons 1 (left, to polarizer P1) and 3 (right, into the
//! beam splitter); source II emits photons 2 and 4. Each detection is an
//! annihilation operator projected onto the polarizer axis and carrying the
//! plane-wave propagation phase from emission to detection.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{ConfigError, FockError};
use crate::fock::{apply, FockState, ModeIndex, OccupationVector, OperatorExpr, Path, Pol, MODE_COUNT};

/// Lossless tolerance on `T + R = 1`.
const LOSSLESS_TOL: f64 = 1e-12;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A polarizer in front of a detector, or none at all.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolarizerSetting {
    /// No polarizer: probabilities are summed over two orthogonal settings.
    Absent,
    /// Transmission axis angle in radians, normalized to `[0, pi)`.
    Angle(f64),
}

impl PolarizerSetting {
    pub fn angle(theta: f64) -> Self {
        PolarizerSetting::Angle(normalize_angle(theta))
    }

    pub fn degrees(deg: f64) -> Self {
        Self::angle(deg.to_radians())
    }

    pub fn theta(self) -> Option<f64> {
        match self {
            PolarizerSetting::Absent => None,
            PolarizerSetting::Angle(t) => Some(t),
        }
    }

    /// The definite settings summed over: itself, or `{reference, reference + pi/2}`.
    pub fn resolve(self, reference: f64) -> Vec<f64> {
        match self {
            PolarizerSetting::Angle(t) => vec![t],
            PolarizerSetting::Absent => vec![reference, reference + FRAC_PI_2],
        }
    }
}

/// Maps an angle into `[0, pi)`. A polarizer axis is only defined modulo pi.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Sign convention for the phase picked up on reflection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReflectionPhase {
    #[default]
    PlusI,
    MinusI,
}

impl ReflectionPhase {
    pub fn factor(self) -> Complex64 {
        match self {
            ReflectionPhase::PlusI => Complex64::i(),
            ReflectionPhase::MinusI => -Complex64::i(),
        }
    }
}

/// Polarization-dependent intensity transmission and reflection of the beam splitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    tx: f64,
    ty: f64,
    rx: f64,
    ry: f64,
    reflection: ReflectionPhase,
}

impl BeamSplitterSpec {
    pub fn new(tx: f64, ty: f64, rx: f64, ry: f64) -> Result<Self, ConfigError> {
        for (name, value) in [("Tx", tx), ("Ty", ty), ("Rx", rx), ("Ry", ry)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::CoefficientRange { name, value });
            }
        }
        if (tx + rx - 1.0).abs() > LOSSLESS_TOL || (ty + ry - 1.0).abs() > LOSSLESS_TOL {
            return Err(ConfigError::NotLossless {
                tx_rx: tx + rx,
                ty_ry: ty + ry,
            });
        }
        Ok(BeamSplitterSpec {
            tx,
            ty,
            rx,
            ry,
            reflection: ReflectionPhase::PlusI,
        })
    }

    /// 50:50 for both polarizations.
    pub fn balanced() -> Self {
        BeamSplitterSpec {
            tx: 0.5,
            ty: 0.5,
            rx: 0.5,
            ry: 0.5,
            reflection: ReflectionPhase::PlusI,
        }
    }

    pub fn with_reflection(mut self, reflection: ReflectionPhase) -> Self {
        self.reflection = reflection;
        self
    }

    pub fn tx(&self) -> f64 {
        self.tx
    }
    pub fn ty(&self) -> f64 {
        self.ty
    }
    pub fn rx(&self) -> f64 {
        self.rx
    }
    pub fn ry(&self) -> f64 {
        self.ry
    }
    pub fn reflection(&self) -> ReflectionPhase {
        self.reflection
    }

    pub fn is_balanced(&self) -> bool {
        [self.tx, self.ty, self.rx, self.ry]
            .iter()
            .all(|v| (v - 0.5).abs() <= LOSSLESS_TOL)
    }

    fn transmission(&self, pol: Pol) -> f64 {
        match pol {
            Pol::X => self.tx,
            Pol::Y => self.ty,
        }
    }

    fn reflectance(&self, pol: Pol) -> f64 {
        match pol {
            Pol::X => self.rx,
            Pol::Y => self.ry,
        }
    }
}

impl Default for BeamSplitterSpec {
    fn default() -> Self {
        Self::balanced()
    }
}

/// Path lengths in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    /// Source I to D1.
    pub r1: f64,
    /// Source II to D2.
    pub r2: f64,
    /// Beam splitter to D3.
    pub r3: f64,
    /// Beam splitter to D4.
    pub r4: f64,
    /// Source I to the beam splitter.
    pub r_i: f64,
    /// Source II to the beam splitter.
    pub r_ii: f64,
    pub c: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("r4", self.r4),
            ("rI", self.r_i),
            ("rII", self.r_ii),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid {
                    name,
                    reason: format!("length must be finite and >= 0, got {v}"),
                });
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ConfigError::Invalid {
                name: "c",
                reason: format!("must be positive, got {}", self.c),
            });
        }
        Ok(())
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            r1: 0.0,
            r2: 0.0,
            r3: 0.0,
            r4: 0.0,
            r_i: 0.0,
            r_ii: 0.0,
            c: SPEED_OF_LIGHT,
        }
    }
}

/// Emission and detection times in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TimingSpec {
    pub t0_i: f64,
    pub t0_ii: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl TimingSpec {
    /// Emission offset between the two sources, `t0_I - t0_II`.
    pub fn tau_s(&self) -> f64 {
        self.t0_i - self.t0_ii
    }

    /// Detection offset on the right side, `t3 - t4`.
    pub fn tau34(&self) -> f64 {
        self.t3 - self.t4
    }
}

/// Angular frequencies (rad/s) of photons 1..4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencySpec {
    pub omega: [f64; 4],
}

impl FrequencySpec {
    pub fn uniform(omega: f64) -> Self {
        FrequencySpec { omega: [omega; 4] }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.omega.iter().all(|w| *w > 0.0 && w.is_finite()) {
            Ok(())
        } else {
            Err(ConfigError::Invalid {
                name: "omega",
                reason: format!("frequencies must be positive, got {:?}", self.omega),
            })
        }
    }
}

impl Default for FrequencySpec {
    fn default() -> Self {
        // ~800 nm
        FrequencySpec::uniform(2.354_564_459_136_066e15)
    }
}

/// Every physical parameter of one plane-wave evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ExperimentConfig {
    pub polarizers: [PolarizerSetting; 4],
    pub beam_splitter: BeamSplitterSpec,
    pub geometry: Geometry,
    pub timing: TimingSpec,
    pub frequencies: FrequencySpec,
}

impl Default for PolarizerSetting {
    fn default() -> Self {
        PolarizerSetting::Angle(0.0)
    }
}

impl ExperimentConfig {
    /// Equal path lengths, equal frequencies, balanced splitter, all times zero.
    pub fn symmetric(thetas: [f64; 4]) -> Self {
        ExperimentConfig {
            polarizers: thetas.map(PolarizerSetting::angle),
            ..Default::default()
        }
    }

    pub fn with_polarizers(mut self, polarizers: [PolarizerSetting; 4]) -> Self {
        self.polarizers = polarizers;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.frequencies.validate()?;
        // re-run the lossless check in case the spec was built field by field
        let bs = self.beam_splitter;
        BeamSplitterSpec::new(bs.tx, bs.ty, bs.rx, bs.ry)?;
        Ok(())
    }

    /// Definite angles, or the index of the first absent polarizer.
    pub fn definite_angles(&self) -> Result<[f64; 4], ConfigError> {
        let mut out = [0.0; 4];
        for (i, p) in self.polarizers.iter().enumerate() {
            out[i] = p.theta().ok_or(ConfigError::AbsentPolarizer { index: i + 1 })?;
        }
        Ok(out)
    }
}

/// Which left arm a polarizer/detector pair sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftPath {
    P1,
    P2,
}

fn mode(path: Path, pol: Pol) -> ModeIndex {
    ModeIndex::new(path, pol)
}

fn pair_occupation(left: Path, right: Path, pol: Pol) -> [(ModeIndex, u8); 2] {
    [(mode(left, pol), 1), (mode(right, pol), 1)]
}

/// `(|1x>_1|1x>_3 + |1y>_1|1y>_3)/sqrt2 (x) (|1x>_2|1x>_4 + |1y>_2|1y>_4)/sqrt2`
pub fn initial_state() -> FockState {
    let mut terms = Vec::with_capacity(4);
    for pol_i in [Pol::X, Pol::Y] {
        for pol_ii in [Pol::X, Pol::Y] {
            let mut counts = [0u8; MODE_COUNT];
            for (m, n) in pair_occupation(Path::P1, Path::P3In, pol_i)
                .into_iter()
                .chain(pair_occupation(Path::P2, Path::P4In, pol_ii))
            {
                counts[m.slot()] += n;
            }
            let occ = OccupationVector::from_counts(counts).expect("four photons fit");
            terms.push((occ, Complex64::new(0.5, 0.0)));
        }
    }
    FockState::from_terms(terms)
}

/// `e^{i omega (pathlen/c + t_emit - t_detect)}`
pub fn propagation_phase(omega: f64, pathlen: f64, t_emit: f64, t_detect: f64, c: f64) -> Complex64 {
    Complex64::from_polar(1.0, omega * (pathlen / c + t_emit - t_detect))
}

/// `phase * (a_x cos(theta) + a_y sin(theta))` on a left arm.
pub fn polarizer_detector_op(path: LeftPath, theta: f64, phase: Complex64) -> OperatorExpr {
    let p = match path {
        LeftPath::P1 => Path::P1,
        LeftPath::P2 => Path::P2,
    };
    projected_annihilator(p, theta, 1.0, 1.0).scaled(phase)
}

/// `sx cos(theta) a_{px} + sy sin(theta) a_{py}`
fn projected_annihilator(path: Path, theta: f64, sx: f64, sy: f64) -> OperatorExpr {
    let x = OperatorExpr::annihilate(mode(path, Pol::X)).scaled(Complex64::new(sx * theta.cos(), 0.0));
    let y = OperatorExpr::annihilate(mode(path, Pol::Y)).scaled(Complex64::new(sy * theta.sin(), 0.0));
    &x + &y
}

/// Detection operators for D3 and D4 behind the beam splitter.
///
/// The transmitted photon at D3 is photon 4 and the reflected one photon 3;
/// at D4 it is the other way round. Reflection carries the factor `i`
/// (or `-i` under [`ReflectionPhase::MinusI`]).
pub fn beamsplitter_detector_ops(
    bs: &BeamSplitterSpec,
    theta3: f64,
    theta4: f64,
    geom: &Geometry,
    timing: &TimingSpec,
    freq: &FrequencySpec,
) -> Result<(OperatorExpr, OperatorExpr), ConfigError> {
    let bs = BeamSplitterSpec::new(bs.tx, bs.ty, bs.rx, bs.ry)?.with_reflection(bs.reflection);
    geom.validate()?;
    let [_, _, w3, w4] = freq.omega;
    let r = bs.reflection.factor();
    let (tx, ty) = (bs.tx.sqrt(), bs.ty.sqrt());
    let (rx, ry) = (bs.rx.sqrt(), bs.ry.sqrt());

    let phase_4_to_d3 = propagation_phase(w4, geom.r_ii + geom.r3, timing.t0_ii, timing.t3, geom.c);
    let phase_3_to_d3 = propagation_phase(w3, geom.r_i + geom.r3, timing.t0_i, timing.t3, geom.c);
    let phase_3_to_d4 = propagation_phase(w3, geom.r_i + geom.r4, timing.t0_i, timing.t4, geom.c);
    let phase_4_to_d4 = propagation_phase(w4, geom.r_ii + geom.r4, timing.t0_ii, timing.t4, geom.c);

    let e3 = &projected_annihilator(Path::P4In, theta3, tx, ty).scaled(phase_4_to_d3)
        + &projected_annihilator(Path::P3In, theta3, rx, ry).scaled(r * phase_3_to_d3);
    let e4 = &projected_annihilator(Path::P3In, theta4, tx, ty).scaled(phase_3_to_d4)
        + &projected_annihilator(Path::P4In, theta4, rx, ry).scaled(r * phase_4_to_d4);
    Ok((e3, e4))
}

/// The four detection operators at the given definite angles.
pub fn detector_ops(config: &ExperimentConfig, thetas: [f64; 4]) -> Result<[OperatorExpr; 4], ConfigError> {
    let g = &config.geometry;
    let t = &config.timing;
    let [w1, w2, _, _] = config.frequencies.omega;
    let e1 = polarizer_detector_op(LeftPath::P1, thetas[0], propagation_phase(w1, g.r1, t.t0_i, t.t1, g.c));
    let e2 = polarizer_detector_op(LeftPath::P2, thetas[1], propagation_phase(w2, g.r2, t.t0_ii, t.t2, g.c));
    let (e3, e4) = beamsplitter_detector_ops(&config.beam_splitter, thetas[2], thetas[3], g, t, &config.frequencies)?;
    Ok([e1, e2, e3, e4])
}

/// The ordered product `E4 E3 E2 E1`. All polarizers must be present.
pub fn quad_detection_expr(config: &ExperimentConfig) -> Result<OperatorExpr, ConfigError> {
    config.validate()?;
    let thetas = config.definite_angles()?;
    let [e1, e2, e3, e4] = detector_ops(config, thetas)?;
    Ok(&(&(&e4 * &e3) * &e2) * &e1)
}

/// Beam-splitter output annihilator `b3` (towards D3) or `b4` for one polarization,
/// written on the input modes: `b3 = sqrt(T) a4 + r sqrt(R) a3`, `b4 = sqrt(T) a3 + r sqrt(R) a4`.
pub fn splitter_output_annihilator(bs: &BeamSplitterSpec, to_d3: bool, pol: Pol) -> OperatorExpr {
    let t = bs.transmission(pol).sqrt();
    let rr = bs.reflectance(pol).sqrt();
    let (transmitted, reflected) = if to_d3 { (Path::P4In, Path::P3In) } else { (Path::P3In, Path::P4In) };
    &OperatorExpr::annihilate(mode(transmitted, pol)).scaled(Complex64::new(t, 0.0))
        + &OperatorExpr::annihilate(mode(reflected, pol)).scaled(bs.reflection.factor() * rr)
}

/// Propagates a state through the beam splitter in the Schrodinger picture,
/// moving every photon on the splitter inputs onto the output modes.
///
/// Inverting `b3 = sqrt(T) a4 + r sqrt(R) a3`, `b4 = sqrt(T) a3 + r sqrt(R) a4`
/// gives `a3^dag = r sqrt(R) b3^dag + sqrt(T) b4^dag` and
/// `a4^dag = sqrt(T) b3^dag + r sqrt(R) b4^dag`.
pub fn propagate_through_beamsplitter(state: &FockState, bs: &BeamSplitterSpec) -> Result<FockState, FockError> {
    let r = bs.reflection.factor();
    let mut out = FockState::zero();
    for (occ, amp) in state.iter() {
        let mut creator = OperatorExpr::identity();
        let mut norm = 1.0;
        for m in ModeIndex::all() {
            let n = occ.get(m);
            if n == 0 {
                continue;
            }
            let image = match m.path {
                Path::P3In | Path::P4In => {
                    let t = bs.transmission(m.pol).sqrt();
                    let rr = bs.reflectance(m.pol).sqrt();
                    let (refl_out, trans_out) = if m.path == Path::P3In {
                        (Path::D3Out, Path::D4Out)
                    } else {
                        (Path::D4Out, Path::D3Out)
                    };
                    &OperatorExpr::create(mode(refl_out, m.pol)).scaled(r * rr)
                        + &OperatorExpr::create(mode(trans_out, m.pol)).scaled(Complex64::new(t, 0.0))
                }
                _ => OperatorExpr::create(m),
            };
            for k in 1..=n {
                creator = &creator * &image;
                norm *= f64::from(k);
            }
        }
        let built = apply(&creator, &crate::fock::vacuum())?;
        out = &out + &built.scale(amp / norm.sqrt());
    }
    Ok(out)
}

/// Output-side detection operator: polarizer at `theta` on output arm D3 or D4.
pub fn output_detector_op(to_d3: bool, theta: f64) -> OperatorExpr {
    let path = if to_d3 { Path::D3Out } else { Path::D4Out };
    projected_annihilator(path, theta, 1.0, 1.0)
}

/// `1/sqrt2`, exposed for tests that spell out expected operators.
pub const INV_SQRT2: f64 = FRAC_1_SQRT_2;

//! Sparse bosonic Fock-space algebra over the experiment's optical modes.
//!
//! Twelve modes are tracked: six spatial modes (the two left arms, the two
//! beam-splitter input arms, the two beam-splitter output arms) times two
//! linear polarizations. States hold at most four photons, which is the
//! photon content of one emission from both sources. The algebra here is
//! deliberately brute force: every closed-form probability elsewhere in the
//! crate is checked against it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::FockError;

/// Maximum photon number of any state.
pub const MAX_PHOTONS: u8 = 4;

/// Number of distinct modes.
pub const MODE_COUNT: usize = 12;

/// Amplitudes below this fraction of the state norm are dropped.
pub const DROPOUT: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    P1,
    P2,
    P3In,
    P4In,
    D3Out,
    D4Out,
}

impl Path {
    pub const ALL: [Path; 6] = [
        Path::P1,
        Path::P2,
        Path::P3In,
        Path::P4In,
        Path::D3Out,
        Path::D4Out,
    ];

    /// Beam-splitter output arms. All other paths count as input side.
    pub fn is_output(self) -> bool {
        matches!(self, Path::D3Out | Path::D4Out)
    }

    fn is_splitter_input(self) -> bool {
        matches!(self, Path::P3In | Path::P4In)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    X,
    Y,
}

/// One optical mode: a spatial path and a linear polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub path: Path,
    pub pol: Pol,
}

impl ModeIndex {
    pub const fn new(path: Path, pol: Pol) -> Self {
        ModeIndex { path, pol }
    }

    /// Position in the canonical ordering (P1x, P1y, P2x, ..., D4out y).
    pub fn slot(self) -> usize {
        let p = match self.path {
            Path::P1 => 0,
            Path::P2 => 1,
            Path::P3In => 2,
            Path::P4In => 3,
            Path::D3Out => 4,
            Path::D4Out => 5,
        };
        2 * p + usize::from(self.pol == Pol::Y)
    }

    pub fn from_slot(slot: usize) -> Option<Self> {
        let path = *Path::ALL.get(slot / 2)?;
        let pol = if slot.is_multiple_of(2) { Pol::X } else { Pol::Y };
        Some(ModeIndex { path, pol })
    }

    pub fn all() -> impl Iterator<Item = ModeIndex> {
        (0..MODE_COUNT).filter_map(ModeIndex::from_slot)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = match self.pol {
            Pol::X => 'x',
            Pol::Y => 'y',
        };
        write!(f, "{:?}{}", self.path, pol)
    }
}

/// Photon counts per mode in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OccupationVector([u8; MODE_COUNT]);

impl OccupationVector {
    pub fn vacuum() -> Self {
        OccupationVector([0; MODE_COUNT])
    }

    pub fn from_counts(counts: [u8; MODE_COUNT]) -> Result<Self, FockError> {
        let total: u32 = counts.iter().map(|&c| u32::from(c)).sum();
        if total > u32::from(MAX_PHOTONS) {
            return Err(FockError::Capacity { total });
        }
        let occ = OccupationVector(counts);
        occ.check_sides()?;
        Ok(occ)
    }

    pub fn counts(&self) -> &[u8; MODE_COUNT] {
        &self.0
    }

    pub fn get(&self, mode: ModeIndex) -> u8 {
        self.0[mode.slot()]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&c| u32::from(c)).sum()
    }

    fn check_sides(&self) -> Result<(), FockError> {
        let mut input = false;
        let mut output = false;
        for mode in ModeIndex::all() {
            if self.get(mode) > 0 {
                input |= mode.path.is_splitter_input();
                output |= mode.path.is_output();
            }
        }
        if input && output {
            Err(FockError::MixedModes)
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Sparse superposition of occupation-number basis states.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FockState {
    terms: BTreeMap<OccupationVector, Complex64>,
}

impl FockState {
    /// The empty (zero) vector, not to be confused with [`vacuum`].
    pub fn zero() -> Self {
        FockState::default()
    }

    pub fn basis(occ: OccupationVector) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(occ, Complex64::new(1.0, 0.0));
        FockState { terms }
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut state = FockState::zero();
        for (occ, amp) in terms {
            state.accumulate(occ, amp);
        }
        state.prune();
        state
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> FockState {
        FockState::from_terms(self.terms.iter().map(|(o, a)| (*o, a * factor)))
    }

    fn accumulate(&mut self, occ: OccupationVector, amp: Complex64) {
        *self.terms.entry(occ).or_default() += amp;
    }

    fn prune(&mut self) {
        let cutoff = DROPOUT * self.norm();
        self.terms.retain(|_, a| a.norm() >= cutoff && *a != Complex64::default());
    }

    /// Text dump, one line per basis state: `occupation TAB re TAB im`.
    pub fn to_debug_text(&self) -> String {
        let mut out = String::new();
        for (occ, amp) in &self.terms {
            out.push_str(&format!("{occ}\t{:e}\t{:e}\n", amp.re, amp.im));
        }
        out
    }

    pub fn from_debug_text(text: &str) -> Result<FockState, FockError> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || FockError::Parse { line: lineno + 1 };
            let mut fields = line.split('\t');
            let occ_text = fields.next().ok_or_else(bad)?;
            let re: f64 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let im: f64 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if occ_text.len() != MODE_COUNT || fields.next().is_some() {
                return Err(bad());
            }
            let mut counts = [0u8; MODE_COUNT];
            for (slot, ch) in occ_text.chars().enumerate() {
                counts[slot] = ch.to_digit(10).ok_or_else(bad)? as u8;
            }
            terms.push((OccupationVector::from_counts(counts)?, Complex64::new(re, im)));
        }
        Ok(FockState::from_terms(terms))
    }
}

impl Add for &FockState {
    type Output = FockState;
    fn add(self, rhs: &FockState) -> FockState {
        FockState::from_terms(self.iter().chain(rhs.iter()).map(|(o, a)| (*o, *a)))
    }
}

impl Sub for &FockState {
    type Output = FockState;
    fn sub(self, rhs: &FockState) -> FockState {
        FockState::from_terms(
            self.iter()
                .map(|(o, a)| (*o, *a))
                .chain(rhs.iter().map(|(o, a)| (*o, -*a))),
        )
    }
}

/// All-zero occupation with unit amplitude.
pub fn vacuum() -> FockState {
    FockState::basis(OccupationVector::vacuum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LadderOp {
    pub mode: ModeIndex,
    pub kind: Ladder,
}

/// Linear combination of products of ladder operators.
///
/// Factors are stored in written order, so `[A, B]` means the product `A B`
/// and `B` acts on the state first.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OperatorExpr {
    terms: Vec<(Complex64, Vec<LadderOp>)>,
}

impl OperatorExpr {
    pub fn zero() -> Self {
        OperatorExpr::default()
    }

    pub fn identity() -> Self {
        OperatorExpr {
            terms: vec![(Complex64::new(1.0, 0.0), Vec::new())],
        }
    }

    pub fn annihilate(mode: ModeIndex) -> Self {
        Self::single(mode, Ladder::Annihilate)
    }

    pub fn create(mode: ModeIndex) -> Self {
        Self::single(mode, Ladder::Create)
    }

    fn single(mode: ModeIndex, kind: Ladder) -> Self {
        OperatorExpr {
            terms: vec![(Complex64::new(1.0, 0.0), vec![LadderOp { mode, kind }])],
        }
    }

    pub fn terms(&self) -> &[(Complex64, Vec<LadderOp>)] {
        &self.terms
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        OperatorExpr {
            terms: self.terms.iter().map(|(c, f)| (c * factor, f.clone())).collect(),
        }
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, factors)| {
                let flipped = factors
                    .iter()
                    .rev()
                    .map(|op| LadderOp {
                        mode: op.mode,
                        kind: match op.kind {
                            Ladder::Create => Ladder::Annihilate,
                            Ladder::Annihilate => Ladder::Create,
                        },
                    })
                    .collect();
                (c.conj(), flipped)
            })
            .collect();
        OperatorExpr { terms }
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &OperatorExpr) -> Self {
        &(self * other) - &(other * self)
    }
}

impl Add for &OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: &OperatorExpr) -> OperatorExpr {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        OperatorExpr { terms }
    }
}

impl Neg for &OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: &OperatorExpr) -> OperatorExpr {
        self + &(-rhs)
    }
}

impl Mul for &OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: &OperatorExpr) -> OperatorExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ca, fa) in &self.terms {
            for (cb, fb) in &rhs.terms {
                let mut factors = fa.clone();
                factors.extend_from_slice(fb);
                terms.push((ca * cb, factors));
            }
        }
        OperatorExpr { terms }
    }
}

/// Acts with one ladder operator on one basis state.
fn ladder_on_basis(
    op: LadderOp,
    occ: &OccupationVector,
) -> Result<Option<(OccupationVector, f64)>, FockError> {
    let slot = op.mode.slot();
    let n = occ.0[slot];
    match op.kind {
        Ladder::Annihilate => {
            if n == 0 {
                return Ok(None);
            }
            let mut next = *occ;
            next.0[slot] = n - 1;
            Ok(Some((next, f64::from(n).sqrt())))
        }
        Ladder::Create => {
            let total = occ.total() + 1;
            if total > u32::from(MAX_PHOTONS) {
                return Err(FockError::Capacity { total });
            }
            let mut next = *occ;
            next.0[slot] = n + 1;
            next.check_sides()?;
            Ok(Some((next, f64::from(n + 1).sqrt())))
        }
    }
}

/// Applies an operator expression to a state.
pub fn apply(expr: &OperatorExpr, state: &FockState) -> Result<FockState, FockError> {
    let mut out = FockState::zero();
    for (coeff, factors) in &expr.terms {
        'basis: for (occ, amp) in state.iter() {
            let mut cur = *occ;
            let mut weight = 1.0;
            for op in factors.iter().rev() {
                match ladder_on_basis(*op, &cur)? {
                    Some((next, w)) => {
                        cur = next;
                        weight *= w;
                    }
                    None => continue 'basis,
                }
            }
            out.accumulate(cur, coeff * amp * weight);
        }
    }
    out.prune();
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &FockState, b: &FockState) -> Complex64 {
    a.iter()
        .map(|(occ, amp)| amp.conj() * b.amplitude(occ))
        .sum()
}

/// `|| expr |s> ||^2`, i.e. `<s| expr^dagger expr |s>`.
pub fn expectation_abs2(expr: &OperatorExpr, state: &FockState) -> Result<f64, FockError> {
    Ok(apply(expr, state)?.norm_sqr())
}

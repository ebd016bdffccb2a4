//! Sparse state vectors over photon polarization, photon path and NV spin
//! labels, together with the optical elements that act on them.
//!
//! Photons are distinguishable and carry a register id (1, 2, 3, ...), as do
//! NV centers. Every photon label also records the path it currently travels
//! on; path [`OFF_NETWORK`] means the photon is not in the apparatus (either
//! not injected yet or already collected at a detector). Elements address
//! paths, so an element acts on whichever photon sits on its input path.
//!
//! States are values: every operation returns a new state. Amplitudes below
//! [`PRUNE_THRESHOLD`] are dropped to keep the label set sparse.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::Real;

pub type PathId = u8;
pub type RegisterId = u8;

/// Path value of a photon that is not inside the optical network.
pub const OFF_NETWORK: PathId = 0;
/// Amplitudes with a smaller modulus are removed from the map.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("register collision: {kind} {id} declared in both operands")]
    RegisterCollision { kind: &'static str, id: RegisterId },
    #[error("register mismatch between operands")]
    RegisterMismatch,
    #[error("unknown {kind} register {id}")]
    UnknownRegister { kind: &'static str, id: RegisterId },
    #[error("unsupported half-wave plate angle {0}° (only 22.5° and -45° are implemented)")]
    UnsupportedAngle(f64),
    #[error("path {0} already carries a photon")]
    PathOccupied(PathId),
    #[error("two photons share path {0} in one basis label")]
    PathCollision(PathId),
    #[error("state has zero norm")]
    ZeroNormState,
    #[error("NV register {0} is not in a definite spin state")]
    NotDefinite(RegisterId),
    #[error("label does not match the declared registers")]
    MalformedLabel,
    #[error("state JSON: {0}")]
    Json(String),
}

/// Circular polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    R,
    L,
}

/// NV ground-state spin, `|m_s = ±1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pol::R => "R",
            Pol::L => "L",
        })
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        })
    }
}

/// One computational basis label. Components are positional and follow the
/// order of the state's [`Registers`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub pols: Slots<Pol>,
    pub paths: Slots<PathId>,
    pub nvs: Slots<Spin>,
}

/// Per-register label components; inline for the register counts used here.
pub type Slots<X> = SmallVec<[X; 4]>;

impl Label {
    /// Label with every photon off-network.
    pub fn new(pols: impl IntoIterator<Item = Pol>, nvs: impl IntoIterator<Item = Spin>) -> Self {
        let pols: Slots<Pol> = pols.into_iter().collect();
        let paths = smallvec::smallvec![OFF_NETWORK; pols.len()];
        Self {
            pols,
            paths,
            nvs: nvs.into_iter().collect(),
        }
    }

    /// Position of the photon travelling on `path`, if any.
    fn photon_on(&self, path: PathId) -> Result<Option<usize>, StateError> {
        let mut found = None;
        for (i, &p) in self.paths.iter().enumerate() {
            if p == path {
                if found.is_some() {
                    return Err(StateError::PathCollision(path));
                }
                found = Some(i);
            }
        }
        Ok(found)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pol, path) in self.pols.iter().zip(&self.paths) {
            if *path == OFF_NETWORK {
                write!(f, "{pol}")?;
            } else {
                write!(f, "{pol}@{path}")?;
            }
        }
        if !self.nvs.is_empty() {
            f.write_str("|")?;
            for s in &self.nvs {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Register ids of the photons and NV centers a state is defined on.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Registers {
    pub photons: Vec<RegisterId>,
    pub nvs: Vec<RegisterId>,
}

impl Registers {
    /// Photons `1..=photons` and NVs `1..=nvs`.
    pub fn canonical(photons: usize, nvs: usize) -> Self {
        Self {
            photons: (1..=photons as RegisterId).collect(),
            nvs: (1..=nvs as RegisterId).collect(),
        }
    }

    pub fn photon_pos(&self, id: RegisterId) -> Result<usize, StateError> {
        self.photons
            .iter()
            .position(|&p| p == id)
            .ok_or(StateError::UnknownRegister { kind: "photon", id })
    }

    pub fn nv_pos(&self, id: RegisterId) -> Result<usize, StateError> {
        self.nvs
            .iter()
            .position(|&p| p == id)
            .ok_or(StateError::UnknownRegister { kind: "NV", id })
    }

    fn fits(&self, label: &Label) -> bool {
        label.pols.len() == self.photons.len()
            && label.paths.len() == self.photons.len()
            && label.nvs.len() == self.nvs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    registers: Registers,
    amps: BTreeMap<Label, Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zero(registers: Registers) -> Self {
        Self {
            registers,
            amps: BTreeMap::new(),
        }
    }

    /// Empty product: no registers, amplitude one.
    pub fn unit() -> Self {
        let mut s = Self::zero(Registers::default());
        s.amps.insert(Label::new(vec![], vec![]), Complex::from(T::one()));
        s
    }

    /// `a|R⟩ + b|L⟩` for photon `id`, off-network.
    pub fn photon(id: RegisterId, a: Complex<T>, b: Complex<T>) -> Self {
        let registers = Registers {
            photons: vec![id],
            nvs: vec![],
        };
        Self::from_terms(
            registers,
            [
                (Label::new(vec![Pol::R], vec![]), a),
                (Label::new(vec![Pol::L], vec![]), b),
            ],
        )
        .expect("single-photon labels fit their registers")
    }

    /// `plus|+⟩ + minus|−⟩` for NV `id`.
    pub fn nv(id: RegisterId, plus: Complex<T>, minus: Complex<T>) -> Self {
        let registers = Registers {
            photons: vec![],
            nvs: vec![id],
        };
        Self::from_terms(
            registers,
            [
                (Label::new(vec![], vec![Spin::Plus]), plus),
                (Label::new(vec![], vec![Spin::Minus]), minus),
            ],
        )
        .expect("single-NV labels fit their registers")
    }

    /// `(|+⟩ + |−⟩)/√2`, the ancilla preparation of both gates.
    pub fn nv_balanced(id: RegisterId) -> Self {
        let h = Complex::from(T::FRAC_1_SQRT_2());
        Self::nv(id, h, h)
    }

    /// Builds a state from labelled amplitudes, summing duplicates.
    pub fn from_terms<I>(registers: Registers, terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (Label, Complex<T>)>,
    {
        let mut s = Self::zero(registers);
        for (label, amp) in terms {
            if !s.registers.fits(&label) {
                return Err(StateError::MalformedLabel);
            }
            *s.amps.entry(label).or_insert_with(Complex::default) += amp;
        }
        Ok(s.pruned())
    }

    pub fn registers(&self) -> &Registers {
        &self.registers
    }

    pub fn amplitude(&self, label: &Label) -> Complex<T> {
        self.amps.get(label).copied().unwrap_or_default()
    }

    /// Non-negligible amplitudes in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Complex<T>)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.values().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        self.map_amplitudes(|z| z * c)
    }

    pub fn normalized(&self) -> Result<Self, StateError> {
        let n = self.norm_sqr();
        if !(n > T::zero()) {
            return Err(StateError::ZeroNormState);
        }
        Ok(self.scaled(Complex::from(T::one() / n.sqrt())))
    }

    /// Sum of two states on identical registers.
    pub fn plus(&self, other: &Self) -> Result<Self, StateError> {
        if self.registers != other.registers {
            return Err(StateError::RegisterMismatch);
        }
        let mut out = self.clone();
        for (label, amp) in &other.amps {
            *out.amps.entry(label.clone()).or_default() += *amp;
        }
        Ok(out.pruned())
    }

    /// Largest coefficient difference; infinite on register mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.registers != other.registers {
            return T::infinity();
        }
        let mut worst = T::zero();
        for (label, amp) in &self.amps {
            worst = worst.max((*amp - other.amplitude(label)).norm());
        }
        for (label, amp) in &other.amps {
            if !self.amps.contains_key(label) {
                worst = worst.max(amp.norm());
            }
        }
        worst
    }

    /// Equality up to a global phase, comparing `self` against `other`
    /// rotated onto it.
    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        let Ok(overlap) = inner_product(other, self) else {
            return false;
        };
        let phase = if overlap.norm() > T::zero() {
            overlap / overlap.norm()
        } else {
            Complex::from(T::one())
        };
        self.max_abs_diff(&other.scaled(phase)) <= tol
    }

    /// Sets every photon path to [`OFF_NETWORK`], adding amplitudes of labels
    /// that become identical.
    pub fn collapse_paths(&self) -> Self {
        self.relabel(|mut label| {
            label.paths.iter_mut().for_each(|p| *p = OFF_NETWORK);
            label
        })
    }

    /// Unnormalized projection of NV `id` onto `spin`.
    pub fn project_nv(&self, id: RegisterId, spin: Spin) -> Result<Self, StateError> {
        let k = self.registers.nv_pos(id)?;
        let amps = self
            .amps
            .iter()
            .filter(|(l, _)| l.nvs[k] == spin)
            .map(|(l, z)| (l.clone(), *z))
            .collect();
        Ok(Self {
            registers: self.registers.clone(),
            amps,
        })
    }

    /// Drops every NV register. Each NV must already be in a definite state.
    pub fn without_nvs(&self) -> Result<Self, StateError> {
        for (k, &id) in self.registers.nvs.iter().enumerate() {
            let mut spins = self.amps.keys().map(|l| l.nvs[k]);
            if let Some(first) = spins.next() {
                if spins.any(|s| s != first) {
                    return Err(StateError::NotDefinite(id));
                }
            }
        }
        let registers = Registers {
            photons: self.registers.photons.clone(),
            nvs: vec![],
        };
        let terms = self.amps.iter().map(|(l, z)| {
            (
                Label {
                    nvs: Slots::new(),
                    ..l.clone()
                },
                *z,
            )
        });
        Self::from_terms(registers, terms)
    }

    fn map_amplitudes(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let amps = self.amps.iter().map(|(l, z)| (l.clone(), f(*z))).collect();
        Self {
            registers: self.registers.clone(),
            amps,
        }
        .pruned()
    }

    fn relabel(&self, f: impl Fn(Label) -> Label) -> Self {
        let mut out = Self::zero(self.registers.clone());
        for (label, amp) in &self.amps {
            *out.amps.entry(f(label.clone())).or_insert_with(Complex::default) += *amp;
        }
        out.pruned()
    }

    /// Applies a label-wise linear map given as a list of output terms per
    /// input label.
    fn linear_map<F>(&self, f: F) -> Result<Self, StateError>
    where
        F: Fn(&Label) -> Result<Vec<(Label, Complex<T>)>, StateError>,
    {
        let mut out = Self::zero(self.registers.clone());
        for (label, amp) in &self.amps {
            for (image, coeff) in f(label)? {
                *out.amps.entry(image).or_insert_with(Complex::default) += *amp * coeff;
            }
        }
        Ok(out.pruned())
    }

    fn pruned(mut self) -> Self {
        let eps = T::lit(PRUNE_THRESHOLD);
        self.amps.retain(|_, z| z.norm_sqr() >= eps * eps);
        self
    }

    /// JSON array of `{label: {pols, paths, nvs}, re, im}` in label order.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<JsonEntry> = self
            .amps
            .iter()
            .map(|(label, z)| JsonEntry {
                label: label.clone(),
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            })
            .collect();
        serde_json::to_value(entries).expect("state entries serialize")
    }

    /// Parses [`to_json`](Self::to_json) output. Registers are taken as
    /// photons `1..=n` and NVs `1..=m` with `n`, `m` read off the labels.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, StateError> {
        let entries: Vec<JsonEntry> =
            serde_json::from_value(value.clone()).map_err(|e| StateError::Json(e.to_string()))?;
        let Some(first) = entries.first() else {
            return Err(StateError::Json("cannot infer registers from an empty state".into()));
        };
        let registers = Registers::canonical(first.label.pols.len(), first.label.nvs.len());
        Self::from_terms(
            registers,
            entries
                .into_iter()
                .map(|e| (e.label, Complex::new(T::lit(e.re), T::lit(e.im)))),
        )
    }
}

impl<T: Real> fmt::Display for StateVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amps.is_empty() {
            return f.write_str("0");
        }
        for (k, (label, z)) in self.amps.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{label}⟩", z.re, z.im)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    label: Label,
    re: f64,
    im: f64,
}

/// Product state on the union of two disjoint register sets.
pub fn tensor<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<StateVector<T>, StateError> {
    for id in &b.registers.photons {
        if a.registers.photons.contains(id) {
            return Err(StateError::RegisterCollision {
                kind: "photon",
                id: *id,
            });
        }
    }
    for id in &b.registers.nvs {
        if a.registers.nvs.contains(id) {
            return Err(StateError::RegisterCollision { kind: "NV", id: *id });
        }
    }
    let registers = Registers {
        photons: a
            .registers
            .photons
            .iter()
            .chain(&b.registers.photons)
            .copied()
            .collect(),
        nvs: a.registers.nvs.iter().chain(&b.registers.nvs).copied().collect(),
    };
    let mut amps = BTreeMap::new();
    for (la, za) in &a.amps {
        for (lb, zb) in &b.amps {
            let label = Label {
                pols: la.pols.iter().chain(&lb.pols).copied().collect(),
                paths: la.paths.iter().chain(&lb.paths).copied().collect(),
                nvs: la.nvs.iter().chain(&lb.nvs).copied().collect(),
            };
            amps.insert(label, *za * *zb);
        }
    }
    Ok(StateVector { registers, amps }.pruned())
}

/// `⟨a|b⟩`.
pub fn inner_product<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<Complex<T>, StateError> {
    if a.registers != b.registers {
        return Err(StateError::RegisterMismatch);
    }
    Ok(a.amps
        .iter()
        .filter_map(|(label, za)| b.amps.get(label).map(|zb| za.conj() * *zb))
        .fold(Complex::default(), |acc, z| acc + z))
}

/// Half-wave plate settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WavePlate {
    /// 22.5°: `R → (R+L)/√2`, `L → (R−L)/√2`.
    Hadamard,
    /// −45°: `R → −L`, `L → R`.
    Swap,
}

impl WavePlate {
    pub fn from_degrees(angle: f64) -> Result<Self, StateError> {
        if angle == 22.5 {
            Ok(WavePlate::Hadamard)
        } else if angle == -45.0 {
            Ok(WavePlate::Swap)
        } else {
            Err(StateError::UnsupportedAngle(angle))
        }
    }

    pub fn degrees(self) -> f64 {
        match self {
            WavePlate::Hadamard => 22.5,
            WavePlate::Swap => -45.0,
        }
    }
}

/// One step of an optical network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    /// Polarizing beam splitter: `R` to `transmit`, `L` to `reflect`.
    Pbs {
        input: PathId,
        transmit: PathId,
        reflect: PathId,
    },
    Hwp {
        path: PathId,
        plate: WavePlate,
    },
    /// Scattering off the cavity system holding NV `nv`: the coupled
    /// combinations `R⊗|+⟩`, `L⊗|−⟩` leave on `transmit` with amplitude `p`,
    /// the decoupled ones leave on `reflect` with amplitude −1.
    NvInteraction {
        path: PathId,
        nv: RegisterId,
        transmit: PathId,
        reflect: PathId,
    },
    SigmaZ {
        photon: RegisterId,
    },
    HadamardNv {
        nv: RegisterId,
    },
    /// Joins paths into one. Merging into [`OFF_NETWORK`] is detection.
    Merge {
        from: Vec<PathId>,
        to: PathId,
    },
}

pub fn apply_hadamard_nv<T: Real>(state: &StateVector<T>, nv: RegisterId) -> Result<StateVector<T>, StateError> {
    let k = state.registers.nv_pos(nv)?;
    let h = Complex::from(T::FRAC_1_SQRT_2());
    state.linear_map(|label| {
        let with = |s: Spin| {
            let mut l = label.clone();
            l.nvs[k] = s;
            l
        };
        Ok(match label.nvs[k] {
            Spin::Plus => vec![(with(Spin::Plus), h), (with(Spin::Minus), h)],
            Spin::Minus => vec![(with(Spin::Plus), h), (with(Spin::Minus), -h)],
        })
    })
}

pub fn apply_wave_plate<T: Real>(
    state: &StateVector<T>,
    path: PathId,
    plate: WavePlate,
) -> Result<StateVector<T>, StateError> {
    let h = Complex::from(T::FRAC_1_SQRT_2());
    let one = Complex::from(T::one());
    state.linear_map(|label| {
        let Some(i) = label.photon_on(path)? else {
            return Ok(vec![(label.clone(), one)]);
        };
        let with = |p: Pol| {
            let mut l = label.clone();
            l.pols[i] = p;
            l
        };
        Ok(match (plate, label.pols[i]) {
            (WavePlate::Hadamard, Pol::R) => vec![(with(Pol::R), h), (with(Pol::L), h)],
            (WavePlate::Hadamard, Pol::L) => vec![(with(Pol::R), h), (with(Pol::L), -h)],
            (WavePlate::Swap, Pol::R) => vec![(with(Pol::L), -one)],
            (WavePlate::Swap, Pol::L) => vec![(with(Pol::R), one)],
        })
    })
}

/// Half-wave plate given by its angle in degrees.
pub fn apply_hwp<T: Real>(state: &StateVector<T>, path: PathId, angle: f64) -> Result<StateVector<T>, StateError> {
    apply_wave_plate(state, path, WavePlate::from_degrees(angle)?)
}

fn ensure_free<T: Real>(state: &StateVector<T>, input: PathId, outputs: &[PathId]) -> Result<(), StateError> {
    for label in state.amps.keys() {
        for &out in outputs {
            if out != input && out != OFF_NETWORK && label.paths.contains(&out) {
                return Err(StateError::PathOccupied(out));
            }
        }
    }
    Ok(())
}

pub fn apply_pbs<T: Real>(
    state: &StateVector<T>,
    input: PathId,
    transmit: PathId,
    reflect: PathId,
) -> Result<StateVector<T>, StateError> {
    ensure_free(state, input, &[transmit, reflect])?;
    let one = Complex::from(T::one());
    state.linear_map(|label| {
        let mut l = label.clone();
        if let Some(i) = label.photon_on(input)? {
            l.paths[i] = match label.pols[i] {
                Pol::R => transmit,
                Pol::L => reflect,
            };
        }
        Ok(vec![(l, one)])
    })
}

pub fn apply_merge<T: Real>(state: &StateVector<T>, from: &[PathId], to: PathId) -> Result<StateVector<T>, StateError> {
    let one = Complex::from(T::one());
    state.linear_map(|label| {
        let mut l = label.clone();
        for &path in from {
            if let Some(i) = label.photon_on(path)? {
                l.paths[i] = to;
            }
        }
        Ok(vec![(l, one)])
    })
}

/// Photon–NV scattering with coupled-channel amplitude `p` (ideal: `p = 1`).
pub fn apply_nv_interaction<T: Real>(
    state: &StateVector<T>,
    path: PathId,
    nv: RegisterId,
    transmit: PathId,
    reflect: PathId,
    p: T,
) -> Result<StateVector<T>, StateError> {
    let k = state.registers.nv_pos(nv)?;
    let one = Complex::from(T::one());
    state.linear_map(|label| {
        let Some(i) = label.photon_on(path)? else {
            return Ok(vec![(label.clone(), one)]);
        };
        let coupled = matches!(
            (label.pols[i], label.nvs[k]),
            (Pol::R, Spin::Plus) | (Pol::L, Spin::Minus)
        );
        let mut l = label.clone();
        Ok(if coupled {
            l.paths[i] = transmit;
            vec![(l, Complex::from(p))]
        } else {
            l.paths[i] = reflect;
            vec![(l, -one)]
        })
    })
}

/// `σ_z = |R⟩⟨R| − |L⟩⟨L|` on photon `photon`, wherever it is.
pub fn apply_sigma_z<T: Real>(state: &StateVector<T>, photon: RegisterId) -> Result<StateVector<T>, StateError> {
    let i = state.registers.photon_pos(photon)?;
    let one = Complex::from(T::one());
    state.linear_map(|label| {
        let sign = if label.pols[i] == Pol::L { -one } else { one };
        Ok(vec![(label.clone(), sign)])
    })
}

pub fn apply_element<T: Real>(state: &StateVector<T>, element: &Element, p: T) -> Result<StateVector<T>, StateError> {
    match element {
        Element::Pbs {
            input,
            transmit,
            reflect,
        } => apply_pbs(state, *input, *transmit, *reflect),
        Element::Hwp { path, plate } => apply_wave_plate(state, *path, *plate),
        Element::NvInteraction {
            path,
            nv,
            transmit,
            reflect,
        } => apply_nv_interaction(state, *path, *nv, *transmit, *reflect, p),
        Element::SigmaZ { photon } => apply_sigma_z(state, *photon),
        Element::HadamardNv { nv } => apply_hadamard_nv(state, *nv),
        Element::Merge { from, to } => apply_merge(state, from, *to),
    }
}

/// One outcome of a projective NV measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBranch<T> {
    pub outcome: Spin,
    pub probability: T,
    /// Post-measurement state, renormalized; the zero state when the outcome
    /// has probability zero.
    pub collapsed: StateVector<T>,
}

/// Measures NV `nv` in the `{|+⟩, |−⟩}` basis. Probabilities are relative
/// to the norm of the (possibly sub-normalized) input.
pub fn measure_nv<T: Real>(state: &StateVector<T>, nv: RegisterId) -> Result<Vec<MeasurementBranch<T>>, StateError> {
    let total = state.norm_sqr();
    state.registers.nv_pos(nv)?;
    if !(total > T::zero()) {
        return Err(StateError::ZeroNormState);
    }
    [Spin::Plus, Spin::Minus]
        .into_iter()
        .map(|outcome| {
            let part = state.project_nv(nv, outcome)?;
            let weight = part.norm_sqr();
            let collapsed = if weight > T::zero() { part.normalized()? } else { part };
            Ok(MeasurementBranch {
                outcome,
                probability: weight / total,
                collapsed,
            })
        })
        .collect()
}

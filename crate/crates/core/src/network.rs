//! Optical network programs: a line-based description format, its parser and
//! validator, and execution of a program on a [`StateVector`].
//!
//! ```text
//! # comment
//! PATHS <n>                                  paths 1..=n exist
//! INJECT photon <i> AT <path> STEP <k>       photon i enters before element k
//! PBS <in> <transmit> <reflect>
//! HWP <path> <angle>                         22.5 or -45
//! NV <path> <nv> <transmit> <reflect>
//! HNV <nv>
//! SZ <photon>
//! MERGE <from>... INTO <to>
//! DETECT <from>...                           collect photons at the detector
//! MEASURE <nv> [Z|X]                         readout, after all elements
//! CORRECT <nv> <PLUS|MINUS> SZ <photon>      feed-forward on an outcome
//! ```
//!
//! Elements run in file order; `STEP` counts elements, so an injection may be
//! written anywhere. `MEASURE` and `CORRECT` form the readout section and must
//! follow every element. An `X` measurement is a Hadamard on the NV followed
//! by a `{+, −}` measurement.

use std::fmt::Write as _;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;
use crate::state::{
    apply_element, apply_hadamard_nv, apply_sigma_z, Element, PathId, RegisterId, Spin, StateError, StateVector,
    WavePlate, OFF_NETWORK,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{kind}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ValidationError {
    pub line: Option<usize>,
    pub kind: ValidationKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationKind {
    #[error("path {0} is not declared")]
    UndeclaredPath(PathId),
    #[error("unsupported half-wave plate angle {0}°")]
    UnsupportedAngle(f64),
    #[error("photon {0} is injected more than once")]
    DuplicateInjection(RegisterId),
    #[error("injection step {step} is past the last element ({elements})")]
    StepOutOfRange { step: usize, elements: usize },
    #[error("the program injects no photons")]
    NoPhotons,
    #[error("NV {0} is measured more than once")]
    DuplicateMeasurement(RegisterId),
    #[error("correction refers to NV {0}, which is never measured")]
    UnmeasuredCorrection(RegisterId),
    #[error("correction refers to photon {0}, which is never injected")]
    UnknownPhoton(RegisterId),
    #[error("readout directives must follow all elements")]
    ReadoutBeforeElement,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("photon {0} is missing from the input state")]
    MissingPhoton(RegisterId),
    #[error("photon {0} must start off-network")]
    AlreadyInjected(RegisterId),
    #[error("photon {0} was not collected at a detector")]
    NotCollected(RegisterId),
    #[error("program is invalid: {0}")]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub photon: RegisterId,
    pub path: PathId,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureBasis {
    /// `{|+⟩, |−⟩}`.
    Z,
    /// `{(|+⟩ ± |−⟩)/√2}`.
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub nv: RegisterId,
    pub basis: MeasureBasis,
}

/// Apply `σ_z` to `photon` when NV `nv` reads `outcome`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Correction {
    pub nv: RegisterId,
    pub outcome: Spin,
    pub photon: RegisterId,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkProgram {
    pub paths: PathId,
    pub injections: Vec<Injection>,
    pub elements: Vec<Element>,
    pub measurements: Vec<Measurement>,
    pub corrections: Vec<Correction>,
}

/// One joint readout outcome after feed-forward.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub outcomes: Vec<(RegisterId, Spin)>,
    pub probability: T,
    /// Corrected photon state of this branch, unnormalized (its norm² is
    /// the branch weight in the joint state).
    pub branch: StateVector<T>,
    /// Corrected photon state, renormalized; zero when the branch is empty.
    pub corrected: StateVector<T>,
}

/// Line numbers of parsed items, for validation messages.
#[derive(Default)]
struct Spans {
    injections: Vec<usize>,
    elements: Vec<usize>,
    measurements: Vec<usize>,
    corrections: Vec<usize>,
}

impl NetworkProgram {
    /// Photon ids in injection order.
    pub fn photons(&self) -> Vec<RegisterId> {
        let mut inj = self.injections.clone();
        inj.sort_by_key(|i| (i.step, i.photon));
        inj.iter().map(|i| i.photon).collect()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.validate_spans(&Spans::default())
    }

    fn validate_spans(&self, spans: &Spans) -> Result<(), ValidationError> {
        let at = |v: &Vec<usize>, k: usize| v.get(k).copied();
        let err = |line, kind| Err(ValidationError { line, kind });
        let declared = |p: PathId| p != OFF_NETWORK && p <= self.paths;

        if self.injections.is_empty() {
            return err(None, ValidationKind::NoPhotons);
        }
        let mut seen = Vec::new();
        for (k, inj) in self.injections.iter().enumerate() {
            if seen.contains(&inj.photon) {
                return err(at(&spans.injections, k), ValidationKind::DuplicateInjection(inj.photon));
            }
            seen.push(inj.photon);
            if !declared(inj.path) {
                return err(at(&spans.injections, k), ValidationKind::UndeclaredPath(inj.path));
            }
            if inj.step > self.elements.len() {
                return err(
                    at(&spans.injections, k),
                    ValidationKind::StepOutOfRange {
                        step: inj.step,
                        elements: self.elements.len(),
                    },
                );
            }
        }
        for (k, el) in self.elements.iter().enumerate() {
            let paths: Vec<PathId> = match el {
                Element::Pbs {
                    input,
                    transmit,
                    reflect,
                } => vec![*input, *transmit, *reflect],
                Element::Hwp { path, .. } => vec![*path],
                Element::NvInteraction {
                    path,
                    transmit,
                    reflect,
                    ..
                } => vec![*path, *transmit, *reflect],
                Element::Merge { from, to } => {
                    let mut v = from.clone();
                    if *to != OFF_NETWORK {
                        v.push(*to);
                    }
                    v
                }
                Element::SigmaZ { .. } | Element::HadamardNv { .. } => vec![],
            };
            if let Some(&bad) = paths.iter().find(|&&p| !declared(p)) {
                return err(at(&spans.elements, k), ValidationKind::UndeclaredPath(bad));
            }
        }
        let mut measured = Vec::new();
        for (k, m) in self.measurements.iter().enumerate() {
            if measured.contains(&m.nv) {
                return err(at(&spans.measurements, k), ValidationKind::DuplicateMeasurement(m.nv));
            }
            measured.push(m.nv);
        }
        for (k, c) in self.corrections.iter().enumerate() {
            if !measured.contains(&c.nv) {
                return err(at(&spans.corrections, k), ValidationKind::UnmeasuredCorrection(c.nv));
            }
            if !seen.contains(&c.photon) {
                return err(at(&spans.corrections, k), ValidationKind::UnknownPhoton(c.photon));
            }
        }
        Ok(())
    }

    /// Runs the whole program; every photon must end at a detector.
    pub fn execute<T: Real>(&self, initial: &StateVector<T>, p: T) -> Result<StateVector<T>, ExecError> {
        let out = self.execute_prefix(initial, p, self.elements.len())?;
        for &photon in &self.photons() {
            let i = out.registers().photon_pos(photon)?;
            if out.iter().any(|(l, _)| l.paths[i] != OFF_NETWORK) {
                return Err(ExecError::NotCollected(photon));
            }
        }
        Ok(out)
    }

    /// Runs the first `n_elements` elements, including the injections
    /// scheduled up to that point.
    pub fn execute_prefix<T: Real>(
        &self,
        initial: &StateVector<T>,
        p: T,
        n_elements: usize,
    ) -> Result<StateVector<T>, ExecError> {
        self.validate()?;
        for &photon in &self.photons() {
            let i = initial
                .registers()
                .photon_pos(photon)
                .map_err(|_| ExecError::MissingPhoton(photon))?;
            if initial.iter().any(|(l, _)| l.paths[i] != OFF_NETWORK) {
                return Err(ExecError::AlreadyInjected(photon));
            }
        }
        let mut state = initial.clone();
        let n = n_elements.min(self.elements.len());
        for k in 0..=n {
            for inj in self.injections.iter().filter(|i| i.step == k) {
                state = inject(&state, inj.photon, inj.path)?;
            }
            if k < n {
                state = apply_element(&state, &self.elements[k], p)?;
            }
        }
        Ok(state)
    }

    /// Measures every NV listed in the readout section, applies the
    /// corrections and returns one record per joint outcome (including
    /// zero-probability ones), outcomes enumerated with `+` before `−`.
    /// A zero joint state (every photon lost) gives all-zero probabilities.
    pub fn readout<T: Real>(&self, joint: &StateVector<T>) -> Result<Vec<Outcome<T>>, ExecError> {
        let total = joint.norm_sqr();
        let mut rotated = joint.clone();
        for m in &self.measurements {
            if m.basis == MeasureBasis::X {
                rotated = apply_hadamard_nv(&rotated, m.nv)?;
            }
        }
        let count = self.measurements.len();
        let mut records = Vec::with_capacity(1 << count);
        for mask in 0..(1usize << count) {
            let mut branch = rotated.clone();
            let mut outcomes = Vec::with_capacity(count);
            for (k, m) in self.measurements.iter().enumerate() {
                let spin = if mask >> (count - 1 - k) & 1 == 0 {
                    Spin::Plus
                } else {
                    Spin::Minus
                };
                branch = branch.project_nv(m.nv, spin)?;
                outcomes.push((m.nv, spin));
            }
            for c in &self.corrections {
                if outcomes.contains(&(c.nv, c.outcome)) {
                    branch = apply_sigma_z(&branch, c.photon)?;
                }
            }
            let branch = branch.without_nvs()?;
            let weight = branch.norm_sqr();
            let corrected = if weight > T::zero() {
                branch.normalized()?
            } else {
                branch.clone()
            };
            let probability = if total > T::zero() { weight / total } else { T::zero() };
            records.push(Outcome {
                outcomes,
                probability,
                branch,
                corrected,
            });
        }
        Ok(records)
    }

    /// Writes the program back in the description format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "PATHS {}", self.paths);
        for k in 0..=self.elements.len() {
            for inj in self.injections.iter().filter(|i| i.step == k) {
                let _ = writeln!(out, "INJECT photon {} AT {} STEP {}", inj.photon, inj.path, inj.step);
            }
            let Some(el) = self.elements.get(k) else { break };
            let _ = match el {
                Element::Pbs {
                    input,
                    transmit,
                    reflect,
                } => writeln!(out, "PBS {input} {transmit} {reflect}"),
                Element::Hwp { path, plate } => writeln!(out, "HWP {path} {}", plate.degrees()),
                Element::NvInteraction {
                    path,
                    nv,
                    transmit,
                    reflect,
                } => {
                    writeln!(out, "NV {path} {nv} {transmit} {reflect}")
                }
                Element::SigmaZ { photon } => writeln!(out, "SZ {photon}"),
                Element::HadamardNv { nv } => writeln!(out, "HNV {nv}"),
                Element::Merge { from, to } => {
                    let list = from.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
                    if *to == OFF_NETWORK {
                        writeln!(out, "DETECT {list}")
                    } else {
                        writeln!(out, "MERGE {list} INTO {to}")
                    }
                }
            };
        }
        for m in &self.measurements {
            let basis = match m.basis {
                MeasureBasis::Z => "Z",
                MeasureBasis::X => "X",
            };
            let _ = writeln!(out, "MEASURE {} {basis}", m.nv);
        }
        for c in &self.corrections {
            let outcome = match c.outcome {
                Spin::Plus => "PLUS",
                Spin::Minus => "MINUS",
            };
            let _ = writeln!(out, "CORRECT {} {outcome} SZ {}", c.nv, c.photon);
        }
        out
    }
}

/// Puts an off-network photon onto `path`.
fn inject<T: Real>(state: &StateVector<T>, photon: RegisterId, path: PathId) -> Result<StateVector<T>, ExecError> {
    let i = state.registers().photon_pos(photon)?;
    let mut terms = Vec::with_capacity(state.len());
    for (label, amp) in state.iter() {
        if label.paths[i] != OFF_NETWORK {
            return Err(ExecError::AlreadyInjected(photon));
        }
        let mut l = label.clone();
        l.paths[i] = path;
        terms.push((l, *amp));
    }
    Ok(StateVector::from_terms(state.registers().clone(), terms)?)
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn error(&self, column: usize, message: impl Into<String>) -> NetworkError {
        NetworkError::Parse {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn token(&self, k: usize, what: &str) -> Result<&Token<'a>, NetworkError> {
        self.tokens
            .get(k)
            .ok_or_else(|| self.error(self.end_column, format!("expected {what}")))
    }

    fn keyword(&self, k: usize, word: &str) -> Result<(), NetworkError> {
        let t = self.token(k, word)?;
        if t.text == word {
            Ok(())
        } else {
            Err(self.error(t.column, format!("expected `{word}`, found `{}`", t.text)))
        }
    }

    fn number<N: std::str::FromStr>(&self, k: usize, what: &str) -> Result<N, NetworkError> {
        let t = self.token(k, what)?;
        t.text
            .parse()
            .map_err(|_| self.error(t.column, format!("expected {what}, found `{}`", t.text)))
    }

    fn arity(&self, n: usize) -> Result<(), NetworkError> {
        match self.tokens.get(n) {
            Some(t) => Err(self.error(t.column, format!("unexpected token `{}`", t.text))),
            None => Ok(()),
        }
    }
}

fn tokenize(number: usize, raw: &str) -> Line<'_> {
    let content = raw.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (idx, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(idx),
            (true, Some(s)) => {
                tokens.push(Token {
                    text: &content[s..idx],
                    column: content[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    Line {
        number,
        tokens,
        end_column: content.trim_end().chars().count() + 1,
    }
}

/// Parses and validates a network description.
pub fn parse_network(text: &str) -> Result<NetworkProgram, NetworkError> {
    let mut program = NetworkProgram::default();
    let mut spans = Spans::default();
    let mut paths_seen = false;
    let mut readout_started = false;
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line = tokenize(idx + 1, raw);
        last_line = idx + 1;
        let Some(head) = line.tokens.first() else { continue };
        let is_readout = matches!(head.text, "MEASURE" | "CORRECT");
        let is_element = matches!(head.text, "PBS" | "HWP" | "NV" | "HNV" | "SZ" | "MERGE" | "DETECT");
        if is_readout {
            readout_started = true;
        } else if is_element && readout_started {
            return Err(ValidationError {
                line: Some(line.number),
                kind: ValidationKind::ReadoutBeforeElement,
            }
            .into());
        }
        match head.text {
            "PATHS" => {
                if paths_seen {
                    return Err(line.error(head.column, "duplicate PATHS declaration"));
                }
                program.paths = line.number(1, "path count")?;
                line.arity(2)?;
                paths_seen = true;
            }
            "INJECT" => {
                line.keyword(1, "photon")?;
                let photon = line.number(2, "photon index")?;
                line.keyword(3, "AT")?;
                let path = line.number(4, "path")?;
                line.keyword(5, "STEP")?;
                let step = line.number(6, "step")?;
                line.arity(7)?;
                program.injections.push(Injection { photon, path, step });
                spans.injections.push(line.number);
            }
            "PBS" => {
                let el = Element::Pbs {
                    input: line.number(1, "input path")?,
                    transmit: line.number(2, "transmit path")?,
                    reflect: line.number(3, "reflect path")?,
                };
                line.arity(4)?;
                program.elements.push(el);
                spans.elements.push(line.number);
            }
            "HWP" => {
                let path = line.number(1, "path")?;
                let angle: f64 = line.number(2, "angle in degrees")?;
                line.arity(3)?;
                let plate = WavePlate::from_degrees(angle).map_err(|_| ValidationError {
                    line: Some(line.number),
                    kind: ValidationKind::UnsupportedAngle(angle),
                })?;
                program.elements.push(Element::Hwp { path, plate });
                spans.elements.push(line.number);
            }
            "NV" => {
                let el = Element::NvInteraction {
                    path: line.number(1, "path")?,
                    nv: line.number(2, "NV index")?,
                    transmit: line.number(3, "transmit path")?,
                    reflect: line.number(4, "reflect path")?,
                };
                line.arity(5)?;
                program.elements.push(el);
                spans.elements.push(line.number);
            }
            "HNV" => {
                let nv = line.number(1, "NV index")?;
                line.arity(2)?;
                program.elements.push(Element::HadamardNv { nv });
                spans.elements.push(line.number);
            }
            "SZ" => {
                let photon = line.number(1, "photon index")?;
                line.arity(2)?;
                program.elements.push(Element::SigmaZ { photon });
                spans.elements.push(line.number);
            }
            "MERGE" => {
                let into = line
                    .tokens
                    .iter()
                    .position(|t| t.text == "INTO")
                    .ok_or_else(|| line.error(line.end_column, "expected `INTO`"))?;
                if into < 2 {
                    return Err(line.error(line.tokens[into].column, "expected at least one source path"));
                }
                let from = (1..into)
                    .map(|k| line.number(k, "path"))
                    .collect::<Result<Vec<PathId>, _>>()?;
                let to = line.number(into + 1, "target path")?;
                line.arity(into + 2)?;
                program.elements.push(Element::Merge { from, to });
                spans.elements.push(line.number);
            }
            "DETECT" => {
                line.token(1, "path")?;
                let from = (1..line.tokens.len())
                    .map(|k| line.number(k, "path"))
                    .collect::<Result<Vec<PathId>, _>>()?;
                program.elements.push(Element::Merge { from, to: OFF_NETWORK });
                spans.elements.push(line.number);
            }
            "MEASURE" => {
                let nv = line.number(1, "NV index")?;
                let basis = match line.tokens.get(2).map(|t| t.text) {
                    None | Some("Z") => MeasureBasis::Z,
                    Some("X") => MeasureBasis::X,
                    Some(other) => {
                        return Err(line.error(line.tokens[2].column, format!("expected `Z` or `X`, found `{other}`")))
                    }
                };
                line.arity(3)?;
                program.measurements.push(Measurement { nv, basis });
                spans.measurements.push(line.number);
            }
            "CORRECT" => {
                let nv = line.number(1, "NV index")?;
                let t = line.token(2, "outcome")?;
                let outcome = match t.text {
                    "PLUS" => Spin::Plus,
                    "MINUS" => Spin::Minus,
                    other => return Err(line.error(t.column, format!("expected `PLUS` or `MINUS`, found `{other}`"))),
                };
                line.keyword(3, "SZ")?;
                let photon = line.number(4, "photon index")?;
                line.arity(5)?;
                program.corrections.push(Correction { nv, outcome, photon });
                spans.corrections.push(line.number);
            }
            other => return Err(line.error(head.column, format!("unknown directive `{other}`"))),
        }
    }
    if !paths_seen {
        let line = if text.trim().is_empty() { 1 } else { last_line };
        return Err(NetworkError::Parse {
            line,
            column: 1,
            message: "missing PATHS declaration".into(),
        });
    }
    program.validate_spans(&spans)?;
    Ok(program)
}

/// Coherent average of the corrected branches, `Σ_o branch_o / √N` with `N`
/// the number of readout outcomes. Used for truth tables: linear in the
/// input and equal to the ideal gate whenever every branch carries the same
/// corrected state with weight `1/N`.
pub fn branch_average<T: Real>(outcomes: &[Outcome<T>]) -> Option<StateVector<T>> {
    let first = outcomes.first()?;
    let mut acc = StateVector::zero(first.branch.registers().clone());
    for o in outcomes {
        acc = acc.plus(&o.branch).ok()?;
    }
    let scale = T::one() / T::lit(outcomes.len() as f64).sqrt();
    Some(acc.scaled(Complex::from(scale)))
}

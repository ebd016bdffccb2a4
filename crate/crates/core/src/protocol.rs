//! End-to-end c-phase and cc-phase gates: the bundled networks, feed-forward
//! readout, truth tables and the closed-form realistic joint states.

use std::sync::OnceLock;

use num_complex::Complex;
use thiserror::Error;

use crate::network::{branch_average, parse_network, ExecError, NetworkProgram, Outcome};
use crate::scalar::Real;
use crate::state::{inner_product, tensor, Label, Pol, Registers, Spin, StateError, StateVector, OFF_NETWORK};

pub const CPHASE_NETWORK: &str = include_str!("../networks/cphase.net");
pub const CCPHASE_NETWORK: &str = include_str!("../networks/ccphase.net");

/// Tolerance on `|a|² + |b|² = 1` for input photons.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid gate input: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    CPhase,
    CCPhase,
}

impl Gate {
    pub fn photons(self) -> usize {
        match self {
            Gate::CPhase => 2,
            Gate::CCPhase => 3,
        }
    }

    pub fn nvs(self) -> usize {
        match self {
            Gate::CPhase => 1,
            Gate::CCPhase => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::CPhase => "cphase",
            Gate::CCPhase => "ccphase",
        }
    }

    /// The bundled network, parsed once.
    pub fn program(self) -> &'static NetworkProgram {
        static CP: OnceLock<NetworkProgram> = OnceLock::new();
        static CCP: OnceLock<NetworkProgram> = OnceLock::new();
        match self {
            Gate::CPhase => CP.get_or_init(|| parse_network(CPHASE_NETWORK).expect("bundled cphase.net is valid")),
            Gate::CCPhase => CCP.get_or_init(|| parse_network(CCPHASE_NETWORK).expect("bundled ccphase.net is valid")),
        }
    }
}

/// Polarization amplitudes `a|R⟩ + b|L⟩` of the two photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPhaseSpec<T> {
    pub a1: Complex<T>,
    pub b1: Complex<T>,
    pub a2: Complex<T>,
    pub b2: Complex<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CCPhaseSpec<T> {
    pub a1: Complex<T>,
    pub b1: Complex<T>,
    pub a2: Complex<T>,
    pub b2: Complex<T>,
    pub a3: Complex<T>,
    pub b3: Complex<T>,
}

impl<T: Real> CPhaseSpec<T> {
    pub fn from_angles(theta1: T, theta2: T) -> Self {
        let [(a1, b1), (a2, b2)] = [theta1, theta2].map(angle_amplitudes);
        Self { a1, b1, a2, b2 }
    }

    pub fn amplitudes(&self) -> Vec<(Complex<T>, Complex<T>)> {
        vec![(self.a1, self.b1), (self.a2, self.b2)]
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_amplitudes(&self.amplitudes())
    }
}

impl<T: Real> CCPhaseSpec<T> {
    pub fn from_angles(theta1: T, theta2: T, theta3: T) -> Self {
        let [(a1, b1), (a2, b2), (a3, b3)] = [theta1, theta2, theta3].map(angle_amplitudes);
        Self { a1, b1, a2, b2, a3, b3 }
    }

    pub fn amplitudes(&self) -> Vec<(Complex<T>, Complex<T>)> {
        vec![(self.a1, self.b1), (self.a2, self.b2), (self.a3, self.b3)]
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_amplitudes(&self.amplitudes())
    }
}

/// `(cos θ, sin θ)`.
fn angle_amplitudes<T: Real>(theta: T) -> (Complex<T>, Complex<T>) {
    (Complex::from(theta.cos()), Complex::from(theta.sin()))
}

fn check_amplitudes<T: Real>(photons: &[(Complex<T>, Complex<T>)]) -> Result<(), ProtocolError> {
    for (k, (a, b)) in photons.iter().enumerate() {
        let norm = (a.norm_sqr() + b.norm_sqr()).to_f64_lossy();
        if !((norm - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
            return Err(ProtocolError::InvalidSpec(format!(
                "photon {} has |a|²+|b|² = {norm}",
                k + 1
            )));
        }
    }
    Ok(())
}

fn check_p<T: Real>(p: T) -> Result<(), ProtocolError> {
    if p.is_finite() && p.abs() <= T::one() {
        Ok(())
    } else {
        Err(ProtocolError::InvalidSpec(format!("p = {p} is outside [-1, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport<T> {
    pub gate: Gate,
    pub p: T,
    /// Input photon state.
    pub input: StateVector<T>,
    /// Photons ⊗ NVs after the last element, before readout.
    pub joint_state: StateVector<T>,
    pub outcome_table: Vec<Outcome<T>>,
    /// The `p = 1` joint state for the same input.
    pub ideal_reference: StateVector<T>,
    /// The gate applied to the input photons.
    pub ideal_output: StateVector<T>,
    /// `|⟨ideal_reference|joint_state⟩|²`, joint state not renormalized.
    pub fidelity: T,
    /// `‖joint_state‖²`.
    pub efficiency: T,
}

pub fn run_cphase<T: Real>(spec: &CPhaseSpec<T>, p: T) -> Result<GateReport<T>, ProtocolError> {
    run_gate(Gate::CPhase, &spec.amplitudes(), p)
}

pub fn run_ccphase<T: Real>(spec: &CCPhaseSpec<T>, p: T) -> Result<GateReport<T>, ProtocolError> {
    run_gate(Gate::CCPhase, &spec.amplitudes(), p)
}

/// Runs `gate` on product input `photons` (one `(a, b)` per photon).
pub fn run_gate<T: Real>(
    gate: Gate,
    photons: &[(Complex<T>, Complex<T>)],
    p: T,
) -> Result<GateReport<T>, ProtocolError> {
    if photons.len() != gate.photons() {
        return Err(ProtocolError::InvalidSpec(format!(
            "{} takes {} photons, got {}",
            gate.name(),
            gate.photons(),
            photons.len()
        )));
    }
    check_amplitudes(photons)?;
    run_gate_state(gate, &product_input(photons)?, p)
}

/// Runs `gate` on an arbitrary normalized photon state (photons `1..=k`,
/// off-network, no NV registers).
pub fn run_gate_state<T: Real>(gate: Gate, input: &StateVector<T>, p: T) -> Result<GateReport<T>, ProtocolError> {
    check_p(p)?;
    if input.registers() != &Registers::canonical(gate.photons(), 0) {
        return Err(ProtocolError::InvalidSpec(format!(
            "{} needs exactly photons 1..={} and no NV registers",
            gate.name(),
            gate.photons()
        )));
    }
    if input
        .iter()
        .any(|(l, _)| l.paths.iter().any(|&path| path != OFF_NETWORK))
    {
        return Err(ProtocolError::InvalidSpec("input photons must be off-network".into()));
    }
    let norm = input.norm_sqr().to_f64_lossy();
    if !((norm - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
        return Err(ProtocolError::InvalidSpec(format!("input state has norm² {norm}")));
    }
    let start = with_ancillas(gate, input)?;
    let joint_state = evolve(gate, &start, p)?;
    let ideal_reference = if p == T::one() {
        joint_state.clone()
    } else {
        evolve(gate, &start, T::one())?
    };
    let outcome_table = gate.program().readout(&joint_state)?;
    let overlap = inner_product(&ideal_reference, &joint_state)?;
    Ok(GateReport {
        gate,
        p,
        input: input.clone(),
        fidelity: overlap.norm_sqr(),
        efficiency: joint_state.norm_sqr(),
        joint_state,
        outcome_table,
        ideal_reference,
        ideal_output: flip_all_l(input)?,
    })
}

/// Product photon state `⊗(a_j|R⟩ + b_j|L⟩)`, photons numbered from 1.
pub fn product_input<T: Real>(photons: &[(Complex<T>, Complex<T>)]) -> Result<StateVector<T>, StateError> {
    let mut state = StateVector::unit();
    for (k, &(a, b)) in photons.iter().enumerate() {
        state = tensor(&state, &StateVector::photon(k as u8 + 1, a, b))?;
    }
    Ok(state)
}

fn with_ancillas<T: Real>(gate: Gate, photons: &StateVector<T>) -> Result<StateVector<T>, StateError> {
    let mut state = photons.clone();
    for k in 0..gate.nvs() {
        state = tensor(&state, &StateVector::nv_balanced(k as u8 + 1))?;
    }
    Ok(state)
}

/// Input photons (off-network) ⊗ balanced NV ancillas.
pub fn initial_state<T: Real>(gate: Gate, photons: &[(Complex<T>, Complex<T>)]) -> Result<StateVector<T>, StateError> {
    with_ancillas(gate, &product_input(photons)?)
}

fn flip_all_l<T: Real>(state: &StateVector<T>) -> Result<StateVector<T>, StateError> {
    let terms = state.iter().map(|(l, z)| {
        let flip = l.pols.iter().all(|&p| p == Pol::L);
        (l.clone(), if flip { -*z } else { *z })
    });
    StateVector::from_terms(state.registers().clone(), terms)
}

fn evolve<T: Real>(gate: Gate, input: &StateVector<T>, p: T) -> Result<StateVector<T>, ProtocolError> {
    Ok(gate.program().execute(input, p)?)
}

/// Phase flip of the all-`L` component applied to the product input.
pub fn ideal_output<T: Real>(gate: Gate, photons: &[(Complex<T>, Complex<T>)]) -> Result<StateVector<T>, StateError> {
    let n = gate.photons();
    let registers = Registers::canonical(n, 0);
    let terms = (0..1usize << n).map(|index| {
        let pols = basis_pols(n, index);
        let mut amp = Complex::from(T::one());
        for (k, pol) in pols.iter().enumerate() {
            amp *= if *pol == Pol::R { photons[k].0 } else { photons[k].1 };
        }
        if index == (1 << n) - 1 {
            amp = -amp;
        }
        (Label::new(pols, vec![]), amp)
    });
    StateVector::from_terms(registers, terms)
}

/// Polarizations of computational basis state `index`: photon 1 is the most
/// significant bit, `R` = 0.
pub fn basis_pols(photons: usize, index: usize) -> Vec<Pol> {
    (0..photons)
        .map(|k| {
            if index >> (photons - 1 - k) & 1 == 0 {
                Pol::R
            } else {
                Pol::L
            }
        })
        .collect()
}

/// Gate matrix in the basis `RR…R, …, LL…L`, `matrix[row][column]`.
///
/// Column `j` is the input basis state `j` pushed through the network and
/// readout; the corrected branches are summed coherently with weight
/// `1/√N` over the `N` readout outcomes. At `p = 1` every branch carries the
/// same corrected state, so this is the gate itself.
pub fn truth_table<T: Real>(gate: Gate, p: T) -> Result<Vec<Vec<Complex<T>>>, ProtocolError> {
    check_p(p)?;
    let n = gate.photons();
    let dim = 1usize << n;
    let zero = Complex::from(T::zero());
    let one = Complex::from(T::one());
    let mut matrix = vec![vec![zero; dim]; dim];
    for col in 0..dim {
        let photons: Vec<_> = basis_pols(n, col)
            .into_iter()
            .map(|pol| if pol == Pol::R { (one, zero) } else { (zero, one) })
            .collect();
        let input = initial_state(gate, &photons)?;
        let joint = evolve(gate, &input, p)?;
        let outcomes = gate.program().readout(&joint)?;
        let out = branch_average(&outcomes).ok_or(StateError::ZeroNormState)?;
        for (row, entry) in matrix.iter_mut().enumerate() {
            entry[col] = out.amplitude(&Label::new(basis_pols(n, row), vec![]));
        }
    }
    Ok(matrix)
}

fn nv_label(pols: &str, nvs: &str) -> Label {
    Label::new(
        pols.chars().map(|c| if c == 'R' { Pol::R } else { Pol::L }),
        nvs.chars().map(|c| if c == '+' { Spin::Plus } else { Spin::Minus }),
    )
}

/// Closed-form realistic c-phase joint state for coupled-channel amplitude
/// `p`; photons are at the detector.
pub fn analytic_state_cphase<T: Real>(spec: &CPhaseSpec<T>, p: T) -> Result<StateVector<T>, ProtocolError> {
    spec.validate()?;
    let CPhaseSpec { a1, b1, a2, b2 } = *spec;
    let one = T::one();
    let two = T::lit(2.0);
    let h = T::FRAC_1_SQRT_2();
    let pc = Complex::from(p);
    let terms = [
        ("RR", "+", a1 * a2 * pc),
        ("RL", "+", a1 * b2),
        ("LR", "+", b1 * a2 * ((p * p + one) / two)),
        ("LL", "+", -(b1 * b2)),
        ("RR", "-", a1 * a2 * pc),
        ("RL", "-", a1 * b2),
        ("LR", "-", b1 * a2 * ((p * p - two * p - one) / two)),
        ("LL", "-", b1 * b2 * pc),
    ];
    Ok(StateVector::from_terms(
        Registers::canonical(2, 1),
        terms.into_iter().map(|(pols, nvs, z)| (nv_label(pols, nvs), z * h)),
    )?)
}

/// Closed-form realistic cc-phase joint state, written with
/// `ξ₁ = p − 1`, `ξ₂ = p + 1`, `ξ₃ = 1 + 2p − p²`.
pub fn analytic_state_ccphase<T: Real>(spec: &CCPhaseSpec<T>, p: T) -> Result<StateVector<T>, ProtocolError> {
    spec.validate()?;
    let CCPhaseSpec { a1, b1, a2, b2, a3, b3 } = *spec;
    let one = T::one();
    let two = T::lit(2.0);
    let x1 = p - one;
    let x2 = p + one;
    let x3 = one + two * p - p * p;
    let r = |v: f64| T::lit(v);
    let terms: Vec<(&str, &str, Complex<T>)> = vec![
        // a1 R1 a2 R2
        ("RRR", "++", a1 * a2 * a3),
        ("RRL", "++", a1 * a2 * b3 * (x3 / two)),
        // a1 R1 b2 L2
        ("RLR", "++", a1 * b2 * a3 * (x1 / two)),
        ("RLR", "+-", a1 * b2 * a3 * (-x2 / two)),
        ("RLL", "++", a1 * b2 * b3 * (x1 * x3 / r(4.0))),
        ("RLL", "+-", a1 * b2 * b3 * (-two * p * x2 / r(4.0))),
        // b1 L1 a2 R2
        ("LRR", "++", b1 * a2 * a3 * (x1 / two)),
        ("LRR", "-+", b1 * a2 * a3 * (-x2 / two)),
        ("LRL", "++", b1 * a2 * b3 * (x1 * x3 / r(4.0))),
        ("LRL", "-+", b1 * a2 * b3 * (-two * p * x2 / r(4.0))),
        // b1 L1 b2 L2
        ("LLR", "++", b1 * b2 * a3 * (x1 * x1 / r(4.0))),
        ("LLR", "+-", b1 * b2 * a3 * (-x1 * x2 / r(4.0))),
        ("LLR", "-+", b1 * b2 * a3 * (-x1 * x2 / r(4.0))),
        ("LLR", "--", b1 * b2 * a3 * (x2 * x2 / r(4.0))),
        ("LLL", "++", b1 * b2 * b3 * (x1 * x1 * x3 / r(8.0))),
        ("LLL", "+-", b1 * b2 * b3 * (-two * p * x1 * x2 / r(8.0))),
        ("LLL", "-+", b1 * b2 * b3 * (-two * p * x1 * x2 / r(8.0))),
        ("LLL", "--", b1 * b2 * b3 * (-two * x2 * x2 / r(8.0))),
    ];
    Ok(StateVector::from_terms(
        Registers::canonical(3, 2),
        terms.into_iter().map(|(pols, nvs, z)| (nv_label(pols, nvs), z)),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64) -> C {
        Complex::new(re, 0.0)
    }

    fn s2() -> C {
        c(std::f64::consts::FRAC_1_SQRT_2)
    }

    fn terms(state: &StateVector<f64>) -> Vec<(String, C)> {
        state.iter().map(|(l, z)| (l.to_string(), *z)).collect()
    }

    #[test]
    fn bundled_programs_parse() {
        assert_eq!(Gate::CPhase.program().elements.len(), 8);
        assert_eq!(Gate::CCPhase.program().elements.len(), 19);
        assert_eq!(Gate::CCPhase.program().photons(), vec![1, 2, 3]);
    }

    #[test]
    fn cphase_balanced_input_gives_phase_flip_on_ll() {
        let spec = CPhaseSpec {
            a1: s2(),
            b1: s2(),
            a2: s2(),
            b2: s2(),
        };
        let report = run_cphase(&spec, 1.0).unwrap();
        let expected = StateVector::from_terms(
            Registers::canonical(2, 0),
            [("RR", 0.5), ("RL", 0.5), ("LR", 0.5), ("LL", -0.5)].map(|(l, z)| (nv_label(l, ""), c(z))),
        )
        .unwrap();
        for o in &report.outcome_table {
            assert!(o.corrected.max_abs_diff(&expected) < 1e-14, "{:?}", o.outcomes);
            assert!((o.probability - 0.5).abs() < 1e-14);
        }
        assert!((report.fidelity - 1.0).abs() < 1e-14);
        assert!((report.efficiency - 1.0).abs() < 1e-14);
        assert!(report.ideal_output.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cphase_at_p_zero_matches_closed_form_lr_term() {
        let spec = CPhaseSpec {
            a1: s2(),
            b1: s2(),
            a2: s2(),
            b2: s2(),
        };
        let report = run_cphase(&spec, 0.0).unwrap();
        let lr_plus = report.joint_state.amplitude(&nv_label("LR", "+"));
        assert!((lr_plus - c(0.5 * 0.5 * std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        let analytic = analytic_state_cphase(&spec, 0.0).unwrap();
        assert!(report.joint_state.max_abs_diff(&analytic) < 1e-15);
    }

    #[test]
    fn ccphase_balanced_input() {
        let h = s2();
        let spec = CCPhaseSpec {
            a1: h,
            b1: h,
            a2: h,
            b2: h,
            a3: h,
            b3: h,
        };
        let report = run_ccphase(&spec, 1.0).unwrap();
        let amp = 1.0 / 8f64.sqrt();
        for o in &report.outcome_table {
            for (label, z) in terms(&o.corrected) {
                let sign = if label == "LLL" { -1.0 } else { 1.0 };
                assert!((z - c(sign * amp)).norm() < 1e-14, "{label} {z}");
            }
            assert_eq!(o.corrected.len(), 8);
        }
        let analytic = analytic_state_ccphase(&spec, 0.5).unwrap();
        let simulated = run_ccphase(&spec, 0.5).unwrap().joint_state;
        assert!(simulated.max_abs_diff(&analytic) < 1e-14);
    }

    #[test]
    fn truth_tables_at_unit_p() {
        for gate in [Gate::CPhase, Gate::CCPhase] {
            let m = truth_table(gate, 1.0).unwrap();
            let dim = m.len();
            for (i, row) in m.iter().enumerate() {
                for (j, z) in row.iter().enumerate() {
                    let want = if i != j {
                        0.0
                    } else if i == dim - 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    assert!((z - c(want)).norm() < 1e-14, "{gate:?} [{i}][{j}] = {z}");
                }
            }
        }
    }

    #[test]
    fn b1_zero_leaves_no_l1_terms() {
        let spec = CPhaseSpec {
            a1: c(1.0),
            b1: c(0.0),
            a2: s2(),
            b2: s2(),
        };
        let s = analytic_state_cphase(&spec, 0.3).unwrap();
        assert!(s.iter().all(|(l, _)| l.pols[0] == Pol::R));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = CPhaseSpec {
            a1: c(1.0),
            b1: c(0.1),
            a2: c(1.0),
            b2: c(0.0),
        };
        assert!(matches!(run_cphase(&spec, 1.0), Err(ProtocolError::InvalidSpec(_))));
        let spec = CPhaseSpec {
            a1: c(1.0),
            b1: c(0.0),
            a2: c(1.0),
            b2: c(0.0),
        };
        assert!(matches!(run_cphase(&spec, 1.5), Err(ProtocolError::InvalidSpec(_))));
        assert!(matches!(
            run_gate(Gate::CCPhase, &spec.amplitudes(), 1.0),
            Err(ProtocolError::InvalidSpec(_))
        ));
    }
}

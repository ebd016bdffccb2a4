//! Gate fidelity and efficiency: pointwise, angle-averaged by quadrature,
//! closed-form averages, and the parameter sweeps built on them.

use std::collections::BTreeSet;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::export::{csv_line, sig12};
use crate::protocol::{basis_pols, run_gate, Gate, ProtocolError};
use crate::scalar::{horner, Field, Real};
use crate::scattering::{resonant_from_rate_ratios, resonant_from_ratio, ScatterError};
use crate::state::{inner_product, Label, Pol, StateError, StateVector};

/// Smallest number of quadrature nodes per angle that integrates the
/// fidelity and efficiency integrands exactly.
pub const MIN_NODES_PER_ANGLE: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("quadrature needs at least {MIN_NODES_PER_ANGLE} nodes per angle, got {0}")]
    InvalidSampleCount(usize),
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error("angle {0} is outside [0, 2π)")]
    InvalidAngle(f64),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
}

/// Input angles, `a_j = cos θ_j`, `b_j = sin θ_j`. `theta3` is ignored by
/// the c-phase gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSpec<T> {
    pub theta1: T,
    pub theta2: T,
    pub theta3: T,
}

impl<T: Real> AngleSpec<T> {
    pub fn new(theta1: T, theta2: T, theta3: T) -> Result<Self, MetricsError> {
        for theta in [theta1, theta2, theta3] {
            if !(theta >= T::zero() && theta < T::TAU()) {
                return Err(MetricsError::InvalidAngle(theta.to_f64_lossy()));
            }
        }
        Ok(Self { theta1, theta2, theta3 })
    }

    pub fn amplitudes(&self, gate: Gate) -> Vec<(Complex<T>, Complex<T>)> {
        [self.theta1, self.theta2, self.theta3][..gate.photons()]
            .iter()
            .map(|t| (Complex::from(t.cos()), Complex::from(t.sin())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricSource {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsPoint<T> {
    pub p: T,
    pub fidelity_avg: T,
    pub efficiency_avg: T,
    pub source: MetricSource,
}

/// How the realistic state enters the overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityConvention {
    /// `|⟨ideal|realistic⟩|²` with the realistic state as produced.
    Unnormalized,
    /// Realistic state renormalized first. Only used as a negative control:
    /// it does not reproduce the closed-form averages.
    Renormalized,
}

/// `|⟨ideal|realistic⟩|²`, without renormalizing `realistic`.
pub fn fidelity_joint<T: Real>(ideal: &StateVector<T>, realistic: &StateVector<T>) -> Result<T, StateError> {
    Ok(inner_product(ideal, realistic)?.norm_sqr())
}

/// `‖realistic‖²`, the probability that no photon is lost.
pub fn efficiency_joint<T: Real>(realistic: &StateVector<T>) -> T {
    realistic.norm_sqr()
}

const F_CP: (&[i64], i64) = (&[19, 26, 19], 64);
const ETA_CP: (&[i64], i64) = (&[7, 2, 8, -2, 1], 16);
const F_CCP: (&[i64], i64) = (&[369, 708, 638, 244, 89], 2048);
const ETA_CCP: (&[i64], i64) = (&[173, 96, 144, -8, 154, -80, 40, -8, 1], 512);

fn poly<T: Field>((coeffs, den): (&[i64], i64), p: &T) -> T {
    horner(coeffs, p) / T::int(den)
}

/// Angle-averaged `(F̄, η̄)` of the c-phase gate.
pub fn closed_form_cphase<T: Field>(p: &T) -> (T, T) {
    (poly(F_CP, p), poly(ETA_CP, p))
}

/// Angle-averaged `(F̄, η̄)` of the cc-phase gate.
pub fn closed_form_ccphase<T: Field>(p: &T) -> (T, T) {
    (poly(F_CCP, p), poly(ETA_CCP, p))
}

pub fn closed_form<T: Field>(gate: Gate, p: &T) -> (T, T) {
    match gate {
        Gate::CPhase => closed_form_cphase(p),
        Gate::CCPhase => closed_form_ccphase(p),
    }
}

pub fn closed_form_point<T: Real>(gate: Gate, p: T) -> MetricsPoint<T> {
    let (fidelity_avg, efficiency_avg) = closed_form(gate, &p);
    MetricsPoint {
        p,
        fidelity_avg,
        efficiency_avg,
        source: MetricSource::ClosedForm,
    }
}

/// Runs the gate on one input and returns `(F, η)`.
pub fn pointwise<T: Real>(gate: Gate, angles: &AngleSpec<T>, p: T) -> Result<(T, T), MetricsError> {
    let report = run_gate(gate, &angles.amplitudes(gate), p)?;
    Ok((report.fidelity, report.efficiency))
}

/// Mean of `F` and `η` over a uniform `n^k` product grid in `[0, 2π)^k`.
pub fn average_by_quadrature<T: Real>(gate: Gate, p: T, n_per_angle: usize) -> Result<MetricsPoint<T>, MetricsError> {
    average_by_quadrature_with(gate, p, n_per_angle, FidelityConvention::Unnormalized)
}

/// Joint states produced by the network for each computational basis
/// input, at `p` and at `p = 1`, as dense columns over a shared label list.
///
/// The network is linear in each photon's amplitudes, so the joint state
/// for a product input `⊗(a_j|R⟩ + b_j|L⟩)` is the matching combination of
/// these columns. Quadrature uses this instead of re-running the network at
/// every node.
#[derive(Debug, Clone)]
pub struct BasisResponse<T> {
    pub gate: Gate,
    pub labels: Vec<Label>,
    pub realistic: Vec<Vec<Complex<T>>>,
    pub ideal: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BasisResponse<T> {
    pub fn new(gate: Gate, p: T) -> Result<Self, MetricsError> {
        let n = gate.photons();
        let zero = Complex::from(T::zero());
        let one = Complex::from(T::one());
        let mut realistic_states = Vec::with_capacity(1 << n);
        let mut ideal_states = Vec::with_capacity(1 << n);
        for index in 0..1usize << n {
            let photons: Vec<_> = basis_pols(n, index)
                .into_iter()
                .map(|pol| if pol == Pol::R { (one, zero) } else { (zero, one) })
                .collect();
            let report = run_gate(gate, &photons, p)?;
            realistic_states.push(report.joint_state);
            ideal_states.push(report.ideal_reference);
        }
        let labels: Vec<Label> = realistic_states
            .iter()
            .chain(&ideal_states)
            .flat_map(|s| s.iter().map(|(l, _)| l.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let dense = |s: &StateVector<T>| labels.iter().map(|l| s.amplitude(l)).collect::<Vec<_>>();
        Ok(Self {
            gate,
            realistic: realistic_states.iter().map(dense).collect(),
            ideal: ideal_states.iter().map(dense).collect(),
            labels,
        })
    }

    /// `(realistic, ideal)` amplitudes over [`labels`](Self::labels) for a
    /// product input.
    pub fn superpose(&self, photons: &[(Complex<T>, Complex<T>)]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.gate.photons();
        let zero = Complex::from(T::zero());
        let mut realistic = vec![zero; self.labels.len()];
        let mut ideal = vec![zero; self.labels.len()];
        for (index, (re_col, id_col)) in self.realistic.iter().zip(&self.ideal).enumerate() {
            let mut c = Complex::from(T::one());
            for (k, pol) in basis_pols(n, index).into_iter().enumerate() {
                c *= if pol == Pol::R { photons[k].0 } else { photons[k].1 };
            }
            for ((out, &x), (out_id, &y)) in realistic.iter_mut().zip(re_col).zip(ideal.iter_mut().zip(id_col)) {
                *out += c * x;
                *out_id += c * y;
            }
        }
        (realistic, ideal)
    }

    /// `(F, η)` for a product input.
    pub fn metrics(&self, photons: &[(Complex<T>, Complex<T>)], convention: FidelityConvention) -> (T, T) {
        let (realistic, ideal) = self.superpose(photons);
        let overlap: Complex<T> = ideal
            .iter()
            .zip(&realistic)
            .fold(Complex::from(T::zero()), |acc, (i, r)| acc + i.conj() * r);
        let efficiency = realistic.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let fidelity = match convention {
            FidelityConvention::Unnormalized => overlap.norm_sqr(),
            FidelityConvention::Renormalized => overlap.norm_sqr() / efficiency,
        };
        (fidelity, efficiency)
    }
}

pub fn average_by_quadrature_with<T: Real>(
    gate: Gate,
    p: T,
    n_per_angle: usize,
    convention: FidelityConvention,
) -> Result<MetricsPoint<T>, MetricsError> {
    if n_per_angle < MIN_NODES_PER_ANGLE {
        return Err(MetricsError::InvalidSampleCount(n_per_angle));
    }
    let response = BasisResponse::new(gate, p)?;
    let k = gate.photons();
    let n = n_per_angle;
    let node = |i: usize| T::TAU() * T::lit(i as f64) / T::lit(n as f64);
    // One partial sum per first-angle node, combined in order afterwards so
    // the result does not depend on scheduling.
    let partials: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut f_sum = T::zero();
            let mut e_sum = T::zero();
            for rest in 0..n.pow(k as u32 - 1) {
                let mut thetas = [node(i), T::zero(), T::zero()];
                let mut r = rest;
                for slot in thetas[1..k].iter_mut().rev() {
                    *slot = node(r % n);
                    r /= n;
                }
                let angles = AngleSpec {
                    theta1: thetas[0],
                    theta2: thetas[1],
                    theta3: thetas[2],
                };
                let (f, e) = response.metrics(&angles.amplitudes(gate), convention);
                f_sum += f;
                e_sum += e;
            }
            (f_sum, e_sum)
        })
        .collect();
    let count = T::lit(n.pow(k as u32) as f64);
    let (f, e) = partials
        .iter()
        .fold((T::zero(), T::zero()), |(f, e), &(pf, pe)| (f + pf, e + pe));
    Ok(MetricsPoint {
        p,
        fidelity_avg: f / count,
        efficiency_avg: e / count,
        source: MetricSource::Quadrature,
    })
}

/// Named columns of `f64` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv_line(&self.columns);
        for row in &self.rows {
            out.push_str(&csv_line(row.iter().map(|&x| sig12(x))));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sweep table serializes")
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Resonant `r0`, `t0` and `p` against `λ/√(κγ)`.
pub fn sweep_resonant(lambda_ratio_grid: &[f64]) -> Result<SweepTable, MetricsError> {
    if let Some(bad) = lambda_ratio_grid.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(MetricsError::InvalidGrid(format!(
            "ratio {bad} must be finite and non-negative"
        )));
    }
    let rows = lambda_ratio_grid
        .par_iter()
        .map(|&x| {
            let c = resonant_from_ratio(x)?;
            Ok(vec![x, c.r0, c.t0, c.p])
        })
        .collect::<Result<_, MetricsError>>()?;
    Ok(SweepTable {
        columns: ["lambda_over_sqrt_kappa_gamma", "r0", "t0", "p"]
            .map(String::from)
            .to_vec(),
        rows,
    })
}

/// Which gates contribute columns to a fidelity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSelection {
    CPhase,
    CCPhase,
    Both,
}

impl GateSelection {
    pub fn gates(self) -> &'static [Gate] {
        match self {
            GateSelection::CPhase => &[Gate::CPhase],
            GateSelection::CCPhase => &[Gate::CCPhase],
            GateSelection::Both => &[Gate::CPhase, Gate::CCPhase],
        }
    }
}

/// Closed-form averages over a `λ/κ × λ/γ` grid (`λ/κ` outer, both
/// ascending as given).
pub fn sweep_fidelity(
    lambda_over_kappa: &[f64],
    lambda_over_gamma: &[f64],
    gates: GateSelection,
) -> Result<SweepTable, MetricsError> {
    for (name, grid) in [("lambda/kappa", lambda_over_kappa), ("lambda/gamma", lambda_over_gamma)] {
        if let Some(bad) = grid.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(MetricsError::InvalidGrid(format!(
                "{name} value {bad} must be positive"
            )));
        }
    }
    let mut columns: Vec<String> = ["lambda_over_kappa", "lambda_over_gamma", "r0", "t0", "p"]
        .map(String::from)
        .to_vec();
    for gate in gates.gates() {
        let tag = match gate {
            Gate::CPhase => "cp",
            Gate::CCPhase => "ccp",
        };
        columns.push(format!("F_{tag}"));
        columns.push(format!("eta_{tag}"));
    }
    let points: Vec<(f64, f64)> = lambda_over_kappa
        .iter()
        .flat_map(|&x| lambda_over_gamma.iter().map(move |&y| (x, y)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(x, y)| {
            let c = resonant_from_rate_ratios(x, y)?;
            let mut row = vec![x, y, c.r0, c.t0, c.p];
            for &gate in gates.gates() {
                let (f, e) = closed_form(gate, &c.p);
                row.push(f);
                row.push(e);
            }
            Ok(row)
        })
        .collect::<Result<_, MetricsError>>()?;
    Ok(SweepTable { columns, rows })
}

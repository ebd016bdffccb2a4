//! Frequency-domain scattering of a single photon off the double single-sided
//! cavity system: two perpendicular single-sided cavities, each with its own
//! input/output port, sharing one two-level emitter.
//!
//! A photon entering port 1 leaves either through port 1 (amplitude `r`) or,
//! mediated by the emitter, through port 2 (amplitude `t`). The system is
//! reciprocal, so the same `t` describes transfer from port 2 to port 1.
//!
//! All rates and frequencies are angular frequencies in rad/s.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Field, Real};

/// Magnitude below which a coefficient denominator is treated as zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("degenerate denominator in {0}: the parameter point is unphysical")]
    DegenerateDenominator(&'static str),
    #[error("invalid system parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: &'static str },
}

/// Physical rates and frequencies of the two cavities and the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    pub omega1: T,
    pub omega2: T,
    pub omega_ge: T,
    /// Mirror decay rate of cavity 1.
    pub kappa1: T,
    /// Mirror decay rate of cavity 2.
    pub kappa2: T,
    /// Spontaneous emission rate of the emitter.
    pub gamma: T,
    /// Emitter coupling to cavity 1.
    pub lambda1: T,
    /// Emitter coupling to cavity 2.
    pub lambda2: T,
}

impl<T: Real> SystemParams<T> {
    /// Identical cavities and couplings, everything resonant at zero frequency.
    pub fn symmetric(kappa: T, gamma: T, lambda: T) -> Self {
        Self {
            omega1: T::zero(),
            omega2: T::zero(),
            omega_ge: T::zero(),
            kappa1: kappa,
            kappa2: kappa,
            gamma,
            lambda1: lambda,
            lambda2: lambda,
        }
    }

    pub fn validate(&self) -> Result<(), ScatterError> {
        let finite = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega_ge", self.omega_ge),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(ScatterError::InvalidParams {
                    name,
                    reason: "must be finite",
                });
            }
        }
        let rates = [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma", self.gamma),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ];
        for (name, v) in rates {
            if !v.is_finite() {
                return Err(ScatterError::InvalidParams {
                    name,
                    reason: "must be finite",
                });
            }
            if v < T::zero() {
                return Err(ScatterError::InvalidParams {
                    name,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    /// True when the resonant closed form applies: identical cavities and
    /// couplings (frequencies are checked separately against the probe).
    pub fn is_symmetric(&self) -> bool {
        self.kappa1 == self.kappa2 && self.lambda1 == self.lambda2
    }

    /// Largest rate in the system, ignoring detunings.
    pub fn max_rate(&self) -> T {
        [self.kappa1, self.kappa2, self.gamma, self.lambda1, self.lambda2]
            .into_iter()
            .fold(T::zero(), T::max)
    }
}

/// Probe detunings from each resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detunings<T> {
    pub delta1: T,
    pub delta2: T,
    pub delta_ge: T,
}

impl<T: Real> Detunings<T> {
    pub fn max_abs(&self) -> T {
        self.delta1.abs().max(self.delta2.abs()).max(self.delta_ge.abs())
    }
}

/// Reflection (same port) and transmission (other port) amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterCoeffs<T> {
    pub r: Complex<T>,
    pub t: Complex<T>,
}

/// Resonant coefficients for identical cavities and couplings.
///
/// `p = r0 + t0` is the single scalar that controls the realistic gate
/// networks: it is the amplitude a photon keeps on the coupled (transmission)
/// channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantCoeffs<T> {
    pub r0: T,
    pub t0: T,
    pub p: T,
}

pub fn detunings<T: Real>(params: &SystemParams<T>, omega: T) -> Detunings<T> {
    Detunings {
        delta1: omega - params.omega1,
        delta2: omega - params.omega2,
        delta_ge: omega - params.omega_ge,
    }
}

fn check_denominator<T: Real>(den: Complex<T>, what: &'static str) -> Result<(), ScatterError> {
    if den.norm() < T::lit(DEGENERATE_DENOMINATOR) || !den.norm().is_finite() {
        Err(ScatterError::DegenerateDenominator(what))
    } else {
        Ok(())
    }
}

/// Full reflection and transmission coefficients at probe frequency `omega`.
pub fn scatter_coefficients<T: Real>(params: &SystemParams<T>, omega: T) -> Result<ScatterCoeffs<T>, ScatterError> {
    params.validate()?;
    let d = detunings(params, omega);
    let half = T::lit(0.5);
    let i = Complex::<T>::i();

    // Complex "loss minus detuning" factors of each mode.
    let x1 = Complex::from(half * params.kappa1) - i * d.delta1;
    let x2 = Complex::from(half * params.kappa2) - i * d.delta2;
    let g = Complex::from(half * params.gamma) - i * d.delta_ge;
    let l1 = params.lambda1 * params.lambda1;
    let l2 = params.lambda2 * params.lambda2;

    let branch2 = x2 * g + l2;
    let den = (x1 * g + l1) * branch2 - l1 * l2;
    check_denominator(den, "scatter_coefficients")?;

    let reflected = Complex::from(-half * params.kappa1) - i * d.delta1;
    let r = ((reflected * g + l1) * branch2 - l1 * l2) / den;
    let coupling = params.lambda1 * params.lambda2 * (params.kappa1 * params.kappa2).sqrt();
    let t = g * coupling / den;
    Ok(ScatterCoeffs { r, t })
}

/// Reflection of a single-sided cavity with the emitter decoupled.
/// Unimodular for every detuning.
pub fn empty_cavity_reflection<T: Real>(kappa1: T, delta1: T) -> Result<Complex<T>, ScatterError> {
    if kappa1 < T::zero() || !kappa1.is_finite() {
        return Err(ScatterError::InvalidParams {
            name: "kappa1",
            reason: "must be finite and non-negative",
        });
    }
    let half = T::lit(0.5);
    let den = Complex::new(half * kappa1, -delta1);
    check_denominator(den, "empty_cavity_reflection")?;
    Ok(Complex::new(-half * kappa1, -delta1) / den)
}

/// Resonant coefficients `r0 = −κγ/(κγ+8λ²)`, `t0 = 8λ²/(κγ+8λ²)`.
///
/// Generic over [`Field`], so with `BigRational` inputs the result is exact.
pub fn resonant_coefficients<T: Field>(kappa: T, gamma: T, lambda: T) -> Result<ResonantCoeffs<T>, ScatterError> {
    if kappa < T::zero() {
        return Err(ScatterError::InvalidParams {
            name: "kappa",
            reason: "must be non-negative",
        });
    }
    if gamma < T::zero() {
        return Err(ScatterError::InvalidParams {
            name: "gamma",
            reason: "must be non-negative",
        });
    }
    if lambda < T::zero() {
        return Err(ScatterError::InvalidParams {
            name: "lambda",
            reason: "must be non-negative",
        });
    }
    let loss = kappa * gamma;
    let coupling = T::int(8) * lambda.clone() * lambda;
    let den = loss.clone() + coupling.clone();
    if den <= T::zero() {
        return Err(ScatterError::DegenerateDenominator("resonant_coefficients"));
    }
    let r0 = -loss / den.clone();
    let t0 = coupling / den;
    let p = r0.clone() + t0.clone();
    Ok(ResonantCoeffs { r0, t0, p })
}

/// Resonant coefficients as a function of the dimensionless coupling
/// `λ/√(κγ)` alone.
pub fn resonant_from_ratio<T: Field>(ratio: T) -> Result<ResonantCoeffs<T>, ScatterError> {
    resonant_coefficients(T::one(), T::one(), ratio)
}

/// Resonant coefficients for given `λ/κ` and `λ/γ` (with `λ = 1`).
pub fn resonant_from_rate_ratios<T: Field>(
    lambda_over_kappa: T,
    lambda_over_gamma: T,
) -> Result<ResonantCoeffs<T>, ScatterError> {
    if lambda_over_kappa <= T::zero() || lambda_over_gamma <= T::zero() {
        return Err(ScatterError::InvalidParams {
            name: "lambda ratio",
            reason: "must be positive",
        });
    }
    let kappa = T::one() / lambda_over_kappa;
    let gamma = T::one() / lambda_over_gamma;
    resonant_coefficients(kappa, gamma, T::one())
}

//! Time-domain cross-check of the scattering coefficients.
//!
//! A Gaussian single-photon wavepacket is sent into one port and the
//! single-excitation amplitudes of cavity 1 (`C`), cavity 2 (`D`) and the
//! emitter (`E`) are integrated with fixed-step RK4. The port continua are
//! eliminated, which leaves the damped, driven equations
//!
//! ```text
//! Ċ = (−iω₁ − κ₁/2)·C − √κ₁·A_in(t) − λ₁·E
//! Ḋ = (−iω₂ − κ₂/2)·D − √κ₂·B_in(t) − λ₂·E
//! Ė = (−iω_ge − γ/2)·E + λ₁·C + λ₂·D
//! ```
//!
//! with outputs `A_out = A_in + √κ₁·C` and `B_out = B_in + √κ₂·D`.
//!
//! All amplitudes are slowly varying envelopes in the frame rotating at the
//! pulse center frequency, so the step size is set by the rates and detunings
//! rather than by the optical frequencies themselves.

use std::io::{self, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::export::{csv_line, sig12};
use crate::scalar::Real;
use crate::scattering::{detunings, ScatterCoeffs, SystemParams};

/// Stability bound: `dt · max_rate` must not exceed this.
pub const MAX_STEP_RATE_PRODUCT: f64 = 0.01;
/// Default `dt · max_rate`.
pub const DEFAULT_STEP_RATE_PRODUCT: f64 = 0.001;
/// Pulse support, in units of `1/bandwidth_sigma`, on each side of arrival.
pub const PULSE_HALF_SUPPORT: f64 = 5.0;
/// Largest allowed `bandwidth_sigma / min(κ₁, κ₂)` for coefficient extraction.
pub const NARROWBAND_RATIO: f64 = 1.0 / 50.0;
/// Default `bandwidth_sigma / min(κ₁, κ₂)`.
pub const DEFAULT_BANDWIDTH_RATIO: f64 = 1.0 / 200.0;
/// Residual system amplitude allowed at the end of the window, relative to peak.
pub const WINDOW_TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("step {dt:e} exceeds the stability bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("integration window too short: {0}")]
    WindowTooShort(String),
    #[error("pulse bandwidth {sigma:e} is too broad for extraction (limit {limit:e})")]
    TooBroadband { sigma: f64, limit: f64 },
    #[error("invalid pulse: {0}")]
    InvalidPulse(&'static str),
    #[error("invalid system parameters: {0}")]
    Params(#[from] crate::scattering::ScatterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Port {
    Port1,
    Port2,
}

/// Gaussian single-photon input wavepacket.
///
/// `bandwidth_sigma` is the standard deviation of the spectral intensity
/// `|A_in(ω)|²`; the temporal intensity then has standard deviation
/// `1/(2·bandwidth_sigma)`. At `scale = 1` the packet carries unit energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse<T> {
    pub center_frequency: T,
    pub bandwidth_sigma: T,
    pub arrival_time: T,
    pub port: Port,
    pub scale: T,
}

impl<T: Real> Pulse<T> {
    pub fn new(center_frequency: T, bandwidth_sigma: T, arrival_time: T, port: Port) -> Self {
        Self {
            center_frequency,
            bandwidth_sigma,
            arrival_time,
            port,
            scale: T::one(),
        }
    }

    /// Narrowband pulse with the default bandwidth for these parameters.
    pub fn narrowband(params: &SystemParams<T>, center_frequency: T, port: Port) -> Self {
        let sigma = params.kappa1.min(params.kappa2) * T::lit(DEFAULT_BANDWIDTH_RATIO);
        let arrival = T::lit(PULSE_HALF_SUPPORT * 2.0) / sigma;
        Self::new(center_frequency, sigma, arrival, port)
    }

    pub fn scaled(self, scale: T) -> Self {
        Self { scale, ..self }
    }

    /// Real envelope in the frame rotating at `center_frequency`.
    pub fn envelope(&self, t: T) -> T {
        let s = self.bandwidth_sigma;
        let norm = (T::lit(2.0) * s * s / T::PI()).sqrt().sqrt();
        let x = t - self.arrival_time;
        self.scale * norm * (-(s * s * x * x)).exp()
    }

    /// Symmetric window covering the pulse support with a margin on both
    /// sides, in total twenty temporal pulse widths.
    pub fn default_window(&self) -> (T, T) {
        let half = T::lit(PULSE_HALF_SUPPORT) / self.bandwidth_sigma * T::lit(1.001);
        (self.arrival_time - half, self.arrival_time + half)
    }

    fn validate(&self) -> Result<(), OracleError> {
        if !(self.bandwidth_sigma > T::zero()) || !self.bandwidth_sigma.is_finite() {
            return Err(OracleError::InvalidPulse("bandwidth_sigma must be positive and finite"));
        }
        if !self.arrival_time.is_finite() || !self.center_frequency.is_finite() || !self.scale.is_finite() {
            return Err(OracleError::InvalidPulse("pulse fields must be finite"));
        }
        Ok(())
    }
}

/// Largest rate or detuning the integrator has to resolve.
pub fn max_rate<T: Real>(params: &SystemParams<T>, pulse: &Pulse<T>) -> T {
    params
        .max_rate()
        .max(detunings(params, pulse.center_frequency).max_abs())
}

/// Default step: `0.001 / max_rate`.
pub fn default_step<T: Real>(params: &SystemParams<T>, pulse: &Pulse<T>) -> T {
    let rate = max_rate(params, pulse);
    if rate > T::zero() {
        T::lit(DEFAULT_STEP_RATE_PRODUCT) / rate
    } else {
        T::lit(1e-3) / pulse.bandwidth_sigma
    }
}

/// Sampled amplitudes of one scattering event.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory<T> {
    pub params: SystemParams<T>,
    /// Frame rotation frequency (the pulse center).
    pub frame_frequency: T,
    pub time: Vec<T>,
    pub a_in: Vec<Complex<T>>,
    pub b_in: Vec<Complex<T>>,
    pub c: Vec<Complex<T>>,
    pub d: Vec<Complex<T>>,
    pub e: Vec<Complex<T>>,
    pub a_out: Vec<Complex<T>>,
    pub b_out: Vec<Complex<T>>,
}

impl<T: Real> AmplitudeTrajectory<T> {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// CSV with columns `t, re_C, im_C, re_D, im_D, re_E, im_E, re_Aout,
    /// im_Aout, re_Bout, im_Bout`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(
            csv_line([
                "t", "re_C", "im_C", "re_D", "im_D", "re_E", "im_E", "re_Aout", "im_Aout", "re_Bout", "im_Bout",
            ])
            .as_bytes(),
        )?;
        for k in 0..self.len() {
            let mut fields = vec![sig12(self.time[k].to_f64_lossy())];
            for z in [self.c[k], self.d[k], self.e[k], self.a_out[k], self.b_out[k]] {
                fields.push(sig12(z.re.to_f64_lossy()));
                fields.push(sig12(z.im.to_f64_lossy()));
            }
            out.write_all(csv_line(fields).as_bytes())?;
        }
        Ok(())
    }
}

type Modes<T> = [Complex<T>; 3];

struct Dynamics<T> {
    gen1: Complex<T>,
    gen2: Complex<T>,
    gen_e: Complex<T>,
    sk1: T,
    sk2: T,
    l1: T,
    l2: T,
}

impl<T: Real> Dynamics<T> {
    fn new(params: &SystemParams<T>, frame: T) -> Self {
        let d = detunings(params, frame);
        let half = T::lit(0.5);
        Self {
            gen1: Complex::new(-half * params.kappa1, d.delta1),
            gen2: Complex::new(-half * params.kappa2, d.delta2),
            gen_e: Complex::new(-half * params.gamma, d.delta_ge),
            sk1: params.kappa1.sqrt(),
            sk2: params.kappa2.sqrt(),
            l1: params.lambda1,
            l2: params.lambda2,
        }
    }

    fn rhs(&self, y: &Modes<T>, a_in: T, b_in: T) -> Modes<T> {
        let [c, d, e] = *y;
        [
            self.gen1 * c - self.sk1 * a_in - e * self.l1,
            self.gen2 * d - self.sk2 * b_in - e * self.l2,
            self.gen_e * e + c * self.l1 + d * self.l2,
        ]
    }
}

fn axpy<T: Real>(y: &Modes<T>, h: T, k: &Modes<T>) -> Modes<T> {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}

/// Integrates one scattering event from zero initial amplitudes.
///
/// The step is shrunk so that the window is covered by an integer number of
/// steps. Samples are recorded at a spacing that still resolves every rate
/// and the pulse envelope, which keeps long narrowband runs small in memory.
pub fn integrate_amplitudes<T: Real>(
    params: &SystemParams<T>,
    pulse: &Pulse<T>,
    t_start: T,
    t_end: T,
    dt: T,
) -> Result<AmplitudeTrajectory<T>, OracleError> {
    params.validate()?;
    pulse.validate()?;
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(OracleError::InvalidPulse("dt must be positive and finite"));
    }
    if !(t_end > t_start) {
        return Err(OracleError::WindowTooShort("t_end must exceed t_start".into()));
    }
    let rate = max_rate(params, pulse);
    let bound = T::lit(MAX_STEP_RATE_PRODUCT) / rate;
    if rate > T::zero() && dt > bound {
        return Err(OracleError::StepTooLarge {
            dt: dt.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    let lead = T::lit(PULSE_HALF_SUPPORT) / pulse.bandwidth_sigma;
    if !(t_start < pulse.arrival_time - lead) {
        return Err(OracleError::WindowTooShort(format!(
            "t_start must precede arrival by more than {:e}",
            lead.to_f64_lossy()
        )));
    }

    // Record spacing: resolve the fastest rate and the temporal envelope.
    let envelope_width = T::lit(0.5) / pulse.bandwidth_sigma;
    let mut spacing = envelope_width / T::lit(50.0);
    if rate > T::zero() {
        spacing = spacing.min(T::lit(0.02) / rate);
    }
    let stride = (spacing / dt).floor().to_usize().unwrap_or(1).max(1);
    let span = t_end - t_start;
    let records = (span / (dt * T::lit(stride as f64)))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let steps = records * stride;
    let h = span / T::lit(steps as f64);

    let dynamics = Dynamics::new(params, pulse.center_frequency);
    let drive = |t: T| -> (T, T) {
        let a = pulse.envelope(t);
        match pulse.port {
            Port::Port1 => (a, T::zero()),
            Port::Port2 => (T::zero(), a),
        }
    };

    let capacity = records + 1;
    let mut traj = AmplitudeTrajectory {
        params: *params,
        frame_frequency: pulse.center_frequency,
        time: Vec::with_capacity(capacity),
        a_in: Vec::with_capacity(capacity),
        b_in: Vec::with_capacity(capacity),
        c: Vec::with_capacity(capacity),
        d: Vec::with_capacity(capacity),
        e: Vec::with_capacity(capacity),
        a_out: Vec::with_capacity(capacity),
        b_out: Vec::with_capacity(capacity),
    };
    let (sk1, sk2) = (dynamics.sk1, dynamics.sk2);
    let record = |traj: &mut AmplitudeTrajectory<T>, t: T, y: &Modes<T>, (a, b): (T, T)| {
        let a = Complex::from(a);
        let b = Complex::from(b);
        traj.time.push(t);
        traj.a_in.push(a);
        traj.b_in.push(b);
        traj.c.push(y[0]);
        traj.d.push(y[1]);
        traj.e.push(y[2]);
        traj.a_out.push(a + y[0] * sk1);
        traj.b_out.push(b + y[1] * sk2);
    };

    let zero = Complex::new(T::zero(), T::zero());
    let mut y: Modes<T> = [zero; 3];
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    record(&mut traj, t_start, &y, drive(t_start));
    for n in 0..steps {
        let t = t_start + h * T::lit(n as f64);
        let (a0, b0) = drive(t);
        let (am, bm) = drive(t + half * h);
        let (a1, b1) = drive(t + h);
        let k1 = dynamics.rhs(&y, a0, b0);
        let k2 = dynamics.rhs(&axpy(&y, half * h, &k1), am, bm);
        let k3 = dynamics.rhs(&axpy(&y, half * h, &k2), am, bm);
        let k4 = dynamics.rhs(&axpy(&y, h, &k3), a1, b1);
        for j in 0..3 {
            y[j] += (k1[j] + (k2[j] + k3[j]) * T::lit(2.0) + k4[j]) * (h * sixth);
        }
        if (n + 1) % stride == 0 {
            let t1 = if n + 1 == steps {
                t_end
            } else {
                t_start + h * T::lit((n + 1) as f64)
            };
            record(&mut traj, t1, &y, (a1, b1));
        }
    }

    let excitation = |k: usize| traj.c[k].norm() + traj.d[k].norm() + traj.e[k].norm();
    let peak = (0..traj.len()).map(excitation).fold(T::zero(), T::max);
    let tail = excitation(traj.len() - 1);
    if tail > T::lit(WINDOW_TAIL_TOLERANCE) * peak {
        return Err(OracleError::WindowTooShort(format!(
            "residual excitation {:e} at t_end exceeds {:e} of peak {:e}",
            tail.to_f64_lossy(),
            WINDOW_TAIL_TOLERANCE,
            peak.to_f64_lossy()
        )));
    }
    Ok(traj)
}

/// Trapezoid rule over the trajectory's (possibly non-uniform) time grid.
fn integrate<T: Real>(time: &[T], f: impl Fn(usize) -> T) -> T {
    let mut acc = T::zero();
    for k in 1..time.len() {
        acc += (time[k] - time[k - 1]) * (f(k) + f(k - 1)) * T::lit(0.5);
    }
    acc
}

/// Probability-flux residual
/// `|∫|A_in|² + ∫|B_in|² − ∫|A_out|² − ∫|B_out|² − γ∫|E|²|`.
pub fn energy_balance<T: Real>(traj: &AmplitudeTrajectory<T>) -> T {
    let t = &traj.time;
    let input = integrate(t, |k| traj.a_in[k].norm_sqr() + traj.b_in[k].norm_sqr());
    let output = integrate(t, |k| traj.a_out[k].norm_sqr() + traj.b_out[k].norm_sqr());
    let lost = traj.params.gamma * integrate(t, |k| traj.e[k].norm_sqr());
    (input - output - lost).abs()
}

/// Projects the outputs onto the freely propagated input packet.
///
/// `r` is the amplitude returned through the input port, `t` the amplitude
/// delivered to the other port, both attributed to the pulse center.
pub fn extract_scatter_coefficients<T: Real>(
    traj: &AmplitudeTrajectory<T>,
    pulse: &Pulse<T>,
) -> Result<ScatterCoeffs<T>, OracleError> {
    pulse.validate()?;
    let limit = traj.params.kappa1.min(traj.params.kappa2) * T::lit(NARROWBAND_RATIO);
    if pulse.bandwidth_sigma > limit {
        return Err(OracleError::TooBroadband {
            sigma: pulse.bandwidth_sigma.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let (reference, same, other) = match pulse.port {
        Port::Port1 => (&traj.a_in, &traj.a_out, &traj.b_out),
        Port::Port2 => (&traj.b_in, &traj.b_out, &traj.a_out),
    };
    let t = &traj.time;
    let energy = integrate(t, |k| reference[k].norm_sqr());
    if !(energy > T::zero()) {
        return Err(OracleError::InvalidPulse("reference pulse carries no energy"));
    }
    let project = |out: &[Complex<T>]| {
        let re = integrate(t, |k| (out[k] * reference[k].conj()).re);
        let im = integrate(t, |k| (out[k] * reference[k].conj()).im);
        Complex::new(re, im) / energy
    };
    Ok(ScatterCoeffs {
        r: project(same),
        t: project(other),
    })
}

/// Runs the default narrowband experiment: default bandwidth, window and
/// step unless `dt` is given.
pub fn run_default<T: Real>(
    params: &SystemParams<T>,
    center_frequency: T,
    port: Port,
    dt: Option<T>,
) -> Result<(AmplitudeTrajectory<T>, Pulse<T>), OracleError> {
    let pulse = Pulse::narrowband(params, center_frequency, port);
    let (t0, t1) = pulse.default_window();
    let dt = dt.unwrap_or_else(|| default_step(params, &pulse));
    let traj = integrate_amplitudes(params, &pulse, t0, t1, dt)?;
    Ok((traj, pulse))
}

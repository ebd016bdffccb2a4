use std::path::PathBuf;

use cavsim::presets::{angular_from_mhz, rate_from_lifetime_us};
use cavsim::scattering::ScatterError;
use cavsim::{Params, Preset};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cavsim",
    version,
    about = "Double single-sided cavity + NV center: scattering, gates, sweeps"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency-domain reflection and transmission coefficients.
    Coeffs(CoeffsArgs),
    /// Cross-check the coefficients against a time-domain integration.
    OracleVerify(OracleArgs),
    /// Run the c-phase or cc-phase gate network.
    Gate(GateArgs),
    /// Parameter sweeps of the resonant coefficients and gate averages.
    Sweep(SweepArgs),
}

/// Physical parameters. Without `--preset` they start from `weak2`. Rates
/// and frequencies are angular, in rad/s.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Decay rate of both cavities.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "kappa_inv_us")]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa2: Option<f64>,
    /// Cavity lifetime 1/κ in microseconds (both cavities).
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_inv_us: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "gamma_inv_us")]
    pub gamma: Option<f64>,
    /// Emitter lifetime 1/γ in microseconds.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_inv_us: Option<f64>,
    /// Coupling to both cavities.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lambda_mhz")]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Coupling λ/2π in MHz (both cavities).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_mhz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_ge: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

impl ParamArgs {
    pub fn any_physical(&self) -> bool {
        self.preset.is_some()
            || [
                self.kappa,
                self.kappa1,
                self.kappa2,
                self.kappa_inv_us,
                self.gamma,
                self.gamma_inv_us,
                self.lambda,
                self.lambda1,
                self.lambda2,
                self.lambda_mhz,
                self.omega1,
                self.omega2,
                self.omega_ge,
            ]
            .iter()
            .any(Option::is_some)
    }

    pub fn resolve(&self) -> Result<Params, CliError> {
        let mut p: Params = self.preset.unwrap_or(Preset::Weak2).params();
        let kappa = self.kappa.or(self.kappa_inv_us.map(rate_from_lifetime_us));
        if let Some(k) = kappa {
            p.kappa1 = k;
            p.kappa2 = k;
        }
        if let Some(k) = self.kappa1 {
            p.kappa1 = k;
        }
        if let Some(k) = self.kappa2 {
            p.kappa2 = k;
        }
        if let Some(g) = self.gamma.or(self.gamma_inv_us.map(rate_from_lifetime_us)) {
            p.gamma = g;
        }
        if let Some(l) = self.lambda.or(self.lambda_mhz.map(angular_from_mhz)) {
            p.lambda1 = l;
            p.lambda2 = l;
        }
        if let Some(l) = self.lambda1 {
            p.lambda1 = l;
        }
        if let Some(l) = self.lambda2 {
            p.lambda2 = l;
        }
        if let Some(w) = self.omega1 {
            p.omega1 = w;
        }
        if let Some(w) = self.omega2 {
            p.omega2 = w;
        }
        if let Some(w) = self.omega_ge {
            p.omega_ge = w;
        }
        p.validate().map_err(|e| param_error(self, e))?;
        Ok(p)
    }
}

/// Names the flag responsible for a rejected parameter.
fn param_error(args: &ParamArgs, err: ScatterError) -> CliError {
    let ScatterError::InvalidParams { name, reason } = err else {
        return CliError::Usage(err.to_string());
    };
    let flag = match name {
        "kappa1" if args.kappa1.is_none() && args.kappa_inv_us.is_some() => "--kappa-inv-us".to_string(),
        "kappa1" | "kappa2" if args.kappa1.is_none() && args.kappa2.is_none() && args.kappa.is_some() => {
            "--kappa".to_string()
        }
        "gamma" if args.gamma_inv_us.is_some() => "--gamma-inv-us".to_string(),
        "lambda1" | "lambda2" if args.lambda_mhz.is_some() => "--lambda-mhz".to_string(),
        "lambda1" | "lambda2" if args.lambda1.is_none() && args.lambda2.is_none() && args.lambda.is_some() => {
            "--lambda".to_string()
        }
        other => format!("--{}", other.replace('_', "-")),
    };
    CliError::Usage(format!("invalid value for {flag}: {reason}"))
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Report r0, t0 and p at resonance (identical cavities and couplings).
    #[arg(long)]
    pub resonant: bool,
    /// First probe frequency.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega_min: f64,
    /// Last probe frequency; defaults to `--omega-min`.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Pulse center frequency.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega: f64,
    /// Input port.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub port: u8,
    /// Integration step in seconds; defaults to 0.001 over the fastest rate.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Spectral standard deviation of the pulse; defaults to min(κ)/200.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_coeff: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_energy: f64,
    /// Refuse runs that would need more integration steps than this.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_steps: u64,
    /// Also write the sampled mode amplitudes as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateKind {
    Cphase,
    Ccphase,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[arg(value_enum)]
    pub gate: GateKind,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Coupled-channel amplitude p = r0 + t0; overrides the physical parameters.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "preset")]
    pub p: Option<f64>,
    /// Input angles: a_j = cos θ_j, b_j = sin θ_j.
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta3: Option<f64>,
    /// Explicit amplitudes as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b3: Option<String>,
    /// Photon input state as written in the `input_state` field of JSON output.
    #[arg(long)]
    pub input_state: Option<PathBuf>,
    /// Also compute the gate matrix.
    #[arg(long)]
    pub truth_table: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateChoice {
    Cphase,
    Ccphase,
    Both,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// 5: resonant coefficients against λ/√(κγ); 6: gate averages over λ/κ × λ/γ.
    #[arg(long, value_parser = clap::value_parser!(u8).range(5..=6))]
    pub fig: u8,
    /// Lower end of the grid (default 0 for fig 5, 0.05 for fig 6).
    #[arg(long)]
    pub min: Option<f64>,
    /// Upper end of the grid.
    #[arg(long, default_value_t = 5.0)]
    pub max: f64,
    /// Grid points (per axis for fig 6; default 200 for fig 5, 100 for fig 6).
    #[arg(long)]
    pub points: Option<usize>,
    /// Separate λ/γ axis for fig 6; defaults to the λ/κ axis.
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub gamma_points: Option<usize>,
    #[arg(long, value_enum, default_value_t = GateChoice::Both)]
    pub gate: GateChoice,
}

//! Named parameter sets and unit helpers.

use std::fmt;
use std::str::FromStr;

use crate::scalar::Real;
use crate::scattering::SystemParams;

/// Rate `1/τ` in s⁻¹ for a lifetime given in microseconds.
pub fn rate_from_lifetime_us<T: Real>(tau_us: T) -> T {
    T::one() / (tau_us * T::lit(1e-6))
}

/// Angular frequency `2π·f` in rad/s for `f` given in MHz.
pub fn angular_from_mhz<T: Real>(f_mhz: T) -> T {
    T::TAU() * f_mhz * T::lit(1e6)
}

/// Loss rate used by the weak-coupling presets, in s⁻¹.
const WEAK_RATE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Cavities without an emitter (`λ = 0`).
    Empty,
    /// `κ = γ`, `λ/κ = λ/γ = 2`.
    Weak2,
    Weak3,
    Weak4,
    /// `κ⁻¹ = 20 µs`, `γ⁻¹ = 600 µs`, `λ/2π = 28 MHz`.
    Strong,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Empty,
        Preset::Weak2,
        Preset::Weak3,
        Preset::Weak4,
        Preset::Strong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Empty => "empty",
            Preset::Weak2 => "weak2",
            Preset::Weak3 => "weak3",
            Preset::Weak4 => "weak4",
            Preset::Strong => "strong",
        }
    }

    pub fn params<T: Real>(self) -> SystemParams<T> {
        let weak = |n: f64| SystemParams::symmetric(T::lit(WEAK_RATE), T::lit(WEAK_RATE), T::lit(n * WEAK_RATE));
        match self {
            Preset::Empty => weak(0.0),
            Preset::Weak2 => weak(2.0),
            Preset::Weak3 => weak(3.0),
            Preset::Weak4 => weak(4.0),
            Preset::Strong => SystemParams::symmetric(
                rate_from_lifetime_us(T::lit(20.0)),
                rate_from_lifetime_us(T::lit(600.0)),
                angular_from_mhz(T::lit(28.0)),
            ),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected one of empty, weak2, weak3, weak4, strong)"))
    }
}

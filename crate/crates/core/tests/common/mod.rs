#![allow(dead_code)]

use cavsim::state::{Label, Pol, Registers, Spin};
use cavsim::{Complex, State};
use rand::Rng;

/// Random normalized `(a, b)` with complex entries.
pub fn random_photon<R: Rng>(rng: &mut R) -> (Complex, Complex) {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
    let (pa, pb): (f64, f64) = (
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    (
        Complex::from_polar(theta.cos(), pa),
        Complex::from_polar(theta.sin(), pb),
    )
}

/// Label from strings like `"RL"` and `"+-"`; photons off-network.
pub fn label(pols: &str, nvs: &str) -> Label {
    Label::new(
        pols.chars().map(|c| if c == 'R' { Pol::R } else { Pol::L }),
        nvs.chars().map(|c| if c == '+' { Spin::Plus } else { Spin::Minus }),
    )
}

pub fn state(photons: usize, nvs: usize, terms: Vec<(&str, &str, Complex)>) -> State {
    State::from_terms(
        Registers::canonical(photons, nvs),
        terms.into_iter().map(|(p, n, z)| (label(p, n), z)),
    )
    .unwrap()
}

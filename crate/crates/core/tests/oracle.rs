use cavsim::oracle::{
    energy_balance, extract_scatter_coefficients, integrate_amplitudes, max_rate, run_default, Port, Pulse,
};
use cavsim::scattering::{empty_cavity_reflection, scatter_coefficients, SystemParams};
use cavsim::{Params, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Loose enough to keep the suite fast, well inside the stability bound.
const STEP_RATE: f64 = 0.01;

fn random_params(rng: &mut ChaCha8Rng) -> Params {
    let kappa = 1.0f64;
    let kappa2 = kappa * rng.gen_range(0.5..2.0);
    let gamma = kappa * rng.gen_range(0.5..2.0);
    let scale = (kappa * gamma).sqrt();
    SystemParams {
        omega1: rng.gen_range(-2.0..2.0) * kappa,
        omega2: rng.gen_range(-2.0..2.0) * kappa,
        omega_ge: rng.gen_range(-2.0..2.0) * kappa,
        kappa1: kappa,
        kappa2,
        gamma,
        lambda1: rng.gen_range(0.0..5.0) * scale,
        lambda2: rng.gen_range(0.0..5.0) * scale,
    }
}

fn check(params: &Params, omega: f64, port: Port) -> (f64, f64, f64) {
    let pulse = Pulse::narrowband(params, omega, port);
    let (t0, t1) = pulse.default_window();
    let dt = STEP_RATE / max_rate(params, &pulse);
    let traj = integrate_amplitudes(params, &pulse, t0, t1, dt).unwrap();
    let measured = extract_scatter_coefficients(&traj, &pulse).unwrap();
    let exact = scatter_coefficients(params, omega).unwrap();
    (
        (measured.r - exact.r).norm(),
        (measured.t - exact.t).norm(),
        energy_balance(&traj),
    )
}

#[test]
fn random_parameter_sets_match_frequency_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let params = random_params(&mut rng);
        let omega = rng.gen_range(-2.0..2.0);
        let (dr, dt, e) = check(&params, omega, Port::Port1);
        worst = (worst.0.max(dr), worst.1.max(dt), worst.2.max(e));
        assert!(
            dr < 1e-3 && dt < 1e-3,
            "{params:?} at {omega}: |Δr| = {dr:e}, |Δt| = {dt:e}"
        );
        assert!(e < 1e-6, "{params:?}: energy residual {e:e}");
    }
    eprintln!("worst |Δr| {:e}, |Δt| {:e}, energy {:e}", worst.0, worst.1, worst.2);
}

#[test]
fn port_two_sees_the_same_transmission() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = random_params(&mut rng);
    let pulse = Pulse::narrowband(&params, 0.3, Port::Port2);
    let (t0, t1) = pulse.default_window();
    let traj = integrate_amplitudes(&params, &pulse, t0, t1, STEP_RATE / max_rate(&params, &pulse)).unwrap();
    let measured = extract_scatter_coefficients(&traj, &pulse).unwrap();
    let exact = scatter_coefficients(&params, 0.3).unwrap();
    assert!((measured.t - exact.t).norm() < 1e-3);
}

#[test]
fn empty_cavity_reflects_everything() {
    let params: Params = Preset::Empty.params();
    let (traj, pulse) = run_default(&params, 0.0, Port::Port1, None).unwrap();
    let c = extract_scatter_coefficients(&traj, &pulse).unwrap();
    assert!((c.r.re + 1.0).abs() < 1e-3 && c.r.im.abs() < 1e-3, "{}", c.r);
    assert!(c.t.norm() < 1e-12);
    let detuned = 0.4 * params.kappa1;
    let (traj, pulse) = run_default(&params, detuned, Port::Port1, None).unwrap();
    let c = extract_scatter_coefficients(&traj, &pulse).unwrap();
    let exact = empty_cavity_reflection(params.kappa1, detuned).unwrap();
    assert!((c.r - exact).norm() < 1e-3);
}

#[test]
fn weak2_preset_on_resonance() {
    let params: Params = Preset::Weak2.params();
    let (traj, pulse) = run_default(&params, 0.0, Port::Port1, None).unwrap();
    let c = extract_scatter_coefficients(&traj, &pulse).unwrap();
    assert!((c.r.re + 1.0 / 33.0).abs() < 1e-3 && (c.t.re - 32.0 / 33.0).abs() < 1e-3);
    assert!(energy_balance(&traj) < 1e-6);
}

#[test]
fn single_precision_trajectory_is_close() {
    let params = SystemParams::<f32>::symmetric(1.0, 1.0, 2.0);
    let (traj, pulse) = run_default(&params, 0.0, Port::Port1, Some(0.002)).unwrap();
    let c = extract_scatter_coefficients(&traj, &pulse).unwrap();
    assert!((c.r.re + 1.0 / 33.0).abs() < 1e-2, "{}", c.r);
}

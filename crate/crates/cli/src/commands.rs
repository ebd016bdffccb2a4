use std::fs;
use std::path::Path;

use cavsim::export::{csv_line, sig12};
use cavsim::metrics::{linspace, sweep_fidelity, sweep_resonant, GateSelection};
use cavsim::network::Outcome;
use cavsim::oracle::{
    default_step, energy_balance, extract_scatter_coefficients, integrate_amplitudes, max_rate, OracleError, Port,
    MAX_STEP_RATE_PRODUCT, PULSE_HALF_SUPPORT,
};
use cavsim::protocol::{self, ProtocolError};
use cavsim::scattering::{resonant_coefficients, scatter_coefficients};
use cavsim::{Complex, Gate, Params, Pulse, State};
use serde_json::{json, Value};

use crate::args::{CoeffsArgs, Format, GateArgs, GateChoice, GateKind, OracleArgs, SweepArgs};
use crate::{CliError, Output};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn ok(text: String) -> Result<Output, CliError> {
    Ok(Output { text, passed: true })
}

fn complex_json(z: Complex) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Resonant `(κ, γ, λ)` of a parameter set, refused unless the closed form applies.
fn resonant_rates(params: &Params, flag: &str) -> Result<(f64, f64, f64), CliError> {
    if !params.is_symmetric() {
        return Err(usage(format!(
            "{flag} needs identical cavities and couplings (kappa1 = kappa2, lambda1 = lambda2)"
        )));
    }
    if params.omega1 != params.omega2 || params.omega1 != params.omega_ge {
        return Err(usage(format!("{flag} needs omega1 = omega2 = omega-ge")));
    }
    Ok((params.kappa1, params.gamma, params.lambda1))
}

pub fn coeffs(args: &CoeffsArgs, format: Format) -> Result<Output, CliError> {
    let params = args.params.resolve()?;
    if args.resonant {
        let (kappa, gamma, lambda) = resonant_rates(&params, "--resonant")?;
        let c = resonant_coefficients(kappa, gamma, lambda).map_err(|e| usage(e.to_string()))?;
        return ok(match format {
            Format::Csv => csv_line(["r0", "t0", "p"]) + &csv_line([c.r0, c.t0, c.p].map(sig12)),
            Format::Json => pretty(&json!({ "r0": c.r0, "t0": c.t0, "p": c.p })),
        });
    }
    if args.points == 0 {
        return Err(usage("--points must be at least 1"));
    }
    let hi = args.omega_max.unwrap_or(args.omega_min);
    if !args.omega_min.is_finite() || !hi.is_finite() || hi < args.omega_min {
        return Err(usage(
            "--omega-min/--omega-max must be finite with omega-min <= omega-max",
        ));
    }
    let columns = ["omega", "re_r", "im_r", "re_t", "im_t"];
    let mut rows = Vec::with_capacity(args.points);
    for omega in linspace(args.omega_min, hi, args.points) {
        let c = scatter_coefficients(&params, omega).map_err(|e| usage(e.to_string()))?;
        rows.push([omega, c.r.re, c.r.im, c.t.re, c.t.im]);
    }
    ok(match format {
        Format::Csv => {
            let mut s = csv_line(columns);
            for row in &rows {
                s.push_str(&csv_line(row.map(sig12)));
            }
            s
        }
        Format::Json => pretty(&json!({ "columns": columns, "rows": rows })),
    })
}

pub fn oracle_verify(args: &OracleArgs, format: Format) -> Result<Output, CliError> {
    let params = args.params.resolve()?;
    let port = if args.port == 1 { Port::Port1 } else { Port::Port2 };
    let pulse = match args.sigma {
        Some(sigma) => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(usage("--sigma must be positive"));
            }
            Pulse::new(args.omega, sigma, 2.0 * PULSE_HALF_SUPPORT / sigma, port)
        }
        None => Pulse::narrowband(&params, args.omega, port),
    };
    if params.kappa1.min(params.kappa2) <= 0.0 {
        return Err(usage("oracle-verify needs positive --kappa1 and --kappa2"));
    }
    let (t0, t1) = pulse.default_window();
    let dt = args.dt.unwrap_or_else(|| default_step(&params, &pulse));
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(usage("--dt must be positive"));
    }
    let steps = ((t1 - t0) / dt).ceil();
    if steps > args.max_steps as f64 {
        return Err(usage(format!(
            "integration would take {steps:.3e} steps, above --max-steps {}; lower the rates or raise --max-steps",
            args.max_steps
        )));
    }
    let traj = integrate_amplitudes(&params, &pulse, t0, t1, dt).map_err(|e| match e {
        OracleError::StepTooLarge { .. } => CliError::Verification(format!("StepTooLarge: {e}")),
        other => usage(other.to_string()),
    })?;
    let measured = extract_scatter_coefficients(&traj, &pulse).map_err(|e| usage(e.to_string()))?;
    let expected = scatter_coefficients(&params, args.omega).map_err(|e| usage(e.to_string()))?;
    let (expected_same, expected_other) = match port {
        // The cavities are interchangeable, so port 2 sees the mirrored formulas.
        Port::Port1 => (expected.r, expected.t),
        Port::Port2 => {
            let mirrored = Params {
                kappa1: params.kappa2,
                kappa2: params.kappa1,
                lambda1: params.lambda2,
                lambda2: params.lambda1,
                omega1: params.omega2,
                omega2: params.omega1,
                ..params
            };
            let c = scatter_coefficients(&mirrored, args.omega).map_err(|e| usage(e.to_string()))?;
            (c.r, c.t)
        }
    };
    let diff_r = (measured.r - expected_same).norm();
    let diff_t = (measured.t - expected_other).norm();
    let residual = energy_balance(&traj);
    let passed = diff_r <= args.tol_coeff && diff_t <= args.tol_coeff && residual <= args.tol_energy;
    let verdict = if passed { "PASS" } else { "FAIL" };
    eprintln!(
        "{verdict}: |dr| = {diff_r:.3e}, |dt| = {diff_t:.3e} (tol {:.1e}), energy residual = {residual:.3e} (tol {:.1e})",
        args.tol_coeff, args.tol_energy
    );

    if let Some(path) = &args.trajectory {
        let file = fs::File::create(path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let text = match format {
        Format::Csv => {
            let mut s = csv_line(["quantity", "re", "im"]);
            for (name, z) in [
                ("r_frequency", expected_same),
                ("r_time", measured.r),
                ("t_frequency", expected_other),
                ("t_time", measured.t),
            ] {
                s.push_str(&csv_line([name.to_string(), sig12(z.re), sig12(z.im)]));
            }
            for (name, x) in [
                ("abs_diff_r", diff_r),
                ("abs_diff_t", diff_t),
                ("energy_residual", residual),
            ] {
                s.push_str(&csv_line([name.to_string(), sig12(x), sig12(0.0)]));
            }
            s
        }
        Format::Json => pretty(&json!({
            "omega": args.omega,
            "port": args.port,
            "dt": dt,
            "sigma": pulse.bandwidth_sigma,
            "step_bound": MAX_STEP_RATE_PRODUCT / max_rate(&params, &pulse),
            "frequency": { "r": complex_json(expected_same), "t": complex_json(expected_other) },
            "time": { "r": complex_json(measured.r), "t": complex_json(measured.t) },
            "abs_diff": { "r": diff_r, "t": diff_t },
            "energy_residual": residual,
            "tolerance": { "coeff": args.tol_coeff, "energy": args.tol_energy },
            "pass": passed,
        })),
    };
    Ok(Output { text, passed })
}

fn parse_complex(flag: &str, raw: &str) -> Result<Complex, CliError> {
    let bad = || usage(format!("{flag} expects `re` or `re,im`, got `{raw}`"));
    let mut parts = raw.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex::new(re, im))
}

/// Per-photon amplitudes from `--thetaN` or `--aN/--bN`, defaulting to an
/// equal superposition.
fn photon_amplitudes(args: &GateArgs, n: usize) -> Result<Vec<(Complex, Complex)>, CliError> {
    let slots = [
        (args.theta1, &args.a1, &args.b1),
        (args.theta2, &args.a2, &args.b2),
        (args.theta3, &args.a3, &args.b3),
    ];
    let mut out = Vec::with_capacity(n);
    for (k, (theta, a, b)) in slots.into_iter().enumerate() {
        let j = k + 1;
        let given = theta.is_some() || a.is_some() || b.is_some();
        if k >= n {
            if given {
                return Err(usage(format!(
                    "--theta{j}/--a{j}/--b{j}: this gate has only {n} photons"
                )));
            }
            continue;
        }
        let amps = match (theta, a, b) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(usage(format!("--theta{j} cannot be combined with --a{j}/--b{j}")));
            }
            (Some(t), None, None) => {
                if !t.is_finite() {
                    return Err(usage(format!("--theta{j} must be finite")));
                }
                (Complex::from(t.cos()), Complex::from(t.sin()))
            }
            (None, Some(a), Some(b)) => (
                parse_complex(&format!("--a{j}"), a)?,
                parse_complex(&format!("--b{j}"), b)?,
            ),
            (None, Some(_), None) => return Err(usage(format!("--a{j} needs --b{j}"))),
            (None, None, Some(_)) => return Err(usage(format!("--b{j} needs --a{j}"))),
            (None, None, None) => {
                let h = Complex::from(std::f64::consts::FRAC_1_SQRT_2);
                (h, h)
            }
        };
        let norm = amps.0.norm_sqr() + amps.1.norm_sqr();
        if (norm - 1.0).abs() > protocol::NORMALIZATION_TOLERANCE {
            return Err(usage(format!("--a{j}/--b{j}: |a|^2 + |b|^2 = {norm}, expected 1")));
        }
        out.push(amps);
    }
    Ok(out)
}

fn read_input_state(path: &Path, gate: Gate) -> Result<State, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--input-state {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("--input-state {}: {e}", path.display())))?;
    // Accept either a bare state or a whole gate report.
    let value = match value.get("input_state") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let state = State::from_json(&value).map_err(|e| usage(format!("--input-state: {e}")))?;
    if state.registers().photons.len() != gate.photons() || !state.registers().nvs.is_empty() {
        return Err(usage(format!(
            "--input-state must hold exactly {} photons and no NV centers",
            gate.photons()
        )));
    }
    Ok(state)
}

fn resolve_p(args: &GateArgs) -> Result<f64, CliError> {
    match args.p {
        Some(p) => {
            if args.params.any_physical() {
                return Err(usage("--p cannot be combined with physical parameter flags"));
            }
            if !(p.is_finite() && p.abs() <= 1.0) {
                return Err(usage(format!("--p must lie in [-1, 1], got {p}")));
            }
            Ok(p)
        }
        None => {
            let params = args.params.resolve()?;
            let (kappa, gamma, lambda) = resonant_rates(&params, "gate")?;
            Ok(resonant_coefficients(kappa, gamma, lambda)
                .map_err(|e| usage(e.to_string()))?
                .p)
        }
    }
}

fn push_row(s: &mut String, section: &str, key: &str, z: Complex) {
    s.push_str(&csv_line([section, key, &sig12(z.re), &sig12(z.im)]));
}

fn push_state(s: &mut String, section: &str, state: &State) {
    for (label, z) in state.iter() {
        push_row(s, section, &label.to_string(), *z);
    }
}

fn outcome_key(o: &Outcome<f64>) -> String {
    o.outcomes
        .iter()
        .map(|(nv, s)| format!("nv{nv}={s}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn gate(args: &GateArgs, format: Format) -> Result<Output, CliError> {
    let gate = match args.gate {
        GateKind::Cphase => Gate::CPhase,
        GateKind::Ccphase => Gate::CCPhase,
    };
    let p = resolve_p(args)?;
    let report = match &args.input_state {
        Some(path) => {
            let explicit = [args.theta1, args.theta2, args.theta3].iter().any(Option::is_some)
                || [&args.a1, &args.b1, &args.a2, &args.b2, &args.a3, &args.b3]
                    .iter()
                    .any(|x| x.is_some());
            if explicit {
                return Err(usage("--input-state cannot be combined with --thetaN/--aN/--bN"));
            }
            let state = read_input_state(path, gate)?;
            protocol::run_gate_state(gate, &state, p)
        }
        None => protocol::run_gate(gate, &photon_amplitudes(args, gate.photons())?, p),
    }
    .map_err(|e| match e {
        ProtocolError::InvalidSpec(m) => usage(m),
        other => usage(other.to_string()),
    })?;
    let table = if args.truth_table {
        Some(protocol::truth_table(gate, p).map_err(|e| usage(e.to_string()))?)
    } else {
        None
    };

    let text = match format {
        Format::Json => {
            let outcomes: Vec<Value> = report
                .outcome_table
                .iter()
                .map(|o| {
                    json!({
                        "outcomes": o.outcomes.iter().map(|(nv, s)| json!({ "nv": nv, "spin": s })).collect::<Vec<_>>(),
                        "probability": o.probability,
                        "branch": o.branch.to_json(),
                        "corrected": o.corrected.to_json(),
                    })
                })
                .collect();
            let mut v = json!({
                "gate": gate.name(),
                "p": report.p,
                "input_state": report.input.to_json(),
                "joint_state": report.joint_state.to_json(),
                "outcomes": outcomes,
                "ideal_output": report.ideal_output.to_json(),
                "fidelity": report.fidelity,
                "efficiency": report.efficiency,
            });
            if let Some(t) = &table {
                v["truth_table"] = t
                    .iter()
                    .map(|row| row.iter().map(|&z| complex_json(z)).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
                    .into();
            }
            pretty(&v)
        }
        Format::Csv => {
            let mut s = csv_line(["section", "key", "re", "im"]);
            push_row(&mut s, "scalar", "p", report.p.into());
            push_row(&mut s, "scalar", "fidelity", report.fidelity.into());
            push_row(&mut s, "scalar", "efficiency", report.efficiency.into());
            push_state(&mut s, "input_state", &report.input);
            push_state(&mut s, "joint_state", &report.joint_state);
            push_state(&mut s, "ideal_output", &report.ideal_output);
            for o in &report.outcome_table {
                let key = outcome_key(o);
                push_row(&mut s, "probability", &key, o.probability.into());
                push_state(&mut s, &format!("corrected:{key}"), &o.corrected);
            }
            if let Some(t) = &table {
                for (i, row) in t.iter().enumerate() {
                    for (j, &z) in row.iter().enumerate() {
                        push_row(&mut s, "truth_table", &format!("{i}:{j}"), z);
                    }
                }
            }
            s
        }
    };
    ok(text)
}

fn grid(flag: &str, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(usage(format!("{flag}points must be at least 1")));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(usage(format!("{flag}min/{flag}max must be finite with min <= max")));
    }
    Ok(linspace(lo, hi, points))
}

pub fn sweep(args: &SweepArgs, format: Format) -> Result<Output, CliError> {
    let table = if args.fig == 5 {
        if args.gamma_min.is_some() || args.gamma_max.is_some() || args.gamma_points.is_some() {
            return Err(usage("--gamma-min/--gamma-max/--gamma-points only apply to --fig 6"));
        }
        let xs = grid("--", args.min.unwrap_or(0.0), args.max, args.points.unwrap_or(200))?;
        sweep_resonant(&xs).map_err(|e| usage(e.to_string()))?
    } else {
        let lo = args.min.unwrap_or(0.05);
        let n = args.points.unwrap_or(100);
        let xs = grid("--", lo, args.max, n)?;
        let ys = grid(
            "--gamma-",
            args.gamma_min.unwrap_or(lo),
            args.gamma_max.unwrap_or(args.max),
            args.gamma_points.unwrap_or(n),
        )?;
        let gates = match args.gate {
            GateChoice::Cphase => GateSelection::CPhase,
            GateChoice::Ccphase => GateSelection::CCPhase,
            GateChoice::Both => GateSelection::Both,
        };
        sweep_fidelity(&xs, &ys, gates).map_err(|e| usage(e.to_string()))?
    };
    ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&table.to_json()),
    })
}

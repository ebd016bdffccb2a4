use cavsim::metrics::{
    average_by_quadrature, average_by_quadrature_with, closed_form, closed_form_ccphase, closed_form_cphase, linspace,
    sweep_fidelity, sweep_resonant, FidelityConvention, GateSelection, MetricSource,
};
use cavsim::scattering::{resonant_coefficients, resonant_from_rate_ratios};
use cavsim::{Exact, Gate, Params, Preset};

const SAMPLE_P: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 31.0 / 33.0, 1.0];

#[test]
fn quadrature_reproduces_closed_forms() {
    for gate in [Gate::CPhase, Gate::CCPhase] {
        for p in SAMPLE_P {
            let quad = average_by_quadrature(gate, p, 16).unwrap();
            let (f, e) = closed_form(gate, &p);
            assert_eq!(quad.source, MetricSource::Quadrature);
            assert!(
                (quad.fidelity_avg - f).abs() < 1e-10,
                "{gate:?} p={p}: {} vs {f}",
                quad.fidelity_avg
            );
            assert!(
                (quad.efficiency_avg - e).abs() < 1e-10,
                "{gate:?} p={p}: {} vs {e}",
                quad.efficiency_avg
            );
        }
    }
}

#[test]
fn doubling_the_nodes_changes_nothing() {
    for (gate, p) in [(Gate::CPhase, 0.3f64), (Gate::CCPhase, 0.7)] {
        let a = average_by_quadrature(gate, p, 16).unwrap();
        let b = average_by_quadrature(gate, p, 32).unwrap();
        assert!((a.fidelity_avg - b.fidelity_avg).abs() < 1e-12);
        assert!((a.efficiency_avg - b.efficiency_avg).abs() < 1e-12);
    }
}

#[test]
fn averages_are_monotone_in_p() {
    let grid = linspace(0.0, 1.0, 1000);
    for gate in [Gate::CPhase, Gate::CCPhase] {
        let values: Vec<(f64, f64)> = grid.iter().map(|p| closed_form(gate, p)).collect();
        for w in values.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1, "{gate:?}");
        }
        assert!(values
            .iter()
            .all(|&(f, e)| (0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&e)));
    }
}

#[test]
fn unit_p_is_exactly_one() {
    let one = Exact::from_integer(1.into());
    assert_eq!(closed_form_cphase(&one), (one.clone(), one.clone()));
    assert_eq!(closed_form_ccphase(&one), (one.clone(), one.clone()));
    let quad = average_by_quadrature(Gate::CCPhase, 1.0f64, 16).unwrap();
    assert!((quad.fidelity_avg - 1.0).abs() < 1e-12 && (quad.efficiency_avg - 1.0).abs() < 1e-12);
}

#[test]
fn quoted_averages() {
    for (ratio, f_cp, f_ccp) in [(2.0f64, 0.9405, 0.9124), (3.0, 0.9728, 0.9596), (4.0, 0.9846, 0.9770)] {
        let c = resonant_from_rate_ratios(ratio, ratio).unwrap();
        assert!((closed_form_cphase(&c.p).0 - f_cp).abs() <= 5e-5);
        assert!((closed_form_ccphase(&c.p).0 - f_ccp).abs() <= 5e-5);
    }
    let c = resonant_from_rate_ratios(2.0f64, 2.0).unwrap();
    assert!((closed_form_cphase(&c.p).1 - 0.9412).abs() <= 5e-5);
    assert!((closed_form_ccphase(&c.p).1 - 0.9140).abs() <= 5e-5);
    assert_eq!(closed_form_cphase(&0.0f64).1, 7.0 / 16.0);
}

#[test]
fn renormalizing_breaks_the_polynomial_match() {
    let p = 31.0f64 / 33.0;
    let renormalized = average_by_quadrature_with(Gate::CPhase, p, 16, FidelityConvention::Renormalized).unwrap();
    let (f, _) = closed_form_cphase(&p);
    assert!((renormalized.fidelity_avg - f).abs() > 1e-3);
}

#[test]
fn strong_coupling_is_essentially_perfect() {
    let params: Params = Preset::Strong.params();
    let c = resonant_coefficients(params.kappa1, params.gamma, params.lambda1).unwrap();
    assert!(closed_form_cphase(&c.p).0 >= 1.0 - 1e-6);
    assert!(closed_form_ccphase(&c.p).0 >= 1.0 - 1e-6);
}

#[test]
fn resonant_sweep_is_monotone() {
    let table = sweep_resonant(&linspace(0.0, 5.0, 200)).unwrap();
    assert_eq!(table.rows.len(), 200);
    assert_eq!(table.rows[0][1..3], [-1.0, 0.0]);
    let t0 = table.column("t0").unwrap();
    assert!(table.rows.windows(2).all(|w| w[1][t0] > w[0][t0]));
}

#[test]
fn fidelity_sweep_is_ordered_and_finite() {
    let grid = linspace(0.5, 4.0, 8);
    let table = sweep_fidelity(&grid, &grid, GateSelection::Both).unwrap();
    assert_eq!(table.rows.len(), 64);
    assert!(table.rows.iter().flatten().all(|x| x.is_finite()));
    for (k, row) in table.rows.iter().enumerate() {
        assert_eq!((row[0], row[1]), (grid[k / 8], grid[k % 8]));
    }
    let json = table.to_json();
    assert_eq!(json["rows"].as_array().unwrap().len(), 64);
    assert!(sweep_fidelity(&[0.0], &grid, GateSelection::Both).is_err());
}

#[test]
fn node_by_node_runs_agree_with_the_superposed_average() {
    use cavsim::metrics::{pointwise, AngleSpec};
    let n = 16;
    let p = 31.0 / 33.0;
    let node = |i: usize| std::f64::consts::TAU * i as f64 / n as f64;
    let (mut f, mut e) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (fi, ei) = pointwise(Gate::CPhase, &AngleSpec::new(node(i), node(j), 0.0).unwrap(), p).unwrap();
            f += fi;
            e += ei;
        }
    }
    let quad = average_by_quadrature(Gate::CPhase, p, n).unwrap();
    assert!((f / 256.0 - quad.fidelity_avg).abs() < 1e-13);
    assert!((e / 256.0 - quad.efficiency_avg).abs() < 1e-13);
}

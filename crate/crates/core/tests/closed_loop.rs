use nalgebra::{DMatrix, DVector};
use robust_esn::esn::{build_inverse_dataset, init_reservoir, EmbeddingSpec, EsnConfig, InverseController};
use robust_esn::lmi::{solve_synthesis, InteriorPoint, SynthesisProblem, SynthesisSolution};
use robust_esn::polymodel::ParameterSet;
use robust_esn::sim::{
    check_containment, gen_training_signals, rk4, simulate, DiscretePlant, Disturbance, DisturbanceSpec, OuterLoop,
    VanDerPolPlant,
};
use robust_esn::Model;

fn fixed_model() -> Model {
    Model::van_der_pol(0.1)
        .with_theta_set(ParameterSet::point(vec![0.75]).unwrap())
        .unwrap()
}

fn synthesize() -> SynthesisSolution {
    solve_synthesis(&SynthesisProblem::new(fixed_model(), 0.3), &InteriorPoint::default()).unwrap()
}

fn x0() -> DVector<f64> {
    DVector::from_column_slice(&[-0.0225, 0.252, 0.005])
}

#[test]
fn rk4_matches_a_rotation() {
    // x' = (x₂, −x₁) rotates the state by −t; ten steps of h = 0.01 leave a
    // truncation error near 1e-11.
    let f = |_: f64, x: &DVector<f64>| DVector::from_column_slice(&[x[1], -x[0]]);
    let x = DVector::from_column_slice(&[1.0, 0.0]);
    let got = rk4(f, &x, 0.0, 0.1, 10);
    assert!((got[0] - 0.1f64.cos()).abs() < 1e-10);
    assert!((got[1] + 0.1f64.sin()).abs() < 1e-10);
}

#[test]
fn discrete_plant_follows_the_model_step() {
    let sol = synthesize();
    let model = fixed_model();
    let theta = DVector::from_element(1, 0.75);
    let plant = DiscretePlant {
        model: model.clone(),
        theta: theta.clone(),
    };
    let d = DisturbanceSpec::reference_sinusoid().realize::<f64>(0.1, 0);
    let tr = simulate(&plant, &sol.gain, &mut OuterLoop::None, &d, &x0(), 0.1, 50).unwrap();
    let mut x = x0();
    for r in &tr.rows {
        assert_eq!(r.x, x);
        let u = sol.gain.control(&x);
        x = model.step(&x, &theta, &u, &DVector::from_element(1, d.at(r.t)));
    }
}

#[test]
fn robust_loop_converges_and_stays_in_the_reachable_set() {
    let sol = synthesize();
    let p = sol.ellipsoid().unwrap().p;
    let plant = VanDerPolPlant::new(0.75);
    let tr = simulate(
        &plant,
        &sol.gain,
        &mut OuterLoop::None,
        &Disturbance::Zero,
        &x0(),
        0.1,
        300,
    )
    .unwrap();
    let report = check_containment(&tr, &p);
    assert_eq!(report.violations, 0);
    // With w = 0 the decrease condition makes V contract by at least 1 − μ.
    let v = |x: &DVector<f64>| (x.transpose() * &p * x)[(0, 0)];
    assert!(v(&tr.rows[299].x) < 1e-6 * v(&tr.rows[0].x));
}

fn tiny_controller(sol: &SynthesisSolution) -> InverseController<f64> {
    let plant = VanDerPolPlant::new(0.75);
    let spec = DisturbanceSpec::FilteredNoise {
        cutoff_hz: 0.5,
        amplitude_bound: 0.5f64.sqrt(),
        seed: 0,
    };
    let sig = gen_training_signals::<f64>(&spec, &spec, 600, 0.1, 3);
    let tr = simulate(
        &plant,
        &sol.gain,
        &mut OuterLoop::Excitation(sig.u2),
        &sig.d,
        &DVector::zeros(3),
        0.1,
        600,
    )
    .unwrap();
    let (y, u1, u2) = tr.io_matrices();
    let emb = EmbeddingSpec::new(1, 2).unwrap();
    let data = build_inverse_dataset(&y, &u1, &u2, &emb).unwrap();
    let cfg = EsnConfig {
        n: 40,
        n_upsilon: emb.input_dim(),
        ..Default::default()
    };
    let esn = data.fit(init_reservoir(&cfg).unwrap(), 50).unwrap();
    InverseController::new(esn, emb).unwrap()
}

#[test]
fn combined_runs_are_deterministic_and_bounded() {
    let sol = synthesize();
    let controller = tiny_controller(&sol);
    let plant = VanDerPolPlant::new(0.75);
    let d = DisturbanceSpec::reference_sinusoid().realize::<f64>(0.1, 0);
    let run = || {
        let mut outer = OuterLoop::Esn {
            controller: Box::new(controller.clone()),
            eta_u: 1.0,
        };
        simulate(&plant, &sol.gain, &mut outer, &d, &x0(), 0.1, 200).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert!(a.rows.iter().all(|r| r.u2.abs() < 0.5f64.sqrt()));
    assert!(a.rows.iter().any(|r| r.u2 != 0.0));
    // The controller is reset at the start of every run, so reusing one
    // outer loop twice also reproduces the trace.
    let mut outer = OuterLoop::Esn {
        controller: Box::new(controller),
        eta_u: 1.0,
    };
    let first = simulate(&plant, &sol.gain, &mut outer, &d, &x0(), 0.1, 200).unwrap();
    let again = simulate(&plant, &sol.gain, &mut outer, &d, &x0(), 0.1, 200).unwrap();
    assert_eq!(first.to_csv_string(), again.to_csv_string());
    assert_eq!(first.to_csv_string(), a.to_csv_string());
}

#[test]
fn input_is_held_over_each_period() {
    // With θ = 0 the plant is a harmonic oscillator driven by u in x₂, whose
    // response to a constant u has a closed form over each period.
    let plant = VanDerPolPlant::new(0.0);
    let basis = robust_esn::polymodel::MonomialBasis::full(3, 2, &[0]).unwrap();
    let gain = robust_esn::lmi::PolynomialGain::new(DMatrix::zeros(1, 3), DMatrix::zeros(1, 6), basis);
    let u2 = vec![0.3, -0.1, 0.2, 0.0, 0.5];
    let tr = simulate(
        &plant,
        &gain,
        &mut OuterLoop::Excitation(u2.clone()),
        &Disturbance::Zero,
        &DVector::zeros(3),
        0.1,
        5,
    )
    .unwrap();
    let (s, c) = (0.1f64.sin(), 0.1f64.cos());
    let mut x = [0.0f64; 3];
    for (r, &u) in tr.rows.iter().zip(&u2) {
        for i in 0..3 {
            assert!((r.x[i] - x[i]).abs() < 1e-10, "t = {}: {:?} vs {x:?}", r.t, r.x);
        }
        assert_eq!(r.u, u);
        let e = x[0] - u;
        x = [
            u + e * c + x[1] * s,
            -e * s + x[1] * c,
            x[2] + u * 0.1 + e * s + x[1] * (1.0 - c),
        ];
    }
}

use nalgebra::{DMatrix, DVector};
use robust_esn::esn::{init_reservoir, ridge_train, step, EsnConfig};
use robust_esn::lmi::{solve_synthesis, InteriorPoint, SynthesisProblem};
use robust_esn::polymodel::ParameterSet;
use robust_esn::sim::{cast_trace, simulate, DisturbanceSpec, OuterLoop, VanDerPolPlant};
use robust_esn::{Esn, Esn32, Gain32, Model, Model32, Trace, Trace32};

#[test]
fn models_agree_across_precisions() {
    let m64 = Model::van_der_pol(0.1);
    let m32 = Model32::van_der_pol(0.1);
    let x64 = DVector::from_column_slice(&[0.3, -0.2, 0.1]);
    let x32 = x64.map(|v| v as f32);
    for theta in [0.5, 0.75, 0.9] {
        let a64 = m64.a_matrix(&x64, &DVector::from_element(1, theta));
        let a32 = m32.a_matrix(&x32, &DVector::from_element(1, theta as f32));
        assert!((a64 - a32.map(f64::from)).amax() < 1e-6);
    }
}

#[test]
fn f32_closed_loop_tracks_f64() {
    let model = Model::van_der_pol(0.1)
        .with_theta_set(ParameterSet::point(vec![0.75]).unwrap())
        .unwrap();
    let sol = solve_synthesis(&SynthesisProblem::new(model, 0.3), &InteriorPoint::default()).unwrap();
    let gain32: Gain32 = sol.gain.cast();
    let x0 = DVector::from_column_slice(&[-0.0225, 0.252, 0.005]);
    let spec = DisturbanceSpec::reference_sinusoid();
    let t64: Trace = simulate(
        &VanDerPolPlant::new(0.75),
        &sol.gain,
        &mut OuterLoop::None,
        &spec.realize(0.1, 0),
        &x0,
        0.1,
        600,
    )
    .unwrap();
    let t32: Trace32 = simulate(
        &VanDerPolPlant::new(0.75f32),
        &gain32,
        &mut OuterLoop::None,
        &spec.realize(0.1, 0),
        &x0.map(|v| v as f32),
        0.1,
        600,
    )
    .unwrap();
    let back: Trace = cast_trace(&t32);
    let worst = t64
        .rows
        .iter()
        .zip(&back.rows)
        .map(|(a, b)| (&a.x - &b.x).amax())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn reservoirs_agree_across_precisions() {
    let cfg = EsnConfig {
        n: 50,
        ..Default::default()
    };
    let e64: Esn = init_reservoir(&cfg).unwrap();
    let e32: Esn32 = init_reservoir(&cfg).unwrap();
    assert!((&e64.w_rr - e32.w_rr.map(f64::from)).amax() < 1e-6);
    let u = DVector::from_column_slice(&[0.1, -0.3, 0.2, 0.05]);
    let mut a = DVector::zeros(50);
    let mut b = DVector::<f32>::zeros(50);
    for _ in 0..20 {
        a = step(&e64, &a, &u).unwrap();
        b = step(&e32, &b, &u.map(|v| v as f32)).unwrap();
    }
    assert!((a - b.map(f64::from)).amax() < 1e-5);
}

#[test]
fn ridge_in_f32() {
    let xi = DMatrix::<f32>::from_fn(40, 3, |i, j| ((i * 7 + j * 3) % 11) as f32 / 11.0 - 0.5);
    let w_true = DMatrix::<f32>::from_row_slice(3, 1, &[1.0, -2.0, 0.5]);
    let sigma = &xi * &w_true;
    let w = ridge_train(&xi, &sigma, 1e-6).unwrap();
    assert!((w.transpose() - w_true).amax() < 1e-3);
}

//! Sampled-data closed loop: continuous plant under ZOH, robust inner loop,
//! optional inverse-model outer loop, disturbances and performance metrics.

mod disturbance;
mod plant;
mod trace;

pub use disturbance::{filtered_noise, gen_training_signals, Disturbance, DisturbanceSpec, TrainingSignals};
pub use plant::{integrate_zoh, rk4, vdp_derivative, DiscretePlant, Plant, VanDerPolPlant};
pub use trace::{SimTrace, TraceRow};

use crate::esn::{saturate_u2, InverseController};
use crate::lmi::PolynomialGain;
use crate::scalar::cast_vector;
use crate::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state became non-finite at t = {t}")]
    Divergence { t: f64 },
    #[error("simulation diverged at t = {t}; {} rows recorded", partial.len())]
    Diverged { t: f64, partial: Box<SimTrace<f64>> },
    #[error("invalid simulation setup: {0}")]
    Invalid(String),
    #[error("empty signal")]
    EmptySignal,
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Csv(e.to_string())
    }
}

/// Source of `u₂` during a run.
#[derive(Debug, Clone)]
pub enum OuterLoop<T: Real> {
    /// `u₂ ≡ 0`: the robust controller alone.
    None,
    /// Prescribed samples, used for training-data collection. Samples past
    /// the end are zero.
    Excitation(Vec<T>),
    /// Inverse-model controller regulating to `r = 0`, with its output
    /// passed through [`saturate_u2`].
    Esn {
        controller: Box<InverseController<T>>,
        eta_u: T,
    },
}

impl<T: Real> OuterLoop<T> {
    pub fn label(&self) -> &'static str {
        match self {
            OuterLoop::None => "robust",
            OuterLoop::Excitation(_) => "excitation",
            OuterLoop::Esn { .. } => "robust+esn",
        }
    }
}

/// Runs `n_samples` periods from `x0`: at each `k`, `u₁ = K(x[k])x[k]`,
/// `u₂` from the outer loop, `u = u₁ + u₂` held over the period.
pub fn simulate<T: Real, P: Plant<T>>(
    plant: &P,
    gain: &PolynomialGain<T>,
    outer: &mut OuterLoop<T>,
    disturbance: &Disturbance<T>,
    x0: &DVector<T>,
    ts: f64,
    n_samples: usize,
) -> Result<SimTrace<T>, SimError> {
    if x0.len() != plant.n_x() || x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Invalid(
            "x0 must be finite and match the plant dimension".into(),
        ));
    }
    if !(ts > 0.0) || n_samples == 0 {
        return Err(SimError::Invalid(
            "sampling period and duration must be positive".into(),
        ));
    }
    if gain.n_u() != 1 {
        return Err(SimError::Invalid("the closed loop is single-input".into()));
    }
    if let OuterLoop::Esn { controller, .. } = outer {
        controller.reset();
    }
    let ts_t = T::lit(ts);
    let zero = DVector::zeros(1);
    let mut trace = SimTrace::new(ts);
    trace.metadata.insert("controller".into(), outer.label().into());
    let mut x = x0.clone();
    for k in 0..n_samples {
        let t = ts_t * T::from_count(k);
        let y = plant.output(&x);
        let u1 = gain.control(&x)[0];
        let u2 = match outer {
            OuterLoop::None => T::ZERO,
            OuterLoop::Excitation(seq) => seq.get(k).copied().unwrap_or(T::ZERO),
            OuterLoop::Esn { controller, eta_u } => {
                let raw = controller.compute(&DVector::from_element(1, y), &DVector::from_element(1, u1), &zero);
                let u2 = saturate_u2(raw[0], *eta_u);
                controller.commit_u2(&DVector::from_element(1, u2));
                u2
            }
        };
        let u = u1 + u2;
        trace.rows.push(TraceRow {
            t,
            x: x.clone(),
            y,
            u1,
            u2,
            u,
            d: disturbance.at(t),
        });
        x = integrate_zoh(plant, &x, u, disturbance, t, ts_t).map_err(|e| match e {
            SimError::Divergence { t } => SimError::Diverged {
                t,
                partial: Box::new(cast_trace(&trace)),
            },
            other => other,
        })?;
    }
    Ok(trace)
}

pub fn cast_trace<A: Real, B: Real>(trace: &SimTrace<A>) -> SimTrace<B> {
    SimTrace {
        ts: trace.ts,
        rows: trace
            .rows
            .iter()
            .map(|r| TraceRow {
                t: B::lit(r.t.to_f64_lossy()),
                x: cast_vector(&r.x),
                y: B::lit(r.y.to_f64_lossy()),
                u1: B::lit(r.u1.to_f64_lossy()),
                u2: B::lit(r.u2.to_f64_lossy()),
                u: B::lit(r.u.to_f64_lossy()),
                d: B::lit(r.d.to_f64_lossy()),
            })
            .collect(),
        metadata: trace.metadata.clone(),
    }
}

pub fn rms<T: Real>(signal: &[T]) -> Result<T, SimError> {
    if signal.is_empty() {
        return Err(SimError::EmptySignal);
    }
    let ss = signal.iter().fold(T::ZERO, |acc, &v| acc + v * v);
    Ok((ss / T::from_count(signal.len())).sqrt())
}

/// `100 · (1 − rms_combined / rms_robust)`.
pub fn improvement_factor<T: Real>(rms_combined: T, rms_robust: T) -> T {
    T::lit(100.0) * (T::ONE - rms_combined / rms_robust)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Largest `xᵀPx` over the samples.
    pub max_form: f64,
    /// Samples with `xᵀPx > 1`.
    pub violations: usize,
}

/// Evaluates `x[k]ᵀ P x[k]` at every sampling instant.
pub fn check_containment<T: Real>(trace: &SimTrace<T>, p: &DMatrix<f64>) -> ContainmentReport {
    let mut max_form = 0.0f64;
    let mut violations = 0;
    for r in &trace.rows {
        let x: DVector<f64> = cast_vector(&r.x);
        let v = (x.transpose() * p * &x)[(0, 0)];
        max_form = max_form.max(v);
        if v > 1.0 {
            violations += 1;
        }
    }
    ContainmentReport {
        samples: trace.len(),
        max_form,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodel::MonomialBasis;

    fn zero_gain() -> PolynomialGain<f64> {
        let basis = MonomialBasis::full(3, 2, &[0]).unwrap();
        PolynomialGain::new(DMatrix::zeros(1, 3), DMatrix::zeros(1, basis.lifted_dim()), basis)
    }

    fn stabilizing_gain() -> PolynomialGain<f64> {
        let basis = MonomialBasis::full(3, 2, &[0]).unwrap();
        PolynomialGain::new(
            DMatrix::from_row_slice(1, 3, &[-3.0, -3.0, -1.0]),
            DMatrix::zeros(1, 6),
            basis,
        )
    }

    #[test]
    fn zero_everything_gives_zero_trace() {
        let plant = VanDerPolPlant::new(0.75);
        let tr = simulate(
            &plant,
            &zero_gain(),
            &mut OuterLoop::None,
            &Disturbance::Zero,
            &DVector::zeros(3),
            0.1,
            50,
        )
        .unwrap();
        assert_eq!(tr.len(), 50);
        assert!(tr
            .rows
            .iter()
            .all(|r| r.x.iter().all(|&v| v == 0.0) && r.u == 0.0 && r.y == 0.0));
        assert!((tr.rows[49].t - 4.9).abs() < 1e-12);
    }

    #[test]
    fn rows_are_consistent() {
        let plant = VanDerPolPlant::new(0.75);
        let d = DisturbanceSpec::reference_sinusoid().realize(0.1, 0);
        let mut outer = OuterLoop::Excitation(vec![0.1; 30]);
        let x0 = DVector::from_column_slice(&[-0.0225, 0.252, 0.005]);
        let tr = simulate(&plant, &stabilizing_gain(), &mut outer, &d, &x0, 0.1, 40).unwrap();
        for (k, r) in tr.rows.iter().enumerate() {
            assert_eq!(r.y, r.x[0]);
            assert_eq!(r.u, r.u1 + r.u2);
            assert_eq!(r.u2, if k < 30 { 0.1 } else { 0.0 });
            assert_eq!(r.d, d.at(r.t));
        }
        assert_eq!(tr.rows[0].x, x0);
    }

    #[test]
    fn open_loop_blowup_returns_partial_trace() {
        let basis = MonomialBasis::full(3, 2, &[0]).unwrap();
        let gain = PolynomialGain::new(
            DMatrix::from_row_slice(1, 3, &[1e3, 1e3, 0.0]),
            DMatrix::zeros(1, 6),
            basis,
        );
        let plant = VanDerPolPlant::new(0.75);
        let x0 = DVector::from_column_slice(&[1.0, 1.0, 0.0]);
        match simulate(&plant, &gain, &mut OuterLoop::None, &Disturbance::Zero, &x0, 0.1, 1000) {
            Err(SimError::Diverged { partial, .. }) => assert!(!partial.is_empty() && partial.len() < 1000),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn metrics() {
        assert_eq!(rms(&[2.0, -2.0, 2.0]).unwrap(), 2.0);
        assert!(matches!(rms::<f64>(&[]), Err(SimError::EmptySignal)));
        assert_eq!(improvement_factor(0.3, 0.3), 0.0);
        assert!((improvement_factor(0.4564f64, 1.0) - 54.36).abs() < 1e-12);
    }

    #[test]
    fn containment_counts_exits() {
        let mut tr = SimTrace::<f64>::new(0.1);
        for k in 0..5 {
            let x = DVector::from_column_slice(&[0.1 * k as f64, 0.0, 0.0]);
            tr.rows.push(TraceRow {
                t: 0.1 * k as f64,
                y: x[0],
                x,
                u1: 0.0,
                u2: 0.0,
                u: 0.0,
                d: 0.0,
            });
        }
        let p = DMatrix::identity(3, 3) * 100.0;
        let r = check_containment(&tr, &p);
        // 100·x₁² at x₁ = 0, .1, .2, .3, .4
        assert_eq!(r.violations, 3);
        assert!((r.max_form - 16.0).abs() < 1e-12);
        let empty = check_containment(&SimTrace::<f64>::new(0.1), &p);
        assert_eq!((empty.max_form, empty.violations), (0.0, 0));
    }
}

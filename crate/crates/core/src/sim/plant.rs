use super::disturbance::Disturbance;
use super::SimError;
use crate::polymodel::PolyQuasiLpvModel;
use crate::Real;
use nalgebra::DVector;

/// `ẋ = (x₂, −x₁ + θ(1 − x₁²)x₂ + u + d, x₁)`; the third state integrates
/// the output.
pub fn vdp_derivative<T: Real>(x: &DVector<T>, theta: T, u: T, d: T) -> DVector<T> {
    let (x1, x2) = (x[0], x[1]);
    DVector::from_column_slice(&[x2, -x1 + theta * (T::ONE - x1 * x1) * x2 + u + d, x1])
}

/// Classic fourth-order Runge–Kutta over `[t0, t0 + ts]` with `substeps`
/// equal steps.
pub fn rk4<T: Real>(
    f: impl Fn(T, &DVector<T>) -> DVector<T>,
    x: &DVector<T>,
    t0: T,
    ts: T,
    substeps: usize,
) -> DVector<T> {
    let h = ts / T::from_count(substeps);
    let half = T::lit(0.5);
    let sixth = T::ONE / T::lit(6.0);
    let two = T::lit(2.0);
    let mut x = x.clone();
    for i in 0..substeps {
        let t = t0 + h * T::from_count(i);
        let k1 = f(t, &x);
        let k2 = f(t + h * half, &(&x + &k1 * (h * half)));
        let k3 = f(t + h * half, &(&x + &k2 * (h * half)));
        let k4 = f(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * two + k3 * two + k4) * (h * sixth);
    }
    x
}

/// Anything the closed-loop runner can advance by one sampling period with
/// the input held.
pub trait Plant<T: Real> {
    fn n_x(&self) -> usize;

    fn output(&self, x: &DVector<T>) -> T;

    /// State at `t0 + ts` from `x` at `t0`, with `u` held constant.
    fn advance(&self, x: &DVector<T>, u: T, d: &Disturbance<T>, t0: T, ts: T) -> DVector<T>;
}

/// Continuous-time Van der Pol plant with output integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPolPlant<T: Real> {
    pub theta: T,
    pub substeps: usize,
}

impl<T: Real> VanDerPolPlant<T> {
    pub fn new(theta: T) -> Self {
        Self { theta, substeps: 10 }
    }
}

impl<T: Real> Plant<T> for VanDerPolPlant<T> {
    fn n_x(&self) -> usize {
        3
    }

    fn output(&self, x: &DVector<T>) -> T {
        x[0]
    }

    fn advance(&self, x: &DVector<T>, u: T, d: &Disturbance<T>, t0: T, ts: T) -> DVector<T> {
        rk4(
            |t, x| vdp_derivative(x, self.theta, u, d.at(t)),
            x,
            t0,
            ts,
            self.substeps,
        )
    }
}

/// The discrete model itself used as the plant, for user-supplied models
/// without a continuous-time counterpart. `d` is read at the start of each
/// period.
#[derive(Debug, Clone)]
pub struct DiscretePlant<T: Real> {
    pub model: PolyQuasiLpvModel<T>,
    pub theta: DVector<T>,
}

impl<T: Real> Plant<T> for DiscretePlant<T> {
    fn n_x(&self) -> usize {
        self.model.n_x()
    }

    fn output(&self, x: &DVector<T>) -> T {
        (&self.model.c * x)[0]
    }

    fn advance(&self, x: &DVector<T>, u: T, d: &Disturbance<T>, t0: T, _ts: T) -> DVector<T> {
        let u = DVector::from_element(self.model.n_u(), u);
        let d = DVector::from_element(self.model.n_d(), d.at(t0));
        self.model.step(x, &self.theta, &u, &d)
    }
}

/// One ZOH period of `plant`; a non-finite result is reported as divergence.
pub fn integrate_zoh<T: Real, P: Plant<T>>(
    plant: &P,
    x: &DVector<T>,
    u: T,
    d: &Disturbance<T>,
    t0: T,
    ts: T,
) -> Result<DVector<T>, SimError> {
    let next = plant.advance(x, u, d, t0, ts);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(SimError::Divergence {
            t: (t0 + ts).to_f64_lossy(),
        })
    }
}

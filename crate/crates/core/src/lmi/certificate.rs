use super::gain::PolynomialGain;
use super::synthesis::{Ellipsoid, SynthesisSolution};
use crate::polymodel::PolyQuasiLpvModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Slack allowed on the sampled decrease inequality.
pub const DECREASE_TOLERANCE: f64 = 1e-9;

/// Outcome of the sampled one-step check `ΔV ≤ μ(wᵀw − V)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssCertificateReport {
    pub samples: usize,
    pub decrease_violations: usize,
    /// Largest `ΔV − μ(wᵀw − V)` seen.
    pub max_residual: f64,
    /// `1 − hᵢᵀQhᵢ > 0` per half-plane.
    pub containment_ok: Vec<bool>,
}

impl IssCertificateReport {
    pub fn passed(&self) -> bool {
        self.decrease_violations == 0 && self.containment_ok.iter().all(|&ok| ok)
    }
}

/// Uniform sample from the unit ball by rejection from the enclosing cube.
fn unit_ball(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        if v.norm_squared() <= 1.0 {
            return v;
        }
    }
}

/// Uniform sample from `{x : xᵀPx ≤ 1}` by rejection from its bounding box
/// `|xᵢ| ≤ √Qᵢᵢ`.
fn in_ellipsoid(rng: &mut ChaCha8Rng, q: &DMatrix<f64>, ell: &Ellipsoid) -> DVector<f64> {
    let half: Vec<f64> = (0..q.nrows()).map(|i| q[(i, i)].sqrt()).collect();
    loop {
        let x = DVector::from_fn(q.nrows(), |i, _| rng.random_range(-half[i]..=half[i]));
        if ell.contains(&x) {
            return x;
        }
    }
}

/// Checks the decrease condition with an arbitrary gain, so that corrupted
/// gains can be fed through the same sampler.
pub fn verify_iss_decrease_with(
    gain: &PolynomialGain<f64>,
    q: &DMatrix<f64>,
    mu: f64,
    model: &PolyQuasiLpvModel<f64>,
    n_samples: usize,
    seed: u64,
) -> IssCertificateReport {
    let ell = super::synthesis::reachable_ellipsoid(q).expect("Q of a feasible solution is positive definite");
    let thetas = model.theta.vertices_and_centroid();
    let bw = model.bw();
    let bu = &model.bu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_residual = f64::NEG_INFINITY;
    for k in 0..n_samples {
        let x = in_ellipsoid(&mut rng, q, &ell);
        let theta = &thetas[k % thetas.len()];
        let w = unit_ball(&mut rng, model.n_w());
        let th = theta.as_slice();
        let x_next = model.a_matrix(&x, theta) * &x + bu.eval(th) * gain.control(&x) + bw.eval(th) * &w;
        let v = ell.form(&x);
        let residual = ell.form(&x_next) - v - mu * (w.norm_squared() - v);
        max_residual = max_residual.max(residual);
        if residual > DECREASE_TOLERANCE {
            violations += 1;
        }
    }
    let containment_ok = model
        .domain
        .half_planes()
        .iter()
        .map(|h| 1.0 - (h.transpose() * q * h)[(0, 0)] > 0.0)
        .collect();
    IssCertificateReport {
        samples: n_samples,
        decrease_violations: violations,
        max_residual,
        containment_ok,
    }
}

/// Samples `x` uniformly in ℛ, `θ` over the vertices and centroid of the
/// model's parameter set and `w` uniformly in the unit ball, and checks one
/// closed-loop step against `ΔV ≤ μ(wᵀw − V) + 1e-9`.
pub fn verify_iss_decrease(
    solution: &SynthesisSolution,
    model: &PolyQuasiLpvModel<f64>,
    n_samples: usize,
    seed: u64,
) -> IssCertificateReport {
    verify_iss_decrease_with(&solution.gain, solution.q(), solution.mu, model, n_samples, seed)
}

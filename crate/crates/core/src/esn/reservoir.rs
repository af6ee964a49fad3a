use super::{EsnConfig, EsnError};
use crate::scalar::{cast_matrix, cast_vector};
use crate::Real;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnModel<T: Real> {
    /// Reservoir-to-reservoir weights, `n × n`.
    pub w_rr: DMatrix<T>,
    /// Input-to-reservoir weights, `n × n_υ`.
    pub w_vr: DMatrix<T>,
    pub w_bias: DVector<T>,
    /// Readout, `n_σ × n`.
    pub w_out: DMatrix<T>,
    pub config: EsnConfig,
}

impl<T: Real> EsnModel<T> {
    pub fn n(&self) -> usize {
        self.w_rr.nrows()
    }

    pub fn n_upsilon(&self) -> usize {
        self.w_vr.ncols()
    }

    pub fn readout(&self, xi: &DVector<T>) -> DVector<T> {
        &self.w_out * xi
    }

    pub fn with_readout(mut self, w_out: DMatrix<T>) -> Result<Self, EsnError> {
        if w_out.ncols() != self.n() {
            return Err(EsnError::Dimension(format!(
                "readout has {} columns, reservoir has {}",
                w_out.ncols(),
                self.n()
            )));
        }
        self.w_out = w_out;
        Ok(self)
    }

    pub fn cast<U: Real>(&self) -> EsnModel<U> {
        EsnModel {
            w_rr: cast_matrix(&self.w_rr),
            w_vr: cast_matrix(&self.w_vr),
            w_bias: cast_vector(&self.w_bias),
            w_out: cast_matrix(&self.w_out),
            config: self.config.clone(),
        }
    }
}

/// Draws the reservoir and input weights. Each reservoir entry is kept with
/// probability `density` and then drawn from 𝒩(0,1); the result is divided by
/// its largest singular value and multiplied by `rho_r`. The singular value is
/// computed in `f64` whatever `T` is. The readout starts at zero with one
/// output row.
pub fn init_reservoir<T: Real>(config: &EsnConfig) -> Result<EsnModel<T>, EsnError> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(config.density) {
                w[(i, j)] = rng.sample(StandardNormal);
            }
        }
    }
    let sigma_max = w.singular_values().max();
    if !(sigma_max > 0.0) {
        return Err(EsnError::InvalidConfig(
            "reservoir draw is identically zero; raise density or n".into(),
        ));
    }
    w *= config.rho_r / sigma_max;
    let w_vr = DMatrix::<f64>::from_fn(n, config.n_upsilon, |_, _| {
        config.rho_upsilon * rng.sample::<f64, _>(StandardNormal)
    });
    let w_bias = DVector::<f64>::from_fn(n, |_, _| config.rho_bias * rng.sample::<f64, _>(StandardNormal));
    Ok(EsnModel {
        w_rr: cast_matrix(&w),
        w_vr: cast_matrix(&w_vr),
        w_bias: cast_vector(&w_bias),
        w_out: DMatrix::zeros(1, n),
        config: config.clone(),
    })
}

/// `ξ₊ = (1−γ)ξ + γ tanh(W_RR ξ + W_υR υ + W_bias)`.
pub fn step<T: Real>(model: &EsnModel<T>, xi: &DVector<T>, upsilon: &DVector<T>) -> Result<DVector<T>, EsnError> {
    if xi.len() != model.n() || upsilon.len() != model.n_upsilon() {
        return Err(EsnError::Dimension(format!(
            "state {} / input {} vs reservoir {} / {}",
            xi.len(),
            upsilon.len(),
            model.n(),
            model.n_upsilon()
        )));
    }
    let gamma = T::lit(model.config.gamma);
    let pre = &model.w_rr * xi + &model.w_vr * upsilon + &model.w_bias;
    Ok(xi * (T::ONE - gamma) + pre.map(|v| v.tanh()) * gamma)
}

/// Runs the reservoir over the rows of `upsilon` starting from `ξ(0) = 0`
/// and returns the states after the first `washout` as rows. Row `r` holds
/// the state after consuming input row `washout + r`.
pub fn run_collect<T: Real>(model: &EsnModel<T>, upsilon: &DMatrix<T>, washout: usize) -> Result<DMatrix<T>, EsnError> {
    run_collect_from(model, upsilon, washout, DVector::zeros(model.n()))
}

pub fn run_collect_from<T: Real>(
    model: &EsnModel<T>,
    upsilon: &DMatrix<T>,
    washout: usize,
    xi0: DVector<T>,
) -> Result<DMatrix<T>, EsnError> {
    let len = upsilon.nrows();
    if len <= washout {
        return Err(EsnError::SequenceTooShort { len, washout });
    }
    let mut states = DMatrix::zeros(len - washout, model.n());
    let mut xi = xi0;
    for k in 0..len {
        xi = step(model, &xi, &upsilon.row(k).transpose())?;
        if k >= washout {
            states.row_mut(k - washout).copy_from(&xi.transpose());
        }
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, density: f64, seed: u64) -> EsnConfig {
        EsnConfig {
            n,
            n_upsilon: 2,
            density,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn norm_is_rho_for_any_seed() {
        for seed in [1, 42, 99] {
            let m: EsnModel<f64> = init_reservoir(&cfg(60, 0.9, seed)).unwrap();
            assert!((m.w_rr.clone().singular_values().max() - 0.5).abs() < 1e-10);
        }
        let a: EsnModel<f64> = init_reservoir(&cfg(60, 0.9, 1)).unwrap();
        let b: EsnModel<f64> = init_reservoir(&cfg(60, 0.9, 2)).unwrap();
        assert_ne!(a.w_rr, b.w_rr);
    }

    #[test]
    fn dense_draw_is_reproducible() {
        let a: EsnModel<f64> = init_reservoir(&cfg(2, 1.0, 5)).unwrap();
        let b: EsnModel<f64> = init_reservoir(&cfg(2, 1.0, 5)).unwrap();
        assert_eq!(a, b);
        assert!(a.w_rr.iter().all(|&v| v != 0.0));
    }

    #[test]
    fn density_is_respected() {
        let m: EsnModel<f64> = init_reservoir(&cfg(200, 0.9, 42)).unwrap();
        let frac = m.w_rr.iter().filter(|&&v| v != 0.0).count() as f64 / 40_000.0;
        assert!((frac - 0.9).abs() < 0.01, "{frac}");
    }

    #[test]
    fn zero_in_zero_out() {
        let mut m: EsnModel<f64> = init_reservoir(&cfg(5, 1.0, 3)).unwrap();
        m.w_bias.fill(0.0);
        let next = step(&m, &DVector::zeros(5), &DVector::zeros(2)).unwrap();
        assert_eq!(next, DVector::zeros(5));
        let states = run_collect(&m, &DMatrix::zeros(20, 2), 0).unwrap();
        assert_eq!(states.nrows(), 20);
        assert!(states.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_matches_scalar_loop() {
        let m: EsnModel<f64> = init_reservoir(&EsnConfig {
            n: 3,
            ..cfg(3, 1.0, 11)
        })
        .unwrap();
        let xi = DVector::from_column_slice(&[0.2, -0.4, 0.9]);
        let v = DVector::from_column_slice(&[0.3, -1.1]);
        let got = step(&m, &xi, &v).unwrap();
        let g = m.config.gamma;
        for i in 0..3 {
            let mut a = m.w_bias[i];
            for j in 0..3 {
                a += m.w_rr[(i, j)] * xi[j];
            }
            for j in 0..2 {
                a += m.w_vr[(i, j)] * v[j];
            }
            let expect = (1.0 - g) * xi[i] + g * a.tanh();
            assert!((got[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn leak_of_one_is_the_plain_update() {
        let mut m: EsnModel<f64> = init_reservoir(&cfg(4, 1.0, 2)).unwrap();
        m.config.gamma = 1.0;
        let xi = DVector::from_element(4, 0.5);
        let v = DVector::from_element(2, -0.25);
        let plain = (&m.w_rr * &xi + &m.w_vr * &v + &m.w_bias).map(f64::tanh);
        assert_eq!(step(&m, &xi, &v).unwrap(), plain);
    }

    #[test]
    fn washout_drops_leading_states() {
        let m: EsnModel<f64> = init_reservoir(&cfg(8, 0.5, 4)).unwrap();
        let u = DMatrix::from_fn(30, 2, |k, j| ((k + j) as f64 * 0.37).sin());
        let full = run_collect(&m, &u, 0).unwrap();
        let cut = run_collect(&m, &u, 10).unwrap();
        assert_eq!(cut, full.rows(10, 20).into_owned());
        assert_eq!(
            run_collect(&m, &u, 30),
            Err(EsnError::SequenceTooShort { len: 30, washout: 30 })
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m: EsnModel<f64> = init_reservoir(&cfg(4, 1.0, 2)).unwrap();
        assert!(matches!(
            step(&m, &DVector::zeros(3), &DVector::zeros(2)),
            Err(EsnError::Dimension(_))
        ));
    }
}

use crate::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Description of an exogenous scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSpec {
    Zero,
    /// `amplitude · Σ sin(ωᵢ t)` with angular frequencies in rad/s.
    Sinusoid {
        amplitude: f64,
        frequencies: Vec<f64>,
    },
    /// White Gaussian noise through a first-order low-pass at `cutoff_hz`,
    /// rescaled so the largest magnitude equals `amplitude_bound`, held
    /// constant over each sampling period.
    FilteredNoise {
        cutoff_hz: f64,
        amplitude_bound: f64,
        seed: u64,
    },
}

impl DisturbanceSpec {
    /// `0.25√2 (sin t + sin 2t)`.
    pub fn reference_sinusoid() -> Self {
        DisturbanceSpec::Sinusoid {
            amplitude: 0.25 * SQRT_2,
            frequencies: vec![1.0, 2.0],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            DisturbanceSpec::Zero => Ok(()),
            DisturbanceSpec::Sinusoid { amplitude, frequencies } => {
                if !amplitude.is_finite() || frequencies.iter().any(|f| !f.is_finite()) {
                    return Err("sinusoid parameters must be finite".into());
                }
                Ok(())
            }
            DisturbanceSpec::FilteredNoise {
                cutoff_hz,
                amplitude_bound,
                ..
            } => {
                if !(*cutoff_hz > 0.0 && cutoff_hz.is_finite()) {
                    return Err(format!("cutoff_hz = {cutoff_hz} must be positive"));
                }
                if !(*amplitude_bound >= 0.0 && amplitude_bound.is_finite()) {
                    return Err(format!("amplitude_bound = {amplitude_bound} must be nonnegative"));
                }
                Ok(())
            }
        }
    }

    /// Largest magnitude the realized signal can take, when known in closed
    /// form; sinusoids use the sum of amplitudes.
    pub fn magnitude_bound(&self) -> f64 {
        match self {
            DisturbanceSpec::Zero => 0.0,
            DisturbanceSpec::Sinusoid { amplitude, frequencies } => amplitude.abs() * frequencies.len() as f64,
            DisturbanceSpec::FilteredNoise { amplitude_bound, .. } => *amplitude_bound,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            DisturbanceSpec::FilteredNoise {
                cutoff_hz,
                amplitude_bound,
                ..
            } => DisturbanceSpec::FilteredNoise {
                cutoff_hz: *cutoff_hz,
                amplitude_bound: *amplitude_bound,
                seed,
            },
            other => other.clone(),
        }
    }

    /// Fixes the signal over `n_samples` periods of length `ts`.
    pub fn realize<T: Real>(&self, ts: f64, n_samples: usize) -> Disturbance<T> {
        match self {
            DisturbanceSpec::Zero => Disturbance::Zero,
            DisturbanceSpec::Sinusoid { amplitude, frequencies } => Disturbance::Sinusoid {
                amplitude: T::lit(*amplitude),
                frequencies: frequencies.iter().map(|&w| T::lit(w)).collect(),
            },
            DisturbanceSpec::FilteredNoise {
                cutoff_hz,
                amplitude_bound,
                seed,
            } => Disturbance::Held {
                ts: T::lit(ts),
                samples: filtered_noise(*cutoff_hz, *amplitude_bound, *seed, ts, n_samples)
                    .into_iter()
                    .map(T::lit)
                    .collect(),
            },
        }
    }
}

/// Samples discarded so the filter starts near its stationary regime.
const BURN_IN: usize = 200;

/// `y[k] = a y[k−1] + (1−a) w[k]`, `a = exp(−2π f_c Ts)`, scaled so that
/// `max |y| = bound`.
pub fn filtered_noise(cutoff_hz: f64, bound: f64, seed: u64, ts: f64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (-2.0 * PI * cutoff_hz * ts).exp();
    let mut y = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..BURN_IN + n {
        let w: f64 = StandardNormal.sample(&mut rng);
        y = a * y + (1.0 - a) * w;
        if k >= BURN_IN {
            out.push(y);
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let scale = bound / peak;
        for v in &mut out {
            *v = (*v * scale).clamp(-bound, bound);
        }
    }
    out
}

/// A realized scalar signal evaluated at continuous time.
#[derive(Debug, Clone, PartialEq)]
pub enum Disturbance<T: Real> {
    Zero,
    Sinusoid {
        amplitude: T,
        frequencies: Vec<T>,
    },
    /// Piecewise constant: `samples[k]` on `[k·ts, (k+1)·ts)`, zero afterwards.
    Held {
        ts: T,
        samples: Vec<T>,
    },
}

impl<T: Real> Disturbance<T> {
    pub fn at(&self, t: T) -> T {
        match self {
            Disturbance::Zero => T::ZERO,
            Disturbance::Sinusoid { amplitude, frequencies } => {
                *amplitude * frequencies.iter().fold(T::ZERO, |acc, &w| acc + (w * t).sin())
            }
            Disturbance::Held { ts, samples } => {
                // Nudge so that t = k·ts lands in period k despite rounding.
                let k = (t / *ts + T::lit(1e-9)).floor().to_f64_lossy();
                if k < 0.0 {
                    return T::ZERO;
                }
                samples.get(k as usize).copied().unwrap_or(T::ZERO)
            }
        }
    }

    /// Value at each sampling instant `k·ts`.
    pub fn sampled(&self, ts: T, n: usize) -> Vec<T> {
        (0..n).map(|k| self.at(ts * T::from_count(k))).collect()
    }
}

/// Excitation `u₂` and disturbance `d` for training-data collection, with
/// independent streams derived from one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSignals<T: Real> {
    pub u2: Vec<T>,
    pub d: Disturbance<T>,
}

pub fn gen_training_signals<T: Real>(
    spec_u2: &DisturbanceSpec,
    spec_d: &DisturbanceSpec,
    length: usize,
    ts: f64,
    seed: u64,
) -> TrainingSignals<T> {
    let u2 = spec_u2
        .with_seed(seed.wrapping_mul(2).wrapping_add(1))
        .realize::<T>(ts, length);
    let d = spec_d
        .with_seed(seed.wrapping_mul(2).wrapping_add(2))
        .realize::<T>(ts, length);
    TrainingSignals {
        u2: u2.sampled(T::lit(ts), length),
        d,
    }
}

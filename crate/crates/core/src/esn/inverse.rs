use super::reservoir::{run_collect, step, EsnModel};
use super::ridge::ridge_train;
use super::EsnError;
use crate::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Y,
    U1,
    U2,
}

/// One block of the network input: `signal` taken `lag` samples before the
/// row's time index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub signal: Signal,
    pub lag: usize,
}

/// Delay embedding of the inverse model: `m` past samples spaced `delta`
/// apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub m: usize,
    pub delta: usize,
    #[serde(default = "one")]
    pub n_y: usize,
    #[serde(default = "one")]
    pub n_u: usize,
}

fn one() -> usize {
    1
}

impl EmbeddingSpec {
    pub fn new(m: usize, delta: usize) -> Result<Self, EsnError> {
        let spec = Self {
            m,
            delta,
            n_y: 1,
            n_u: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EsnError> {
        if self.m == 0 || self.delta == 0 || self.n_y == 0 || self.n_u == 0 {
            return Err(EsnError::InvalidConfig(format!(
                "embedding needs m, delta, n_y, n_u ≥ 1 (got {}, {}, {}, {})",
                self.m, self.delta, self.n_y, self.n_u
            )));
        }
        Ok(())
    }

    /// Slot order of a training row at time `k`:
    /// `y[k]`, `y[k−δ] … y[k−mδ]`, `u₁[k−δ] … u₁[k−mδ]`, `u₂[k−2δ] … u₂[k−(m+1)δ]`.
    pub fn layout(&self) -> Vec<Slot> {
        let d = self.delta;
        let mut slots = vec![Slot {
            signal: Signal::Y,
            lag: 0,
        }];
        slots.extend((1..=self.m).map(|j| Slot {
            signal: Signal::Y,
            lag: j * d,
        }));
        slots.extend((1..=self.m).map(|j| Slot {
            signal: Signal::U1,
            lag: j * d,
        }));
        slots.extend((2..=self.m + 1).map(|j| Slot {
            signal: Signal::U2,
            lag: j * d,
        }));
        slots
    }

    pub fn input_dim(&self) -> usize {
        (self.m + 1) * self.n_y + 2 * self.m * self.n_u
    }

    /// Deepest lag, `(m+1)δ`.
    pub fn horizon(&self) -> usize {
        (self.m + 1) * self.delta
    }

    fn width(&self, s: Signal) -> usize {
        match s {
            Signal::Y => self.n_y,
            Signal::U1 | Signal::U2 => self.n_u,
        }
    }
}

/// Inputs `Υ` and targets `Σ` of the inverse model. Row `r` belongs to time
/// index `first_k + r` of the source trace.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseDataset<T: Real> {
    pub upsilon: DMatrix<T>,
    pub sigma: DMatrix<T>,
    pub first_k: usize,
}

impl<T: Real> InverseDataset<T> {
    pub fn len(&self) -> usize {
        self.upsilon.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drives the reservoir over `Υ`, drops `washout` states and fits the
    /// readout against the matching rows of `Σ`.
    pub fn fit(&self, model: EsnModel<T>, washout: usize) -> Result<EsnModel<T>, EsnError> {
        let states = run_collect(&model, &self.upsilon, washout)?;
        let targets = self.sigma.rows(washout, self.len() - washout).into_owned();
        let w_out = ridge_train(&states, &targets, T::lit(model.config.lambda_ridge))?;
        model.with_readout(w_out)
    }
}

/// Builds one row per `k ∈ [(m+1)δ, len)` with the target `u₂[k−δ]`.
/// Signals are time-major: row `k` of each matrix is the sample at `k`.
pub fn build_inverse_dataset<T: Real>(
    y: &DMatrix<T>,
    u1: &DMatrix<T>,
    u2: &DMatrix<T>,
    spec: &EmbeddingSpec,
) -> Result<InverseDataset<T>, EsnError> {
    spec.validate()?;
    let len = y.nrows();
    if u1.nrows() != len || u2.nrows() != len {
        return Err(EsnError::Dimension(format!(
            "signal lengths {}, {}, {} differ",
            len,
            u1.nrows(),
            u2.nrows()
        )));
    }
    if y.ncols() != spec.n_y || u1.ncols() != spec.n_u || u2.ncols() != spec.n_u {
        return Err(EsnError::Dimension("signal widths do not match the embedding".into()));
    }
    let first_k = spec.horizon();
    if len <= first_k {
        return Err(EsnError::TraceTooShort {
            len,
            needed: first_k + 1,
        });
    }
    let rows = len - first_k;
    let layout = spec.layout();
    let mut upsilon = DMatrix::zeros(rows, spec.input_dim());
    let mut sigma = DMatrix::zeros(rows, spec.n_u);
    for r in 0..rows {
        let k = first_k + r;
        let mut col = 0;
        for slot in &layout {
            let src = match slot.signal {
                Signal::Y => y,
                Signal::U1 => u1,
                Signal::U2 => u2,
            };
            let w = spec.width(slot.signal);
            upsilon.view_mut((r, col), (1, w)).copy_from(&src.row(k - slot.lag));
            col += w;
        }
        sigma.row_mut(r).copy_from(&u2.row(k - spec.delta));
    }
    Ok(InverseDataset {
        upsilon,
        sigma,
        first_k,
    })
}

/// Inverse-model controller: the training layout shifted forward by `δ`, so
/// the `y[k]` slot holds the reference `r[k+δ]` and every lagged slot holds
/// the sample `δ` steps more recent than during training. Histories start
/// zero-padded.
#[derive(Debug, Clone)]
pub struct InverseController<T: Real> {
    model: EsnModel<T>,
    spec: EmbeddingSpec,
    xi: DVector<T>,
    /// Most recent first.
    y_hist: VecDeque<DVector<T>>,
    u1_hist: VecDeque<DVector<T>>,
    /// `u₂[k−1], u₂[k−2], …` while computing step `k`.
    u2_hist: VecDeque<DVector<T>>,
}

impl<T: Real> InverseController<T> {
    pub fn new(model: EsnModel<T>, spec: EmbeddingSpec) -> Result<Self, EsnError> {
        spec.validate()?;
        if model.n_upsilon() != spec.input_dim() {
            return Err(EsnError::Dimension(format!(
                "reservoir takes {} inputs, embedding produces {}",
                model.n_upsilon(),
                spec.input_dim()
            )));
        }
        if model.w_out.nrows() != spec.n_u {
            return Err(EsnError::Dimension("readout must have one row per u₂ channel".into()));
        }
        let mut c = Self {
            xi: DVector::zeros(model.n()),
            model,
            spec,
            y_hist: VecDeque::new(),
            u1_hist: VecDeque::new(),
            u2_hist: VecDeque::new(),
        };
        c.reset();
        Ok(c)
    }

    pub fn reset(&mut self) {
        let s = self.spec;
        let depth = s.m * s.delta + 1;
        self.xi.fill(T::ZERO);
        self.y_hist = VecDeque::from(vec![DVector::zeros(s.n_y); depth]);
        self.u1_hist = VecDeque::from(vec![DVector::zeros(s.n_u); depth]);
        self.u2_hist = VecDeque::from(vec![DVector::zeros(s.n_u); depth]);
    }

    pub fn model(&self) -> &EsnModel<T> {
        &self.model
    }

    pub fn spec(&self) -> &EmbeddingSpec {
        &self.spec
    }

    /// Records `y[k]`, `u₁[k]`, advances the reservoir once and returns the
    /// unsaturated `ū₂[k]`. Call [`Self::commit_u2`] with the applied value
    /// before the next sample.
    pub fn compute(&mut self, y: &DVector<T>, u1: &DVector<T>, r_future: &DVector<T>) -> DVector<T> {
        push_front(&mut self.y_hist, y.clone());
        push_front(&mut self.u1_hist, u1.clone());
        let d = self.spec.delta;
        let mut upsilon = DVector::zeros(self.spec.input_dim());
        let mut col = 0;
        for slot in self.spec.layout() {
            let v = match (slot.signal, slot.lag) {
                (Signal::Y, 0) => r_future,
                (Signal::Y, lag) => &self.y_hist[lag - d],
                (Signal::U1, lag) => &self.u1_hist[lag - d],
                // lag − δ ≥ δ ≥ 1 samples back; index 0 is u₂[k−1].
                (Signal::U2, lag) => &self.u2_hist[lag - d - 1],
            };
            upsilon.rows_mut(col, v.len()).copy_from(v);
            col += v.len();
        }
        self.xi = step(&self.model, &self.xi, &upsilon).expect("dimensions checked at construction");
        self.model.readout(&self.xi)
    }

    pub fn commit_u2(&mut self, u2: &DVector<T>) {
        push_front(&mut self.u2_hist, u2.clone());
    }
}

fn push_front<T: Real>(buf: &mut VecDeque<DVector<T>>, v: DVector<T>) {
    buf.pop_back();
    buf.push_front(v);
}

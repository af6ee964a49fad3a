use super::{
    enumerate_vertices, AffineMatrix, Annihilator, ModelError, MonomialBasis, ParameterSet, StateDomain, Vertex,
};
use crate::Real;
use nalgebra::{DMatrix, DVector};

/// One term `coeff · θ_k · x^exponents` of a polynomial matrix entry.
/// `theta` lists the θ factors; more than one makes the term non-affine.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm<T: Real> {
    pub row: usize,
    pub col: usize,
    pub exponents: Vec<u32>,
    pub theta: Vec<usize>,
    pub coeff: T,
}

/// Splits a polynomial matrix `A(x, θ)` into `A₀(θ) + Π(x)ᵀA₁(θ)`.
///
/// The coefficient of monomial j at `(row, col)` lands in `A₁[j·n_x + row, col]`.
pub fn decompose_dynamics<T: Real>(
    n_x: usize,
    n_theta: usize,
    terms: &[PolyTerm<T>],
    basis: &MonomialBasis,
) -> Result<(AffineMatrix<T>, AffineMatrix<T>), ModelError> {
    let mut a0 = AffineMatrix::zeros(n_x, n_x, n_theta);
    let mut a1 = AffineMatrix::zeros(basis.lifted_dim(), n_x, n_theta);
    for t in terms {
        if t.row >= n_x || t.col >= n_x {
            return Err(ModelError::Dimension(format!(
                "term at ({}, {}) outside a {n_x}x{n_x} matrix",
                t.row, t.col
            )));
        }
        if t.exponents.len() != n_x {
            return Err(ModelError::Dimension(format!(
                "exponent vector of length {} for n_x = {n_x}",
                t.exponents.len()
            )));
        }
        let target = match t.theta.as_slice() {
            [] => None,
            [k] if *k < n_theta => Some(*k),
            [k] => {
                return Err(ModelError::Dimension(format!(
                    "theta index {k} out of range (n_theta = {n_theta})"
                )))
            }
            _ => return Err(ModelError::NonAffineTheta(t.theta.clone())),
        };
        let degree: u32 = t.exponents.iter().sum();
        let (mat, row) = if degree == 0 {
            (&mut a0, t.row)
        } else {
            let j = basis
                .index_of(&t.exponents)
                .ok_or_else(|| ModelError::MonomialNotInBasis(t.exponents.clone()))?;
            (&mut a1, j * n_x + t.row)
        };
        let slot = match target {
            None => &mut mat.constant,
            Some(k) => &mut mat.coeffs[k],
        };
        slot[(row, t.col)] += t.coeff;
    }
    Ok((a0, a1))
}

/// Uncertain polynomial plant in lifted quasi-LPV form
/// `x⁺ = (A₀(θ) + Π(x)ᵀA₁(θ))x + B_u(θ)u + B_d(θ)d`, `y = Cx`.
#[derive(Debug, Clone)]
pub struct PolyQuasiLpvModel<T: Real> {
    pub a0: AffineMatrix<T>,
    pub a1: AffineMatrix<T>,
    pub bu: AffineMatrix<T>,
    pub bd: AffineMatrix<T>,
    pub c: DMatrix<T>,
    pub basis: MonomialBasis,
    pub domain: StateDomain<T>,
    pub theta: ParameterSet<T>,
    pub eta_u: T,
    pub eta_d: T,
    annihilator: Annihilator<T>,
}

impl<T: Real> PolyQuasiLpvModel<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a0: AffineMatrix<T>,
        a1: AffineMatrix<T>,
        bu: AffineMatrix<T>,
        bd: AffineMatrix<T>,
        c: DMatrix<T>,
        basis: MonomialBasis,
        domain: StateDomain<T>,
        theta: ParameterSet<T>,
        eta_u: T,
        eta_d: T,
    ) -> Result<Self, ModelError> {
        let n = basis.n_x();
        let nt = theta.dim();
        let check = |name: &str, m: &AffineMatrix<T>, shape: (usize, usize)| {
            if m.shape() != shape || m.n_params() != nt {
                Err(ModelError::Dimension(format!(
                    "{name} is {:?} with {} parameters, expected {shape:?} with {nt}",
                    m.shape(),
                    m.n_params()
                )))
            } else {
                Ok(())
            }
        };
        check("A0", &a0, (n, n))?;
        check("A1", &a1, (basis.lifted_dim(), n))?;
        check("Bu", &bu, (n, bu.ncols()))?;
        check("Bd", &bd, (n, bd.ncols()))?;
        if bu.ncols() == 0 {
            return Err(ModelError::Dimension("Bu has no columns".into()));
        }
        if c.ncols() != n {
            return Err(ModelError::Dimension(format!("C has {} columns, n_x = {n}", c.ncols())));
        }
        if domain.n_x() != n {
            return Err(ModelError::Dimension("state domain dimension mismatch".into()));
        }
        for (name, eta) in [("eta_u", eta_u), ("eta_d", eta_d)] {
            if !(eta > T::ZERO) || !eta.is_finite() {
                return Err(ModelError::NonPositiveEta(name, eta.to_f64_lossy()));
            }
        }
        let annihilator = Annihilator::build(&basis);
        Ok(Self {
            a0,
            a1,
            bu,
            bd,
            c,
            basis,
            domain,
            theta,
            eta_u,
            eta_d,
            annihilator,
        })
    }

    /// Forward-Euler discretization of the Van der Pol oscillator with an
    /// output integrator, sampled at `ts`, with `|x₁| ≤ 2`, `θ ∈ [0.5, 0.9]`
    /// and `η_u = η_d = 1`.
    pub fn van_der_pol(ts: T) -> Self {
        let basis = MonomialBasis::full(3, 2, &[0]).expect("static basis");
        let one = T::ONE;
        let term = |row, col, exponents: [u32; 3], theta: &[usize], coeff| PolyTerm {
            row,
            col,
            exponents: exponents.to_vec(),
            theta: theta.to_vec(),
            coeff,
        };
        let terms = [
            term(0, 0, [0, 0, 0], &[], one),
            term(0, 1, [0, 0, 0], &[], ts),
            term(1, 0, [0, 0, 0], &[], -ts),
            term(1, 1, [0, 0, 0], &[], one),
            term(1, 1, [0, 0, 0], &[0], ts),
            term(1, 1, [2, 0, 0], &[0], -ts),
            term(2, 0, [0, 0, 0], &[], ts),
            term(2, 2, [0, 0, 0], &[], one),
        ];
        let (a0, a1) = decompose_dynamics(3, 1, &terms, &basis).expect("static plant");
        let b = DMatrix::from_column_slice(3, 1, &[T::ZERO, ts, T::ZERO]);
        Self::new(
            a0,
            a1,
            AffineMatrix::constant(b.clone(), 1),
            AffineMatrix::constant(b, 1),
            DMatrix::from_row_slice(1, 3, &[one, T::ZERO, T::ZERO]),
            basis,
            StateDomain::symmetric_box(3, &[(0, T::lit(2.0))]).expect("static domain"),
            ParameterSet::interval(T::lit(0.5), T::lit(0.9)).expect("static interval"),
            one,
            one,
        )
        .expect("static model is consistent")
    }

    pub fn n_x(&self) -> usize {
        self.basis.n_x()
    }

    pub fn n_u(&self) -> usize {
        self.bu.ncols()
    }

    pub fn n_d(&self) -> usize {
        self.bd.ncols()
    }

    pub fn n_w(&self) -> usize {
        self.n_u() + self.n_d()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.dim()
    }

    pub fn annihilator(&self) -> &Annihilator<T> {
        &self.annihilator
    }

    /// Returns a copy whose parameter set is replaced.
    pub fn with_theta_set(&self, theta: ParameterSet<T>) -> Result<Self, ModelError> {
        if theta.dim() != self.n_theta() {
            return Err(ModelError::Dimension("parameter dimension mismatch".into()));
        }
        let mut m = self.clone();
        m.theta = theta;
        Ok(m)
    }

    /// `A(x, θ) = A₀(θ) + Π(x)ᵀA₁(θ)`.
    pub fn a_matrix(&self, x: &DVector<T>, theta: &DVector<T>) -> DMatrix<T> {
        let pi = self.basis.eval_pi(x).expect("state dimension checked by caller");
        self.a0.eval(theta.as_slice()) + pi.transpose() * self.a1.eval(theta.as_slice())
    }

    /// `B_w(θ) = [B_u(θ)/η_u, B_d(θ)/η_d]`; see [`build_bw`].
    pub fn bw(&self) -> AffineMatrix<T> {
        build_bw(&self.bu, &self.bd, self.eta_u, self.eta_d).expect("etas validated at construction")
    }

    /// One step of the discrete-time plant.
    pub fn step(&self, x: &DVector<T>, theta: &DVector<T>, u: &DVector<T>, d: &DVector<T>) -> DVector<T> {
        let th = theta.as_slice();
        self.a_matrix(x, theta) * x + self.bu.eval(th) * u + self.bd.eval(th) * d
    }

    /// Vertices of `𝒳 × Θ` over the active variables.
    pub fn vertices(&self) -> Result<Vec<Vertex<T>>, ModelError> {
        enumerate_vertices(&self.domain, self.basis.active_vars(), &self.theta)
    }
}

/// Joint input matrix `B_w(θ) = [B_u(θ)/η_u, B_d(θ)/η_d]`.
///
/// Paired with [`normalized_input`], `B_w w = B_u u₂ + B_d d` and
/// `wᵀw = η_u²u₂ᵀu₂ + η_d²dᵀd ≤ 1` whenever `u₂ ∈ 𝒰` and `d ∈ 𝒟`.
pub fn build_bw<T: Real>(
    bu: &AffineMatrix<T>,
    bd: &AffineMatrix<T>,
    eta_u: T,
    eta_d: T,
) -> Result<AffineMatrix<T>, ModelError> {
    if !(eta_u > T::ZERO) {
        return Err(ModelError::NonPositiveEta("eta_u", eta_u.to_f64_lossy()));
    }
    if !(eta_d > T::ZERO) {
        return Err(ModelError::NonPositiveEta("eta_d", eta_d.to_f64_lossy()));
    }
    Ok(bu.scale(T::ONE / eta_u).hstack(&bd.scale(T::ONE / eta_d)))
}

/// `w = [η_u u₂; η_d d]`, the input the ISS certificate is stated for.
pub fn normalized_input<T: Real>(u2: &DVector<T>, d: &DVector<T>, eta_u: T, eta_d: T) -> DVector<T> {
    let mut w = DVector::zeros(u2.len() + d.len());
    w.rows_mut(0, u2.len()).copy_from(&(u2 * eta_u));
    w.rows_mut(u2.len(), d.len()).copy_from(&(d * eta_d));
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    const TS: f64 = 0.1;

    #[test]
    fn vdp_decomposition_matches_closed_form() {
        let m = PolyQuasiLpvModel::<f64>::van_der_pol(TS);
        let theta = 0.8;
        let a0 = m.a0.eval(&[theta]);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, TS, 0.0, -TS, TS * theta + 1.0, 0.0, TS, 0.0, 1.0]);
        assert!((a0 - expected).abs().max() < 1e-15);
        let a1 = m.a1.eval(&[theta]);
        assert_eq!(a1.shape(), (6, 3));
        for i in 0..6 {
            for j in 0..3 {
                let want = if (i, j) == (4, 1) { -TS * theta } else { 0.0 };
                assert_eq!(a1[(i, j)], want, "A1[{i},{j}]");
            }
        }
    }

    #[test]
    fn vdp_reconstruction() {
        let m = PolyQuasiLpvModel::<f64>::van_der_pol(TS);
        for &(x1, th) in &[(0.0, 0.5), (1.3, 0.75), (-2.0, 0.9)] {
            let x = DVector::from_vec(vec![x1, 0.4, -1.0]);
            let a = m.a_matrix(&x, &DVector::from_element(1, th));
            let direct = 1.0 - TS * th * (x1 * x1 - 1.0);
            assert!((a[(1, 1)] - direct).abs() < 1e-14);
            assert_eq!(a[(0, 1)], TS);
        }
    }

    #[test]
    fn constant_matrix_has_zero_a1() {
        let basis = MonomialBasis::full(2, 2, &[0, 1]).unwrap();
        let terms = vec![
            PolyTerm {
                row: 0,
                col: 0,
                exponents: vec![0, 0],
                theta: vec![],
                coeff: 0.5,
            },
            PolyTerm {
                row: 1,
                col: 0,
                exponents: vec![0, 0],
                theta: vec![0],
                coeff: 2.0,
            },
        ];
        let (a0, a1) = decompose_dynamics(2, 1, &terms, &basis).unwrap();
        assert!(a1.constant.iter().chain(a1.coeffs[0].iter()).all(|v| *v == 0.0));
        assert_eq!(a0.eval(&[3.0])[(1, 0)], 6.0);
    }

    #[test]
    fn overflowing_monomial_is_rejected() {
        let basis = MonomialBasis::full(2, 1, &[0]).unwrap();
        let t = PolyTerm {
            row: 0,
            col: 0,
            exponents: vec![2, 0],
            theta: vec![],
            coeff: 1.0,
        };
        assert!(matches!(
            decompose_dynamics(2, 0, &[t], &basis),
            Err(ModelError::MonomialNotInBasis(_))
        ));
    }

    #[test]
    fn product_of_thetas_is_rejected() {
        let basis = MonomialBasis::full(1, 1, &[0]).unwrap();
        let t = PolyTerm {
            row: 0,
            col: 0,
            exponents: vec![1],
            theta: vec![0, 1],
            coeff: 1.0,
        };
        assert!(matches!(
            decompose_dynamics(1, 2, &[t], &basis),
            Err(ModelError::NonAffineTheta(_))
        ));
    }

    #[test]
    fn vdp_bw() {
        let m = PolyQuasiLpvModel::<f64>::van_der_pol(TS);
        let bw = m.bw().eval(&[0.7]);
        assert_eq!(bw, DMatrix::from_row_slice(3, 2, &[0.0, 0.0, TS, TS, 0.0, 0.0]));
    }

    #[test]
    fn eta_u_rescales_first_column_only() {
        let b = AffineMatrix::constant(DMatrix::from_column_slice(2, 1, &[1.0, 3.0]), 0);
        let bw1 = build_bw(&b, &b, 1.0, 1.0).unwrap().eval(&[]);
        let bw2 = build_bw(&b, &b, 2.0, 1.0).unwrap().eval(&[]);
        assert_eq!(bw2.column(0), bw1.column(0) * 0.5);
        assert_eq!(bw2.column(1), bw1.column(1));
        assert!(build_bw(&b, &b, 0.0, 1.0).is_err());
        assert!(build_bw(&b, &b, 1.0, -1.0).is_err());
    }

    #[test]
    fn boundary_inputs_reach_unit_sphere() {
        let b = AffineMatrix::constant(DMatrix::from_column_slice(2, 1, &[1.0, 3.0]), 0);
        for (eta_u, eta_d) in [(1.0_f64, 1.0), (2.0, 0.5), (0.3, 7.0)] {
            let u2 = DVector::from_element(1, 1.0 / (2.0_f64.sqrt() * eta_u));
            let d = DVector::from_element(1, -1.0 / (2.0_f64.sqrt() * eta_d));
            let w = normalized_input(&u2, &d, eta_u, eta_d);
            assert!((w.norm_squared() - 1.0).abs() < 1e-14);
            let bw = build_bw(&b, &b, eta_u, eta_d).unwrap().eval(&[]);
            let direct = b.eval(&[]) * &u2 + b.eval(&[]) * &d;
            assert!((bw * w - direct).amax() < 1e-14);
        }
    }

    #[test]
    fn origin_is_equilibrium() {
        let m = PolyQuasiLpvModel::<f64>::van_der_pol(TS);
        let z = DVector::zeros(3);
        let x = m.step(
            &z,
            &DVector::from_element(1, 0.6),
            &DVector::zeros(1),
            &DVector::zeros(1),
        );
        assert_eq!(x, z);
    }
}

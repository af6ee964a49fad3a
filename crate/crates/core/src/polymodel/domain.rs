use super::ModelError;
use crate::Real;
use nalgebra::DVector;

/// Polyhedral state domain `{x : hᵢᵀx ≤ 1}`.
///
/// Coordinates that never enter the nonlinearity may be left unbounded;
/// only the active variables need finite bounds for vertex enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDomain<T: Real> {
    n_x: usize,
    half_planes: Vec<DVector<T>>,
}

impl<T: Real> StateDomain<T> {
    pub fn new(n_x: usize, half_planes: Vec<DVector<T>>) -> Result<Self, ModelError> {
        if let Some(h) = half_planes.iter().find(|h| h.len() != n_x) {
            return Err(ModelError::Dimension(format!(
                "half-plane of length {} in a {n_x}-dimensional domain",
                h.len()
            )));
        }
        if half_planes.iter().any(|h| h.iter().any(|v| !v.is_finite())) {
            return Err(ModelError::Invalid("half-plane with non-finite entry".into()));
        }
        Ok(Self { n_x, half_planes })
    }

    /// `{x : |x_var| ≤ bound}` for each `(var, bound)`.
    pub fn symmetric_box(n_x: usize, bounds: &[(usize, T)]) -> Result<Self, ModelError> {
        let mut planes = Vec::new();
        for &(var, b) in bounds {
            if var >= n_x || b <= T::ZERO {
                return Err(ModelError::Invalid(format!("bad box bound ({var}, {b})")));
            }
            for sign in [T::ONE, -T::ONE] {
                let mut h = DVector::zeros(n_x);
                h[var] = sign / b;
                planes.push(h);
            }
        }
        Self::new(n_x, planes)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn half_planes(&self) -> &[DVector<T>] {
        &self.half_planes
    }

    pub fn contains(&self, x: &DVector<T>) -> bool {
        self.half_planes.iter().all(|h| h.dot(x) <= T::ONE)
    }

    /// Lower and upper bound on `x_var` implied by the axis-aligned
    /// half-planes. Oblique planes do not contribute.
    pub fn axis_bounds(&self, var: usize) -> (Option<T>, Option<T>) {
        let mut lo: Option<T> = None;
        let mut hi: Option<T> = None;
        for h in &self.half_planes {
            let axis_aligned = h.iter().enumerate().all(|(i, v)| i == var || *v == T::ZERO);
            if !axis_aligned || h[var] == T::ZERO {
                continue;
            }
            let b = T::ONE / h[var];
            if h[var] > T::ZERO {
                hi = Some(hi.map_or(b, |c| c.min(b)));
            } else {
                lo = Some(lo.map_or(b, |c| c.max(b)));
            }
        }
        (lo, hi)
    }
}

/// Polytopic parameter set given by its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<T: Real> {
    vertices: Vec<DVector<T>>,
}

impl<T: Real> ParameterSet<T> {
    pub fn new(vertices: Vec<DVector<T>>) -> Result<Self, ModelError> {
        let Some(first) = vertices.first() else {
            return Err(ModelError::Invalid("parameter set needs at least one vertex".into()));
        };
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(ModelError::Dimension("parameter vertices differ in length".into()));
        }
        Ok(Self { vertices })
    }

    /// Scalar interval `[lo, hi]`.
    pub fn interval(lo: T, hi: T) -> Result<Self, ModelError> {
        if lo > hi {
            return Err(ModelError::Invalid(format!("empty interval [{lo}, {hi}]")));
        }
        if lo == hi {
            return Self::point(vec![lo]);
        }
        Self::new(vec![DVector::from_element(1, lo), DVector::from_element(1, hi)])
    }

    pub fn point(theta: Vec<T>) -> Result<Self, ModelError> {
        Self::new(vec![DVector::from_vec(theta)])
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[DVector<T>] {
        &self.vertices
    }

    pub fn centroid(&self) -> DVector<T> {
        let mut c = DVector::zeros(self.dim());
        for v in &self.vertices {
            c += v;
        }
        c / T::from_count(self.vertices.len())
    }

    /// Vertices plus the centroid when it is distinct from all of them.
    pub fn vertices_and_centroid(&self) -> Vec<DVector<T>> {
        let mut out = self.vertices.clone();
        let c = self.centroid();
        if !out.contains(&c) {
            out.push(c);
        }
        out
    }
}

/// One vertex of `𝒳 × Θ` at which the synthesis LMI is imposed.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T: Real> {
    pub x: DVector<T>,
    pub theta: DVector<T>,
}

/// Cartesian product of the active-variable bounds with the Θ vertices.
/// Inactive coordinates are pinned to zero.
pub fn enumerate_vertices<T: Real>(
    domain: &StateDomain<T>,
    active: &[usize],
    theta: &ParameterSet<T>,
) -> Result<Vec<Vertex<T>>, ModelError> {
    let mut ranges = Vec::with_capacity(active.len());
    for &var in active {
        match domain.axis_bounds(var) {
            (Some(lo), Some(hi)) => ranges.push((var, lo, hi)),
            _ => return Err(ModelError::UnboundedActive(var)),
        }
    }
    let n_corners = 1usize << ranges.len();
    let mut out = Vec::with_capacity(n_corners * theta.vertices().len());
    for corner in 0..n_corners {
        let mut x = DVector::zeros(domain.n_x());
        for (bit, &(var, lo, hi)) in ranges.iter().enumerate() {
            x[var] = if corner >> bit & 1 == 0 { lo } else { hi };
        }
        for th in theta.vertices() {
            out.push(Vertex {
                x: x.clone(),
                theta: th.clone(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdp_domain_has_four_vertices() {
        let dom = StateDomain::symmetric_box(3, &[(0, 2.0)]).unwrap();
        let th = ParameterSet::interval(0.5, 0.9).unwrap();
        let v = enumerate_vertices(&dom, &[0], &th).unwrap();
        assert_eq!(v.len(), 4);
        let pairs: Vec<(f64, f64)> = v.iter().map(|v| (v.x[0], v.theta[0])).collect();
        assert_eq!(pairs, vec![(-2.0, 0.5), (-2.0, 0.9), (2.0, 0.5), (2.0, 0.9)]);
        assert!(v.iter().all(|v| v.x[1] == 0.0 && v.x[2] == 0.0));
    }

    #[test]
    fn single_theta_point_gives_two_vertices() {
        let dom = StateDomain::symmetric_box(2, &[(1, 1.0)]).unwrap();
        let th = ParameterSet::point(vec![0.75]).unwrap();
        assert_eq!(enumerate_vertices(&dom, &[1], &th).unwrap().len(), 2);
    }

    #[test]
    fn two_active_two_theta_gives_eight() {
        let dom = StateDomain::symmetric_box(3, &[(0, 1.0), (2, 3.0)]).unwrap();
        let th = ParameterSet::interval(0.0, 1.0).unwrap();
        assert_eq!(enumerate_vertices(&dom, &[0, 2], &th).unwrap().len(), 8);
    }

    #[test]
    fn unbounded_active_variable_is_an_error() {
        let dom = StateDomain::symmetric_box(3, &[(0, 1.0)]).unwrap();
        let th = ParameterSet::point(vec![0.0]).unwrap();
        assert!(matches!(
            enumerate_vertices(&dom, &[1], &th),
            Err(ModelError::UnboundedActive(1))
        ));
    }

    #[test]
    fn origin_is_interior() {
        let dom = StateDomain::symmetric_box(3, &[(0, 2.0)]).unwrap();
        assert!(dom.contains(&DVector::zeros(3)));
        assert!(!dom.contains(&DVector::from_vec(vec![2.5, 0.0, 0.0])));
    }

    #[test]
    fn centroid_of_interval() {
        let th = ParameterSet::interval(0.5, 0.9).unwrap();
        let all = th.vertices_and_centroid();
        assert_eq!(all.len(), 3);
        assert!((all[2][0] - 0.7_f64).abs() < 1e-15);
    }
}

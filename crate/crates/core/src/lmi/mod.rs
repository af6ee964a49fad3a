//! LMI synthesis of the robust polynomial state feedback, the conic
//! modeling layer and its interior-point backend, and the numerical
//! certificates checked on every returned solution.

pub mod certificate;
pub mod gain;
pub mod ipm;
pub mod program;
pub mod solution_file;
pub mod synthesis;

pub use certificate::{verify_iss_decrease, verify_iss_decrease_with, IssCertificateReport};
pub use gain::{block_diag_repeat, recover_gains, PolynomialGain};
pub use ipm::InteriorPoint;
pub use program::{AffineExpr, BackendSolution, ConicBackend, LmiProgram, MatrixVar, SolverStatus};
pub use solution_file::{SolutionFile, SolutionFileError};
pub use synthesis::{
    default_mu_grid, line_search_mu, reachable_ellipsoid, solve_synthesis, ConstraintMargins, Ellipsoid,
    LineSearchResult, MuSample, SynthesisError, SynthesisProblem, SynthesisSolution,
};

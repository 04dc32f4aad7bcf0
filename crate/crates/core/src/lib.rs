//! Numerical toolkit for the mixed-order operator
//! `-alpha Laplace + int_(0,1) (-Laplace)^s dmu(s)` on a 1D interval with
//! homogeneous nonlocal Neumann conditions: P1 discretization with a
//! truncated exterior collar, the associated eigenproblem, and critical
//! points of the energy functional in the mountain-pass and linking
//! regimes.

pub mod assembly;
pub mod error;
pub mod exterior;
pub mod measure;
pub mod mesh;
pub mod energy;
pub mod nonlinearity;
pub mod quadrature;
pub mod solvers;
pub mod spectra;
pub mod worked_examples;

pub use assembly::{anorm, OperatorMatrices, QuadratureOptions};
pub use energy::{newton_solve, NewtonOptions, Problem};
pub use error::{Error, Result};
pub use measure::{cns_constant, s_sharp, OrderBookkeeping, SpectralMeasure};
pub use mesh::{build_mesh, Mesh1D};
pub use nonlinearity::{check_ar, sv12_delta, ARReport, ARWitness, PowerNonlinearity, Source};
pub use solvers::{
    deflated_newton, solve_linking, solve_mountain_pass, verify_linking_geometry,
    verify_mp_geometry, LinkCertificate, LinkOptions, LinkOutcome, MpCertificate, MpOptions,
    MpOutcome, Solution,
};
pub use spectra::{solve_eigen, split, EigenDecomposition, Splitting};
pub use worked_examples::{run_appendix_example, run_remark_example, ExampleReport};

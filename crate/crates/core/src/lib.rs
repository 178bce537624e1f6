//! Small-amplitude periodic solutions of `u_tt - u_xx + f(u) = 0` on
//! `(0, pi)` with Dirichlet conditions, by a spectral Lyapunov-Schmidt
//! reduction: the range equation is solved by contraction, the kernel
//! equation variationally.

pub mod critical_search;
pub mod error;
pub mod evolve;
pub mod frequency;
pub mod kernel_space;
pub mod poly;
pub mod quadrature;
pub mod range_solver;
pub mod reduced_functional;
pub mod spectral_core;
pub mod verification_suite;

pub use critical_search::{SearchSettings, SolutionRecord};
pub use error::{Error, Result};
pub use frequency::{make_context, AdmissibilityReport, FrequencyContext};
pub use kernel_space::KernelVector;
pub use reduced_functional::{Case, Classification, NonlinearitySpec};
pub use spectral_core::{Lattice, NormBundle, SpectralField};

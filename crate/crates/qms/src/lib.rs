//! Finite-dimensional quantum Markov semigroups: GKSL generators, stationary
//! states, the BKM operator and its inverse, detailed balance, relative
//! entropy and its dissipation, and the gradient-flow structure of the
//! Lindblad equation.

pub mod bkm;
pub mod entropy;
pub mod error;
pub mod generator;
pub mod gradient;
pub mod linalg;
pub mod models;
pub mod simplex;
pub mod state;

pub use bkm::{check_bkm_detailed_balance, log_mean, BkmForm, DetailedBalance};
pub use entropy::{entropy_production, entropy_production_hessian_check, hessian_form, relative_entropy, HessianCheck};
pub use error::{QmsError, Result};
pub use generator::{lindblad_superoperator, parse_generator_spec, GeneratorSpec, LindbladGenerator};
pub use gradient::{check_gradient_structure, GradientOptions, GradientStructureReport};
pub use simplex::{build_simplex_metric, SimplexMetric};
pub use state::{random_state, stationary_state, DensityMatrix};

//! Hermite polynomials, Gaussian quadrature, Hermite expansions and the
//! coefficient calculus of the Ornstein–Uhlenbeck operators.

pub mod expansion;
pub mod hermite;
pub mod operators;
pub mod quadrature;
pub mod registry;
pub mod selftest;

pub use expansion::{expand, expand_with, ExpansionJson, HermiteExpansion, DEFAULT_TRUNCATION};
pub use hermite::{factorial, hermite_eval, hermite_series};
pub use operators::{
    derivative_norm_bound, derivative_norm_sq, neg_l_power, ou_semigroup, shift_down, shift_down_n,
    shift_operator, ShiftedExpansion,
};
pub use quadrature::{GaussHermite, GaussianRule};
pub use registry::FunctionSpec;
pub use selftest::{selftest, IdentityCheck};

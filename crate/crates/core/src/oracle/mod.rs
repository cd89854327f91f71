//! Exact and brute-force reference computations, coded independently of the
//! inference path.

mod brute;
mod exact;
mod quadrature;

pub use brute::{brute_force_q28, BruteForce};
pub use exact::{exact_exp_mean_interval, exact_gamma_ratio_significance, gamma_ratio_truncation};
pub use quadrature::{integrate, Integral, QuadratureRule};

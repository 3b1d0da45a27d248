//! Numerical primitives shared by the design solvers.

pub mod normal;
pub mod quadrature;
pub mod root;

pub use normal::{
    normal_cdf, normal_pdf, normal_quantile, std_normal_cdf, std_normal_pdf, std_normal_quantile,
    std_normal_sf, Probability,
};
pub use quadrature::{integrate, GaussianProxy, QuadratureSettings};
pub use root::{bracket_root, find_root, RootBracket};

//! Shared numerical machinery: quadrature, angular averaging, root finding,
//! ODE integration, and line fits. Everything here is pure and reentrant.

pub mod angular;
pub mod fit;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use angular::AngularScheme;
pub use fit::{linear_fit, log_log_fit, LineFit};
pub use ode::{integrate_dp45, OdeOptions};
pub use quadrature::{
    gauss_legendre, integrate_radial, integrate_radial_piecewise, QuadResult, RadialQuadrature,
};
pub use roots::{bisect_root, fixed_point, FixedPoint};

/// Sphere average of a scalar function (1/4pi normalization).
pub fn angular_average<G: Fn(&[f64; 3]) -> f64>(g: G, scheme: &AngularScheme) -> f64 {
    scheme.average(g)
}

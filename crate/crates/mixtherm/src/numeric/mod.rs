//! Shared numerical machinery: adaptive quadrature, root bracketing,
//! monotone interpolation and an embedded Runge-Kutta stepper.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;

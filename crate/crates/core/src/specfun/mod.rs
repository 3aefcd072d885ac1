//! Special functions used by the shell matching: Bessel functions of the
//! first kind for real order, and the real Gamma function behind them.

mod bessel;
pub mod gamma;

pub use bessel::{
    bessel_j, bessel_j_deriv, bessel_j_scaled, BesselOrder, ScaledBessel, MAX_ORDER, SCALED_MAX_X,
};

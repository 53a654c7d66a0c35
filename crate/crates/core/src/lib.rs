//! Numerics for simulating dispersive and dissipative dynamical systems and
//! reconstructing their phase spaces from data.
//!
//! The crate is organized around a five-stage workflow:
//!
//! 1. [`ode`] — fixed-step RK4 integration, generic over real and complex
//!    state vectors.
//! 2. [`spectral`] — radix-2 decimation-in-time FFT/IFFT and wavenumber
//!    utilities for pseudo-spectral solvers.
//! 3. [`systems`] — the Lorenz equations and the KdV equation in
//!    integrating-factor Fourier form, plus their reference solutions.
//! 4. [`embed`] — trajectory-matrix construction: Hankel embedding for scalar
//!    series, snapshot selection for spatio-temporal fields.
//! 5. [`pca`] — covariance, Jacobi SVD/eigendecomposition, component
//!    selection, and projection onto the leading directions.

pub mod embed;
pub mod matrix;
pub mod ode;
pub mod pca;
pub mod spectral;
pub mod systems;

pub use matrix::Matrix;

//! Fixed-step fourth-order Runge–Kutta integration.
//!
//! The stepper advances `dy/dt = f(t, y)` by
//!
//! ```text
//! m1 = f(t,       y)
//! m2 = f(t + h/2, y + m1·h/2)
//! m3 = f(t + h/2, y + m2·h/2)
//! m4 = f(t + h,   y + m3·h)
//! y' = y + (m1 + 2·m2 + 2·m3 + m4)·h/6
//! ```
//!
//! It is generic over the state through [`OdeState`], so the same code
//! integrates real vectors (Lorenz) and complex Fourier-coefficient vectors
//! (the pseudo-spectral KdV right-hand side). The right-hand side receives
//! `t` explicitly; autonomous systems simply ignore it. There is no adaptive
//! stepping — step sizes are chosen by the caller.

use num_complex::Complex64;
use thiserror::Error;

/// A state vector that RK4 can advance: cloneable, with in-place
/// `self += factor * other` and a finiteness check.
pub trait OdeState: Clone {
    fn dim(&self) -> usize;

    /// `self += factor * other`; panics if dimensions differ.
    fn add_scaled(&mut self, other: &Self, factor: f64);

    fn all_finite(&self) -> bool;
}

/// Real-valued ODE state of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState(pub Vec<f64>);

/// Complex-valued ODE state, e.g. a vector of Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState(pub Vec<Complex64>);

impl OdeState for SystemState {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.0.len(), other.0.len(), "state dimension changed");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    fn all_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl OdeState for ComplexState {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        assert_eq!(self.0.len(), other.0.len(), "state dimension changed");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * factor;
        }
    }

    fn all_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl OdeState for f64 {
    fn dim(&self) -> usize {
        1
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        *self += factor * other;
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Initial time, step size, and step count for a fixed-step integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    pub t0: f64,
    pub h: f64,
    pub steps: usize,
}

impl StepSpec {
    pub fn new(t0: f64, h: f64, steps: usize) -> Result<Self, OdeError> {
        let spec = Self { t0, h, steps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !self.t0.is_finite() {
            return Err(OdeError::InvalidSpec {
                reason: "t0 must be finite",
            });
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(OdeError::InvalidSpec {
                reason: "step size h must be positive and finite",
            });
        }
        Ok(())
    }

    /// Time of the i-th node, computed as `t0 + i*h` rather than by
    /// accumulation so late nodes do not pick up summation error.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + (i as f64) * self.h
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("invalid step spec: {reason}")]
    InvalidSpec { reason: &'static str },
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("integration diverged: non-finite state at step {step}")]
    Diverged { step: usize },
}

/// A single RK4 step produced a non-finite state (NaN or infinity somewhere
/// in a slope or in the update).
#[derive(Debug, PartialEq, Eq)]
pub struct StepDiverged;

/// One RK4 step of size `h` from `(t, y)`.
pub fn rk4_step<S, F>(rhs: &F, t: f64, y: &S, h: f64) -> Result<S, StepDiverged>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let half = 0.5 * h;

    let m1 = rhs(t, y);
    let mut y2 = y.clone();
    y2.add_scaled(&m1, half);
    let m2 = rhs(t + half, &y2);
    let mut y3 = y.clone();
    y3.add_scaled(&m2, half);
    let m3 = rhs(t + half, &y3);
    let mut y4 = y.clone();
    y4.add_scaled(&m3, h);
    let m4 = rhs(t + h, &y4);

    // slope = m1 + 2·m2 + 2·m3 + m4, applied with weight h/6.
    let mut slope = m1;
    slope.add_scaled(&m2, 2.0);
    slope.add_scaled(&m3, 2.0);
    slope.add_scaled(&m4, 1.0);

    let mut next = y.clone();
    next.add_scaled(&slope, h / 6.0);

    // Any non-finite slope propagates into the update, so checking the
    // result covers the slopes as well.
    if !next.all_finite() {
        return Err(StepDiverged);
    }
    Ok(next)
}

/// Integrates `spec.steps` RK4 steps from `y0`, returning all `steps + 1`
/// states including the initial one.
pub fn integrate<S, F>(rhs: F, spec: &StepSpec, y0: &S) -> Result<Vec<S>, OdeError>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    spec.validate()?;
    if !y0.all_finite() {
        return Err(OdeError::NonFiniteInitial);
    }

    let mut states = Vec::with_capacity(spec.steps + 1);
    states.push(y0.clone());
    let mut y = y0.clone();
    for i in 0..spec.steps {
        y = rk4_step(&rhs, spec.time_at(i), &y, spec.h)
            .map_err(|StepDiverged| OdeError::Diverged { step: i + 1 })?;
        states.push(y.clone());
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_vector_field_keeps_state() {
        let y = rk4_step(&|_, _: &f64| 0.0, 0.0, &5.0, 0.1).unwrap();
        assert_eq!(y, 5.0);
    }

    #[test]
    fn constant_slope_advances_linearly() {
        // All four slopes equal 1, so the update is exactly h.
        let y = rk4_step(&|_, _: &f64| 1.0, 0.0, &0.0, 0.25).unwrap();
        assert_eq!(y, 0.25);
    }

    #[test]
    fn exponential_single_step_matches_hand_expansion() {
        // y' = y, y=1, h=0.1: m1=1, m2=1.05, m3=1.0525, m4=1.10525,
        // y' = 1 + (1 + 2.1 + 2.105 + 1.10525)/6 * 0.1.
        let y = rk4_step(&|_, y: &f64| *y, 0.0, &1.0, 0.1).unwrap();
        assert!((y - 1.1051708333333333).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_returns_initial_state_only() {
        let spec = StepSpec::new(0.0, 0.1, 0).unwrap();
        let states = integrate(|_, y: &f64| *y, &spec, &3.0).unwrap();
        assert_eq!(states, vec![3.0]);
    }

    #[test]
    fn exponential_integration_reaches_e() {
        let spec = StepSpec::new(0.0, 0.1, 10).unwrap();
        let states = integrate(|_, y: &f64| *y, &spec, &1.0).unwrap();
        assert_eq!(states.len(), 11);
        assert!((states[10] - std::f64::consts::E).abs() < 1e-5);
    }

    #[test]
    fn fourth_order_convergence_for_exponential() {
        // Halving h must shrink the final error by about 2^4.
        let err = |h: f64, steps: usize| {
            let spec = StepSpec::new(0.0, h, steps).unwrap();
            let states = integrate(|_, y: &f64| *y, &spec, &1.0).unwrap();
            (states[steps] - std::f64::consts::E).abs()
        };
        let ratio = err(0.1, 10) / err(0.05, 20);
        assert!(
            (14.0..=18.0).contains(&ratio),
            "convergence ratio {ratio} out of range"
        );
    }

    #[test]
    fn vector_state_integrates_componentwise() {
        // Decoupled y0' = y0, y1' = -y1.
        let rhs = |_: f64, y: &SystemState| SystemState(vec![y.0[0], -y.0[1]]);
        let spec = StepSpec::new(0.0, 0.01, 100).unwrap();
        let states = integrate(rhs, &spec, &SystemState(vec![1.0, 1.0])).unwrap();
        let last = &states[100];
        assert!((last.0[0] - std::f64::consts::E).abs() < 1e-8);
        assert!((last.0[1] - 1.0 / std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn complex_rotation_stays_on_unit_circle() {
        // y' = i*y rotates without changing |y|.
        let rhs = |_: f64, y: &ComplexState| {
            ComplexState(y.0.iter().map(|z| z * Complex64::new(0.0, 1.0)).collect())
        };
        let spec = StepSpec::new(0.0, 0.01, 628).unwrap();
        let y0 = ComplexState(vec![Complex64::new(1.0, 0.0)]);
        let states = integrate(rhs, &spec, &y0).unwrap();
        let z = states[628].0[0];
        assert!((z.norm() - 1.0).abs() < 1e-9);
        // One near-full revolution.
        let angle: f64 = 0.01 * 628.0;
        assert!((z.re - angle.cos()).abs() < 1e-6);
    }

    #[test]
    fn divergence_reports_step_index() {
        // The step from t=0.2 evaluates its last slope at t=0.3 and blows up.
        let rhs = |t: f64, y: &f64| if t >= 0.3 { f64::NAN } else { *y };
        let spec = StepSpec::new(0.0, 0.1, 10).unwrap();
        let err = integrate(rhs, &spec, &1.0).unwrap_err();
        assert_eq!(err, OdeError::Diverged { step: 3 });
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(StepSpec::new(0.0, 0.0, 1).is_err());
        assert!(StepSpec::new(0.0, -0.1, 1).is_err());
        assert!(StepSpec::new(f64::NAN, 0.1, 1).is_err());
        let spec = StepSpec::new(0.0, 0.1, 1).unwrap();
        assert_eq!(
            integrate(|_, y: &f64| *y, &spec, &f64::INFINITY),
            Err(OdeError::NonFiniteInitial)
        );
    }

    #[test]
    fn determinism_bitwise() {
        let run = || {
            let spec = StepSpec::new(0.0, 0.02, 500).unwrap();
            integrate(|_, y: &f64| y.sin() - 0.3 * y, &spec, &0.7).unwrap()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    proptest! {
        // A single step is linear in y0 when the right-hand side is linear.
        #[test]
        fn step_is_linear_for_linear_rhs(y0 in -10.0_f64..10.0, a in -4.0_f64..4.0) {
            let rhs = |_: f64, y: &f64| -2.5 * *y;
            let base = rk4_step(&rhs, 0.0, &y0, 0.1).unwrap();
            let scaled = rk4_step(&rhs, 0.0, &(a * y0), 0.1).unwrap();
            prop_assert!((scaled - a * base).abs() <= 1e-12 * (1.0 + (a * base).abs()));
        }
    }
}

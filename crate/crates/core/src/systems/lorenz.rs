//! The Lorenz convection system
//!
//! ```text
//! ẋ = σ(y − x)
//! ẏ = rx − y − xz
//! ż = xy − bz
//! ```
//!
//! x tracks the intensity of the convective motion, y the temperature
//! difference between rising and falling currents, z the deviation of the
//! temperature gradient from linearity. σ is the Prandtl number, r the
//! Rayleigh number, b the region-size parameter.

use crate::ode::{integrate, OdeError, OdeState, StepSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl LorenzParams {
    /// σ = 10, r = 28, b = 8/3: the standard chaotic regime, with r just
    /// past the Hopf bifurcation.
    pub fn classic() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
        }
    }
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self::classic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LorenzState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn max_norm(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl OdeState for LorenzState {
    fn dim(&self) -> usize {
        3
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        self.x += factor * other.x;
        self.y += factor * other.y;
        self.z += factor * other.z;
    }

    fn all_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Time derivative of the Lorenz state.
pub fn lorenz_rhs(p: &LorenzParams, s: &LorenzState) -> LorenzState {
    LorenzState {
        x: p.sigma * (s.y - s.x),
        y: p.r * s.x - s.y - s.x * s.z,
        z: s.x * s.y - p.b * s.z,
    }
}

/// The fixed points: the origin always, and for r > 1 the symmetric pair
/// `(±√(b(r−1)), ±√(b(r−1)), r−1)`.
pub fn lorenz_fixed_points(p: &LorenzParams) -> Vec<LorenzState> {
    let mut points = vec![LorenzState::new(0.0, 0.0, 0.0)];
    if p.r > 1.0 {
        let c = (p.b * (p.r - 1.0)).sqrt();
        points.push(LorenzState::new(c, c, p.r - 1.0));
        points.push(LorenzState::new(-c, -c, p.r - 1.0));
    }
    points
}

/// The (x, y) → (−x, −y) reflection under which the equations are invariant.
pub fn lorenz_symmetry_image(s: &LorenzState) -> LorenzState {
    LorenzState {
        x: -s.x,
        y: -s.y,
        z: s.z,
    }
}

/// Fixed-step RK4 trajectory from `y0`, all `steps + 1` states.
pub fn lorenz_trajectory(
    p: &LorenzParams,
    y0: &LorenzState,
    spec: &StepSpec,
) -> Result<Vec<LorenzState>, OdeError> {
    integrate(|_, s| lorenz_rhs(p, s), spec, y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_is_always_a_fixed_point() {
        let d = lorenz_rhs(&LorenzParams::classic(), &LorenzState::new(0.0, 0.0, 0.0));
        assert_eq!((d.x, d.y, d.z), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_at_unit_state() {
        // Substituting (1,1,1) with σ=10, r=28, b=8/3 by hand.
        let d = lorenz_rhs(&LorenzParams::classic(), &LorenzState::new(1.0, 1.0, 1.0));
        assert_eq!(d.x, 0.0);
        assert_eq!(d.y, 26.0);
        assert!((d.z - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn nontrivial_fixed_points_have_zero_rhs() {
        let p = LorenzParams::classic();
        let c = 72.0_f64.sqrt();
        for s in [
            LorenzState::new(c, c, 27.0),
            LorenzState::new(-c, -c, 27.0),
        ] {
            let d = lorenz_rhs(&p, &s);
            assert!(d.max_norm() < 1e-12, "residual {}", d.max_norm());
        }
    }

    #[test]
    fn fixed_point_structure_depends_on_r() {
        let sub = LorenzParams {
            r: 0.5,
            ..LorenzParams::classic()
        };
        assert_eq!(lorenz_fixed_points(&sub).len(), 1);

        let boundary = LorenzParams {
            r: 1.0,
            ..LorenzParams::classic()
        };
        assert_eq!(lorenz_fixed_points(&boundary).len(), 1);

        let points = lorenz_fixed_points(&LorenzParams::classic());
        assert_eq!(points.len(), 3);
        assert!((points[1].x - 8.485281374238571).abs() < 1e-12);
        assert!((points[1].y - 8.485281374238571).abs() < 1e-12);
        assert_eq!(points[1].z, 27.0);
        assert_eq!(points[2].x, -points[1].x);
    }

    #[test]
    fn symmetry_image_flips_x_and_y() {
        let s = lorenz_symmetry_image(&LorenzState::new(1.0, 2.0, 3.0));
        assert_eq!((s.x, s.y, s.z), (-1.0, -2.0, 3.0));
        let o = lorenz_symmetry_image(&LorenzState::new(0.0, 0.0, 0.0));
        assert_eq!((o.x, o.y, o.z), (0.0, 0.0, 0.0));
    }

    #[test]
    fn trajectory_from_mirrored_start_is_mirrored() {
        let p = LorenzParams::classic();
        let spec = StepSpec::new(0.0, 0.01, 1000).unwrap();
        let y0 = LorenzState::new(0.3, 1.0, 0.5);
        let a = lorenz_trajectory(&p, &y0, &spec).unwrap();
        let b = lorenz_trajectory(&p, &lorenz_symmetry_image(&y0), &spec).unwrap();
        for (s, m) in a.iter().zip(&b) {
            let image = lorenz_symmetry_image(s);
            let err = (image.x - m.x)
                .abs()
                .max((image.y - m.y).abs())
                .max((image.z - m.z).abs());
            assert!(err < 1e-8);
        }
    }

    #[test]
    fn subcritical_r_decays_to_origin() {
        // r < 1: origin is globally stable; by t=50 the state is tiny.
        let p = LorenzParams {
            r: 0.5,
            ..LorenzParams::classic()
        };
        let spec = StepSpec::new(0.0, 0.01, 5000).unwrap();
        let states = lorenz_trajectory(&p, &LorenzState::new(1.0, 1.0, 1.0), &spec).unwrap();
        assert!(states[5000].max_norm() < 1e-3);
    }

    #[test]
    fn chaotic_trajectory_stays_bounded() {
        let p = LorenzParams::classic();
        let spec = StepSpec::new(0.0, 0.01, 5000).unwrap();
        let states = lorenz_trajectory(&p, &LorenzState::new(0.0, 1.0, 0.0), &spec).unwrap();
        assert_eq!(states.len(), 5001);
        let bound = states.iter().map(LorenzState::max_norm).fold(0.0, f64::max);
        assert!(bound < 100.0, "trajectory reached {bound}");
    }

    #[test]
    fn matches_independent_scalar_rk4() {
        // Hand-written three-variable RK4, kept free of the generic stepper.
        let (sigma, r, b) = (10.0, 28.0, 8.0 / 3.0);
        let f = |s: [f64; 3]| {
            [
                sigma * (s[1] - s[0]),
                r * s[0] - s[1] - s[0] * s[2],
                s[0] * s[1] - b * s[2],
            ]
        };
        let h = 0.01;
        let mut s = [0.0, 1.0, 0.0];
        for _ in 0..500 {
            let m1 = f(s);
            let m2 = f([s[0] + h / 2.0 * m1[0], s[1] + h / 2.0 * m1[1], s[2] + h / 2.0 * m1[2]]);
            let m3 = f([s[0] + h / 2.0 * m2[0], s[1] + h / 2.0 * m2[1], s[2] + h / 2.0 * m2[2]]);
            let m4 = f([s[0] + h * m3[0], s[1] + h * m3[1], s[2] + h * m3[2]]);
            for i in 0..3 {
                s[i] += (m1[i] + 2.0 * m2[i] + 2.0 * m3[i] + m4[i]) * h / 6.0;
            }
        }

        let p = LorenzParams::classic();
        let spec = StepSpec::new(0.0, h, 500).unwrap();
        let states = lorenz_trajectory(&p, &LorenzState::new(0.0, 1.0, 0.0), &spec).unwrap();
        let last = states[500];
        assert!((last.x - s[0]).abs() < 1e-9);
        assert!((last.y - s[1]).abs() < 1e-9);
        assert!((last.z - s[2]).abs() < 1e-9);
    }

    proptest! {
        // The reflection commutes with the vector field.
        #[test]
        fn rhs_commutes_with_symmetry(
            x in -20.0_f64..20.0,
            y in -20.0_f64..20.0,
            z in -5.0_f64..45.0,
        ) {
            let p = LorenzParams::classic();
            let s = LorenzState::new(x, y, z);
            let a = lorenz_rhs(&p, &lorenz_symmetry_image(&s));
            let b = lorenz_symmetry_image(&lorenz_rhs(&p, &s));
            prop_assert!((a.x - b.x).abs() < 1e-12);
            prop_assert!((a.y - b.y).abs() < 1e-12);
            prop_assert!((a.z - b.z).abs() < 1e-12);
        }
    }
}

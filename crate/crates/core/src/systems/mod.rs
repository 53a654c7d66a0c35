//! The two concrete dynamical systems under study: the Lorenz convection
//! equations and the KdV equation in pseudo-spectral integrating-factor form.

mod kdv;
mod lorenz;

pub use kdv::{
    kdv_exact_periodic, kdv_exact_soliton, kdv_initial_condition, kdv_integrating_factor,
    kdv_rhs_spectral, simulate_kdv, FieldSnapshotMatrix, KdvError, KdvParams,
    KDV_EVOLUTION_RUNS, KDV_RECONSTRUCTION_RUNS,
};
pub use lorenz::{
    lorenz_fixed_points, lorenz_rhs, lorenz_symmetry_image, lorenz_trajectory, LorenzParams,
    LorenzState,
};

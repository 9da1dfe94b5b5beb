//! Ground-state identities, cutoff energies and the search for variational
//! certificates that a sign-indefinite perturbation pushes spectrum past the
//! ground-state energy.
//!
//! Deficit forms are ⟨f|E0 - h_Q|f⟩ on ℤ and ℤ² and ⟨f|H_Q - E0|f⟩ on ℝ, so a
//! certificate always means a negative total.

mod certificate;
mod cutoff;
mod identity;
mod model;

pub use certificate::{
    criticality_certificate, find_sign_vector, Certificate, Flagged, NotFound, Outcome, Perturbation, SearchParams,
    SignCandidate, SignVector, LOG_BUMP_RADII, ORACLE_LANCZOS_STEPS, ORACLE_RADIUS_2D,
};
pub use cutoff::{edge_sum_1d, radial_edge_sum_2d, Bump, CutoffKind, CutoffProfile, Profile};
pub use identity::{
    adapted_energy_formula, cutoff_energy, ground_state_identity, polarization_identity, QUADRATURE_TOLERANCE,
    WINDOW_RADIUS_LIMIT,
};
pub use model::{ContinuumState, Domain, GroundStateModel, ScalarFn};

//! Numerical forms of the integrability criteria.

pub mod figure5;
pub mod fourier;
pub mod gutkin;
pub mod minkowski;

pub use figure5::{figure5_perimeters, figure5_rounded, Figure5Row};
pub use fourier::{
    fourier_coefficients, outer_fourier_check, symplectic_fourier_check, FourierKind,
    FourierReport, FourierSeries,
};
pub use gutkin::{
    gutkin_angle_profile, gutkin_equation_residual, gutkin_report, rational_pi_root_scan,
    sine_inequality_check, AngleProfile, GutkinReport,
};
pub use minkowski::{
    body_invariance, constancy_profile, construct_invariant_family, extra_symmetry_equivalence,
    minkowski_constancy, minkowski_table, symmetric_candidates, ExtraSymmetryReport,
    InvariantFamily, SymmetricCandidates,
};

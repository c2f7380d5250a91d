//! Finite-difference calculus on a rectangular lattice standing in for a
//! coordinate patch of a Riemann surface with its flat metric.
//!
//! Derivatives use second-order central differences (one-sided third-order
//! stencils on clamped edges), so every residual, including those that
//! differentiate a differentiated field, is `O(h²)`-consistent up to the edges.

pub mod action;
pub mod field;
pub mod grid;
pub mod integrate;
pub mod residuals;
pub mod solver;

pub use action::{action_gradient_check, GradientCheck};
pub use field::{AlgebraForm1, FieldFile, GroupField, GroupFieldFile, LieField, Scalar, SparseBracket};
pub use grid::{Axis, Boundary, LatticeGrid};
pub use integrate::{integrate_mc, Integration, IntegrationSummary};
pub use residuals::{
    alternating_structure, harmonic_residual, harmonic_t_term, hol_harmonic_residual, mc_residual, stringy_residual,
    torsion_free_residual, vertical_harmonic_residual, HolHarmonicReport, HolVariant, Parity, SplitContext,
    StringyReport, StringyVariant,
};
pub use solver::{
    discrete_energy, link_tension, log_unitary, perturbed_geodesic, solve_harmonic, write_history_csv, write_plot_csv,
    HistoryRow, Links, Perturbation, SolveOutcome, SolverOptions, DIVERGENCE_STREAK,
};

use crate::homogeo::GeometryError;

/// Failures of the lattice routines.
#[derive(Debug, thiserror::Error)]
pub enum LatticeError {
    #[error("grid must have at least 3 points per axis, got {nx}×{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("lattice spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("field is not real: imaginary residual {residual:.3e}")]
    NotReal { residual: f64 },
    #[error("missing structure: {0}")]
    MissingStructure(String),
    #[error("the canonical structure is not a complex structure: residual {residual:.3e}")]
    NotComplex { residual: f64 },
    #[error("form is not flat: Maurer-Cartan residual {mc:.3e}, path gap {path_gap:.3e}")]
    NotFlat { mc: f64, path_gap: f64 },
    #[error("relaxation diverged at step {step} (energy {energy:.6e})")]
    Diverged {
        step: usize,
        energy: f64,
        history: Vec<HistoryRow>,
    },
    #[error("Wess-Zumino form is not closed: residual {residual:.3e}")]
    NotClosed { residual: f64 },
    #[error("unsupported fixture: {0}")]
    UnsupportedFixture(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[cfg(test)]
pub(crate) mod tests_support {
    use nalgebra::DVector;

    use super::{GroupField, LatticeGrid, LieField};
    use crate::fixtures::Fixture;

    /// `U = exp(X(x, y))` for a fixed smooth algebra-valued `X`.
    pub fn smooth_group_field(f: &Fixture, g: LatticeGrid) -> GroupField {
        let n = f.algebra.dim();
        let x = LieField::from_fn(g, n, |p| {
            let (x, y) = g.point(p);
            DVector::from_fn(n, |a, _| {
                let a = a as f64;
                0.6 * (0.7 * x + 0.3 * a).sin() * (0.5 * y - 0.2 * a).cos() + 0.2 * (a + 1.0) * x * y
            })
        });
        GroupField::exp_of(&x, &f.realization)
    }
}

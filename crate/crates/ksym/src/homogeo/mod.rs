//! Invariant geometry at the origin of a reductive homogeneous space `G/K`.
//!
//! Everything is evaluated on `𝔫 ≅ T_o(G/K)` in the coordinates of a fixed
//! basis of `𝔫`. Trilinear forms use the lowering convention
//! `B(X,Y,Z) = ⟨B(X,Y), Z⟩`.

pub mod characteristic;
pub mod connection;
pub mod forms;
pub mod split;
pub mod structures;
pub mod tensor;

pub use characteristic::{
    characteristic_torsion_complex, characteristic_torsion_f, extended_nijenhuis, horizontal_curvature,
    reductivity_flags, vertical_curvature, CharacteristicConnection, ReductivityFlags,
};
pub use connection::{connection_family, levi_civita, metric_family, natural_reductivity_term, OriginConnection};
pub use forms::{
    form_invariance_residual, invariant_d, kahler_form, parallel_torsion_d, project_invariant, wess_zumino_forms,
};
pub use split::{InvariantMetric, ReductiveSplit};
pub use structures::{
    canonical_structures, canonical_top, component_split, j0, j_action, nijenhuis, nijenhuis_bracket,
    nijenhuis_from_torsion, JAction, OriginFStructure,
};
pub use tensor::{AltForm, Tensor3};

/// Failures of the origin-level geometry routines.
#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("the isotropy and complement bases do not span the algebra as a direct sum")]
    NotComplementary,
    #[error("[𝔨, 𝔫] ⊄ 𝔫: reductivity residual {residual:.3e}")]
    NotReductiveSplit { residual: f64 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("metric is not symmetric positive definite")]
    NotPositive,
    #[error("metric is not ad 𝔨-invariant: residual {residual:.3e}")]
    NonInvariantMetric { residual: f64 },
    #[error("the negative Killing form is degenerate or indefinite on 𝔫")]
    DegenerateKilling,
    #[error("F³ + F ≠ 0: residual {residual:.3e}")]
    NotFStructure { residual: f64 },
    #[error("level {m} out of range 1..={max} for order {kprime}")]
    LevelOutOfRange { m: usize, kprime: usize, max: usize },
    #[error("the split carries no finite-order grading")]
    MissingGrading,
    #[error("connection does not preserve the structure: residual {residual:.3e}")]
    DoesNotPreserve { residual: f64 },
    #[error("Nijenhuis tensor is not totally skew: residual {residual:.3e}")]
    NotG1 { residual: f64 },
    #[error("extended Nijenhuis tensor is not totally skew: residual {residual:.3e}")]
    NotGlobalG1 { residual: f64 },
    #[error("splitting is not reductive: H²V defect {h2v:.3e}, V²H defect {v2h:.3e}")]
    NotReductive { h2v: f64, v2h: f64 },
    #[error("form is not ad 𝔨-invariant: residual {residual:.3e}")]
    NonInvariantForm { residual: f64 },
    #[error("α is not a vertical 3-form: residual {residual:.3e}")]
    NotVerticalForm { residual: f64 },
}

//! Fixture loading: built-in names or JSON fixture files.

use std::path::Path;

use ksym::autodecomp::{AlgebraRef, FiniteOrderAutomorphism};
use ksym::fixtures::{self, FixtureSpec, MatrixRealization};
use ksym::liealg::{LieAlgebra, DEFAULT_TOL};
use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Provenance block embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureId {
    pub name: String,
    /// `builtin` or the path that was read.
    pub source: String,
    /// SHA-256 of the fixture file bytes (of the canonical JSON for built-ins).
    pub sha256: String,
}

/// A validated fixture. The matrix realization is only known for the
/// built-in `su2`/`su3` algebras and is required by the lattice commands.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub id: FixtureId,
    pub algebra: LieAlgebra,
    pub tau: FiniteOrderAutomorphism,
    pub inner: DMatrix<f64>,
    pub realization: Option<MatrixRealization>,
}

impl Loaded {
    pub fn realization(&self) -> Result<&MatrixRealization, CliError> {
        self.realization.as_ref().ok_or_else(|| {
            CliError::Input(format!(
                "fixture {} has an inline algebra without a matrix realization",
                self.id.name
            ))
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads `arg` as a file if it exists, else as a built-in fixture name.
pub fn load(arg: &str) -> Result<Loaded, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
        let spec: FixtureSpec =
            serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{arg}: parse error: {e}")))?;
        return from_spec(&spec, arg.to_string(), sha256_hex(&bytes));
    }
    match fixtures::by_name(arg) {
        Some(f) => {
            let text = serde_json::to_string(&f.to_spec()).expect("fixture spec serializes");
            Ok(Loaded {
                id: FixtureId {
                    name: f.name.clone(),
                    source: "builtin".into(),
                    sha256: sha256_hex(text.as_bytes()),
                },
                algebra: f.algebra,
                tau: f.tau,
                inner: f.inner,
                realization: Some(f.realization),
            })
        }
        None => Err(CliError::Input(format!(
            "{arg}: no such file and not a built-in fixture (one of {})",
            fixtures::NAMES.join(", ")
        ))),
    }
}

fn from_spec(spec: &FixtureSpec, source: String, sha256: String) -> Result<Loaded, CliError> {
    let invalid = |e: String| CliError::Input(format!("{source}: {e}"));
    let (algebra, realization) = match &spec.automorphism.algebra {
        AlgebraRef::Named(name) => {
            let (a, r) = fixtures::named_algebra(name)
                .ok_or_else(|| invalid(format!("unknown algebra {name:?} (expected su2 or su3)")))?;
            (a, Some(r))
        }
        AlgebraRef::Inline(a) => (
            LieAlgebra::from_spec(a, DEFAULT_TOL).map_err(|e| invalid(e.to_string()))?,
            None,
        ),
    };
    let map = spec.automorphism.matrix().map_err(|e| invalid(e.to_string()))?;
    let tau = FiniteOrderAutomorphism::new(&algebra, map, spec.automorphism.order, DEFAULT_TOL)
        .map_err(|e| invalid(e.to_string()))?;
    let n = algebra.dim();
    let inner = match &spec.inner {
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid(format!("inner product must be {n}x{n}")));
            }
            DMatrix::from_fn(n, n, |r, c| rows[r][c])
        }
        None => -algebra.killing_matrix(),
    };
    Ok(Loaded {
        id: FixtureId {
            name: spec.name.clone(),
            source,
            sha256,
        },
        algebra,
        tau,
        inner,
        realization,
    })
}

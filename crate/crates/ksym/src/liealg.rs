//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! An algebra of dimension `n` stores the table `c[i][j][k]` with
//! `[e_i, e_j] = Σ_k c[i][j][k] e_k`. Elements are plain coordinate vectors;
//! complex coordinates are accepted everywhere, which realizes the
//! complexification without a separate type.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::C64;

/// Default tolerance for validation gates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors raised while building or using a Lie algebra.
#[derive(Debug, Error)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("structure constants have inconsistent shape: {0}")]
    Shape(String),
    #[error("structure constants are not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },
    #[error("Jacobi identity fails (residual {residual:.3e}, tolerance {tol:.1e})")]
    Jacobi { residual: f64, tol: f64 },
    #[error("elements belong to different algebras")]
    ForeignElement,
    #[error("invalid algebra JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Real Lie algebra with structure constants `c[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    labels: Vec<String>,
    c: Vec<f64>,
    nonzero: Vec<(usize, usize, usize, f64)>,
}

/// Serialized form of an algebra: `{ "dim": n, "labels": [...], "c": [[[...]]] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub dim: usize,
    #[serde(default)]
    pub labels: Vec<String>,
    pub c: Vec<Vec<Vec<f64>>>,
}

impl LieAlgebra {
    /// Builds an algebra from a nested table, validating antisymmetry and the
    /// Jacobi identity against `tol`.
    pub fn new(labels: Vec<String>, c: &[Vec<Vec<f64>>], tol: f64) -> Result<Self, LieError> {
        let n = c.len();
        let mut flat = vec![0.0; n * n * n];
        for (i, row) in c.iter().enumerate() {
            if row.len() != n {
                return Err(LieError::Shape(format!("c[{i}] has length {}", row.len())));
            }
            for (j, col) in row.iter().enumerate() {
                if col.len() != n {
                    return Err(LieError::Shape(format!("c[{i}][{j}] has length {}", col.len())));
                }
                flat[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(col);
            }
        }
        Self::from_flat(labels, n, flat, tol)
    }

    /// Builds an algebra from a flat table indexed `(i*n + j)*n + k`.
    pub fn from_flat(labels: Vec<String>, dim: usize, c: Vec<f64>, tol: f64) -> Result<Self, LieError> {
        if dim == 0 {
            return Err(LieError::Shape("dimension must be positive".into()));
        }
        if c.len() != dim * dim * dim {
            return Err(LieError::Shape(format!(
                "expected {} structure constants, got {}",
                dim * dim * dim,
                c.len()
            )));
        }
        let labels = if labels.is_empty() {
            (1..=dim).map(|i| format!("e{i}")).collect()
        } else if labels.len() != dim {
            return Err(LieError::DimensionMismatch {
                expected: dim,
                got: labels.len(),
            });
        } else {
            labels
        };
        let alg = LieAlgebra::assemble(dim, labels, c);
        let anti = alg.antisymmetry_residual();
        if anti > tol {
            return Err(LieError::NotAntisymmetric { residual: anti });
        }
        let jac = alg.jacobi_residual();
        if jac > tol {
            return Err(LieError::Jacobi { residual: jac, tol });
        }
        Ok(alg)
    }

    /// Builds an algebra without validation. Intended for perturbation
    /// experiments where the residuals themselves are the object of study.
    pub fn from_flat_unchecked(labels: Vec<String>, dim: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), dim * dim * dim, "structure table shape");
        let labels = if labels.len() == dim {
            labels
        } else {
            (1..=dim).map(|i| format!("e{i}")).collect()
        };
        LieAlgebra::assemble(dim, labels, c)
    }

    fn assemble(dim: usize, labels: Vec<String>, c: Vec<f64>) -> Self {
        let mut nonzero = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let v = c[(i * dim + j) * dim + k];
                    if v != 0.0 {
                        nonzero.push((i, j, k, v));
                    }
                }
            }
        }
        LieAlgebra {
            dim,
            labels,
            c,
            nonzero,
        }
    }

    /// Abelian algebra of dimension `n`.
    pub fn abelian(n: usize) -> Self {
        Self::from_flat_unchecked(Vec::new(), n, vec![0.0; n * n * n])
    }

    /// Parses and validates an algebra from its JSON spec.
    pub fn from_json(text: &str, tol: f64) -> Result<Self, LieError> {
        let spec: AlgebraSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec, tol)
    }

    /// Validates an already-parsed spec.
    pub fn from_spec(spec: &AlgebraSpec, tol: f64) -> Result<Self, LieError> {
        if spec.c.len() != spec.dim {
            return Err(LieError::DimensionMismatch {
                expected: spec.dim,
                got: spec.c.len(),
            });
        }
        Self::new(spec.labels.clone(), &spec.c, tol)
    }

    /// Serializable spec of this algebra.
    pub fn to_spec(&self) -> AlgebraSpec {
        let n = self.dim;
        let c = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.c[(i * n + j) * n..(i * n + j + 1) * n].to_vec())
                    .collect()
            })
            .collect();
        AlgebraSpec {
            dim: n,
            labels: self.labels.clone(),
            c,
        }
    }

    /// Dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Structure constant `c[i][j][k]`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Flat structure table indexed `(i*n + j)*n + k`.
    pub fn structure_table(&self) -> &[f64] {
        &self.c
    }

    /// The `i`-th basis vector.
    pub fn basis(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    fn check_len(&self, len: usize) -> Result<(), LieError> {
        if len != self.dim {
            Err(LieError::DimensionMismatch {
                expected: self.dim,
                got: len,
            })
        } else {
            Ok(())
        }
    }

    /// Bracket of two real coordinate vectors.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>, LieError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok(self.br(x, y))
    }

    /// Bracket of two complex coordinate vectors (complexified algebra).
    pub fn bracket_c(&self, x: &DVector<C64>, y: &DVector<C64>) -> Result<DVector<C64>, LieError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok(self.br_c(x, y))
    }

    /// Unchecked real bracket; lengths must equal `dim`.
    pub fn br(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for &(i, j, k, c) in &self.nonzero {
            out[k] += c * x[i] * y[j];
        }
        out
    }

    /// Unchecked complex bracket; lengths must equal `dim`.
    pub fn br_c(&self, x: &DVector<C64>, y: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::from_element(self.dim, C64::new(0.0, 0.0));
        for &(i, j, k, c) in &self.nonzero {
            out[k] += x[i] * y[j] * c;
        }
        out
    }

    /// Bracket of raw real slices written into `out` (no allocation).
    pub fn br_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(i, j, k, c) in &self.nonzero {
            out[k] += c * x[i] * y[j];
        }
    }

    /// Matrix of `ad X` acting on coordinates: `(ad X) y = [X, y]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, k, c) in &self.nonzero {
            m[(k, j)] += c * x[i];
        }
        m
    }

    /// Matrix of `ad e_i`.
    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| self.c[(i * n + j) * n + k])
    }

    /// Killing form `Tr(ad X ∘ ad Y)`.
    pub fn killing_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, LieError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        Ok((self.ad(x) * self.ad(y)).trace())
    }

    /// Gram matrix of the Killing form in the coordinate basis.
    pub fn killing_matrix(&self) -> DMatrix<f64> {
        let ads: Vec<DMatrix<f64>> = (0..self.dim).map(|i| self.ad_basis(i)).collect();
        DMatrix::from_fn(self.dim, self.dim, |i, j| (&ads[i] * &ads[j]).trace())
    }

    /// Max over index triples of `|c[i][j][k] + c[j][i][k]|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.c[(i * n + j) * n + k] + self.c[(j * n + i) * n + k]).abs());
                }
            }
        }
        r
    }

    /// Max over basis triples of the Jacobi cyclic sum norm.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let basis: Vec<DVector<f64>> = (0..n).map(|i| self.basis(i)).collect();
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let ij = self.br(&basis[i], &basis[j]);
                for k in 0..n {
                    let jk = self.br(&basis[j], &basis[k]);
                    let ki = self.br(&basis[k], &basis[i]);
                    let s = self.br(&ij, &basis[k]) + self.br(&jk, &basis[i]) + self.br(&ki, &basis[j]);
                    r = r.max(s.amax());
                }
            }
        }
        r
    }

    /// Max over basis triples of `|B([e_k,e_i],e_j) + B(e_i,[e_k,e_j])|`.
    pub fn killing_invariance_residual(&self) -> f64 {
        let b = self.killing_matrix();
        let mut r = 0.0_f64;
        for k in 0..self.dim {
            let ad = self.ad_basis(k);
            let s = ad.transpose() * &b + &b * &ad;
            r = r.max(crate::linalg::max_abs(&s));
        }
        r
    }

    /// Max over basis pairs of `|φ[e_i,e_j] − [φe_i, φe_j]|` for a linear map `φ`.
    pub fn homomorphism_residual(&self, phi: &DMatrix<f64>) -> f64 {
        let n = self.dim;
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let lhs = phi * self.br(&self.basis(i), &self.basis(j));
                let rhs = self.br(&phi.column(i).into_owned(), &phi.column(j).into_owned());
                r = r.max((lhs - rhs).amax());
            }
        }
        r
    }

    /// Direct sum of `copies` copies of this algebra with componentwise bracket.
    pub fn power(&self, copies: usize) -> LieAlgebra {
        let n = self.dim;
        let big = n * copies;
        let mut c = vec![0.0; big * big * big];
        for a in 0..copies {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (bi, bj, bk) = (a * n + i, a * n + j, a * n + k);
                        c[(bi * big + bj) * big + bk] = self.c[(i * n + j) * n + k];
                    }
                }
            }
        }
        let labels = (0..copies)
            .flat_map(|a| self.labels.iter().map(move |l| format!("{l}^{a}")))
            .collect();
        LieAlgebra::from_flat_unchecked(labels, big, c)
    }
}

/// An element of a specific algebra, carrying its owner for checked operations.
#[derive(Debug, Clone)]
pub struct AlgebraElement<'a> {
    algebra: &'a LieAlgebra,
    coords: DVector<C64>,
}

impl<'a> AlgebraElement<'a> {
    /// Wraps complex coordinates, checking the length.
    pub fn new(algebra: &'a LieAlgebra, coords: DVector<C64>) -> Result<Self, LieError> {
        algebra.check_len(coords.len())?;
        Ok(AlgebraElement { algebra, coords })
    }

    /// Wraps real coordinates, checking the length.
    pub fn real(algebra: &'a LieAlgebra, coords: &DVector<f64>) -> Result<Self, LieError> {
        Self::new(algebra, crate::linalg::to_complex_vec(coords))
    }

    /// Coordinates of the element.
    pub fn coords(&self) -> &DVector<C64> {
        &self.coords
    }

    /// Whether all coordinates are real to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coords.iter().all(|z| z.im.abs() <= tol)
    }

    /// Bracket with another element of the same algebra.
    pub fn bracket(&self, other: &AlgebraElement<'a>) -> Result<AlgebraElement<'a>, LieError> {
        if !std::ptr::eq(self.algebra, other.algebra) && self.algebra != other.algebra {
            return Err(LieError::ForeignElement);
        }
        Ok(AlgebraElement {
            algebra: self.algebra,
            coords: self.algebra.br_c(&self.coords, &other.coords),
        })
    }
}

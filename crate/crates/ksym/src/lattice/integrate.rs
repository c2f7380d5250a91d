//! Integration of flat lattice 1-forms into group-valued fields.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::field::{AlgebraForm1, GroupField, SparseBracket};
use super::residuals::mc_residual;
use super::LatticeError;
use crate::fixtures::MatrixRealization;
use crate::linalg::C64;

/// Outcome of [`integrate_mc`].
#[derive(Debug, Clone)]
pub struct Integration {
    /// `U` with `U(0, 0) = I`, integrated row first then column by column.
    pub field: GroupField,
    /// `max ‖U⁻¹DU − α‖` with the lattice stencils.
    pub reconstruction: f64,
    /// `max ‖U_row-first − U_column-first‖` over all points.
    pub path_gap: f64,
    /// `max |dα + ½[α∧α]|`.
    pub mc: f64,
}

/// Summary numbers of an integration, for reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrationSummary {
    pub reconstruction: f64,
    pub path_gap: f64,
    pub mc: f64,
}

impl Integration {
    /// Summary numbers.
    pub fn summary(&self) -> IntegrationSummary {
        IntegrationSummary {
            reconstruction: self.reconstruction,
            path_gap: self.path_gap,
            mc: self.mc,
        }
    }
}

fn step(u: &DMatrix<C64>, rep: &MatrixRealization, x0: &DVector<f64>, x1: &DVector<f64>, h: f64) -> DMatrix<C64> {
    let mid = (x0 + x1) * (0.5 * h);
    u * rep.matrix(&mid).exp()
}

fn sweep(alpha: &AlgebraForm1<f64>, rep: &MatrixRealization, row_first: bool) -> Vec<DMatrix<C64>> {
    let g = alpha.grid();
    let (nx, ny, h) = (g.nx(), g.ny(), g.h());
    let n = rep.size();
    let mut mats = vec![DMatrix::identity(n, n); g.len()];
    let (ax, bx) = (alpha.x(), alpha.y());
    if row_first {
        for i in 1..nx {
            let (p, q) = (g.index(i - 1, 0), g.index(i, 0));
            mats[q] = step(&mats[p], rep, ax.at(p), ax.at(q), h);
        }
        for i in 0..nx {
            for j in 1..ny {
                let (p, q) = (g.index(i, j - 1), g.index(i, j));
                mats[q] = step(&mats[p], rep, bx.at(p), bx.at(q), h);
            }
        }
    } else {
        for j in 1..ny {
            let (p, q) = (g.index(0, j - 1), g.index(0, j));
            mats[q] = step(&mats[p], rep, bx.at(p), bx.at(q), h);
        }
        for j in 0..ny {
            for i in 1..nx {
                let (p, q) = (g.index(i - 1, j), g.index(i, j));
                mats[q] = step(&mats[p], rep, ax.at(p), ax.at(q), h);
            }
        }
    }
    mats
}

/// Integrates `U⁻¹dU = α` from `U(0, 0) = I` with midpoint exponentials,
/// along the first row and then up every column.
///
/// The column-first ordering is integrated as well; their gap measures
/// path dependence. Fails with [`LatticeError::NotFlat`] when either the
/// Maurer-Cartan residual or the path gap exceeds `threshold`.
pub fn integrate_mc(
    alpha: &AlgebraForm1<f64>,
    rep: &MatrixRealization,
    bracket: &SparseBracket,
    threshold: f64,
) -> Result<Integration, LatticeError> {
    let mc = mc_residual(alpha, bracket).max_abs();
    let rows = sweep(alpha, rep, true);
    let cols = sweep(alpha, rep, false);
    let path_gap = rows
        .iter()
        .zip(&cols)
        .map(|(a, b)| crate::linalg::max_abs_c(&(a - b)))
        .fold(0.0, f64::max);
    if mc > threshold || path_gap > threshold {
        return Err(LatticeError::NotFlat { mc, path_gap });
    }
    let field = GroupField::new(*alpha.grid(), rows)?;
    let back = field.maurer_cartan(rep);
    let reconstruction = back.sub(alpha).max_abs();
    Ok(Integration {
        field,
        reconstruction,
        path_gap,
        mc,
    })
}

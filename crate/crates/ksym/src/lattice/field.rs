//! Algebra-valued lattice fields, 1-forms and group-valued fields.

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::grid::{Axis, LatticeGrid};
use super::LatticeError;
use crate::fixtures::MatrixRealization;
use crate::liealg::LieAlgebra;
use crate::linalg::C64;

/// Coefficient field of lattice data: `f64` or `Complex<f64>`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}

impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Vector-valued function on the lattice points (a 0-form, or the
/// `dx∧dy` coefficient of a 2-form).
#[derive(Debug, Clone, PartialEq)]
pub struct LieField<T: Scalar> {
    grid: LatticeGrid,
    dim: usize,
    values: Vec<DVector<T>>,
}

impl<T: Scalar> LieField<T> {
    /// Zero field of the given fibre dimension.
    pub fn zeros(grid: LatticeGrid, dim: usize) -> Self {
        LieField {
            grid,
            dim,
            values: vec![DVector::from_element(dim, T::zero()); grid.len()],
        }
    }

    /// Field sampled from a function of the point index.
    pub fn from_fn(grid: LatticeGrid, dim: usize, mut f: impl FnMut(usize) -> DVector<T>) -> Self {
        let values = (0..grid.len())
            .map(|p| {
                let v = f(p);
                assert_eq!(v.len(), dim, "sample has the wrong fibre dimension");
                v
            })
            .collect();
        LieField { grid, dim, values }
    }

    /// Field from explicit values, one per point in row-major order.
    pub fn from_values(grid: LatticeGrid, dim: usize, values: Vec<DVector<T>>) -> Result<Self, LatticeError> {
        if values.len() != grid.len() || values.iter().any(|v| v.len() != dim) {
            return Err(LatticeError::Shape(format!(
                "expected {} samples of dimension {dim}",
                grid.len()
            )));
        }
        Ok(LieField { grid, dim, values })
    }

    /// Underlying grid.
    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    /// Fibre dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at a point.
    pub fn at(&self, p: usize) -> &DVector<T> {
        &self.values[p]
    }

    /// Mutable value at a point.
    pub fn at_mut(&mut self, p: usize) -> &mut DVector<T> {
        &mut self.values[p]
    }

    /// All values in row-major order.
    pub fn values(&self) -> &[DVector<T>] {
        &self.values
    }

    /// Pointwise map to another field.
    pub fn map<S: Scalar>(&self, dim: usize, f: impl Fn(&DVector<T>) -> DVector<S>) -> LieField<S> {
        LieField::from_fn(self.grid, dim, |p| f(&self.values[p]))
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip<S: Scalar>(
        &self,
        other: &LieField<T>,
        dim: usize,
        f: impl Fn(&DVector<T>, &DVector<T>) -> DVector<S>,
    ) -> LieField<S> {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        LieField::from_fn(self.grid, dim, |p| f(&self.values[p], &other.values[p]))
    }

    /// `M v` at every point for a real matrix `M`.
    pub fn apply(&self, m: &DMatrix<f64>) -> LieField<T> {
        assert_eq!(m.ncols(), self.dim, "matrix does not act on the fibre");
        self.map(m.nrows(), |v| real_matvec(m, v))
    }

    /// `M v` at every point for a complex matrix `M`.
    pub fn apply_c(&self, m: &DMatrix<C64>) -> LieField<C64> {
        self.map(m.nrows(), |v| m * v.map(to_c64))
    }

    /// Pointwise sum.
    pub fn add(&self, other: &LieField<T>) -> LieField<T> {
        self.zip(other, self.dim, |x, y| x + y)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &LieField<T>) -> LieField<T> {
        self.zip(other, self.dim, |x, y| x - y)
    }

    /// Multiplication by a constant.
    pub fn scale(&self, s: T) -> LieField<T> {
        self.map(self.dim, |v| v * s)
    }

    /// Second-order first derivative along an axis.
    pub fn derivative(&self, axis: Axis) -> LieField<T> {
        let inv_h = 1.0 / self.grid.h();
        LieField::from_fn(self.grid, self.dim, |p| {
            let mut out = DVector::from_element(self.dim, T::zero());
            // The weights sum to zero, so differences keep constants exact.
            for (q, w) in self.grid.stencil(p, axis) {
                if w != 0.0 && q != p {
                    out += (&self.values[q] - &self.values[p]).map(|x| x.scale(w * inv_h));
                }
            }
            out
        })
    }

    /// Largest coefficient modulus over all points.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of the difference with another field.
    pub fn max_diff(&self, other: &LieField<T>) -> f64 {
        self.sub(other).max_abs()
    }

    /// Euclidean coefficient norm at every point.
    pub fn point_norms(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt())
            .collect()
    }

    /// Largest coefficient modulus over interior points only.
    pub fn max_abs_interior(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&p| self.grid.is_interior(p))
            .flat_map(|p| self.values[p].iter())
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus over points at least `margin` points
    /// away from every clamped edge.
    pub fn max_abs_inset(&self, margin: usize) -> f64 {
        (0..self.grid.len())
            .filter(|&p| self.grid.edge_distance(p) >= margin)
            .flat_map(|p| self.values[p].iter())
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    /// Complexification of the field.
    pub fn to_complex(&self) -> LieField<C64> {
        self.map(self.dim, |v| v.map(to_c64))
    }

    /// Appends zero coordinates so the fibre has dimension `dim`.
    pub fn pad(&self, dim: usize) -> LieField<T> {
        assert!(dim >= self.dim, "cannot pad to a smaller fibre");
        self.map(dim, |v| {
            let mut out = DVector::from_element(dim, T::zero());
            out.rows_mut(0, self.dim).copy_from(v);
            out
        })
    }
}

impl LieField<C64> {
    /// Pointwise complex conjugate.
    pub fn conj(&self) -> LieField<C64> {
        self.map(self.dim, |v| v.map(|z| z.conj()))
    }

    /// Pointwise real part.
    pub fn re(&self) -> LieField<f64> {
        self.map(self.dim, |v| v.map(|z| z.re))
    }

    /// Pointwise imaginary part.
    pub fn im(&self) -> LieField<f64> {
        self.map(self.dim, |v| v.map(|z| z.im))
    }

    /// Largest imaginary part over all coefficients.
    pub fn imaginary_residual(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// `∂_z = ½(∂_x − i∂_y)`.
    pub fn d_z(&self) -> LieField<C64> {
        let i = C64::new(0.0, 1.0);
        self.derivative(Axis::X)
            .sub(&self.derivative(Axis::Y).scale(i))
            .scale(C64::new(0.5, 0.0))
    }

    /// `∂_z̄ = ½(∂_x + i∂_y)`.
    pub fn d_zbar(&self) -> LieField<C64> {
        let i = C64::new(0.0, 1.0);
        self.derivative(Axis::X)
            .add(&self.derivative(Axis::Y).scale(i))
            .scale(C64::new(0.5, 0.0))
    }
}

fn to_c64<T: Scalar>(x: T) -> C64 {
    // Every scalar converts through its real and imaginary parts.
    C64::new(x.real(), x.imaginary())
}

fn real_matvec<T: Scalar>(m: &DMatrix<f64>, v: &DVector<T>) -> DVector<T> {
    DVector::from_fn(m.nrows(), |r, _| {
        let mut s = T::zero();
        for c in 0..m.ncols() {
            let w = m[(r, c)];
            if w != 0.0 {
                s += v[c].scale(w);
            }
        }
        s
    })
}

/// Structure constants stored as the list of nonzero `(i, j, k, c_ij^k)`.
#[derive(Debug, Clone)]
pub struct SparseBracket {
    dim: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl SparseBracket {
    /// Nonzero structure constants of an algebra.
    pub fn new(algebra: &LieAlgebra) -> Self {
        let n = algebra.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = algebra.structure_constant(i, j, k);
                    if c != 0.0 {
                        entries.push((i, j, k, c));
                    }
                }
            }
        }
        SparseBracket { dim: n, entries }
    }

    /// Dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `[x, y]` in coordinates.
    pub fn apply<T: Scalar>(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        let mut out = DVector::from_element(self.dim, T::zero());
        for &(i, j, k, c) in &self.entries {
            out[k] += (x[i] * y[j]).scale(c);
        }
        out
    }

    /// Pointwise bracket of two fields.
    pub fn field<T: Scalar>(&self, x: &LieField<T>, y: &LieField<T>) -> LieField<T> {
        x.zip(y, self.dim, |a, b| self.apply(a, b))
    }

    /// `[A∧B]` as the `dx∧dy` coefficient: `[A_x, B_y] − [A_y, B_x]`.
    pub fn wedge<T: Scalar>(&self, a: &AlgebraForm1<T>, b: &AlgebraForm1<T>) -> LieField<T> {
        self.field(a.x(), b.y()).sub(&self.field(a.y(), b.x()))
    }
}

/// Lattice 1-form `α = a dx + b dy` with `(a, b) = (α(∂x), α(∂y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraForm1<T: Scalar> {
    a: LieField<T>,
    b: LieField<T>,
}

impl<T: Scalar> AlgebraForm1<T> {
    /// Pairs two component fields on the same grid.
    pub fn new(a: LieField<T>, b: LieField<T>) -> Result<Self, LatticeError> {
        if a.grid() != b.grid() || a.dim() != b.dim() {
            return Err(LatticeError::Shape(
                "1-form components disagree in grid or dimension".into(),
            ));
        }
        Ok(AlgebraForm1 { a, b })
    }

    /// Zero 1-form.
    pub fn zeros(grid: LatticeGrid, dim: usize) -> Self {
        AlgebraForm1 {
            a: LieField::zeros(grid, dim),
            b: LieField::zeros(grid, dim),
        }
    }

    /// The constant form `ξ dx + η dy`.
    pub fn constant(grid: LatticeGrid, xi: &DVector<T>, eta: &DVector<T>) -> Self {
        AlgebraForm1 {
            a: LieField::from_fn(grid, xi.len(), |_| xi.clone()),
            b: LieField::from_fn(grid, eta.len(), |_| eta.clone()),
        }
    }

    /// `α(∂x)`.
    pub fn x(&self) -> &LieField<T> {
        &self.a
    }

    /// `α(∂y)`.
    pub fn y(&self) -> &LieField<T> {
        &self.b
    }

    /// Grid of the form.
    pub fn grid(&self) -> &LatticeGrid {
        self.a.grid()
    }

    /// Fibre dimension.
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Hodge star `(a, b) ↦ (−b, a)`.
    pub fn hodge(&self) -> AlgebraForm1<T> {
        AlgebraForm1 {
            a: self.b.scale(-T::one()),
            b: self.a.clone(),
        }
    }

    /// `dα = (∂x b − ∂y a) dx∧dy`.
    pub fn d(&self) -> LieField<T> {
        self.b.derivative(Axis::X).sub(&self.a.derivative(Axis::Y))
    }

    /// `d*α = (∂x a + ∂y b) dx∧dy`.
    pub fn d_star(&self) -> LieField<T> {
        self.a.derivative(Axis::X).add(&self.b.derivative(Axis::Y))
    }

    /// Pointwise `M` applied to both components.
    pub fn apply(&self, m: &DMatrix<f64>) -> AlgebraForm1<T> {
        AlgebraForm1 {
            a: self.a.apply(m),
            b: self.b.apply(m),
        }
    }

    /// Pointwise complex matrix applied to both components.
    pub fn apply_c(&self, m: &DMatrix<C64>) -> AlgebraForm1<C64> {
        AlgebraForm1 {
            a: self.a.apply_c(m),
            b: self.b.apply_c(m),
        }
    }

    /// Componentwise sum.
    pub fn add(&self, other: &AlgebraForm1<T>) -> AlgebraForm1<T> {
        AlgebraForm1 {
            a: self.a.add(&other.a),
            b: self.b.add(&other.b),
        }
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &AlgebraForm1<T>) -> AlgebraForm1<T> {
        AlgebraForm1 {
            a: self.a.sub(&other.a),
            b: self.b.sub(&other.b),
        }
    }

    /// Multiplication by a constant.
    pub fn scale(&self, s: T) -> AlgebraForm1<T> {
        AlgebraForm1 {
            a: self.a.scale(s),
            b: self.b.scale(s),
        }
    }

    /// Largest coefficient modulus of either component.
    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs())
    }

    /// Complexification.
    pub fn to_complex(&self) -> AlgebraForm1<C64> {
        AlgebraForm1 {
            a: self.a.to_complex(),
            b: self.b.to_complex(),
        }
    }
}

impl AlgebraForm1<C64> {
    /// `(1,0)` coefficient `w'` with `α' = w' dz`: `w' = ½(a − i b)`.
    pub fn dz_part(&self) -> LieField<C64> {
        let i = C64::new(0.0, 1.0);
        self.a.sub(&self.b.scale(i)).scale(C64::new(0.5, 0.0))
    }

    /// `(0,1)` coefficient `w''` with `α'' = w'' dz̄`: `w'' = ½(a + i b)`.
    pub fn dzbar_part(&self) -> LieField<C64> {
        let i = C64::new(0.0, 1.0);
        self.a.add(&self.b.scale(i)).scale(C64::new(0.5, 0.0))
    }

    /// `w dz` as a 1-form: `(a, b) = (w, i w)`.
    pub fn from_dz(w: &LieField<C64>) -> Self {
        AlgebraForm1 {
            a: w.clone(),
            b: w.scale(C64::new(0.0, 1.0)),
        }
    }

    /// `w dz̄` as a 1-form: `(a, b) = (w, −i w)`.
    pub fn from_dzbar(w: &LieField<C64>) -> Self {
        AlgebraForm1 {
            a: w.clone(),
            b: w.scale(C64::new(0.0, -1.0)),
        }
    }

    /// Largest imaginary coefficient; zero for real forms.
    pub fn imaginary_residual(&self) -> f64 {
        self.a.imaginary_residual().max(self.b.imaginary_residual())
    }

    /// Real part of both components.
    pub fn re(&self) -> AlgebraForm1<f64> {
        AlgebraForm1 {
            a: self.a.re(),
            b: self.b.re(),
        }
    }

    /// Pointwise conjugate.
    pub fn conj(&self) -> AlgebraForm1<C64> {
        AlgebraForm1 {
            a: self.a.conj(),
            b: self.b.conj(),
        }
    }
}

/// Group-valued lattice field in a matrix realization of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupField {
    grid: LatticeGrid,
    mats: Vec<DMatrix<C64>>,
}

impl GroupField {
    /// Field from one matrix per point.
    pub fn new(grid: LatticeGrid, mats: Vec<DMatrix<C64>>) -> Result<Self, LatticeError> {
        if mats.len() != grid.len() {
            return Err(LatticeError::Shape(format!("expected {} matrices", grid.len())));
        }
        Ok(GroupField { grid, mats })
    }

    /// Constant identity field.
    pub fn identity(grid: LatticeGrid, size: usize) -> Self {
        GroupField {
            grid,
            mats: vec![DMatrix::identity(size, size); grid.len()],
        }
    }

    /// Pointwise exponential `exp(X(p))` of an algebra-valued field.
    pub fn exp_of(field: &LieField<f64>, rep: &MatrixRealization) -> Self {
        GroupField {
            grid: *field.grid(),
            mats: field.values().iter().map(|v| rep.matrix(v).exp()).collect(),
        }
    }

    /// Underlying grid.
    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    /// Matrix at a point.
    pub fn at(&self, p: usize) -> &DMatrix<C64> {
        &self.mats[p]
    }

    /// Mutable matrix at a point.
    pub fn at_mut(&mut self, p: usize) -> &mut DMatrix<C64> {
        &mut self.mats[p]
    }

    /// All matrices in row-major order.
    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.mats
    }

    /// `max_p ‖U_p* U_p − I‖` (unitarity defect).
    pub fn membership_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|u| {
                let n = u.nrows();
                crate::linalg::max_abs_c(&(u.adjoint() * u - DMatrix::identity(n, n)))
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise product `U V`.
    pub fn mul(&self, other: &GroupField) -> GroupField {
        GroupField {
            grid: self.grid,
            mats: self.mats.iter().zip(&other.mats).map(|(u, v)| u * v).collect(),
        }
    }

    /// Pointwise inverse (adjoint, for unitary fields).
    pub fn inverse(&self) -> GroupField {
        GroupField {
            grid: self.grid,
            mats: self.mats.iter().map(|u| u.adjoint()).collect(),
        }
    }

    /// Lattice Maurer-Cartan form `U⁻¹ D U` with the grid stencils,
    /// projected onto the realization.
    pub fn maurer_cartan(&self, rep: &MatrixRealization) -> AlgebraForm1<f64> {
        let inv_h = 1.0 / self.grid.h();
        let comp = |axis: Axis| {
            LieField::from_fn(self.grid, rep.basis().len(), |p| {
                let n = self.mats[p].nrows();
                let mut du = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
                for (q, w) in self.grid.stencil(p, axis) {
                    if w != 0.0 && q != p {
                        du += (&self.mats[q] - &self.mats[p]) * C64::new(w * inv_h, 0.0);
                    }
                }
                rep.coords(&(self.mats[p].adjoint() * du))
            })
        };
        AlgebraForm1 {
            a: comp(Axis::X),
            b: comp(Axis::Y),
        }
    }
}

/// On-disk field file: grid metadata plus row-major value arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub grid: LatticeGrid,
    pub dim: usize,
    /// Real parts, `values[p][c]`.
    pub re: Vec<Vec<f64>>,
    /// Imaginary parts; omitted for real fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl FieldFile {
    /// Serializable form of a real field.
    pub fn from_real(field: &LieField<f64>) -> Self {
        FieldFile {
            grid: field.grid,
            dim: field.dim,
            re: field.values.iter().map(|v| v.iter().copied().collect()).collect(),
            im: None,
        }
    }

    /// Serializable form of a complex field.
    pub fn from_complex(field: &LieField<C64>) -> Self {
        FieldFile {
            grid: field.grid,
            dim: field.dim,
            re: field.values.iter().map(|v| v.iter().map(|z| z.re).collect()).collect(),
            im: Some(field.values.iter().map(|v| v.iter().map(|z| z.im).collect()).collect()),
        }
    }

    /// Complex field described by the file.
    pub fn to_complex(&self) -> Result<LieField<C64>, LatticeError> {
        let grid = LatticeGrid::new(self.grid.nx(), self.grid.ny(), self.grid.h(), self.grid.boundary())?;
        let values = self
            .re
            .iter()
            .enumerate()
            .map(|(p, re)| {
                let im = self.im.as_ref().and_then(|im| im.get(p));
                DVector::from_fn(re.len(), |c, _| {
                    C64::new(re[c], im.map_or(0.0, |v| v.get(c).copied().unwrap_or(0.0)))
                })
            })
            .collect();
        LieField::from_values(grid, self.dim, values)
    }

    /// Real field described by the file; rejects nonzero imaginary parts.
    pub fn to_real(&self) -> Result<LieField<f64>, LatticeError> {
        let c = self.to_complex()?;
        let r = c.imaginary_residual();
        if r > 0.0 {
            return Err(LatticeError::NotReal { residual: r });
        }
        Ok(c.re())
    }
}

/// Serializable group field: real and imaginary parts of each matrix, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFieldFile {
    pub grid: LatticeGrid,
    pub size: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl GroupFieldFile {
    /// Serializable form of a group field.
    pub fn new(field: &GroupField) -> Self {
        let size = field.mats.first().map_or(0, |m| m.nrows());
        let rows = |f: fn(&C64) -> f64| {
            field
                .mats
                .iter()
                .map(|m| m.transpose().iter().map(f).collect())
                .collect()
        };
        GroupFieldFile {
            grid: field.grid,
            size,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Group field described by the file.
    pub fn to_field(&self) -> Result<GroupField, LatticeError> {
        let grid = LatticeGrid::new(self.grid.nx(), self.grid.ny(), self.grid.h(), self.grid.boundary())?;
        let n = self.size;
        if self.re.len() != grid.len() || self.im.len() != grid.len() {
            return Err(LatticeError::Shape("matrix count does not match the grid".into()));
        }
        let mats = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(re, im)| {
                if re.len() != n * n || im.len() != n * n {
                    return Err(LatticeError::Shape("matrix entry count mismatch".into()));
                }
                Ok(DMatrix::from_fn(n, n, |r, c| C64::new(re[r * n + c], im[r * n + c])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        GroupField::new(grid, mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::grid::Boundary;
    use proptest::prelude::*;

    fn grid() -> LatticeGrid {
        LatticeGrid::new(6, 5, 0.2, Boundary::Periodic).unwrap()
    }

    fn random_form(seed: u64, dim: usize) -> AlgebraForm1<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let mut sample = |_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let a = LieField::from_fn(g, dim, &mut sample);
        let b = LieField::from_fn(g, dim, &mut sample);
        AlgebraForm1::new(a, b).unwrap()
    }

    proptest! {
        #[test]
        fn hodge_squares_to_minus_identity(seed in 0u64..1000) {
            let a = random_form(seed, 3);
            let back = a.hodge().hodge().scale(-1.0);
            prop_assert_eq!(back, a);
        }

        #[test]
        fn star_wedge_symmetry(seed in 0u64..500) {
            let br = SparseBracket::new(&fixtures::su3_algebra());
            let a = random_form(seed, 8);
            prop_assert!(br.wedge(&a, &a.hodge()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn wirtinger_parts_recombine() {
        let a = random_form(3, 3).to_complex();
        let w1 = a.dz_part();
        let w2 = a.dzbar_part();
        let back = AlgebraForm1::from_dz(&w1).add(&AlgebraForm1::from_dzbar(&w2));
        assert!(back.sub(&a).max_abs() < 1e-15);
    }

    #[test]
    fn sparse_bracket_matches_dense() {
        let alg = fixtures::su3_algebra();
        let br = SparseBracket::new(&alg);
        let x = DVector::from_fn(8, |i, _| (i as f64 * 0.7).sin());
        let y = DVector::from_fn(8, |i, _| (i as f64 * 1.3).cos());
        assert!((br.apply(&x, &y) - alg.br(&x, &y)).amax() < 1e-15);
    }

    #[test]
    fn maurer_cartan_of_one_parameter_group() {
        let f = fixtures::su2_involution();
        let g = LatticeGrid::new(8, 8, 0.1, Boundary::Clamped).unwrap();
        let xi = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let x_field = LieField::from_fn(g, 3, |p| &xi * g.point(p).0);
        let u = GroupField::exp_of(&x_field, &f.realization);
        assert!(u.membership_residual() < 1e-13);
        let alpha = u.maurer_cartan(&f.realization);
        // Second-order stencils on exp(xξ) are exact up to O(h²|ξ|³).
        assert!(alpha.x().sub(&LieField::from_fn(g, 3, |_| xi.clone())).max_abs() < 0.01);
        assert!(alpha.y().max_abs() < 1e-14);
    }

    #[test]
    fn field_files_round_trip() {
        let a = random_form(9, 3);
        let file = FieldFile::from_real(a.x());
        let text = serde_json::to_string(&file).unwrap();
        let back: FieldFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_real().unwrap(), *a.x());
        let f = fixtures::su2_involution();
        let u = GroupField::exp_of(a.y(), &f.realization);
        let gf = GroupFieldFile::new(&u);
        assert_eq!(gf.to_field().unwrap(), u);
    }
}

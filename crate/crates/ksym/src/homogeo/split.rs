//! Reductive decompositions `𝔤 = 𝔨 ⊕ 𝔫` and invariant metrics on `𝔫`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::tensor::Tensor3;
use super::GeometryError;
use crate::autodecomp::GradedDecomposition;
use crate::liealg::LieAlgebra;
use crate::linalg::{self, max_abs, C64};

/// Ranges of the `𝔪_j` blocks and the optional `𝔤_k` block.
pub type BlockRanges = (Vec<Range<usize>>, Option<Range<usize>>);

/// Reductive decomposition `𝔤 = 𝔨 ⊕ 𝔫` with `[𝔨, 𝔫] ⊂ 𝔫`.
///
/// Vectors of `𝔫` are handled in the coordinates of the columns of
/// [`ReductiveSplit::n_basis`]. The brackets `[X,Y]_𝔫`, `[X,Y]_𝔨` and the
/// isotropy action `ad(𝔨)|𝔫` are precomputed in those coordinates.
#[derive(Debug, Clone)]
pub struct ReductiveSplit {
    algebra: LieAlgebra,
    k_basis: DMatrix<f64>,
    n_basis: DMatrix<f64>,
    to_coords: DMatrix<f64>,
    br_n: Tensor3,
    br_k: Vec<DVector<f64>>,
    ad_k: Vec<DMatrix<f64>>,
    grading: Option<GradedDecomposition>,
    reductivity_residual: f64,
}

impl ReductiveSplit {
    /// Builds a split from bases of `𝔨` and `𝔫` (columns in `𝔤` coordinates).
    pub fn new(
        algebra: &LieAlgebra,
        k_basis: DMatrix<f64>,
        n_basis: DMatrix<f64>,
        tol: f64,
    ) -> Result<Self, GeometryError> {
        let dim = algebra.dim();
        if k_basis.nrows() != dim || n_basis.nrows() != dim || k_basis.ncols() + n_basis.ncols() != dim {
            return Err(GeometryError::NotComplementary);
        }
        let full = linalg::hstack(&[&k_basis, &n_basis], dim);
        let to_coords = full.try_inverse().ok_or(GeometryError::NotComplementary)?;
        let dk = k_basis.ncols();
        let dn = n_basis.ncols();
        let split_of = |v: &DVector<f64>| {
            let c = &to_coords * v;
            (c.rows(0, dk).into_owned(), c.rows(dk, dn).into_owned())
        };
        let ncols: Vec<DVector<f64>> = (0..dn).map(|j| n_basis.column(j).into_owned()).collect();
        let mut br_n = Tensor3::zeros(dn);
        let mut br_k = vec![DVector::zeros(dk); dn * dn];
        for i in 0..dn {
            for j in 0..dn {
                let (k, n) = split_of(&algebra.br(&ncols[i], &ncols[j]));
                for c in 0..dn {
                    br_n.set(i, j, c, n[c]);
                }
                br_k[i * dn + j] = k;
            }
        }
        let mut ad_k = Vec::with_capacity(dk);
        let mut red = 0.0_f64;
        for a in 0..dk {
            let ka = k_basis.column(a).into_owned();
            let mut m = DMatrix::zeros(dn, dn);
            for (j, nj) in ncols.iter().enumerate() {
                let (kpart, npart) = split_of(&algebra.br(&ka, nj));
                red = red.max(kpart.amax());
                m.set_column(j, &npart);
            }
            ad_k.push(m);
        }
        if red > tol {
            return Err(GeometryError::NotReductiveSplit { residual: red });
        }
        Ok(ReductiveSplit {
            algebra: algebra.clone(),
            k_basis,
            n_basis,
            to_coords,
            br_n,
            br_k,
            ad_k,
            grading: None,
            reductivity_residual: red,
        })
    }

    /// Split of a k'-symmetric decomposition: `𝔨 = 𝔤₀`, `𝔫 = 𝔪₁ ⊕ … ⊕ 𝔤_k`.
    pub fn from_decomposition(algebra: &LieAlgebra, dec: &GradedDecomposition) -> Result<Self, GeometryError> {
        let mut s = Self::new(
            algebra,
            dec.basis_g0().clone(),
            dec.basis_n(),
            crate::liealg::DEFAULT_TOL,
        )?;
        s.grading = Some(dec.clone());
        Ok(s)
    }

    /// Underlying algebra.
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    /// Basis of `𝔨` in `𝔤` coordinates.
    pub fn k_basis(&self) -> &DMatrix<f64> {
        &self.k_basis
    }

    /// Basis of `𝔫` in `𝔤` coordinates.
    pub fn n_basis(&self) -> &DMatrix<f64> {
        &self.n_basis
    }

    /// `dim 𝔫`.
    pub fn dim_n(&self) -> usize {
        self.n_basis.ncols()
    }

    /// `dim 𝔨`.
    pub fn dim_k(&self) -> usize {
        self.k_basis.ncols()
    }

    /// Graded decomposition this split came from, if any.
    pub fn grading(&self) -> Option<&GradedDecomposition> {
        self.grading.as_ref()
    }

    /// `max ‖[𝔨, 𝔫]_𝔨‖` over basis pairs.
    pub fn reductivity_residual(&self) -> f64 {
        self.reductivity_residual
    }

    /// Whether `[𝔫, 𝔫] ⊂ 𝔨` to within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.br_n.max_abs() <= tol
    }

    /// `[e_i, e_j]_𝔫` as a tensor in `𝔫` coordinates.
    pub fn bracket_n_tensor(&self) -> &Tensor3 {
        &self.br_n
    }

    /// `[x, y]_𝔫` for `𝔫`-coordinate vectors.
    pub fn bracket_n(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.br_n.eval(x, y)
    }

    /// `[x, y]_𝔨` in `𝔨` coordinates for `𝔫`-coordinate vectors.
    pub fn bracket_k(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let dn = self.dim_n();
        let mut out = DVector::zeros(self.dim_k());
        for i in 0..dn {
            for j in 0..dn {
                let s = x[i] * y[j];
                if s != 0.0 {
                    out += &self.br_k[i * dn + j] * s;
                }
            }
        }
        out
    }

    /// `[e_i, e_j]_𝔨` in `𝔨` coordinates.
    pub fn bracket_k_basis(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.br_k[i * self.dim_n() + j]
    }

    /// `ad(K_a)` restricted to `𝔫`, in `𝔫` coordinates.
    pub fn ad_k(&self, a: usize) -> &DMatrix<f64> {
        &self.ad_k[a]
    }

    /// `ad(k)|𝔫` for a `𝔨`-coordinate vector.
    pub fn ad_k_of(&self, k: &DVector<f64>) -> DMatrix<f64> {
        let dn = self.dim_n();
        let mut m = DMatrix::zeros(dn, dn);
        for (a, c) in k.iter().enumerate() {
            if *c != 0.0 {
                m += &self.ad_k[a] * *c;
            }
        }
        m
    }

    /// Splits a `𝔤`-coordinate vector into (`𝔨` coords, `𝔫` coords).
    pub fn split_coords(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let c = &self.to_coords * v;
        (
            c.rows(0, self.dim_k()).into_owned(),
            c.rows(self.dim_k(), self.dim_n()).into_owned(),
        )
    }

    /// `𝔤`-coordinate vector of an `𝔫`-coordinate vector.
    pub fn embed_n(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.n_basis * x
    }

    /// Matrix taking `𝔤` coordinates to `𝔫` coordinates (the `𝔫`-projection).
    pub fn n_projection(&self) -> DMatrix<f64> {
        self.to_coords.rows(self.dim_k(), self.dim_n()).into_owned()
    }

    /// Matrix taking `𝔤` coordinates to `𝔨` coordinates (the `𝔨`-projection).
    pub fn k_projection(&self) -> DMatrix<f64> {
        self.to_coords.rows(0, self.dim_k()).into_owned()
    }

    /// Projector `P_j` restricted to `𝔫^ℂ`, in `𝔫` coordinates (graded splits only).
    pub fn grade_projector_n(&self, j: i64) -> Option<DMatrix<C64>> {
        let dec = self.grading.as_ref()?;
        let proj = linalg::to_complex(&self.n_projection());
        let emb = linalg::to_complex(&self.n_basis);
        Some(proj * dec.projector(j) * emb)
    }

    /// Column ranges of the blocks `𝔪_1, …, 𝔪_k` and (even order) `𝔤_k` in `𝔫` coordinates.
    pub fn block_ranges(&self) -> Option<BlockRanges> {
        let dec = self.grading.as_ref()?;
        let mut start = 0;
        let mut ms = Vec::new();
        for j in 1..=dec.num_m() {
            let d = dec.basis_m(j).ncols();
            ms.push(start..start + d);
            start += d;
        }
        let gk = dec.basis_gk().map(|b| start..start + b.ncols());
        Some((ms, gk))
    }

    /// Coordinate projector onto a block range.
    pub fn block_projector(&self, range: &Range<usize>) -> DMatrix<f64> {
        let dn = self.dim_n();
        DMatrix::from_fn(dn, dn, |r, c| if r == c && range.contains(&r) { 1.0 } else { 0.0 })
    }

    /// `τ` restricted to `𝔫` in `𝔫` coordinates (graded splits only).
    pub fn tau_n(&self) -> Option<DMatrix<f64>> {
        let dec = self.grading.as_ref()?;
        Some(self.n_projection() * dec.tau() * &self.n_basis)
    }
}

/// Positive-definite, `ad(𝔨)`-invariant inner product on `𝔫`.
#[derive(Debug, Clone)]
pub struct InvariantMetric {
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

impl InvariantMetric {
    /// Validates symmetry, positivity and `ad(𝔨)`-invariance.
    pub fn new(split: &ReductiveSplit, gram: DMatrix<f64>, tol: f64) -> Result<Self, GeometryError> {
        let dn = split.dim_n();
        if gram.nrows() != dn || gram.ncols() != dn {
            return Err(GeometryError::Shape(format!(
                "metric is {}x{}, expected {dn}x{dn}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        let asym = max_abs(&(&gram - gram.transpose()));
        if asym > tol {
            return Err(GeometryError::NotPositive);
        }
        if gram.clone().cholesky().is_none() {
            return Err(GeometryError::NotPositive);
        }
        let residual = Self::invariance_of(split, &gram);
        if residual > tol {
            return Err(GeometryError::NonInvariantMetric { residual });
        }
        let gram_inv = gram.clone().try_inverse().ok_or(GeometryError::NotPositive)?;
        Ok(InvariantMetric { gram, gram_inv })
    }

    /// Restriction to `𝔫` of an inner product on `𝔤` coordinates.
    pub fn from_inner(split: &ReductiveSplit, inner: &DMatrix<f64>, tol: f64) -> Result<Self, GeometryError> {
        let n = split.n_basis();
        Self::new(split, n.transpose() * inner * n, tol)
    }

    /// `−B` restricted to `𝔫`; rejected when not positive definite.
    pub fn negative_killing(split: &ReductiveSplit, tol: f64) -> Result<Self, GeometryError> {
        let k = -split.algebra().killing_matrix();
        match Self::from_inner(split, &k, tol) {
            Err(GeometryError::NotPositive) => Err(GeometryError::DegenerateKilling),
            other => other,
        }
    }

    fn invariance_of(split: &ReductiveSplit, gram: &DMatrix<f64>) -> f64 {
        (0..split.dim_k())
            .map(|a| {
                let ad = split.ad_k(a);
                max_abs(&(ad.transpose() * gram + gram * ad))
            })
            .fold(0.0, f64::max)
    }

    /// Gram matrix.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Inverse Gram matrix.
    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// `⟨x, y⟩`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    /// `max ‖ad(K)ᵀ g + g ad(K)‖` over the `𝔨` basis.
    pub fn invariance_residual(&self, split: &ReductiveSplit) -> f64 {
        Self::invariance_of(split, &self.gram)
    }

    /// `max |⟨Ax, y⟩ − ⟨x, Ay⟩|`-type defect of `A` being `g`-orthogonal: `‖AᵀgA − g‖`.
    pub fn orthogonality_residual(&self, a: &DMatrix<f64>) -> f64 {
        max_abs(&(a.transpose() * &self.gram * a - &self.gram))
    }

    /// `max |⟨[Z,X]_𝔫, Y⟩ + ⟨X, [Z,Y]_𝔫⟩|`: zero iff naturally reductive.
    pub fn natural_reductivity_residual(&self, split: &ReductiveSplit) -> f64 {
        let low = split.bracket_n_tensor().lower(&self.gram);
        // low[z,x,y] = ⟨[e_z,e_x], e_y⟩; naturally reductive iff skew in (x,y).
        low.add(&low.permute([0, 2, 1])).max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;

    #[test]
    fn graded_splits_are_reductive() {
        for f in fixtures::all() {
            let d = grade(&f.algebra, &f.tau);
            let s = ReductiveSplit::from_decomposition(&f.algebra, &d).unwrap();
            assert!(s.reductivity_residual() < 1e-12, "{}", f.name);
            assert_eq!(s.dim_k() + s.dim_n(), f.algebra.dim());
        }
    }

    #[test]
    fn non_reductive_split_is_rejected() {
        let g = fixtures::su2_algebra();
        let k = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let n = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            ReductiveSplit::new(&g, k, n, 1e-9),
            Err(GeometryError::NotReductiveSplit { .. })
        ));
    }

    #[test]
    fn killing_metric_is_naturally_reductive() {
        let f = fixtures::su3_order3();
        let d = grade(&f.algebra, &f.tau);
        let s = ReductiveSplit::from_decomposition(&f.algebra, &d).unwrap();
        let g = InvariantMetric::negative_killing(&s, 1e-9).unwrap();
        assert!(g.natural_reductivity_residual(&s) < 1e-12);
        assert!(g.invariance_residual(&s) < 1e-12);
    }

    #[test]
    fn non_invariant_metric_is_rejected() {
        let f = fixtures::su3_order3();
        let d = grade(&f.algebra, &f.tau);
        let s = ReductiveSplit::from_decomposition(&f.algebra, &d).unwrap();
        let mut gram = DMatrix::identity(6, 6);
        gram[(0, 0)] = 2.0;
        assert!(matches!(
            InvariantMetric::new(&s, gram, 1e-9),
            Err(GeometryError::NonInvariantMetric { .. })
        ));
    }

    #[test]
    fn abelian_killing_is_degenerate() {
        let g = LieAlgebra::abelian(3);
        let s = ReductiveSplit::new(&g, DMatrix::zeros(3, 0), DMatrix::identity(3, 3), 1e-9).unwrap();
        assert!(matches!(
            InvariantMetric::negative_killing(&s, 1e-9),
            Err(GeometryError::DegenerateKilling)
        ));
    }
}

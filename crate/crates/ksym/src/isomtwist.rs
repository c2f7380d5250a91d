//! Finite-order special-orthogonal isometries of `ℝ^{2n}` without
//! eigenvalues `±1`: membership, connected-component invariants, the
//! eigenspaces of `Ad J` on `End(ℝ^{2n})` and tangent spaces of the orbits.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, max_abs, max_abs_c, to_complex, C64};

/// Tolerance for orthogonality and order checks.
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Singular values above this count towards projector ranks.
const PROJECTOR_RANK_THRESHOLD: f64 = 0.5;

/// Reasons a matrix fails to be an element of `𝒵_{2k}(ℝ^{2n})`.
#[derive(Debug, thiserror::Error)]
pub enum IsometryError {
    #[error("matrix must be square of even size, got {rows}×{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("matrix is not orthogonal: ‖AᵀA − Id‖ = {residual:.3e}")]
    NotOrthogonal { residual: f64 },
    #[error("matrix has determinant {det:.6}, expected +1")]
    NotSpecial { det: f64 },
    #[error("A^{order} ≠ Id: residual {residual:.3e}")]
    OrderMismatch { order: usize, residual: f64 },
    #[error("A^{p} = Id with p = {p} < {order}")]
    NotMinimalOrder { order: usize, p: usize },
    #[error("A has eigenvalue {eigenvalue} with multiplicity {multiplicity}")]
    ForbiddenEigenvalue { eigenvalue: i8, multiplicity: usize },
}

/// Resolvent projector `(1/p) Σ_l ω_p^{−jl} A^l` onto `ker(A − ω_p^j)`.
fn resolvent_projector(a: &DMatrix<f64>, order: usize, j: i64) -> DMatrix<C64> {
    let n = a.nrows();
    let jm = linalg::modp(j, order as i64);
    let mut out = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut power = DMatrix::<f64>::identity(n, n);
    for l in 0..order {
        let angle = -2.0 * std::f64::consts::PI * ((jm * l as i64) % order as i64) as f64 / order as f64;
        out += to_complex(&power) * (C64::from_polar(1.0, angle) / order as f64);
        power = &power * a;
    }
    out
}

/// An element of `𝒵_{2k}(ℝ^{2n})`: `A ∈ SO(2n)` of exact order `2k` with
/// neither `1` nor `−1` as an eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteIsometry {
    matrix: DMatrix<f64>,
    k: usize,
}

impl FiniteIsometry {
    /// Validates membership in `𝒵_{2k}`.
    pub fn new(matrix: DMatrix<f64>, k: usize, tol: f64) -> Result<Self, IsometryError> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(IsometryError::Shape { rows, cols });
        }
        if k == 0 {
            return Err(IsometryError::ZeroK);
        }
        let id = DMatrix::<f64>::identity(rows, rows);
        let residual = max_abs(&(matrix.transpose() * &matrix - &id));
        if residual > tol {
            return Err(IsometryError::NotOrthogonal { residual });
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-6 {
            return Err(IsometryError::NotSpecial { det });
        }
        let order = 2 * k;
        let mut power = id.clone();
        for p in 1..=order {
            power = &power * &matrix;
            let r = max_abs(&(&power - &id));
            if p < order && order.is_multiple_of(p) && r <= tol {
                return Err(IsometryError::NotMinimalOrder { order, p });
            }
            if p == order && r > tol {
                return Err(IsometryError::OrderMismatch { order, residual: r });
            }
        }
        for (j, eigenvalue) in [(0i64, 1i8), (k as i64, -1i8)] {
            let multiplicity = linalg::rank_c(&resolvent_projector(&matrix, order, j), PROJECTOR_RANK_THRESHOLD);
            if multiplicity > 0 {
                return Err(IsometryError::ForbiddenEigenvalue {
                    eigenvalue,
                    multiplicity,
                });
            }
        }
        Ok(FiniteIsometry { matrix, k })
    }

    /// The matrix `A`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The half order `k` (the order is `2k`).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Half the dimension, `n`.
    pub fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `r`: the order of `Ad A`, equal to `k` when `A^k = −Id` and `2k` otherwise.
    pub fn ad_order(&self) -> usize {
        let dim = self.matrix.nrows();
        let mut power = DMatrix::<f64>::identity(dim, dim);
        for _ in 0..self.k {
            power = &power * &self.matrix;
        }
        let minus_id = -DMatrix::<f64>::identity(dim, dim);
        if max_abs(&(power - minus_id)) <= ISOMETRY_TOL {
            self.k
        } else {
            2 * self.k
        }
    }

    /// Projector onto `E_A(ω_{2k}^j)` with `ω_{2k} = e^{iπ/k}`.
    pub fn eigenprojector(&self, j: i64) -> DMatrix<C64> {
        resolvent_projector(&self.matrix, 2 * self.k, j)
    }
}

/// Connected-component label `(ε, (p₁, …, p_{k−1}))` of `𝒵_{2k}(ℝ^{2n})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentInvariant {
    /// Orientation sign.
    pub eps: i8,
    /// `p_j = dim_ℂ ker(A − ω_{2k}^j)` for `j = 1..k−1`.
    pub p: Vec<usize>,
}

impl ComponentInvariant {
    /// Whether the multiplicities are achievable by some element of `𝒵_{2k}(ℝ^{2n})`:
    /// they sum to `n` and the eigenvalue orders have least common multiple `2k`.
    pub fn is_admissible(&self, n: usize) -> bool {
        let k = self.p.len() + 1;
        if self.p.iter().sum::<usize>() != n || self.eps.abs() != 1 {
            return false;
        }
        let mut l = 1u64;
        for (idx, &pj) in self.p.iter().enumerate() {
            if pj > 0 {
                let j = idx as u64 + 1;
                let ord = 2 * k as u64 / linalg::gcd(j, 2 * k as u64);
                l = l / linalg::gcd(l, ord) * ord;
            }
        }
        l == 2 * k as u64
    }
}

/// Oriented real basis adapted to `A`: for every `j = 1..k−1` and every
/// vector `v` of a unitary basis of `E_A(ω^j)`, the pair `(√2 Re v, −√2 Im v)`
/// spans a plane on which `A` rotates by `+jπ/k`.
pub fn adapted_basis(a: &FiniteIsometry) -> DMatrix<f64> {
    let dim = a.matrix.nrows();
    let mut cols = Vec::with_capacity(dim);
    for j in 1..a.k as i64 {
        let basis = linalg::column_space_c(&a.eigenprojector(j), PROJECTOR_RANK_THRESHOLD);
        for c in 0..basis.ncols() {
            let v = basis.column(c);
            cols.push(v.map(|z| std::f64::consts::SQRT_2 * z.re));
            cols.push(v.map(|z| -std::f64::consts::SQRT_2 * z.im));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Connected-component invariant of `A`.
///
/// `ε` is the sign of the determinant of [`adapted_basis`], i.e. of the
/// intertwiner to the block rotation with angles `jπ/k` in the standard
/// orientation. It does not depend on the unitary bases chosen.
pub fn component_invariant(a: &FiniteIsometry) -> ComponentInvariant {
    let p = (1..a.k as i64)
        .map(|j| linalg::rank_c(&a.eigenprojector(j), PROJECTOR_RANK_THRESHOLD))
        .collect();
    let det = adapted_basis(a).determinant();
    ComponentInvariant {
        eps: if det > 0.0 { 1 } else { -1 },
        p,
    }
}

/// Canonical representative of a component: block rotations by `jπ/k`
/// (`p_j` copies each, in increasing `j`), with the last plane reflected
/// when `ε = −1`.
pub fn canonical_representative(inv: &ComponentInvariant) -> DMatrix<f64> {
    let k = inv.p.len() + 1;
    let n: usize = inv.p.iter().sum();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    let mut b = 0;
    for (idx, &pj) in inv.p.iter().enumerate() {
        let theta = (idx + 1) as f64 * std::f64::consts::PI / k as f64;
        for _ in 0..pj {
            let s = if inv.eps < 0 && b == n - 1 { -1.0 } else { 1.0 };
            m[(2 * b, 2 * b)] = theta.cos();
            m[(2 * b + 1, 2 * b + 1)] = theta.cos();
            m[(2 * b + 1, 2 * b)] = s * theta.sin();
            m[(2 * b, 2 * b + 1)] = -s * theta.sin();
            b += 1;
        }
    }
    m
}

/// Rotation of the plane by angle `theta`.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// The eigenspace decomposition of `Ad J` on `End(ℝ^{2n})^ℂ`.
///
/// Matrices act on column-major vectorizations, so `Ad J = J ⊗ J`.
#[derive(Debug, Clone)]
pub struct AdjEigenspaces {
    /// Order `r` of `Ad J`.
    pub r: usize,
    /// Projectors onto `𝒜_j(J) = ker(Ad J − ω_r^j)`, `j = 0..r−1`.
    pub a: Vec<DMatrix<C64>>,
    /// Projectors onto `𝔰𝔬_j(J) = 𝒜_j(J) ∩ 𝔰𝔬(2n)^ℂ`.
    pub so: Vec<DMatrix<C64>>,
    /// Projectors onto `ℬ_j(J) = 𝒜_j(J) ∩ (J·𝔰𝔬(2n))^ℂ`.
    pub b: Vec<DMatrix<C64>>,
}

impl AdjEigenspaces {
    /// Complex ranks of the `𝒜_j`.
    pub fn ranks(&self) -> Vec<usize> {
        self.a
            .iter()
            .map(|p| linalg::rank_c(p, PROJECTOR_RANK_THRESHOLD))
            .collect()
    }

    /// Complex ranks of the `ℬ_j`.
    pub fn b_ranks(&self) -> Vec<usize> {
        self.b
            .iter()
            .map(|p| linalg::rank_c(p, PROJECTOR_RANK_THRESHOLD))
            .collect()
    }

    /// Complex ranks of the `𝔰𝔬_j`.
    pub fn so_ranks(&self) -> Vec<usize> {
        self.so
            .iter()
            .map(|p| linalg::rank_c(p, PROJECTOR_RANK_THRESHOLD))
            .collect()
    }

    /// Worst idempotence, mutual orthogonality and resolution defect of the `𝒜_j`.
    pub fn resolution_residual(&self) -> f64 {
        let n = self.a[0].nrows();
        let mut sum = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let mut r = 0.0_f64;
        for (i, p) in self.a.iter().enumerate() {
            r = r.max(max_abs_c(&(p * p - p)));
            for q in &self.a[i + 1..] {
                r = r.max(max_abs_c(&(p * q)));
            }
            sum += p;
        }
        r.max(max_abs_c(
            &(sum - DMatrix::identity(n, n).map(|x: f64| C64::new(x, 0.0))),
        ))
    }
}

/// `Ad M = M ⊗ M` on column-major vectorized endomorphisms (orthogonal `M`).
fn ad_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.kronecker(m)
}

/// Projector onto `𝔰𝔬(2n)` inside `End(ℝ^{2n})`, on vectorizations.
fn so_projector(dim: usize) -> DMatrix<f64> {
    let n2 = dim * dim;
    let mut p = DMatrix::zeros(n2, n2);
    for a in 0..dim {
        for b in 0..dim {
            let col = a + b * dim;
            let tcol = b + a * dim;
            p[(col, col)] += 0.5;
            p[(tcol, col)] -= 0.5;
        }
    }
    p
}

/// Left multiplication `X ↦ M X` on vectorizations.
fn left_mult(m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = m.nrows();
    DMatrix::<f64>::identity(dim, dim).kronecker(m)
}

/// Eigenspace projectors of `Ad J` and their intersections with
/// `𝔰𝔬(2n)` and `J·𝔰𝔬(2n)`.
pub fn adj_eigenspaces(j: &FiniteIsometry) -> AdjEigenspaces {
    let r = j.ad_order();
    let adj = ad_matrix(j.matrix());
    let dim = j.matrix().nrows();
    let pso = to_complex(&so_projector(dim));
    let lj = left_mult(j.matrix());
    let pjso = to_complex(&(&lj * so_projector(dim) * lj.transpose()));
    let a: Vec<DMatrix<C64>> = (0..r as i64).map(|l| resolvent_projector(&adj, r, l)).collect();
    let so = a.iter().map(|p| p * &pso).collect();
    let b = a.iter().map(|p| p * &pjso).collect();
    AdjEigenspaces { r, a, so, b }
}

/// Direct-versus-assembled comparison for the eigenspaces of `Ad J^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEigenspaceReport {
    /// Order `r` of `Ad J`.
    pub r: usize,
    /// The power `j` (reduced modulo `r`).
    pub j: usize,
    /// Order `p = r / (r, j)` of `Ad J^j`.
    pub p: usize,
    /// For each `l = 0..p−1`, the indices `qp + l'` assembled on the right-hand side.
    pub assembled: Vec<Vec<usize>>,
    /// Largest entrywise projector difference over all `l`.
    pub residual: f64,
}

/// Checks `𝒜_l(J^j) = ⊕_{q=0}^{(r,j)−1} 𝒜_{qp+l'}(J)` with `l' = (j')^{−1} l`
/// in `ℤ/pℤ`, `j' = j/(r,j)`, comparing projectors from `Ad J^j` directly
/// with sums of projectors of `Ad J`.
pub fn power_eigenspace_check(jmat: &FiniteIsometry, j: i64) -> PowerEigenspaceReport {
    let spaces = adj_eigenspaces(jmat);
    let r = spaces.r;
    let jr = linalg::modp(j, r as i64) as usize;
    let g = linalg::gcd(r as u64, jr as u64) as usize;
    let p = r / g;
    let jprime = (jr / g) % p;
    let inv = (0..p).find(|x| (x * jprime) % p == 1 % p).unwrap_or(0);
    let power = {
        let dim = jmat.matrix().nrows();
        let mut m = DMatrix::<f64>::identity(dim, dim);
        for _ in 0..jr {
            m = &m * jmat.matrix();
        }
        m
    };
    let adj = ad_matrix(&power);
    let mut residual = 0.0_f64;
    let mut assembled = Vec::with_capacity(p);
    for l in 0..p {
        let direct = resolvent_projector(&adj, p, l as i64);
        let lp = (inv * l) % p;
        let idx: Vec<usize> = (0..g).map(|q| q * p + lp).collect();
        let mut rhs = DMatrix::from_element(direct.nrows(), direct.ncols(), C64::new(0.0, 0.0));
        for &i in &idx {
            rhs += &spaces.a[i];
        }
        residual = residual.max(max_abs_c(&(direct - rhs)));
        assembled.push(idx);
    }
    PowerEigenspaceReport {
        r,
        j: jr,
        p,
        assembled,
        residual,
    }
}

/// Tangent space of `𝒵_{2k,j}(ℝ^{2n}, J^j)` at `J` computed two ways.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    /// Orthonormal basis (vectorized endomorphisms as columns) of the kernel of
    /// `A ↦ Σ_{p+l=j−1} J^p A J^l` on `J·𝔰𝔬(2n)`.
    pub kernel_basis: DMatrix<f64>,
    /// Orthonormal basis of `(⊕_{q=1}^{(r,j)−1} ℬ_{qp}(J)) ∩ End(ℝ^{2n})`.
    pub block_basis: DMatrix<f64>,
    /// Distance between the two orthogonal projectors.
    pub agreement_residual: f64,
}

impl TangentSpace {
    /// Real dimension (of the kernel computation).
    pub fn dim(&self) -> usize {
        self.kernel_basis.ncols()
    }
}

/// Tangent space at `J` of the orbit `𝒵_{2k,j}(ℝ^{2n}, J^j)`; `None` gives the
/// whole component, which is the case `j = r`.
pub fn tangent_space(jmat: &FiniteIsometry, j: Option<usize>) -> TangentSpace {
    let spaces = adj_eigenspaces(jmat);
    let r = spaces.r;
    let jj = j.unwrap_or(r).max(1);
    let dim = jmat.matrix().nrows();
    let m = jmat.matrix();

    // Basis of J·𝔰𝔬(2n).
    let mut so_basis = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            let mut s = DMatrix::<f64>::zeros(dim, dim);
            s[(a, b)] = 1.0 / std::f64::consts::SQRT_2;
            s[(b, a)] = -1.0 / std::f64::consts::SQRT_2;
            so_basis.push(linalg::vec_of(&(m * s)));
        }
    }
    let jso = DMatrix::from_columns(&so_basis);

    let mut op = DMatrix::<f64>::zeros(dim * dim, dim * dim);
    let powers: Vec<DMatrix<f64>> = {
        let mut v = vec![DMatrix::<f64>::identity(dim, dim)];
        for _ in 1..jj {
            let next = v.last().unwrap() * m;
            v.push(next);
        }
        v
    };
    for pidx in 0..jj {
        let l = jj - 1 - pidx;
        op += powers[l].transpose().kronecker(&powers[pidx]);
    }
    let coeffs = linalg::null_space(&(&op * &jso), 1e-8);
    let kernel_basis = linalg::column_space(&(&jso * coeffs), 1e-8);

    let jr = jj % r;
    let g = linalg::gcd(r as u64, jr as u64) as usize;
    let p = r / g;
    let mut proj = DMatrix::from_element(dim * dim, dim * dim, C64::new(0.0, 0.0));
    for q in 1..g {
        proj += &spaces.b[q * p];
    }
    let block_basis = linalg::column_space(&linalg::real_part(&proj), PROJECTOR_RANK_THRESHOLD);
    let agreement_residual =
        max_abs(&(linalg::orthogonal_projector(&kernel_basis) - linalg::orthogonal_projector(&block_basis)));
    TangentSpace {
        kernel_basis,
        block_basis,
        agreement_residual,
    }
}

/// JSON request for the isometry classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsometryRequest {
    /// Row-major matrix.
    pub matrix: Vec<Vec<f64>>,
    /// Half order.
    pub k: usize,
}

/// JSON result of the isometry classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// Whether the matrix lies in `𝒵_{2k}`.
    pub member: bool,
    /// Orientation sign, when a member.
    pub epsilon: Option<i8>,
    /// Eigenvalue multiplicities, when a member.
    pub p: Option<Vec<usize>>,
    /// Order of `Ad A`, when a member.
    pub r: Option<usize>,
    /// Membership failure, when not a member.
    pub reason: Option<String>,
}

/// Classifies a matrix, reporting non-membership instead of failing.
pub fn classify(req: &IsometryRequest, tol: f64) -> IsometryReport {
    let rows = req.matrix.len();
    let cols = req.matrix.first().map_or(0, Vec::len);
    if req.matrix.iter().any(|r| r.len() != cols) {
        return IsometryReport {
            member: false,
            epsilon: None,
            p: None,
            r: None,
            reason: Some("ragged matrix rows".into()),
        };
    }
    let m = DMatrix::from_fn(rows, cols, |i, j| req.matrix[i][j]);
    match FiniteIsometry::new(m, req.k, tol) {
        Ok(a) => {
            let inv = component_invariant(&a);
            IsometryReport {
                member: true,
                epsilon: Some(inv.eps),
                p: Some(inv.p),
                r: Some(a.ad_order()),
                reason: None,
            }
        }
        Err(e) => IsometryReport {
            member: false,
            epsilon: None,
            p: None,
            r: None,
            reason: Some(e.to_string()),
        },
    }
}

/// Uniformly distributed element of `SO(dim)` (QR of a Gaussian matrix).
pub fn random_special_orthogonal(dim: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        if r[(c, c)] < 0.0 {
            let mut col = q.column_mut(c);
            col *= -1.0;
        }
    }
    if q.determinant() < 0.0 {
        let mut col = q.column_mut(0);
        col *= -1.0;
    }
    q
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        m.view_mut((off, off), b.shape()).copy_from(b);
        off += b.nrows();
    }
    m
}

//! Finite-order automorphisms and their eigenspace decompositions.
//!
//! For an automorphism `τ` of order `k'` with `ω = e^{2πi/k'}`, the
//! projector onto `𝔤_j^ℂ = ker(τ − ω^j)` is the resolvent
//! `P_j = (1/k') Σ_l ω^{−jl} τ^l`. From these the real pieces `𝔤₀`, `𝔪_j`
//! (real part of `𝔤_j ⊕ 𝔤_{−j}`) and, for even order, `𝔤_k = {τξ = −ξ}` are
//! extracted as orthonormal bases.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::liealg::{AlgebraSpec, LieAlgebra, LieError};
use crate::linalg::{self, max_abs, max_abs_c, to_complex, C64};

/// Gate used when detecting the exact order of a map.
pub const ORDER_TOL: f64 = 1e-8;

/// Errors raised by automorphism validation and decomposition.
#[derive(Debug, Error)]
pub enum DecompError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("map has shape {rows}x{cols}, expected {dim}x{dim}")]
    Shape { rows: usize, cols: usize, dim: usize },
    #[error("map is not a Lie algebra homomorphism (residual {residual:.3e})")]
    NotAutomorphism { residual: f64 },
    #[error("order must be positive")]
    ZeroOrder,
    #[error("τ^{order} differs from the identity (residual {residual:.3e})")]
    OrderMismatch { order: usize, residual: f64 },
    #[error("τ^{p} is already the identity, so the order is not {order}")]
    NotMinimalOrder { order: usize, p: usize },
    #[error("underdetermined lift needs m ≥ k' (got m = {m}, k' = {kprime})")]
    LiftUndefined { m: usize, kprime: usize },
    #[error("invalid automorphism JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A validated automorphism `τ` of a Lie algebra with exact order `k'`.
#[derive(Debug, Clone)]
pub struct FiniteOrderAutomorphism {
    map: DMatrix<f64>,
    order: usize,
}

impl FiniteOrderAutomorphism {
    /// Validates that `map` is a bracket-preserving map of exact order `order`.
    ///
    /// The homomorphism residual is gated by `tol`; the order checks use
    /// [`ORDER_TOL`] on `‖τ^p − Id‖`.
    pub fn new(algebra: &LieAlgebra, map: DMatrix<f64>, order: usize, tol: f64) -> Result<Self, DecompError> {
        let n = algebra.dim();
        if map.nrows() != n || map.ncols() != n {
            return Err(DecompError::Shape {
                rows: map.nrows(),
                cols: map.ncols(),
                dim: n,
            });
        }
        if order == 0 {
            return Err(DecompError::ZeroOrder);
        }
        let hom = algebra.homomorphism_residual(&map);
        if hom > tol {
            return Err(DecompError::NotAutomorphism { residual: hom });
        }
        let id = DMatrix::<f64>::identity(n, n);
        let mut power = id.clone();
        for p in 1..order {
            power = &power * &map;
            if max_abs(&(&power - &id)) < ORDER_TOL {
                return Err(DecompError::NotMinimalOrder { order, p });
            }
        }
        power = &power * &map;
        let residual = max_abs(&(&power - &id));
        if residual >= ORDER_TOL {
            return Err(DecompError::OrderMismatch { order, residual });
        }
        Ok(FiniteOrderAutomorphism { map, order })
    }

    /// The identity automorphism (order 1).
    pub fn identity(algebra: &LieAlgebra) -> Self {
        let n = algebra.dim();
        FiniteOrderAutomorphism {
            map: DMatrix::identity(n, n),
            order: 1,
        }
    }

    /// Matrix of `τ` on coordinates.
    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    /// Exact order `k'`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `τ^p` for `p ≥ 0`.
    pub fn power(&self, p: usize) -> DMatrix<f64> {
        let n = self.map.nrows();
        let mut out = DMatrix::identity(n, n);
        for _ in 0..(p % self.order) {
            out = &out * &self.map;
        }
        out
    }

    /// The inverse automorphism `τ^{-1} = τ^{k'−1}`.
    pub fn inverse(&self) -> Self {
        FiniteOrderAutomorphism {
            map: self.power(self.order - 1),
            order: self.order,
        }
    }
}

/// Smallest `p ≥ 1` with `‖map^p − Id‖ < ORDER_TOL`, searching up to `max_order`.
pub fn detect_order(map: &DMatrix<f64>, max_order: usize) -> Option<usize> {
    let n = map.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut power = id.clone();
    for p in 1..=max_order {
        power = &power * map;
        if max_abs(&(&power - &id)) < ORDER_TOL {
            return Some(p);
        }
    }
    None
}

/// Primitive root of unity `e^{2πi/k}`.
pub fn root_of_unity(k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / k as f64)
}

/// Resolvent projector `P_j = (1/k') Σ_l ω^{−jl} τ^l` onto `𝔤_j^ℂ`.
pub fn eigenprojector(tau: &FiniteOrderAutomorphism, j: i64) -> DMatrix<C64> {
    let k = tau.order();
    let n = tau.map().nrows();
    let omega = root_of_unity(k);
    let mut out = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut power = DMatrix::<f64>::identity(n, n);
    let jm = linalg::modp(j, k as i64);
    for l in 0..k {
        let coeff = omega.powi(-((jm * l as i64) % k as i64) as i32) / k as f64;
        out += to_complex(&power) * coeff;
        power = &power * tau.map();
    }
    out
}

/// Eigenspace decomposition of `𝔤` under a finite-order automorphism.
#[derive(Debug, Clone)]
pub struct GradedDecomposition {
    kprime: usize,
    omega: C64,
    tau: DMatrix<f64>,
    projectors: Vec<DMatrix<C64>>,
    basis_g0: DMatrix<f64>,
    basis_m: Vec<DMatrix<f64>>,
    basis_gk: Option<DMatrix<f64>>,
    effective: bool,
}

/// Residuals of the decomposition identities, all max-norms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DecompositionResiduals {
    /// `max_j ‖P_j² − P_j‖`.
    pub idempotence: f64,
    /// `max_{i≠j} ‖P_i P_j‖`.
    pub orthogonality: f64,
    /// `‖Σ_j P_j − Id‖`.
    pub resolution: f64,
    /// `max_j ‖τ P_j − ω^j P_j‖`.
    pub twist: f64,
    /// `max_j ‖conj(P_j) − P_{−j}‖`.
    pub reality: f64,
    /// `max ‖(Id − P_{i+j})[P_i X, P_j Y]‖` over grades and basis pairs.
    pub grading: f64,
}

impl DecompositionResiduals {
    /// Largest of all residuals.
    pub fn max(&self) -> f64 {
        [
            self.idempotence,
            self.orthogonality,
            self.resolution,
            self.twist,
            self.reality,
            self.grading,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Decomposes `𝔤` under `τ`, orthonormalizing the real bases with the
/// Euclidean coordinate inner product.
pub fn grade(algebra: &LieAlgebra, tau: &FiniteOrderAutomorphism) -> GradedDecomposition {
    let n = algebra.dim();
    grade_with_inner(algebra, tau, &DMatrix::identity(n, n))
}

/// Decomposes `𝔤` under `τ`, orthonormalizing real bases against `inner`.
pub fn grade_with_inner(
    algebra: &LieAlgebra,
    tau: &FiniteOrderAutomorphism,
    inner: &DMatrix<f64>,
) -> GradedDecomposition {
    let k = tau.order();
    let projectors: Vec<DMatrix<C64>> = (0..k).map(|j| eigenprojector(tau, j as i64)).collect();
    let thr = 0.5;
    let real_basis = |m: &DMatrix<f64>| {
        let cs = linalg::column_space(m, thr);
        linalg::gram_schmidt(&cs, inner, 1e-12)
    };
    let basis_g0 = real_basis(&linalg::real_part(&projectors[0]));
    let basis_m = (1..=(k.saturating_sub(1)) / 2)
        .map(|j| real_basis(&linalg::real_part(&(&projectors[j] + &projectors[k - j]))))
        .collect();
    let basis_gk = if k.is_multiple_of(2) && k >= 2 {
        Some(real_basis(&linalg::real_part(&projectors[k / 2])))
    } else {
        None
    };
    let mut dec = GradedDecomposition {
        kprime: k,
        omega: root_of_unity(k),
        tau: tau.map().clone(),
        projectors,
        basis_g0,
        basis_m,
        basis_gk,
        effective: true,
    };
    dec.effective = dec.compute_effectivity(algebra);
    dec
}

impl GradedDecomposition {
    /// Order `k'`.
    pub fn kprime(&self) -> usize {
        self.kprime
    }

    /// `ω = e^{2πi/k'}`.
    pub fn omega(&self) -> C64 {
        self.omega
    }

    /// Matrix of `τ`.
    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    /// Projector onto `𝔤_j^ℂ`, `j` taken modulo `k'`.
    pub fn projector(&self, j: i64) -> &DMatrix<C64> {
        &self.projectors[linalg::modp(j, self.kprime as i64) as usize]
    }

    /// All projectors `P_0, …, P_{k'−1}`.
    pub fn projectors(&self) -> &[DMatrix<C64>] {
        &self.projectors
    }

    /// Orthonormal real basis of `𝔤₀`.
    pub fn basis_g0(&self) -> &DMatrix<f64> {
        &self.basis_g0
    }

    /// Orthonormal real basis of `𝔪_j` for `1 ≤ j ≤ ⌊(k'−1)/2⌋`.
    pub fn basis_m(&self, j: usize) -> &DMatrix<f64> {
        &self.basis_m[j - 1]
    }

    /// Number of `𝔪_j` blocks.
    pub fn num_m(&self) -> usize {
        self.basis_m.len()
    }

    /// Orthonormal real basis of `𝔤_k` (even order only).
    pub fn basis_gk(&self) -> Option<&DMatrix<f64>> {
        self.basis_gk.as_ref()
    }

    /// Basis of `𝔪 = ⊕_j 𝔪_j`.
    pub fn basis_mtotal(&self) -> DMatrix<f64> {
        let rows = self.tau.nrows();
        let blocks: Vec<&DMatrix<f64>> = self.basis_m.iter().collect();
        linalg::hstack(&blocks, rows)
    }

    /// Basis of the reductive complement `𝔫 = 𝔪 ⊕ 𝔤_k`, ordered `𝔪_1, …, 𝔪_k, 𝔤_k`.
    pub fn basis_n(&self) -> DMatrix<f64> {
        let rows = self.tau.nrows();
        let mut blocks: Vec<&DMatrix<f64>> = self.basis_m.iter().collect();
        if let Some(gk) = &self.basis_gk {
            blocks.push(gk);
        }
        linalg::hstack(&blocks, rows)
    }

    /// Dimensions `(dim 𝔤₀, [dim 𝔪_j], dim 𝔤_k)`.
    pub fn dims(&self) -> (usize, Vec<usize>, usize) {
        (
            self.basis_g0.ncols(),
            self.basis_m.iter().map(|b| b.ncols()).collect(),
            self.basis_gk.as_ref().map_or(0, |b| b.ncols()),
        )
    }

    /// Whether `ad` restricted to `𝔤₀` acts faithfully on `𝔫`.
    pub fn is_effective(&self) -> bool {
        self.effective
    }

    fn compute_effectivity(&self, algebra: &LieAlgebra) -> bool {
        let g0 = &self.basis_g0;
        let nb = self.basis_n();
        if g0.ncols() == 0 {
            return true;
        }
        if nb.ncols() == 0 {
            return false;
        }
        // Each column: vec of ad(x)|𝔫 for a basis vector x of 𝔤₀.
        let rows = algebra.dim() * nb.ncols();
        let mut m = DMatrix::zeros(rows, g0.ncols());
        for c in 0..g0.ncols() {
            let ad = algebra.ad(&g0.column(c).into_owned()) * &nb;
            for (r, v) in ad.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        linalg::rank(&m, 1e-9) == g0.ncols()
    }

    /// Evaluates all decomposition identities.
    pub fn residuals(&self, algebra: &LieAlgebra) -> DecompositionResiduals {
        let k = self.kprime;
        let n = self.tau.nrows();
        let id = DMatrix::<C64>::identity(n, n);
        let tau_c = to_complex(&self.tau);
        let mut idem = 0.0_f64;
        let mut orth = 0.0_f64;
        let mut twist = 0.0_f64;
        let mut real = 0.0_f64;
        let mut sum = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for j in 0..k {
            let p = &self.projectors[j];
            idem = idem.max(max_abs_c(&(p * p - p)));
            for i in 0..k {
                if i != j {
                    orth = orth.max(max_abs_c(&(&self.projectors[i] * p)));
                }
            }
            twist = twist.max(max_abs_c(&(&tau_c * p - p * self.omega.powi(j as i32))));
            let conj = p.map(|z| z.conj());
            real = real.max(max_abs_c(&(conj - &self.projectors[(k - j) % k])));
            sum += p;
        }
        let resolution = max_abs_c(&(sum - id));
        DecompositionResiduals {
            idempotence: idem,
            orthogonality: orth,
            resolution,
            twist,
            reality: real,
            grading: self.grading_residual(algebra),
        }
    }

    /// `max ‖(Id − P_{i+j})[P_i e_a, P_j e_b]‖` over all grades and basis pairs.
    pub fn grading_residual(&self, algebra: &LieAlgebra) -> f64 {
        let k = self.kprime;
        let n = algebra.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let cols: Vec<Vec<DVector<C64>>> = self
            .projectors
            .iter()
            .map(|p| (0..n).map(|a| p.column(a).into_owned()).collect())
            .collect();
        let mut r = 0.0_f64;
        for i in 0..k {
            for j in 0..k {
                let comp = &id - &self.projectors[(i + j) % k];
                for a in 0..n {
                    for b in 0..n {
                        let br = algebra.br_c(&cols[i][a], &cols[j][b]);
                        r = r.max(linalg::max_abs_cvec(&(&comp * br)));
                    }
                }
            }
        }
        r
    }
}

/// Kind of an m-th order system relative to `k'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Primitive,
    MinimalDetermined,
    IntermediateDetermined,
    MaximalDetermined,
    Underdetermined,
}

/// Classification of the order-`m` system for an order-`k'` automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemClass {
    pub m: usize,
    pub kprime: usize,
    pub kind: SystemKind,
    /// `m = m_{k'}` (the minimal determined order).
    pub minimal: bool,
    /// `m = k' − 1` (the maximal determined order).
    pub maximal: bool,
}

/// `m_{k'} = ⌊(k'+1)/2⌋` for `k' ≥ 2` and `m_1 = 0`.
pub fn minimal_determined_order(kprime: usize) -> usize {
    if kprime <= 1 {
        0
    } else {
        kprime.div_ceil(2)
    }
}

/// Classifies the system of order `m` for an automorphism of order `kprime`.
///
/// When the minimal and maximal determined orders coincide the kind is
/// reported as `MaximalDetermined` and both flags are set.
pub fn classify_system(m: usize, kprime: usize) -> SystemClass {
    let kprime = kprime.max(1);
    let mk = minimal_determined_order(kprime);
    let top = kprime - 1;
    let determined = m >= mk && m <= top;
    let minimal = determined && m == mk;
    let maximal = determined && m == top;
    let kind = if m < mk {
        SystemKind::Primitive
    } else if m > top {
        SystemKind::Underdetermined
    } else if maximal {
        SystemKind::MaximalDetermined
    } else if minimal {
        SystemKind::MinimalDetermined
    } else {
        SystemKind::IntermediateDetermined
    };
    SystemClass {
        m,
        kprime,
        kind,
        minimal,
        maximal,
    }
}

/// `q = ⌊m/k'⌋` for the underdetermined lift.
pub fn lift_depth(m: usize, kprime: usize) -> usize {
    m / kprime
}

/// Lifts an underdetermined problem to `𝔤^{q+1}` with the cyclic automorphism
/// `τ̃(a₀, …, a_q) = (a₁, …, a_q, τa₀)` of order `(q+1)k'`.
pub fn underdetermined_lift(
    algebra: &LieAlgebra,
    tau: &FiniteOrderAutomorphism,
    m: usize,
) -> Result<(LieAlgebra, FiniteOrderAutomorphism), DecompError> {
    let k = tau.order();
    if m < k {
        return Err(DecompError::LiftUndefined { m, kprime: k });
    }
    let q = lift_depth(m, k);
    let n = algebra.dim();
    let big = algebra.power(q + 1);
    let mut map = DMatrix::zeros(n * (q + 1), n * (q + 1));
    for b in 0..q {
        for i in 0..n {
            map[(b * n + i, (b + 1) * n + i)] = 1.0;
        }
    }
    map.view_mut((q * n, 0), (n, n)).copy_from(tau.map());
    let lifted = FiniteOrderAutomorphism::new(&big, map, (q + 1) * k, crate::liealg::DEFAULT_TOL)?;
    Ok((big, lifted))
}

/// Serialized automorphism: `{ "algebra": <ref>, "order": k', "matrix": [[...]] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismSpec {
    pub algebra: AlgebraRef,
    pub order: usize,
    pub matrix: Vec<Vec<f64>>,
}

/// Reference to an algebra inside an automorphism spec: inline, or a name
/// resolved by the caller (built-in fixture name or file path).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    Inline(AlgebraSpec),
    Named(String),
}

impl AutomorphismSpec {
    /// Row-major matrix as a nalgebra matrix.
    pub fn matrix(&self) -> Result<DMatrix<f64>, DecompError> {
        let rows = self.matrix.len();
        let cols = self.matrix.first().map_or(0, |r| r.len());
        if self.matrix.iter().any(|r| r.len() != cols) {
            return Err(DecompError::Shape { rows, cols, dim: rows });
        }
        Ok(DMatrix::from_fn(rows, cols, |r, c| self.matrix[r][c]))
    }

    /// Spec of a validated automorphism with an inline algebra.
    pub fn from_parts(algebra: &LieAlgebra, tau: &FiniteOrderAutomorphism) -> Self {
        let m = tau.map();
        AutomorphismSpec {
            algebra: AlgebraRef::Inline(algebra.to_spec()),
            order: tau.order(),
            matrix: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
                .collect(),
        }
    }
}

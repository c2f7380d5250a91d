//! Invariant connections at the origin, described by `Λ: 𝔫 × 𝔫 → 𝔫`.
//!
//! For `Λ(X)Y = Σ_k Λ[i,j,k] e_k` with `X = e_i`, `Y = e_j`:
//!
//! * torsion `T(X,Y) = Λ(X)Y − Λ(Y)X − [X,Y]_𝔫`,
//! * curvature `R(X,Y) = [Λ(X), Λ(Y)] − Λ([X,Y]_𝔫) − ad_𝔫([X,Y]_𝔨)`.

use nalgebra::{DMatrix, DVector};

use super::split::{InvariantMetric, ReductiveSplit};
use super::tensor::Tensor3;
use crate::linalg::max_abs;

/// An invariant connection given by its origin map `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginConnection {
    lambda: Tensor3,
}

impl OriginConnection {
    /// Connection with the given `Λ` tensor.
    pub fn new(lambda: Tensor3) -> Self {
        OriginConnection { lambda }
    }

    /// The canonical connection `∇⁰` (`Λ = 0`).
    pub fn canonical(split: &ReductiveSplit) -> Self {
        OriginConnection {
            lambda: Tensor3::zeros(split.dim_n()),
        }
    }

    /// The `Λ` tensor.
    pub fn lambda(&self) -> &Tensor3 {
        &self.lambda
    }

    /// Matrix of `Λ(e_i)` acting on `𝔫` coordinates.
    pub fn lambda_matrix(&self, i: usize) -> DMatrix<f64> {
        self.lambda.left_matrix(i)
    }

    /// Matrix of `Λ(x)`.
    pub fn lambda_of(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.lambda.n();
        let mut m = DMatrix::zeros(n, n);
        for (i, c) in x.iter().enumerate() {
            if *c != 0.0 {
                m += self.lambda_matrix(i) * *c;
            }
        }
        m
    }

    /// Torsion as a vector-valued 2-form.
    pub fn torsion(&self, split: &ReductiveSplit) -> Tensor3 {
        let n = split.dim_n();
        let br = split.bracket_n_tensor();
        Tensor3::from_fn(n, |i, j, k| {
            self.lambda.get(i, j, k) - self.lambda.get(j, i, k) - br.get(i, j, k)
        })
    }

    /// Curvature `R(e_i, e_j)` as endomorphisms of `𝔫`, indexed `i*n + j`.
    pub fn curvature(&self, split: &ReductiveSplit) -> Vec<DMatrix<f64>> {
        let n = split.dim_n();
        let mats: Vec<DMatrix<f64>> = (0..n).map(|i| self.lambda_matrix(i)).collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let brn = split.bracket_n_tensor().vector(i, j);
                let brk = split.bracket_k_basis(i, j);
                let r = &mats[i] * &mats[j] - &mats[j] * &mats[i] - self.lambda_of(&brn) - split.ad_k_of(brk);
                out.push(r);
            }
        }
        out
    }

    /// `max |⟨Λ(X)Y, Z⟩ + ⟨Y, Λ(X)Z⟩|` over basis triples.
    pub fn metricity_residual(&self, metric: &InvariantMetric) -> f64 {
        let g = metric.gram();
        (0..self.lambda.n())
            .map(|i| {
                let l = self.lambda_matrix(i);
                max_abs(&(l.transpose() * g + g * &l))
            })
            .fold(0.0, f64::max)
    }

    /// Equivariance defect `max ‖[ad K, Λ(X)] − Λ([K, X])‖` (zero for invariant connections).
    pub fn invariance_residual(&self, split: &ReductiveSplit) -> f64 {
        let n = split.dim_n();
        let mut r = 0.0_f64;
        for a in 0..split.dim_k() {
            let ad = split.ad_k(a);
            for i in 0..n {
                let li = self.lambda_matrix(i);
                let kx = ad.column(i).into_owned();
                let d = ad * &li - &li * ad - self.lambda_of(&kx);
                r = r.max(max_abs(&d));
            }
        }
        r
    }

    /// Defect of `∇F = 0` at the origin: commutation of `Λ(X)` and of the
    /// isotropy action with `F`.
    pub fn preservation_residual(&self, split: &ReductiveSplit, f: &DMatrix<f64>) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..self.lambda.n() {
            let l = self.lambda_matrix(i);
            r = r.max(max_abs(&(&l * f - f * &l)));
        }
        for a in 0..split.dim_k() {
            let ad = split.ad_k(a);
            r = r.max(max_abs(&(ad * f - f * ad)));
        }
        r
    }
}

/// The family `Λ^t(X)Y = t[X,Y]_𝔫`; torsion `(2t − 1)[X,Y]_𝔫`.
pub fn connection_family(split: &ReductiveSplit, t: f64) -> OriginConnection {
    OriginConnection::new(split.bracket_n_tensor().scale(t))
}

/// The tensor `U` with `⟨U(X,Y), Z⟩ = ⟨[Z,X]_𝔫, Y⟩ + ⟨X, [Z,Y]_𝔫⟩`.
pub fn natural_reductivity_term(split: &ReductiveSplit, metric: &InvariantMetric) -> Tensor3 {
    let n = split.dim_n();
    // low[a,b,c] = ⟨[e_a, e_b]_𝔫, e_c⟩
    let low = split.bracket_n_tensor().lower(metric.gram());
    let u_low = Tensor3::from_fn(n, |x, y, z| low.get(z, x, y) + low.get(z, y, x));
    u_low.raise(metric.gram())
}

/// The metric family `Λ = t([·,·]_𝔫 + U)`; Levi-Civita at `t = 1/2`.
pub fn metric_family(split: &ReductiveSplit, metric: &InvariantMetric, t: f64) -> OriginConnection {
    let u = natural_reductivity_term(split, metric);
    OriginConnection::new(split.bracket_n_tensor().add(&u).scale(t))
}

/// Levi-Civita connection of an invariant metric.
pub fn levi_civita(split: &ReductiveSplit, metric: &InvariantMetric) -> OriginConnection {
    metric_family(split, metric, 0.5)
}

//! Built-in test algebras and automorphisms.
//!
//! Every fixture is built from an explicit matrix realization: a basis of
//! anti-Hermitian matrices, from which the structure constants and the
//! coordinate matrix of `τ = Ad D` (conjugation by a diagonal unitary `D`)
//! are computed by least squares. The realization is kept so that tests can
//! cross-check against matrix commutators and convert group-valued data
//! into the adjoint representation.
//!
//! Bases are orthonormal for `−B/λ` where `B` is the Killing form: `λ = 2`
//! for `su(2)` and `λ = 1` for `su(3)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::autodecomp::{AlgebraRef, AutomorphismSpec, FiniteOrderAutomorphism};
use crate::liealg::{LieAlgebra, DEFAULT_TOL};
use crate::linalg::C64;

/// A real Lie algebra presented as a span of complex matrices.
#[derive(Debug, Clone)]
pub struct MatrixRealization {
    size: usize,
    basis: Vec<DMatrix<C64>>,
    pinv: DMatrix<f64>,
}

impl MatrixRealization {
    /// Realization spanned by `basis` (linearly independent `size`×`size` matrices).
    pub fn new(basis: Vec<DMatrix<C64>>) -> Self {
        let size = basis[0].nrows();
        let m = Self::flatten_all(&basis, size);
        let pinv = (m.transpose() * &m)
            .try_inverse()
            .expect("realization basis must be independent")
            * m.transpose();
        MatrixRealization { size, basis, pinv }
    }

    fn flatten(x: &DMatrix<C64>, size: usize) -> DVector<f64> {
        let mut v = DVector::zeros(2 * size * size);
        for (i, z) in x.iter().enumerate() {
            v[2 * i] = z.re;
            v[2 * i + 1] = z.im;
        }
        v
    }

    fn flatten_all(basis: &[DMatrix<C64>], size: usize) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = basis.iter().map(|b| Self::flatten(b, size)).collect();
        DMatrix::from_columns(&cols)
    }

    /// Matrix size of the realization.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Basis matrices.
    pub fn basis(&self) -> &[DMatrix<C64>] {
        &self.basis
    }

    /// Coordinates of a matrix in the span (least-squares projection).
    pub fn coords(&self, x: &DMatrix<C64>) -> DVector<f64> {
        &self.pinv * Self::flatten(x, self.size)
    }

    /// Matrix of a coordinate vector.
    pub fn matrix(&self, coords: &DVector<f64>) -> DMatrix<C64> {
        let mut out = DMatrix::from_element(self.size, self.size, C64::new(0.0, 0.0));
        for (c, b) in coords.iter().zip(&self.basis) {
            out += b * C64::new(*c, 0.0);
        }
        out
    }

    /// Matrix of a complex coordinate vector (complexified span).
    pub fn matrix_c(&self, coords: &DVector<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::from_element(self.size, self.size, C64::new(0.0, 0.0));
        for (c, b) in coords.iter().zip(&self.basis) {
            out += b * *c;
        }
        out
    }

    /// Structure constants from matrix commutators.
    pub fn algebra(&self, labels: Vec<String>) -> LieAlgebra {
        let n = self.basis.len();
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let v = self.coords(&comm);
                for k in 0..n {
                    let x = v[k];
                    c[(i * n + j) * n + k] = if x.abs() < 1e-15 { 0.0 } else { x };
                }
            }
        }
        LieAlgebra::from_flat(labels, n, c, DEFAULT_TOL).expect("matrix span closed under commutator")
    }

    /// Coordinate matrix of `X ↦ U X U⁻¹` for an invertible matrix `U`.
    pub fn adjoint_of(&self, u: &DMatrix<C64>) -> DMatrix<f64> {
        let inv = u.clone().try_inverse().expect("invertible group element");
        let n = self.basis.len();
        let cols: Vec<DVector<f64>> = (0..n).map(|a| self.coords(&(u * &self.basis[a] * &inv))).collect();
        let m = DMatrix::from_columns(&cols);
        m.map(|x| if x.abs() < 1e-15 { 0.0 } else { x })
    }
}

/// An algebra with a finite-order automorphism and an invariant inner product.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub algebra: LieAlgebra,
    pub tau: FiniteOrderAutomorphism,
    /// Ad-invariant inner product on `𝔤` coordinates (a positive multiple of `−B`).
    pub inner: DMatrix<f64>,
    pub realization: MatrixRealization,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Basis `e_a = −(i/2)σ_a` of `su(2)`, so `[e₁, e₂] = e₃` cyclically.
pub fn su2_realization() -> MatrixRealization {
    let z = c(0.0, 0.0);
    let h = 0.5;
    let e1 = DMatrix::from_row_slice(2, 2, &[z, c(0.0, -h), c(0.0, -h), z]);
    let e2 = DMatrix::from_row_slice(2, 2, &[z, c(-h, 0.0), c(h, 0.0), z]);
    let e3 = DMatrix::from_row_slice(2, 2, &[c(0.0, -h), z, z, c(0.0, h)]);
    MatrixRealization::new(vec![e1, e2, e3])
}

/// Basis of `su(3)` orthonormal for `−B = −6 tr(XY)`.
///
/// Order: `H₁ ∝ i·diag(1,−1,0)`, `H₂ ∝ i·diag(1,1,−2)`, then for each pair
/// `(a,b) ∈ {(0,1),(0,2),(1,2)}` the real part `E_ab − E_ba` and the
/// imaginary part `i(E_ab + E_ba)`.
pub fn su3_realization() -> MatrixRealization {
    let s = 1.0 / 12f64.sqrt();
    let mut basis = Vec::new();
    let zero = || DMatrix::from_element(3, 3, c(0.0, 0.0));
    let mut h1 = zero();
    h1[(0, 0)] = c(0.0, s);
    h1[(1, 1)] = c(0.0, -s);
    basis.push(h1);
    let mut h2 = zero();
    let t = 1.0 / 6.0;
    h2[(0, 0)] = c(0.0, t);
    h2[(1, 1)] = c(0.0, t);
    h2[(2, 2)] = c(0.0, -2.0 * t);
    basis.push(h2);
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let mut x = zero();
        x[(a, b)] = c(s, 0.0);
        x[(b, a)] = c(-s, 0.0);
        basis.push(x);
        let mut y = zero();
        y[(a, b)] = c(0.0, s);
        y[(b, a)] = c(0.0, s);
        basis.push(y);
    }
    MatrixRealization::new(basis)
}

fn su2_labels() -> Vec<String> {
    ["e1", "e2", "e3"].iter().map(|s| s.to_string()).collect()
}

fn su3_labels() -> Vec<String> {
    ["h1", "h2", "x01", "y01", "x02", "y02", "x12", "y12"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// `su(2)` with `[e₁,e₂] = e₃` cyclically, `B(e₁,e₁) = −2`.
pub fn su2_algebra() -> LieAlgebra {
    su2_realization().algebra(su2_labels())
}

/// `su(3)` in the basis of [`su3_realization`].
pub fn su3_algebra() -> LieAlgebra {
    su3_realization().algebra(su3_labels())
}

fn diagonal_unitary(phases: &[f64]) -> DMatrix<C64> {
    let d: Vec<C64> = phases
        .iter()
        .map(|t| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
        .collect();
    DMatrix::from_diagonal(&DVector::from_vec(d))
}

fn build(
    name: &'static str,
    description: &'static str,
    realization: MatrixRealization,
    labels: Vec<String>,
    phases: &[f64],
    order: usize,
    killing_scale: f64,
) -> Fixture {
    let algebra = realization.algebra(labels);
    let d = diagonal_unitary(phases);
    let map = realization.adjoint_of(&d);
    let tau = FiniteOrderAutomorphism::new(&algebra, map, order, DEFAULT_TOL)
        .expect("fixture automorphism has the declared order");
    let n = algebra.dim();
    Fixture {
        name: name.into(),
        description: description.into(),
        algebra,
        tau,
        inner: DMatrix::identity(n, n) * killing_scale,
        realization,
    }
}

/// Involution `Ad diag(i, −i)` of `su(2)`, fixing `e₃` (the round 2-sphere).
pub fn su2_involution() -> Fixture {
    build(
        "su2_involution",
        "su(2) with the involution fixing e3 (symmetric space S^2)",
        su2_realization(),
        su2_labels(),
        &[0.25, -0.25],
        2,
        2.0,
    )
}

/// `su(2)` with `τ = Id`.
pub fn su2_identity() -> Fixture {
    build(
        "su2_identity",
        "su(2) with the identity automorphism",
        su2_realization(),
        su2_labels(),
        &[0.0, 0.0],
        1,
        2.0,
    )
}

/// `Ad diag(1, ω, ω²)` on `su(3)`, `ω = e^{2πi/3}` (the flag manifold, 3-symmetric).
pub fn su3_order3() -> Fixture {
    build(
        "su3_order3",
        "su(3) with Ad diag(1, w, w^2), w = exp(2 pi i/3) (flag manifold, 3-symmetric)",
        su3_realization(),
        su3_labels(),
        &[0.0, 1.0 / 3.0, 2.0 / 3.0],
        3,
        1.0,
    )
}

/// `Ad diag(1, i, −1)` on `su(3)` (4-symmetric, `𝔤₀` the diagonal torus).
pub fn su3_order4() -> Fixture {
    build(
        "su3_order4",
        "su(3) with Ad diag(1, i, -1) (flag manifold, 4-symmetric)",
        su3_realization(),
        su3_labels(),
        &[0.0, 0.25, 0.5],
        4,
        1.0,
    )
}

/// `Ad diag(1, ζ, ζ³)` on `su(3)`, `ζ = e^{2πi/5}` (5-symmetric).
pub fn su3_order5() -> Fixture {
    build(
        "su3_order5",
        "su(3) with Ad diag(1, z, z^3), z = exp(2 pi i/5) (flag manifold, 5-symmetric)",
        su3_realization(),
        su3_labels(),
        &[0.0, 0.2, 0.6],
        5,
        1.0,
    )
}

/// All built-in fixtures.
pub fn all() -> Vec<Fixture> {
    vec![
        su2_involution(),
        su2_identity(),
        su3_order3(),
        su3_order4(),
        su3_order5(),
    ]
}

/// Looks up a built-in fixture by name.
pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "su2_involution" => Some(su2_involution()),
        "su2_identity" => Some(su2_identity()),
        "su3_order3" => Some(su3_order3()),
        "su3_order4" => Some(su3_order4()),
        "su3_order5" => Some(su3_order5()),
        _ => None,
    }
}

/// Names of all built-in fixtures.
pub const NAMES: [&str; 5] = [
    "su2_involution",
    "su2_identity",
    "su3_order3",
    "su3_order4",
    "su3_order5",
];

/// Built-in matrix algebra by name: `"su2"` or `"su3"`.
pub fn named_algebra(name: &str) -> Option<(LieAlgebra, MatrixRealization)> {
    match name {
        "su2" => Some((su2_algebra(), su2_realization())),
        "su3" => Some((su3_algebra(), su3_realization())),
        _ => None,
    }
}

/// On-disk fixture: the automorphism (over a named or inline algebra) and
/// an optional invariant inner product on algebra coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub automorphism: AutomorphismSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<Vec<f64>>>,
}

impl Fixture {
    /// File form of the fixture, with the algebra referenced by name.
    pub fn to_spec(&self) -> FixtureSpec {
        let algebra = match self.realization.size() {
            2 => "su2",
            _ => "su3",
        };
        let mut automorphism = AutomorphismSpec::from_parts(&self.algebra, &self.tau);
        automorphism.algebra = AlgebraRef::Named(algebra.into());
        let n = self.inner.nrows();
        FixtureSpec {
            name: self.name.clone(),
            description: self.description.clone(),
            automorphism,
            inner: Some((0..n).map(|r| (0..n).map(|c| self.inner[(r, c)]).collect()).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn structure_constants_match_commutators() {
        for f in all() {
            let r = &f.realization;
            let n = f.algebra.dim();
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (&r.basis()[i], &r.basis()[j]);
                    let comm = x * y - y * x;
                    let br = f.algebra.br(&f.algebra.basis(i), &f.algebra.basis(j));
                    let diff = comm - r.matrix(&br);
                    assert!(diff.iter().all(|z| z.norm() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn inner_products_are_scaled_negative_killing() {
        for f in all() {
            let k = f.algebra.killing_matrix();
            let ratio = &f.inner + &k;
            assert!(max_abs(&ratio) < 1e-12, "{}", f.name);
        }
    }

    #[test]
    fn su2_involution_fixes_e3() {
        let f = su2_involution();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 1.0]));
        assert!(max_abs(&(f.tau.map() - expected)) < 1e-14);
    }

    #[test]
    fn specs_name_their_algebra() {
        for f in all() {
            let spec = f.to_spec();
            let AlgebraRef::Named(name) = &spec.automorphism.algebra else {
                panic!("inline algebra in {}", f.name);
            };
            let (alg, _) = named_algebra(name).unwrap();
            assert_eq!(alg.dim(), f.algebra.dim());
            assert!(max_abs(&(spec.automorphism.matrix().unwrap() - f.tau.map())) == 0.0);
        }
    }

    #[test]
    fn lookup_by_name() {
        for n in NAMES {
            assert_eq!(by_name(n).unwrap().name, n);
        }
        assert!(by_name("nope").is_none());
    }
}

//! Characteristic connections: metric connections with totally skew torsion
//! preserving an almost complex structure or an f-structure.

use nalgebra::DMatrix;

use super::connection::{levi_civita, OriginConnection};
use super::forms::{invariant_d, kahler_form};
use super::split::{InvariantMetric, ReductiveSplit};
use super::structures::{j_action, nijenhuis_bracket, JAction, OriginFStructure};
use super::tensor::Tensor3;
use super::GeometryError;

/// A reconstructed characteristic connection `∇ = ∇^h + ½T` with its checks.
#[derive(Debug, Clone)]
pub struct CharacteristicConnection {
    /// Torsion as a trilinear form `⟨T(X,Y), Z⟩`.
    pub torsion: Tensor3,
    /// The connection at the origin.
    pub connection: OriginConnection,
    /// Defect of `∇F = 0`.
    pub preservation_residual: f64,
    /// Defect of `∇h = 0`.
    pub metricity_residual: f64,
    /// Distance of the reconstructed torsion from the prescribed one.
    pub torsion_residual: f64,
}

fn reconstruct(
    split: &ReductiveSplit,
    metric: &InvariantMetric,
    f: &DMatrix<f64>,
    torsion: Tensor3,
    tol: f64,
) -> Result<CharacteristicConnection, GeometryError> {
    let t_vec = torsion.raise(metric.gram());
    let lc = levi_civita(split, metric);
    let connection = OriginConnection::new(lc.lambda().add(&t_vec.scale(0.5)));
    let preservation_residual = connection.preservation_residual(split, f);
    if preservation_residual > tol {
        return Err(GeometryError::DoesNotPreserve {
            residual: preservation_residual,
        });
    }
    let metricity_residual = connection.metricity_residual(metric);
    let torsion_residual = connection.torsion(split).max_diff(&t_vec);
    Ok(CharacteristicConnection {
        torsion,
        connection,
        preservation_residual,
        metricity_residual,
        torsion_residual,
    })
}

/// Torsion `T = J·dΩ_J + N_J` of the characteristic connection of an
/// almost Hermitian structure, with `dΩ_J` supplied as a trilinear form.
///
/// Fails with [`GeometryError::NotG1`] when the lowered Nijenhuis tensor is
/// not totally skew and with [`GeometryError::DoesNotPreserve`] when the
/// reconstructed connection does not preserve `J`.
pub fn characteristic_torsion_complex(
    split: &ReductiveSplit,
    j: &OriginFStructure,
    metric: &InvariantMetric,
    d_omega: &Tensor3,
    tol: f64,
) -> Result<CharacteristicConnection, GeometryError> {
    if !j.is_complex(tol) {
        return Err(GeometryError::Shape("J² ≠ −Id on the complement".into()));
    }
    let jm = j.matrix();
    let n_low = nijenhuis_bracket(split, jm).lower(metric.gram());
    let skew = n_low.total_skew_residual();
    if skew > tol {
        return Err(GeometryError::NotG1 { residual: skew });
    }
    let torsion = j_action(d_omega, jm, JAction::Dot).add(&n_low);
    reconstruct(split, metric, jm, torsion, tol)
}

/// Horizontal curvature `Φ(X,Y) = −q[PX,PY]_𝔫` (vector valued).
pub fn horizontal_curvature(split: &ReductiveSplit, f: &OriginFStructure) -> Tensor3 {
    let p = f.horizontal();
    let q = f.vertical();
    split
        .bracket_n_tensor()
        .precompose(0, &p)
        .precompose(1, &p)
        .compose_out(&q)
        .scale(-1.0)
}

/// Vertical curvature `R_𝒱(X,Y) = −P[qX,qY]_𝔫` (vector valued).
pub fn vertical_curvature(split: &ReductiveSplit, f: &OriginFStructure) -> Tensor3 {
    let p = f.horizontal();
    let q = f.vertical();
    split
        .bracket_n_tensor()
        .precompose(0, &q)
        .precompose(1, &q)
        .compose_out(&p)
        .scale(-1.0)
}

/// Extended Nijenhuis tensor as a trilinear form:
/// `Ñ(X,Y,Z) = N_F(X,Y,Z) + Φ(X,Y,Z) + R_𝒱(Z,X,Y) + R_𝒱(Y,Z,X)`,
/// where `R_𝒱` only sees the vertical parts of its first two and the
/// horizontal part of its last argument.
pub fn extended_nijenhuis(
    split: &ReductiveSplit,
    f: &OriginFStructure,
    metric: &InvariantMetric,
    phi: &Tensor3,
    rv: &Tensor3,
) -> Tensor3 {
    let g = metric.gram();
    let n_low = nijenhuis_bracket(split, f.matrix()).lower(g);
    let phi_low = phi.lower(g);
    let rv_low = rv.lower(g);
    n_low
        .add(&phi_low)
        .add(&rv_low.permute([2, 0, 1]))
        .add(&rv_low.permute([1, 2, 0]))
}

/// Defects of the two reductivity conditions of the splitting `𝒱 ⊕ 𝒱^⊥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductivityFlags {
    /// `max |Skew(DΩ_q)|` on the `𝓗𝓗𝒱` block (type `𝓗²𝒱` when zero).
    pub h2v: f64,
    /// `max |Skew(DΩ_q)|` on the `𝒱𝒱𝓗` block (type `𝒱²𝓗` when zero).
    pub v2h: f64,
    /// `max |DΩ_q(P·,P·,q·) − ½Φ|`.
    pub phi_defect: f64,
}

impl ReductivityFlags {
    /// Whether both defects are within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.h2v <= tol && self.v2h <= tol
    }
}

/// `DΩ_q(X,Y,Z) = ⟨(D_X q)Y, Z⟩` for the Levi-Civita connection `D`.
fn d_omega_q(split: &ReductiveSplit, metric: &InvariantMetric, q: &DMatrix<f64>) -> Tensor3 {
    let lc = levi_civita(split, metric);
    let n = split.dim_n();
    let g = metric.gram();
    let mats: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let l = lc.lambda_matrix(i);
            (&l * q - q * &l).transpose() * g
        })
        .collect();
    Tensor3::from_fn(n, |i, j, k| mats[i][(j, k)])
}

/// Reductivity defects of the horizontal/vertical splitting defined by `F`.
pub fn reductivity_flags(split: &ReductiveSplit, f: &OriginFStructure, metric: &InvariantMetric) -> ReductivityFlags {
    let p = f.horizontal();
    let q = f.vertical();
    let d = d_omega_q(split, metric, &q);
    let block = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        d.precompose_all(a, a, b)
            .add(&d.precompose_all(a, b, a))
            .add(&d.precompose_all(b, a, a))
            .skew_cyclic()
            .max_abs()
    };
    let phi_low = horizontal_curvature(split, f).lower(metric.gram());
    let phi_defect = d.precompose_all(&p, &p, &q).max_diff(&phi_low.scale(0.5));
    ReductivityFlags {
        h2v: block(&p, &q),
        v2h: block(&q, &p),
        phi_defect,
    }
}

/// Torsion of a characteristic connection of a Riemannian f-structure:
/// `T = F·dΩ_F + N_F(P·,P·,P·) + Skew(Φ) + Skew(R_𝒱) + α`.
///
/// `phi` and `rv` are the vector-valued curvatures of the two
/// distributions, `alpha` a vertical 3-form. Fails with
/// [`GeometryError::NotGlobalG1`] when the extended Nijenhuis tensor is not
/// skew, [`GeometryError::NotReductive`] when a reductivity defect exceeds
/// `tol`, and [`GeometryError::NotVerticalForm`] for an inadmissible `α`.
pub fn characteristic_torsion_f(
    split: &ReductiveSplit,
    f: &OriginFStructure,
    metric: &InvariantMetric,
    phi: &Tensor3,
    rv: &Tensor3,
    alpha: &Tensor3,
    tol: f64,
) -> Result<CharacteristicConnection, GeometryError> {
    let n = split.dim_n();
    if phi.n() != n || rv.n() != n || alpha.n() != n {
        return Err(GeometryError::Shape(format!(
            "curvature or α tensors do not match complement dimension {n}"
        )));
    }
    let ext = extended_nijenhuis(split, f, metric, phi, rv);
    let skew = ext.total_skew_residual();
    if skew > tol {
        return Err(GeometryError::NotGlobalG1 { residual: skew });
    }
    let flags = reductivity_flags(split, f, metric);
    if !flags.holds(tol) {
        return Err(GeometryError::NotReductive {
            h2v: flags.h2v,
            v2h: flags.v2h,
        });
    }
    let p = f.horizontal();
    let q = f.vertical();
    let vertical = alpha
        .sub(&alpha.precompose_all(&q, &q, &q))
        .max_abs()
        .max(alpha.total_skew_residual());
    if vertical > tol {
        return Err(GeometryError::NotVerticalForm { residual: vertical });
    }
    let fm = f.matrix();
    let g = metric.gram();
    let d_omega = invariant_d(split, &kahler_form(metric, fm), tol)?.to_tensor3();
    let n_low = nijenhuis_bracket(split, fm).lower(g);
    let torsion = j_action(&d_omega, fm, JAction::Dot)
        .add(&n_low.precompose_all(&p, &p, &p))
        .add(&phi.lower(g).skew_cyclic())
        .add(&rv.lower(g).skew_cyclic())
        .add(alpha);
    reconstruct(split, metric, fm, torsion, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;
    use crate::homogeo::structures::{canonical_structures, canonical_top};

    fn setup(f: &fixtures::Fixture) -> (ReductiveSplit, InvariantMetric) {
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let g = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        (s, g)
    }

    fn d_omega(s: &ReductiveSplit, g: &InvariantMetric, j: &DMatrix<f64>) -> Tensor3 {
        invariant_d(s, &kahler_form(g, j), 1e-9).unwrap().to_tensor3()
    }

    #[test]
    fn odd_order_characteristic_is_canonical() {
        for f in [fixtures::su3_order3(), fixtures::su3_order5()] {
            let (s, g) = setup(&f);
            let j = canonical_top(&s).unwrap();
            let c = characteristic_torsion_complex(&s, &j, &g, &d_omega(&s, &g, j.matrix()), 1e-9).unwrap();
            let t0 = OriginConnection::canonical(&s).torsion(&s).lower(g.gram());
            assert!(c.torsion.max_diff(&t0) < 1e-12, "{}", f.name);
            assert!(c.connection.lambda().max_abs() < 1e-12);
            assert!(c.metricity_residual < 1e-12 && c.torsion_residual < 1e-12);
        }
    }

    #[test]
    fn kahler_structure_has_zero_characteristic_torsion() {
        let f = fixtures::su2_involution();
        let (s, g) = setup(&f);
        let j = OriginFStructure::new(s.ad_k(0).clone(), 1e-12).unwrap();
        let c = characteristic_torsion_complex(&s, &j, &g, &d_omega(&s, &g, j.matrix()), 1e-9).unwrap();
        assert!(c.torsion.max_abs() < 1e-15);
    }

    #[test]
    fn non_normal_metric_breaks_g1() {
        // Rescale the three root planes of su(3) differently.
        let f = fixtures::su3_order3();
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let inner = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0,
        ]));
        let g = InvariantMetric::from_inner(&s, &inner, 1e-9).unwrap();
        let j = canonical_top(&s).unwrap();
        assert!(g.orthogonality_residual(j.matrix()) < 1e-12);
        let res = characteristic_torsion_complex(&s, &j, &g, &d_omega(&s, &g, j.matrix()), 1e-9);
        assert!(matches!(res, Err(GeometryError::NotG1 { .. })));
    }

    #[test]
    fn even_order_characteristic_is_canonical() {
        let f = fixtures::su3_order4();
        let (s, g) = setup(&f);
        let fs = canonical_structures(&s, 1).unwrap();
        let phi = horizontal_curvature(&s, &fs);
        let rv = vertical_curvature(&s, &fs);
        assert!(rv.max_abs() < 1e-14);
        let ext = extended_nijenhuis(&s, &fs, &g, &phi, &rv);
        assert!(ext.total_skew_residual() < 1e-12);
        let flags = reductivity_flags(&s, &fs, &g);
        assert!(flags.holds(1e-12) && flags.phi_defect < 1e-12);
        let q = fs.vertical();
        let t0 = OriginConnection::canonical(&s).torsion(&s).lower(g.gram());
        let alpha = t0.precompose_all(&q, &q, &q);
        let c = characteristic_torsion_f(&s, &fs, &g, &phi, &rv, &alpha, 1e-9).unwrap();
        assert!(c.torsion.max_diff(&t0) < 1e-12);
        assert!(c.preservation_residual < 1e-12 && c.metricity_residual < 1e-12);
    }

    #[test]
    fn phi_matches_half_bracket_of_horizontal_projection() {
        // Φ = −½[ψ∧ψ]_𝒱 with [ψ∧ψ](X,Y) = 2[ψX, ψY].
        let f = fixtures::su3_order4();
        let (s, _) = setup(&f);
        let fs = canonical_structures(&s, 1).unwrap();
        let p = fs.horizontal();
        let (_, gk) = s.block_ranges().unwrap();
        let pv = s.block_projector(gk.as_ref().unwrap());
        let wedge = Tensor3::from_fn(6, |i, j, k| {
            let x = p.column(i).into_owned();
            let y = p.column(j).into_owned();
            let b = s.bracket_n(&x, &y) - s.bracket_n(&y, &x);
            (&pv * b)[k]
        });
        assert!(horizontal_curvature(&s, &fs).max_diff(&wedge.scale(-0.5)) < 1e-12);
    }

    #[test]
    fn inadmissible_alpha_is_rejected() {
        let f = fixtures::su3_order4();
        let (s, g) = setup(&f);
        let fs = canonical_structures(&s, 1).unwrap();
        let phi = horizontal_curvature(&s, &fs);
        let rv = vertical_curvature(&s, &fs);
        let t0 = OriginConnection::canonical(&s).torsion(&s).lower(g.gram());
        assert!(matches!(
            characteristic_torsion_f(&s, &fs, &g, &phi, &rv, &t0, 1e-9),
            Err(GeometryError::NotVerticalForm { .. })
        ));
    }

    #[test]
    fn non_normal_metric_fails_f_conditions() {
        let f = fixtures::su3_order4();
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let (_, gk) = s.block_ranges().unwrap();
        let mut gram = DMatrix::identity(6, 6);
        for i in gk.unwrap() {
            gram[(i, i)] = 3.0;
        }
        let g = InvariantMetric::new(&s, gram, 1e-9).unwrap();
        let fs = canonical_structures(&s, 1).unwrap();
        let phi = horizontal_curvature(&s, &fs);
        let rv = vertical_curvature(&s, &fs);
        let res = characteristic_torsion_f(&s, &fs, &g, &phi, &rv, &Tensor3::zeros(6), 1e-9);
        assert!(matches!(
            res,
            Err(GeometryError::NotGlobalG1 { .. }) | Err(GeometryError::NotReductive { .. })
        ));
    }
}

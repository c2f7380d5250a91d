//! f-structures and complex structures at the origin, their Nijenhuis
//! tensors, `(ε,ε′)`-components and the actions of `J`/`F` on trilinear forms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::connection::OriginConnection;
use super::split::ReductiveSplit;
use super::tensor::Tensor3;
use super::GeometryError;
use crate::linalg::{self, max_abs, C64};

/// An endomorphism `F` of `𝔫` with `F³ + F = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginFStructure {
    f: DMatrix<f64>,
    level: Option<usize>,
}

impl OriginFStructure {
    /// Validates `F³ + F = 0` to within `tol`.
    pub fn new(f: DMatrix<f64>, tol: f64) -> Result<Self, GeometryError> {
        let r = f_identity_residual(&f);
        if r > tol {
            return Err(GeometryError::NotFStructure { residual: r });
        }
        Ok(OriginFStructure { f, level: None })
    }

    /// Matrix of `F` in `𝔫` coordinates.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// Level `m` for canonical structures `F^{[m]}`.
    pub fn level(&self) -> Option<usize> {
        self.level
    }

    /// Horizontal projector `P = −F²`.
    pub fn horizontal(&self) -> DMatrix<f64> {
        -(&self.f * &self.f)
    }

    /// Vertical projector `q = Id − P`.
    pub fn vertical(&self) -> DMatrix<f64> {
        let n = self.f.nrows();
        DMatrix::identity(n, n) - self.horizontal()
    }

    /// Whether `F² = −Id` to within `tol`.
    pub fn is_complex(&self, tol: f64) -> bool {
        max_abs(&self.vertical()) <= tol
    }

    /// `‖F³ + F‖`.
    pub fn identity_residual(&self) -> f64 {
        f_identity_residual(&self.f)
    }
}

/// `‖F³ + F‖` for an arbitrary matrix.
pub fn f_identity_residual(f: &DMatrix<f64>) -> f64 {
    max_abs(&(f * f * f + f))
}

/// Canonical f-structure `F^{[m]} = Σ_{j=1}^m (i P_{−j} − i P_j)` on `𝔫`.
///
/// Valid levels are `1..=k−1` for `k' = 2k` and `1..=k` for `k' = 2k+1`;
/// the top odd level is the canonical almost complex structure.
pub fn canonical_structures(split: &ReductiveSplit, m: usize) -> Result<OriginFStructure, GeometryError> {
    let dec = split.grading().ok_or(GeometryError::MissingGrading)?;
    let kp = dec.kprime();
    let max = if kp % 2 == 0 { kp / 2 - 1 } else { (kp - 1) / 2 };
    if m == 0 || m > max {
        return Err(GeometryError::LevelOutOfRange { m, kprime: kp, max });
    }
    let n = split.dim_n();
    let i = C64::new(0.0, 1.0);
    let mut f = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for j in 1..=m as i64 {
        let pm = split.grade_projector_n(-j).expect("graded split");
        let pp = split.grade_projector_n(j).expect("graded split");
        f += pm * i - pp * i;
    }
    Ok(OriginFStructure {
        f: linalg::real_part(&f),
        level: Some(m),
    })
}

/// The canonical f-structure `F = F^{[k−1]}` (even order) or the canonical
/// almost complex structure `J = F^{[k]}` (odd order).
pub fn canonical_top(split: &ReductiveSplit) -> Result<OriginFStructure, GeometryError> {
    let dec = split.grading().ok_or(GeometryError::MissingGrading)?;
    let kp = dec.kprime();
    let m = if kp % 2 == 0 { kp / 2 - 1 } else { (kp - 1) / 2 };
    canonical_structures(split, m)
}

/// `J₀ = τ^{−1}` restricted to `𝔪` (block of `𝔫` coordinates, zero on `𝔤_k`).
pub fn j0(split: &ReductiveSplit) -> Result<DMatrix<f64>, GeometryError> {
    let tau_n = split.tau_n().ok_or(GeometryError::MissingGrading)?;
    let inv = tau_n.try_inverse().ok_or(GeometryError::MissingGrading)?;
    let (ms, _) = split.block_ranges().expect("graded split");
    let n = split.dim_n();
    let mut pm = DMatrix::zeros(n, n);
    for r in ms {
        pm += split.block_projector(&r);
    }
    Ok(&pm * inv * &pm)
}

/// `(ε, ε′)`-component of a vector-valued 2-form with respect to `J`:
/// `B^{εε′} = −¼(εε′B(JX,JY) + εJB(JX,Y) + ε′JB(X,JY) − B)`.
pub fn component_split(b: &Tensor3, j: &DMatrix<f64>, eps: i8, eps2: i8) -> Tensor3 {
    let (e1, e2) = (eps as f64, eps2 as f64);
    let bjj = b.precompose(0, j).precompose(1, j);
    let jbj_ = b.precompose(0, j).compose_out(j);
    let jb_j = b.precompose(1, j).compose_out(j);
    bjj.scale(e1 * e2)
        .add(&jbj_.scale(e1))
        .add(&jb_j.scale(e2))
        .sub(b)
        .scale(-0.25)
}

/// Action of `J` or `F` on trilinear forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JAction {
    /// `B(F·, F·, F·)`.
    Dot,
    /// `B(F·,·,·) + B(·,F·,·) + B(·,·,F·)`.
    Circ,
    /// `½(F•B + F↻B)`.
    Star,
    /// `F·B + F↻(B − B(P·,P·,P·))`; equals `Dot` for complex structures.
    Bullet,
}

/// Applies `F·`, `F↻`, `F⋆` or `F•` to a trilinear form.
pub fn j_action(b: &Tensor3, f: &DMatrix<f64>, which: JAction) -> Tensor3 {
    let circ = |t: &Tensor3| t.precompose(0, f).add(&t.precompose(1, f)).add(&t.precompose(2, f));
    match which {
        JAction::Dot => b.precompose_all(f, f, f),
        JAction::Circ => circ(b),
        JAction::Bullet => {
            let p = -(f * f);
            let horiz = b.precompose_all(&p, &p, &p);
            b.precompose_all(f, f, f).add(&circ(&b.sub(&horiz)))
        }
        JAction::Star => j_action(b, f, JAction::Bullet).add(&circ(b)).scale(0.5),
    }
}

/// Nijenhuis tensor from the torsion of an `F`-preserving connection:
/// `N_F(X,Y) = −(T(FX,FY) − FT(FX,Y) − FT(X,FY) − PT(X,Y))`.
pub fn nijenhuis(
    split: &ReductiveSplit,
    f: &OriginFStructure,
    conn: &OriginConnection,
    tol: f64,
) -> Result<Tensor3, GeometryError> {
    let r = conn.preservation_residual(split, f.matrix());
    if r > tol {
        return Err(GeometryError::DoesNotPreserve { residual: r });
    }
    Ok(nijenhuis_from_torsion(&conn.torsion(split), f.matrix()))
}

/// `−(T(FX,FY) − FT(FX,Y) − FT(X,FY) − PT(X,Y))` for a given torsion tensor.
pub fn nijenhuis_from_torsion(t: &Tensor3, f: &DMatrix<f64>) -> Tensor3 {
    let p = -(f * f);
    let tff = t.precompose(0, f).precompose(1, f);
    let ftf_ = t.precompose(0, f).compose_out(f);
    let ft_f = t.precompose(1, f).compose_out(f);
    let pt = t.compose_out(&p);
    tff.sub(&ftf_).sub(&ft_f).sub(&pt).scale(-1.0)
}

/// Nijenhuis tensor from the reductive bracket:
/// `[FX,FY]_𝔫 − F[FX,Y]_𝔫 − F[X,FY]_𝔫 − P[X,Y]_𝔫`.
pub fn nijenhuis_bracket(split: &ReductiveSplit, f: &DMatrix<f64>) -> Tensor3 {
    let br = split.bracket_n_tensor();
    let p = -(f * f);
    br.precompose(0, f)
        .precompose(1, f)
        .sub(&br.precompose(0, f).compose_out(f))
        .sub(&br.precompose(1, f).compose_out(f))
        .sub(&br.compose_out(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;
    use crate::homogeo::split::InvariantMetric;
    use proptest::prelude::*;

    fn split(f: &fixtures::Fixture) -> ReductiveSplit {
        ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap()
    }

    fn random_tensor(n: usize, seed: u64) -> Tensor3 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(n, |_, _, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn odd_top_level_is_complex() {
        for f in [fixtures::su3_order3(), fixtures::su3_order5()] {
            let s = split(&f);
            let j = canonical_top(&s).unwrap();
            assert!(j.is_complex(1e-12), "{}", f.name);
            let g = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
            assert!(g.orthogonality_residual(j.matrix()) < 1e-12);
        }
    }

    #[test]
    fn even_order4_structure_kills_g2() {
        let f = fixtures::su3_order4();
        let s = split(&f);
        let fs = canonical_structures(&s, 1).unwrap();
        let (ms, gk) = s.block_ranges().unwrap();
        let pm = s.block_projector(&ms[0]);
        let pk = s.block_projector(gk.as_ref().unwrap());
        assert!(max_abs(&(fs.matrix() * &pk)) < 1e-12);
        assert!(max_abs(&(fs.matrix() * fs.matrix() * &pm + &pm)) < 1e-12);
        assert!(linalg::rank(&pk, 0.5) == 2);
    }

    #[test]
    fn f_identity_on_all_levels() {
        for f in fixtures::all() {
            let s = split(&f);
            let kp = f.tau.order();
            let max = if kp % 2 == 0 { kp / 2 - 1 } else { (kp - 1) / 2 };
            for m in 1..=max {
                let fs = canonical_structures(&s, m).unwrap();
                assert!(fs.identity_residual() < 1e-12);
            }
            assert!(matches!(
                canonical_structures(&s, max + 1),
                Err(GeometryError::LevelOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn three_symmetric_tau_and_j() {
        // τ|𝔪 = −½ − (√3/2) J on a 3-symmetric space.
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let tau = s.tau_n().unwrap();
        let n = s.dim_n();
        let expected = DMatrix::identity(n, n) * -0.5 - j.matrix() * (3f64.sqrt() / 2.0);
        assert!(max_abs(&(tau - expected)) < 1e-12);
        let j0m = j0(&s).unwrap();
        let expected0 = DMatrix::identity(n, n) * -0.5 + j.matrix() * (3f64.sqrt() / 2.0);
        assert!(max_abs(&(j0m - expected0)) < 1e-12);
    }

    #[test]
    fn component_split_resolves_identity() {
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let b = random_tensor(6, 3);
        let mut sum = Tensor3::zeros(6);
        for e1 in [1i8, -1] {
            for e2 in [1i8, -1] {
                sum = sum.add(&component_split(&b, j.matrix(), e1, e2));
            }
        }
        assert!(sum.max_diff(&b) < 1e-12);
    }

    #[test]
    fn j_linear_form_has_no_minus_minus_part() {
        // B(X,Y) = ⟨JX, Y⟩ v-type tensors: take B(X,Y) = J[X,Y] - type check with a
        // (1,1) form: B(JX,JY) = B(X,Y), B(JX,Y) = J B(X,Y) fails in general, so
        // build B = ω ⊗ v with ω(JX,JY) = ω(X,Y) and v fixed, then symmetrize.
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let jm = j.matrix();
        // ω(X,Y) = ⟨JX,Y⟩ is J-invariant; B(X,Y) = ω(X,Y) v.
        let v = nalgebra::DVector::from_fn(6, |i, _| (i as f64 + 1.0).sin());
        let b = Tensor3::from_fn(6, |a, c, k| jm[(c, a)] * v[k]);
        let bmm = component_split(&b, jm, -1, -1);
        assert!(bmm.max_abs() < 1e-12);
    }

    #[test]
    fn canonical_torsion_is_pure_minus_minus_on_three_symmetric() {
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let t0 = OriginConnection::canonical(&s).torsion(&s);
        for (e1, e2) in [(1i8, 1i8), (1, -1), (-1, 1)] {
            assert!(component_split(&t0, j.matrix(), e1, e2).max_abs() < 1e-12);
        }
        let n_torsion = nijenhuis(&s, &j, &OriginConnection::canonical(&s), 1e-9).unwrap();
        let gauduchon = component_split(&t0, j.matrix(), -1, -1).scale(4.0);
        assert!(n_torsion.max_diff(&gauduchon) < 1e-12);
        assert!(n_torsion.max_diff(&s.bracket_n_tensor().scale(-4.0)) < 1e-12);
        assert!(n_torsion.max_diff(&nijenhuis_bracket(&s, j.matrix())) < 1e-12);
    }

    #[test]
    fn kahler_like_structure_has_zero_nijenhuis() {
        // su(2)/u(1) with J = ad(e3) on 𝔪 = span(e1, e2).
        let f = fixtures::su2_involution();
        let s = split(&f);
        let ad3 = s.ad_k(0).clone();
        let j = OriginFStructure::new(ad3, 1e-12).unwrap();
        assert!(j.is_complex(1e-12));
        let n = nijenhuis(&s, &j, &OriginConnection::canonical(&s), 1e-9).unwrap();
        assert!(n.max_abs() < 1e-15);
    }

    #[test]
    fn non_preserving_connection_is_rejected() {
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let bad = OriginConnection::new(random_tensor(6, 9));
        assert!(matches!(
            nijenhuis(&s, &j, &bad, 1e-9),
            Err(GeometryError::DoesNotPreserve { .. })
        ));
    }

    #[test]
    fn bullet_equals_dot_for_complex_structures() {
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let b = random_tensor(6, 11);
        let dot = j_action(&b, j.matrix(), JAction::Dot);
        let bullet = j_action(&b, j.matrix(), JAction::Bullet);
        assert!(dot.max_diff(&bullet) < 1e-12);
    }

    #[test]
    fn bullet_minus_circ_identity_on_f_structure() {
        // F•B − F↻B = 4 J̄·B̄^{−−}, with B̄ = B(P·,P·,P·) and J̄ = F on H.
        let f = fixtures::su3_order4();
        let s = split(&f);
        let fs = canonical_structures(&s, 1).unwrap();
        let fm = fs.matrix();
        let p = fs.horizontal();
        let g = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        for seed in 0..5 {
            let b = random_tensor(6, 100 + seed);
            let lhs = j_action(&b, fm, JAction::Bullet).sub(&j_action(&b, fm, JAction::Circ));
            let bbar_vec = b.precompose_all(&p, &p, &p).raise(g.gram());
            let bmm = component_split(&bbar_vec, fm, -1, -1).compose_out(&p).lower(g.gram());
            let rhs = j_action(&bmm, fm, JAction::Dot).scale(4.0);
            assert!(lhs.max_diff(&rhs) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn star_difference_is_half_jn() {
        // J·T − J⋆T = ½ J·N_J for the torsion of a J-preserving connection.
        let f = fixtures::su3_order3();
        let s = split(&f);
        let j = canonical_top(&s).unwrap();
        let g = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        let conn = OriginConnection::canonical(&s);
        let t = conn.torsion(&s).lower(g.gram());
        let n = nijenhuis(&s, &j, &conn, 1e-9).unwrap();
        let lhs = j_action(&t, j.matrix(), JAction::Dot).sub(&j_action(&t, j.matrix(), JAction::Star));
        let rhs = n.compose_out(j.matrix()).lower(g.gram()).scale(0.5);
        assert!(lhs.max_diff(&rhs) < 1e-12);
    }

    proptest! {
        #[test]
        fn j_dot_is_an_involution_up_to_sign(seed in 0u64..1000) {
            let f = fixtures::su3_order3();
            let s = split(&f);
            let j = canonical_top(&s).unwrap();
            let b = random_tensor(6, seed);
            let twice = j_action(&j_action(&b, j.matrix(), JAction::Dot), j.matrix(), JAction::Dot);
            prop_assert!(twice.add(&b).max_abs() < 1e-12);
        }
    }
}

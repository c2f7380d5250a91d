//! Exterior calculus of invariant forms at the origin.

use nalgebra::{DMatrix, DVector};

use super::split::{InvariantMetric, ReductiveSplit};
use super::structures::{j_action, JAction};
use super::tensor::{flatten, unflatten, AltForm, Tensor3};
use super::GeometryError;

/// `Σ_{i<j} (−1)^{i+j} α(B(X_i,X_j), X₀, …, X̂_i, …, X̂_j, …)` for a
/// vector-valued 2-form `B`.
fn contract_pairs(alpha: &AltForm, b: &Tensor3) -> AltForm {
    let n = alpha.n();
    let p = alpha.degree();
    let mut out = vec![0.0; n.pow(p as u32 + 1)];
    let mut idx = vec![0usize; p + 1];
    let mut sub = vec![0usize; p];
    for (flat, val) in out.iter_mut().enumerate() {
        unflatten(flat, n, &mut idx);
        let mut s = 0.0;
        for i in 0..=p {
            for j in i + 1..=p {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let mut w = 1;
                for (slot, &v) in idx.iter().enumerate() {
                    if slot != i && slot != j {
                        sub[w] = v;
                        w += 1;
                    }
                }
                for c in 0..n {
                    let coeff = b.get(idx[i], idx[j], c);
                    if coeff == 0.0 {
                        continue;
                    }
                    sub[0] = c;
                    s += sign * coeff * alpha.data()[flatten(&sub, n)];
                }
            }
        }
        *val = s;
    }
    AltForm::from_data(n, p + 1, out)
}

/// Exterior derivative of an invariant form:
/// `dα(X₀,…,X_p) = Σ_{i<j} (−1)^{i+j} α([X_i,X_j]_𝔫, X₀, …, X̂_i, …, X̂_j, …)`.
///
/// Rejects forms that are not ad 𝔨-invariant to within `tol`.
pub fn invariant_d(split: &ReductiveSplit, alpha: &AltForm, tol: f64) -> Result<AltForm, GeometryError> {
    check_form(split, alpha)?;
    let r = form_invariance_residual(split, alpha);
    if r > tol {
        return Err(GeometryError::NonInvariantForm { residual: r });
    }
    if alpha.degree() == 0 {
        return Ok(AltForm::zeros(alpha.n(), 1));
    }
    Ok(contract_pairs(alpha, split.bracket_n_tensor()))
}

/// Exterior derivative of a form parallel for a connection with torsion `T`:
/// `dα = −Σ_{i<j} (−1)^{i+j} α(T(X_i,X_j), …)`.
pub fn parallel_torsion_d(alpha: &AltForm, torsion: &Tensor3) -> AltForm {
    if alpha.degree() == 0 {
        return AltForm::zeros(alpha.n(), 1);
    }
    let d = contract_pairs(alpha, torsion);
    AltForm::from_data(d.n(), d.degree(), d.data().iter().map(|v| -v).collect())
}

fn check_form(split: &ReductiveSplit, alpha: &AltForm) -> Result<(), GeometryError> {
    if alpha.n() != split.dim_n() {
        return Err(GeometryError::Shape(format!(
            "form on a {}-dimensional space, complement has dimension {}",
            alpha.n(),
            split.dim_n()
        )));
    }
    Ok(())
}

/// `α(…, A X_slot, …)` summed over all slots.
fn derivation_action(alpha: &AltForm, a: &DMatrix<f64>) -> Vec<f64> {
    let n = alpha.n();
    let p = alpha.degree();
    let mut out = vec![0.0; alpha.data().len()];
    let mut idx = vec![0usize; p];
    for (flat, val) in out.iter_mut().enumerate() {
        unflatten(flat, n, &mut idx);
        let mut s = 0.0;
        for slot in 0..p {
            let orig = idx[slot];
            for c in 0..n {
                let coeff = a[(c, orig)];
                if coeff == 0.0 {
                    continue;
                }
                idx[slot] = c;
                s += coeff * alpha.data()[flatten(&idx, n)];
            }
            idx[slot] = orig;
        }
        *val = s;
    }
    out
}

/// `max_k |Σ_slots α(…, [k, X], …)|` over the isotropy basis.
pub fn form_invariance_residual(split: &ReductiveSplit, alpha: &AltForm) -> f64 {
    (0..split.dim_k())
        .map(|a| crate::linalg::max_abs_slice(&derivation_action(alpha, split.ad_k(a))))
        .fold(0.0, f64::max)
}

/// Orthogonal projection of a form onto the ad 𝔨-invariant forms of the same degree.
pub fn project_invariant(split: &ReductiveSplit, alpha: &AltForm) -> AltForm {
    let n = alpha.n();
    let p = alpha.degree();
    let size = alpha.data().len();
    let dk = split.dim_k();
    if dk == 0 {
        return alpha.clone();
    }
    let mut op = DMatrix::zeros(dk * size, size);
    let mut unit = vec![0.0; size];
    for col in 0..size {
        unit[col] = 1.0;
        let e = AltForm::from_data(n, p, unit.clone());
        for a in 0..dk {
            let img = derivation_action(&e, split.ad_k(a));
            for (row, v) in img.iter().enumerate() {
                op[(a * size + row, col)] = *v;
            }
        }
        unit[col] = 0.0;
    }
    let x = DVector::from_column_slice(alpha.data());
    let svd = op.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut proj = x.clone();
    for (r, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-10 * smax.max(1.0) {
            let row = v_t.row(r).transpose();
            proj -= &row * row.dot(&x);
        }
    }
    AltForm::antisymmetrize(n, p, proj.as_slice())
}

/// The fundamental 2-form `Ω_F(X, Y) = ⟨FX, Y⟩`.
pub fn kahler_form(metric: &InvariantMetric, f: &DMatrix<f64>) -> AltForm {
    AltForm::from_matrix(&(f.transpose() * metric.gram()))
}

/// Wess-Zumino 3-forms `H = F•T` and `H⋆ = F⋆T` built from the
/// (vector-valued) torsion of a characteristic connection.
pub fn wess_zumino_forms(metric: &InvariantMetric, f: &DMatrix<f64>, torsion: &Tensor3) -> (Tensor3, Tensor3) {
    let low = torsion.lower(metric.gram());
    (j_action(&low, f, JAction::Bullet), j_action(&low, f, JAction::Star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;
    use crate::homogeo::connection::OriginConnection;
    use crate::homogeo::structures::{canonical_top, nijenhuis_bracket};
    use rand::{Rng, SeedableRng};

    fn setup(f: &fixtures::Fixture) -> (ReductiveSplit, InvariantMetric) {
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let g = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        (s, g)
    }

    fn random_form(n: usize, p: usize, rng: &mut impl Rng) -> AltForm {
        let data: Vec<f64> = (0..n.pow(p as u32)).map(|_| rng.random_range(-1.0..1.0)).collect();
        AltForm::antisymmetrize(n, p, &data)
    }

    #[test]
    fn d_agrees_with_parallel_torsion_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for f in [fixtures::su3_order3(), fixtures::su3_order4()] {
            let (s, _) = setup(&f);
            let t0 = OriginConnection::canonical(&s).torsion(&s);
            for p in 1..=3 {
                let a = project_invariant(&s, &random_form(6, p, &mut rng));
                let d1 = invariant_d(&s, &a, 1e-9).unwrap();
                let d2 = parallel_torsion_d(&a, &t0);
                assert!(d1.max_diff(&d2) < 1e-12);
                assert!(d1.antisymmetry_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn d_squared_vanishes_on_invariant_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let f = fixtures::su3_order5();
        let (s, _) = setup(&f);
        for p in 1..=3 {
            let a = project_invariant(&s, &random_form(6, p, &mut rng));
            assert!(form_invariance_residual(&s, &a) < 1e-10);
            let dd = invariant_d(&s, &invariant_d(&s, &a, 1e-9).unwrap(), 1e-9).unwrap();
            assert!(dd.max_abs() < 1e-10, "degree {p}");
        }
    }

    #[test]
    fn non_invariant_input_is_rejected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = fixtures::su3_order3();
        let (s, _) = setup(&f);
        let a = random_form(6, 2, &mut rng);
        assert!(matches!(
            invariant_d(&s, &a, 1e-9),
            Err(GeometryError::NonInvariantForm { .. })
        ));
    }

    #[test]
    fn nearly_kahler_identities() {
        let f = fixtures::su3_order3();
        let (s, g) = setup(&f);
        let j = canonical_top(&s).unwrap();
        let t0 = OriginConnection::canonical(&s).torsion(&s);
        let omega = kahler_form(&g, j.matrix());
        assert!(omega.antisymmetry_residual() < 1e-12);
        let d_omega = invariant_d(&s, &omega, 1e-9).unwrap().to_tensor3();
        let h = t0.compose_out(j.matrix()).lower(g.gram());
        assert!(d_omega.max_diff(&h.scale(3.0)) < 1e-12);
        let n_low = nijenhuis_bracket(&s, j.matrix()).lower(g.gram());
        let t_low = t0.lower(g.gram());
        let rhs = j_action(&n_low, j.matrix(), JAction::Dot).sub(&j_action(&t_low, j.matrix(), JAction::Dot));
        assert!(d_omega.max_diff(&rhs) < 1e-12);
    }

    #[test]
    fn wess_zumino_forms_are_closed() {
        for f in [fixtures::su3_order3(), fixtures::su3_order4(), fixtures::su3_order5()] {
            let (s, g) = setup(&f);
            let fm = canonical_top(&s).unwrap();
            let t0 = OriginConnection::canonical(&s).torsion(&s);
            let (h, hs) = wess_zumino_forms(&g, fm.matrix(), &t0);
            for form in [h, hs] {
                assert!(form.total_skew_residual() < 1e-12, "{}", f.name);
                let dh = invariant_d(&s, &form.to_form(), 1e-9).unwrap();
                assert!(dh.max_abs() < 1e-10, "{}", f.name);
            }
        }
    }

    #[test]
    fn closed_two_form_on_abelian_complement() {
        // su(2)/u(1) bracket lands in 𝔨, so every invariant form is closed.
        let f = fixtures::su2_involution();
        let (s, g) = setup(&f);
        let omega = kahler_form(&g, s.ad_k(0));
        let d = invariant_d(&s, &omega, 1e-9).unwrap();
        assert!(d.max_abs() < 1e-15);
    }
}

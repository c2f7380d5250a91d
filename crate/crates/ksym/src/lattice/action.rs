//! First variation of the discrete sigma model with a Wess-Zumino term.
//!
//! For `S(f) = E(f) + WZ(f)` the variation along `δf = X` is
//! `δS = ∫ ⟨−τ(f) + B(f_x, f_y), X⟩` with `⟨B(·,·), ·⟩ = H`. The left side
//! is measured on the lattice: `E` by its link sum and `WZ` by quadrature of
//! `H(f_x, f_y, ∂_s f)` over the family `f_s = f exp(sX)`, `|s| ≤ ε`. The
//! right side uses the stencil tension and stencil derivatives of `f`.

use nalgebra::DVector;
use serde::Serialize;

use super::field::{AlgebraForm1, GroupField, LieField};
use super::residuals::{harmonic_residual, SplitContext};
use super::solver::{discrete_energy, Links};
use super::LatticeError;
use crate::fixtures::MatrixRealization;
use crate::homogeo::{invariant_d, InvariantMetric, Tensor3};

/// Both sides of the variational identity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientCheck {
    /// Centered difference of `E` plus the Wess-Zumino slab integral, divided by `2ε`.
    pub finite_difference: f64,
    /// `Σ h² ⟨−τ + B(f_x, f_y), X⟩`.
    pub pairing: f64,
    /// `|finite_difference − pairing| / max(|finite_difference|, |pairing|)`, or 0 when both vanish.
    pub relative_gap: f64,
}

fn displaced(u: &GroupField, dir: &LieField<f64>, ctx: &SplitContext, rep: &MatrixRealization, s: f64) -> GroupField {
    let mut out = u.clone();
    for p in 0..u.grid().len() {
        let x = ctx.from_n() * dir.at(p) * s;
        *out.at_mut(p) = u.at(p) * rep.matrix(&x).exp();
    }
    out
}

/// `Σ_p h² H(f_x, f_y, X)` with `f_x, f_y` the `𝔫`-parts of `α`.
fn wz_density(alpha: &AlgebraForm1<f64>, ctx: &SplitContext, h3: &Tensor3, dir: &LieField<f64>) -> f64 {
    let g = alpha.grid();
    let h = g.h();
    let fx = alpha.x().apply(ctx.to_n());
    let fy = alpha.y().apply(ctx.to_n());
    (0..g.len())
        .map(|p| h * h * h3.eval3(fx.at(p), fy.at(p), dir.at(p)))
        .sum()
}

/// Compares the finite-difference first variation of the discrete action
/// along `dir` with the Euler-Lagrange pairing.
///
/// `h3` is the Wess-Zumino 3-form as a trilinear form on `𝔫` coordinates
/// (`None` for the plain energy); it must be invariant and closed to within
/// `closed_tol`. `dir` is an `𝔫`-coordinate field; on clamped grids its
/// values on edge points are ignored.
#[allow(clippy::too_many_arguments)]
pub fn action_gradient_check(
    u: &GroupField,
    ctx: &SplitContext,
    metric: &InvariantMetric,
    rep: &MatrixRealization,
    h3: Option<&Tensor3>,
    dir: &LieField<f64>,
    eps: f64,
    closed_tol: f64,
) -> Result<GradientCheck, LatticeError> {
    let g = *u.grid();
    let dn = ctx.split().dim_n();
    if dir.dim() != dn || *dir.grid() != g {
        return Err(LatticeError::Shape(
            "direction field must be 𝔫-valued on the same grid".into(),
        ));
    }
    if let Some(t) = h3 {
        let r = invariant_d(ctx.split(), &t.to_form(), closed_tol)?.max_abs();
        if r > closed_tol {
            return Err(LatticeError::NotClosed { residual: r });
        }
    }
    let dir = LieField::from_fn(g, dn, |p| {
        if g.is_interior(p) {
            dir.at(p).clone()
        } else {
            DVector::zeros(dn)
        }
    });
    let h = g.h();
    let alpha = u.maurer_cartan(rep);
    let tension = harmonic_residual(&alpha, ctx, 0.0).apply(ctx.to_n());
    let b = h3.map(|t| t.raise(metric.gram()));
    let fx = alpha.x().apply(ctx.to_n());
    let fy = alpha.y().apply(ctx.to_n());
    let mut pairing = 0.0;
    for p in 0..g.len() {
        let mut v = -tension.at(p);
        if let Some(b) = &b {
            v += b.eval(fx.at(p), fy.at(p));
        }
        pairing += h * h * metric.inner(&v, dir.at(p));
    }

    let plus = displaced(u, &dir, ctx, rep, eps);
    let minus = displaced(u, &dir, ctx, rep, -eps);
    let energy = |f: &GroupField| discrete_energy(&Links::new(f, rep), ctx, metric, h);
    let mut finite_difference = (energy(&plus) - energy(&minus)) / (2.0 * eps);
    if let Some(t) = h3 {
        // Simpson's rule over s ∈ [−ε, ε], divided by 2ε.
        let w = |f: &GroupField| wz_density(&f.maurer_cartan(rep), ctx, t, &dir);
        finite_difference += (w(&minus) + 4.0 * wz_density(&alpha, ctx, t, &dir) + w(&plus)) / 6.0;
    }
    let scale = finite_difference.abs().max(pairing.abs());
    let relative_gap = if scale == 0.0 {
        0.0
    } else {
        (finite_difference - pairing).abs() / scale
    };
    Ok(GradientCheck {
        finite_difference,
        pairing,
        relative_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;
    use crate::homogeo::{canonical_top, OriginConnection, ReductiveSplit};
    use crate::lattice::grid::LatticeGrid;

    fn setup(f: &fixtures::Fixture) -> (SplitContext, InvariantMetric) {
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let m = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        (SplitContext::new(&s), m)
    }

    fn gentle_field(f: &fixtures::Fixture, g: LatticeGrid, scale: f64) -> GroupField {
        let x = LieField::from_fn(g, f.algebra.dim(), |p| {
            let (x, y) = g.point(p);
            DVector::from_fn(f.algebra.dim(), |a, _| {
                let a = a as f64;
                scale * ((0.9 * x + 0.4 * a).sin() * (0.7 * y - 0.3 * a).cos() + 0.3 * (a + 1.0) * x * y)
            })
        });
        GroupField::exp_of(&x, &f.realization)
    }

    fn bump_direction(g: LatticeGrid, dn: usize) -> LieField<f64> {
        LieField::from_fn(g, dn, |p| {
            let (x, y) = g.point(p);
            let s = (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
            DVector::from_fn(dn, |a, _| s * (1.3 * a as f64 + 2.0 * x - y).cos())
        })
    }

    fn wz_form(ctx: &SplitContext, metric: &InvariantMetric) -> Tensor3 {
        let split = ctx.split();
        let t0 = OriginConnection::canonical(split).torsion(split);
        t0.compose_out(canonical_top(split).unwrap().matrix())
            .lower(metric.gram())
    }

    #[test]
    fn energy_variation_matches_tension() {
        let f = fixtures::su2_involution();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(16).unwrap();
        let u = gentle_field(&f, g, 0.5);
        let dir = bump_direction(g, ctx.split().dim_n());
        let c = action_gradient_check(&u, &ctx, &metric, &f.realization, None, &dir, 1e-5, 1e-9).unwrap();
        assert!(c.pairing.abs() > 1e-3);
        assert!(c.relative_gap < 1e-3, "{c:?}");
    }

    #[test]
    fn gap_with_wess_zumino_term_is_second_order() {
        let f = fixtures::su3_order3();
        let (ctx, metric) = setup(&f);
        let h3 = wz_form(&ctx, &metric);
        let mut gaps = Vec::new();
        for cells in [8, 16, 32] {
            let g = LatticeGrid::unit_square(cells).unwrap();
            let u = gentle_field(&f, g, 0.5);
            let dir = bump_direction(g, ctx.split().dim_n());
            let c = action_gradient_check(&u, &ctx, &metric, &f.realization, Some(&h3), &dir, 1e-5, 1e-9).unwrap();
            gaps.push((c.finite_difference - c.pairing).abs());
        }
        for w in gaps.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 3.0 && r < 5.5, "ratio {r} in {gaps:?}");
        }
    }

    #[test]
    fn non_closed_form_is_rejected() {
        // ⟨T⁰(X, Y), Z⟩ is invariant but not closed on the flag manifold.
        let f = fixtures::su3_order3();
        let (ctx, metric) = setup(&f);
        let split = ctx.split();
        let open = OriginConnection::canonical(split).torsion(split).lower(metric.gram());
        let g = LatticeGrid::unit_square(4).unwrap();
        let u = GroupField::identity(g, 3);
        let dir = LieField::zeros(g, split.dim_n());
        let err = action_gradient_check(&u, &ctx, &metric, &f.realization, Some(&open), &dir, 1e-5, 1e-9);
        assert!(matches!(err, Err(LatticeError::NotClosed { .. })), "{err:?}");
    }
}

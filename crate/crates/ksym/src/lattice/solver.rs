//! Link variables, the discrete harmonic-map energy and a relaxation solver.
//!
//! The link from `p` to its forward neighbour `q` carries
//! `A(p→q) = log(U_p⁻¹U_q)/h ∈ 𝔤`. The energy is
//! `E = ½ Σ_links h² |A_𝔫|²` for the invariant metric, and moving
//! `U_p ↦ U_p exp(εX)` with `X ∈ 𝔫` changes it by `−ε h² ⟨τ_p, X⟩` up to
//! `O(ε h²|A|²)`, where the link tension is
//! `τ_p = Σ_axes (A⁺_𝔫 − A⁻_𝔫)/h + ½([A⁺_𝔨, A⁺_𝔫] + [A⁻_𝔨, A⁻_𝔫])`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::field::{GroupField, LieField};
use super::grid::{Axis, LatticeGrid};
use super::residuals::{harmonic_residual, SplitContext};
use super::LatticeError;
use crate::fixtures::MatrixRealization;
use crate::homogeo::InvariantMetric;
use crate::linalg::C64;

/// Matrix logarithm of a unitary matrix.
///
/// Uses the Mercator series when `‖M − I‖_F < ½` and the Schur form otherwise.
pub fn log_unitary(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let x = m - DMatrix::<C64>::identity(n, n);
    if x.norm() < 0.5 {
        let mut out = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let mut power = x.clone();
        for k in 1..=80 {
            let term = &power * C64::new(if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64, 0.0);
            out += &term;
            if term.norm() < 1e-18 {
                break;
            }
            power = &power * &x;
        }
        return out;
    }
    let (q, t) = m.clone().schur().unpack();
    let d = DMatrix::from_fn(n, n, |r, c| if r == c { t[(r, r)].ln() } else { C64::new(0.0, 0.0) });
    &q * d * q.adjoint()
}

/// Link variables `A(p→q)` along both axes, in `𝔤` coordinates.
#[derive(Debug, Clone)]
pub struct Links {
    x: Vec<Option<DVector<f64>>>,
    y: Vec<Option<DVector<f64>>>,
}

impl Links {
    /// Links of a group field; missing links (clamped edges) are `None`.
    pub fn new(u: &GroupField, rep: &MatrixRealization) -> Self {
        let g = u.grid();
        let h = g.h();
        let along = |axis: Axis| {
            (0..g.len())
                .map(|p| {
                    g.forward(p, axis).map(|q| {
                        let rel = u.at(p).adjoint() * u.at(q);
                        rep.coords(&log_unitary(&rel)) / h
                    })
                })
                .collect()
        };
        Links {
            x: along(Axis::X),
            y: along(Axis::Y),
        }
    }

    /// Link leaving `p` forward along `axis`.
    pub fn forward(&self, p: usize, axis: Axis) -> Option<&DVector<f64>> {
        match axis {
            Axis::X => self.x[p].as_ref(),
            Axis::Y => self.y[p].as_ref(),
        }
    }

    /// Point value of the form: the mean of the links on either side, or the
    /// one available link on an edge.
    pub fn point_form(&self, u: &GroupField, p: usize, axis: Axis) -> DVector<f64> {
        let g = u.grid();
        let fwd = self.forward(p, axis);
        let bwd = g.backward(p, axis).and_then(|o| self.forward(o, axis));
        match (fwd, bwd) {
            (Some(a), Some(b)) => (a + b) * 0.5,
            (Some(a), None) | (None, Some(a)) => a.clone(),
            (None, None) => unreachable!("grids have at least three points per axis"),
        }
    }
}

/// `E = ½ Σ_links h² |A_𝔫|²`.
pub fn discrete_energy(links: &Links, ctx: &SplitContext, metric: &InvariantMetric, h: f64) -> f64 {
    let mut e = 0.0;
    for a in links.x.iter().chain(&links.y).flatten() {
        let an = ctx.to_n() * a;
        e += 0.5 * h * h * metric.inner(&an, &an);
    }
    e
}

/// Link tension at every point, in `𝔫` coordinates; zero where a link is missing.
pub fn link_tension(links: &Links, u: &GroupField, ctx: &SplitContext) -> LieField<f64> {
    let g = *u.grid();
    let h = g.h();
    let dn = ctx.split().dim_n();
    let br = ctx.bracket();
    LieField::from_fn(g, dn, |p| {
        let mut out = DVector::zeros(dn);
        if !g.is_interior(p) {
            return out;
        }
        for axis in [Axis::X, Axis::Y] {
            let plus = links.forward(p, axis).expect("interior point has a forward link");
            let o = g.backward(p, axis).expect("interior point has a backward link");
            let minus = links.forward(o, axis).expect("interior point has a backward link");
            let diff = ctx.to_n() * (plus - minus) / h;
            let side = |a: &DVector<f64>| ctx.to_n() * br.apply(&(ctx.p_k() * a), &(ctx.p_n() * a));
            out += diff + (side(plus) + side(minus)) * 0.5;
        }
        out
    })
}

/// Relaxation parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    /// Maximum number of steps.
    pub steps: usize,
    /// Step size multiplying the tension.
    pub rate: f64,
    /// Stop once the maximum link tension falls below this value.
    pub tol: f64,
}

/// One row of the residual history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub step: usize,
    pub energy: f64,
    /// Maximum link tension.
    pub residual: f64,
}

/// Result of a relaxation run.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub field: GroupField,
    /// Row 0 is the initial state; one row per completed step follows.
    pub history: Vec<HistoryRow>,
    pub converged: bool,
    /// Maximum link tension at the end.
    pub final_residual: f64,
    /// Maximum of the stencil-based harmonic residual of `U⁻¹DU` at the end.
    pub final_harmonic_residual: f64,
}

/// Number of consecutive energy increases treated as divergence.
pub const DIVERGENCE_STREAK: usize = 10;

fn check_fixture(ctx: &SplitContext) -> Result<(), LatticeError> {
    let split = ctx.split();
    let order3 = split.grading().is_some_and(|d| d.kprime() == 3);
    if split.is_symmetric(1e-9) || order3 {
        Ok(())
    } else {
        Err(LatticeError::UnsupportedFixture(
            "the relaxation solver needs a symmetric or 3-symmetric split".into(),
        ))
    }
}

/// Gradient-flow relaxation `U_p ↦ U_p exp(rate·τ_p)` at interior points.
///
/// Fails with [`LatticeError::Diverged`] once the energy has increased for
/// [`DIVERGENCE_STREAK`] consecutive steps.
pub fn solve_harmonic(
    initial: &GroupField,
    ctx: &SplitContext,
    metric: &InvariantMetric,
    rep: &MatrixRealization,
    opts: SolverOptions,
) -> Result<SolveOutcome, LatticeError> {
    check_fixture(ctx)?;
    let h = initial.grid().h();
    let mut u = initial.clone();
    let mut links = Links::new(&u, rep);
    let mut tension = link_tension(&links, &u, ctx);
    let mut energy = discrete_energy(&links, ctx, metric, h);
    let mut history = vec![HistoryRow {
        step: 0,
        energy,
        residual: tension.max_abs(),
    }];
    let mut streak = 0;
    let mut converged = history[0].residual < opts.tol;
    let mut step = 0;
    while !converged && step < opts.steps {
        step += 1;
        for p in 0..u.grid().len() {
            if u.grid().is_interior(p) {
                let x = ctx.from_n() * tension.at(p) * opts.rate;
                let next = u.at(p) * rep.matrix(&x).exp();
                *u.at_mut(p) = next;
            }
        }
        links = Links::new(&u, rep);
        tension = link_tension(&links, &u, ctx);
        let e = discrete_energy(&links, ctx, metric, h);
        streak = if e > energy { streak + 1 } else { 0 };
        energy = e;
        let residual = tension.max_abs();
        history.push(HistoryRow { step, energy, residual });
        if streak >= DIVERGENCE_STREAK || !energy.is_finite() {
            return Err(LatticeError::Diverged { step, energy, history });
        }
        converged = residual < opts.tol;
    }
    let alpha = u.maurer_cartan(rep);
    let final_harmonic_residual = harmonic_residual(&alpha, ctx, 0.0).max_abs_interior();
    Ok(SolveOutcome {
        final_residual: history.last().map_or(0.0, |r| r.residual),
        field: u,
        history,
        converged,
        final_harmonic_residual,
    })
}

/// Shape of the interior perturbation in [`perturbed_geodesic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// `sin(πx) sin(πy)`, smooth and vanishing on the unit square's edges.
    Bump,
    /// `±1` alternating between neighbouring points.
    Checkerboard,
}

/// `U = exp(x ξ + amp·b(x, y) ζ)`: the geodesic `exp(xξ)` with the
/// perturbation `b` along `ζ` added at interior points.
pub fn perturbed_geodesic(
    grid: LatticeGrid,
    xi: &DVector<f64>,
    zeta: &DVector<f64>,
    amp: f64,
    shape: Perturbation,
    rep: &MatrixRealization,
) -> GroupField {
    let x = LieField::from_fn(grid, xi.len(), |p| {
        let (x, y) = grid.point(p);
        let (i, j) = grid.ij(p);
        let b = match shape {
            Perturbation::Bump => (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin(),
            Perturbation::Checkerboard if (i + j) % 2 == 0 => 1.0,
            Perturbation::Checkerboard => -1.0,
        };
        if grid.is_interior(p) {
            xi * x + zeta * (amp * b)
        } else {
            xi * x
        }
    });
    GroupField::exp_of(&x, rep)
}

/// Writes a residual history as CSV with header `step,energy,residual`.
pub fn write_history_csv(history: &[HistoryRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "step,energy,residual")?;
    for row in history {
        writeln!(out, "{},{:.17e},{:.17e}", row.step, row.energy, row.residual)?;
    }
    Ok(())
}

/// Writes per-point residual norms as CSV with header `i,j,x,y,norm`.
pub fn write_plot_csv<T: super::field::Scalar>(field: &LieField<T>, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "i,j,x,y,norm")?;
    let g = field.grid();
    for (p, n) in field.point_norms().iter().enumerate() {
        let (i, j) = g.ij(p);
        let (x, y) = g.point(p);
        writeln!(out, "{i},{j},{x},{y},{n:.17e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures;
    use crate::homogeo::ReductiveSplit;

    fn setup(f: &fixtures::Fixture) -> (SplitContext, InvariantMetric) {
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let m = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        (SplitContext::new(&s), m)
    }

    #[test]
    fn log_inverts_exp() {
        let f = fixtures::su3_order3();
        for scale in [0.1, 1.5] {
            let x = DVector::from_fn(8, |i, _| scale * ((i as f64) * 0.9 + 0.2).sin());
            let m = f.realization.matrix(&x);
            let back = f.realization.coords(&log_unitary(&m.exp()));
            assert!((back - x).amax() < 1e-12, "scale {scale}");
        }
    }

    #[test]
    fn geodesic_has_zero_tension() {
        let f = fixtures::su2_involution();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(8).unwrap();
        let xi = DVector::from_vec(vec![0.7, -0.4, 0.0]);
        let u = GroupField::exp_of(&LieField::from_fn(g, 3, |p| &xi * g.point(p).0), &f.realization);
        let links = Links::new(&u, &f.realization);
        assert!(link_tension(&links, &u, &ctx).max_abs() < 1e-12);
        let e = discrete_energy(&links, &ctx, &metric, g.h());
        // Eight x-links per row on nine rows, each with |ξ|² = 2·0.65.
        assert!((e - 0.5 * g.h() * g.h() * 72.0 * 1.3).abs() < 1e-12);
    }

    #[test]
    fn unsupported_fixture_is_rejected() {
        let f = fixtures::su3_order4();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(4).unwrap();
        let u = GroupField::identity(g, 3);
        let opts = SolverOptions {
            steps: 1,
            rate: 1e-3,
            tol: 1e-8,
        };
        assert!(matches!(
            solve_harmonic(&u, &ctx, &metric, &f.realization, opts),
            Err(LatticeError::UnsupportedFixture(_))
        ));
    }

    #[test]
    fn history_csv_has_header_and_rows() {
        let rows = [HistoryRow {
            step: 0,
            energy: 1.0,
            residual: 2.0,
        }];
        let mut buf = Vec::new();
        write_history_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("step,energy,residual\n0,"));
        assert_eq!(s.lines().count(), 2);
    }

    fn perturbed_geodesic(f: &fixtures::Fixture, g: LatticeGrid, amp: f64, checker: bool) -> GroupField {
        let xi = DVector::from_vec(vec![0.7, -0.4, 0.0]);
        let zeta = DVector::from_vec(vec![1.0, 0.5, 0.0]);
        let shape = if checker {
            Perturbation::Checkerboard
        } else {
            Perturbation::Bump
        };
        super::perturbed_geodesic(g, &xi, &zeta, amp, shape, &f.realization)
    }

    #[test]
    fn perturbed_geodesic_relaxes() {
        let f = fixtures::su2_involution();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(15).unwrap();
        let u = perturbed_geodesic(&f, g, 0.3, false);
        let opts = SolverOptions {
            steps: 5000,
            rate: 0.2 * g.h() * g.h(),
            tol: 1e-10,
        };
        let out = solve_harmonic(&u, &ctx, &metric, &f.realization, opts).unwrap();
        let first = out.history[0].residual;
        assert!(first > 0.5);
        assert!(first / out.final_residual >= 1e3, "drop {}", first / out.final_residual);
        for w in out.history.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-14, "energy rose at step {}", w[1].step);
        }
        assert!(out.field.membership_residual() < 1e-12);
    }

    #[test]
    fn exact_geodesic_needs_no_steps() {
        let f = fixtures::su2_involution();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(8).unwrap();
        let u = perturbed_geodesic(&f, g, 0.0, false);
        let opts = SolverOptions {
            steps: 10,
            rate: 1e-3,
            tol: 1e-10,
        };
        let out = solve_harmonic(&u, &ctx, &metric, &f.realization, opts).unwrap();
        assert!(out.converged);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn unstable_rate_diverges() {
        let f = fixtures::su2_involution();
        let (ctx, metric) = setup(&f);
        let g = LatticeGrid::unit_square(15).unwrap();
        let u = perturbed_geodesic(&f, g, 1e-6, true);
        let opts = SolverOptions {
            steps: 500,
            rate: 3.0 * g.h() * g.h() / 8.0,
            tol: 1e-14,
        };
        match solve_harmonic(&u, &ctx, &metric, &f.realization, opts) {
            Err(LatticeError::Diverged { step, history, .. }) => {
                assert!(step >= DIVERGENCE_STREAK);
                assert_eq!(history.len(), step + 1);
            }
            other => panic!("expected divergence, got {:?}", other.map(|o| o.final_residual)),
        }
    }
}

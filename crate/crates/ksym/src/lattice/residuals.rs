//! Geometric residuals of lattice Maurer-Cartan forms.
//!
//! Forms are `𝔤`-valued in the coordinates of the algebra. Residuals are
//! returned as the `dx∧dy` coefficient of the corresponding 2-form (for the
//! flat metric on the lattice this is also the value of its Hodge star), in
//! `𝔤` coordinates.

use nalgebra::DMatrix;
use serde::Serialize;

use super::field::{AlgebraForm1, LieField, Scalar, SparseBracket};
use super::LatticeError;
use crate::homogeo::{
    canonical_top, connection_family, j_action, InvariantMetric, JAction, OriginConnection, ReductiveSplit,
};
use crate::linalg::{self, C64};

/// A reductive split together with the projectors the residuals need.
#[derive(Debug, Clone)]
pub struct SplitContext {
    split: ReductiveSplit,
    bracket: SparseBracket,
    to_n: DMatrix<f64>,
    from_n: DMatrix<f64>,
    p_k: DMatrix<f64>,
    p_n: DMatrix<f64>,
    /// Projectors onto `𝔪_1, …, 𝔪_k` in `𝔫` coordinates (graded splits).
    blocks: Vec<DMatrix<f64>>,
    /// Projector onto `𝔤_k` in `𝔫` coordinates (even order only).
    vertical: Option<DMatrix<f64>>,
    /// Canonical f-structure or almost complex structure (graded splits).
    f: Option<DMatrix<f64>>,
}

impl SplitContext {
    /// Precomputes projectors and brackets for a split.
    pub fn new(split: &ReductiveSplit) -> Self {
        let to_n = split.n_projection();
        let from_n = split.n_basis().clone();
        let p_n = &from_n * &to_n;
        let p_k = split.k_basis() * split.k_projection();
        let (blocks, vertical) = match split.block_ranges() {
            Some((ms, gk)) => (
                ms.iter().map(|r| split.block_projector(r)).collect(),
                gk.map(|r| split.block_projector(&r)),
            ),
            None => (Vec::new(), None),
        };
        let f = canonical_top(split).ok().map(|s| s.matrix().clone());
        SplitContext {
            split: split.clone(),
            bracket: SparseBracket::new(split.algebra()),
            to_n,
            from_n,
            p_k,
            p_n,
            blocks,
            vertical,
            f,
        }
    }

    /// The split.
    pub fn split(&self) -> &ReductiveSplit {
        &self.split
    }

    /// Sparse bracket of the algebra.
    pub fn bracket(&self) -> &SparseBracket {
        &self.bracket
    }

    /// Projector onto `𝔨` in `𝔤` coordinates.
    pub fn p_k(&self) -> &DMatrix<f64> {
        &self.p_k
    }

    /// Projector onto `𝔫` in `𝔤` coordinates.
    pub fn p_n(&self) -> &DMatrix<f64> {
        &self.p_n
    }

    /// `𝔤` coordinates to `𝔫` coordinates.
    pub fn to_n(&self) -> &DMatrix<f64> {
        &self.to_n
    }

    /// `𝔫` coordinates to `𝔤` coordinates.
    pub fn from_n(&self) -> &DMatrix<f64> {
        &self.from_n
    }

    /// `𝔫`-coordinate projectors of the blocks `𝔪_j`.
    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    /// `𝔫`-coordinate projector onto `𝔤_k`, for even order.
    pub fn vertical(&self) -> Option<&DMatrix<f64>> {
        self.vertical.as_ref()
    }

    /// Canonical structure on `𝔫` coordinates, for graded splits.
    pub fn f(&self) -> Option<&DMatrix<f64>> {
        self.f.as_ref()
    }

    /// `𝔤`-coordinate projector built from an `𝔫`-coordinate operator.
    pub fn lift(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        &self.from_n * op * &self.to_n
    }

    /// Complex grade projector `P_j` in `𝔤` coordinates.
    fn grade(&self, j: i64) -> Result<&DMatrix<C64>, LatticeError> {
        self.split
            .grading()
            .map(|d| d.projector(j))
            .ok_or_else(|| LatticeError::MissingStructure("the split carries no grading".into()))
    }

    fn require_f(&self) -> Result<&DMatrix<f64>, LatticeError> {
        self.f
            .as_ref()
            .ok_or_else(|| LatticeError::MissingStructure("no canonical f-structure on this split".into()))
    }
}

/// `dα + ½[α∧α]`, i.e. `∂x b − ∂y a + [a, b]`.
pub fn mc_residual<T: Scalar>(alpha: &AlgebraForm1<T>, bracket: &SparseBracket) -> LieField<T> {
    alpha.d().add(&bracket.field(alpha.x(), alpha.y()))
}

/// `d*α_𝔫 + [α_𝔨∧*α_𝔫] + t[α_𝔫∧*α_𝔫]_𝔫`.
pub fn harmonic_residual(alpha: &AlgebraForm1<f64>, ctx: &SplitContext, t: f64) -> LieField<f64> {
    let an = alpha.apply(ctx.p_n());
    let ak = alpha.apply(ctx.p_k());
    let star = an.hodge();
    let base = an.d_star().add(&ctx.bracket().wedge(&ak, &star));
    if t == 0.0 {
        base
    } else {
        base.add(&harmonic_t_term(alpha, ctx).scale(t))
    }
}

/// `[α_𝔫∧*α_𝔫]_𝔫`, which vanishes identically.
pub fn harmonic_t_term(alpha: &AlgebraForm1<f64>, ctx: &SplitContext) -> LieField<f64> {
    let an = alpha.apply(ctx.p_n());
    ctx.bracket().wedge(&an, &an.hodge()).apply(ctx.p_n())
}

fn vertical_projector(ctx: &SplitContext) -> Result<DMatrix<f64>, LatticeError> {
    ctx.vertical()
        .map(|v| ctx.lift(v))
        .ok_or_else(|| LatticeError::MissingStructure("no vertical subspace (order is not even)".into()))
}

/// `d*α_𝔭 + [α_𝔨∧*α_𝔭]` with `𝔭 = 𝔤_k` (even order `k' = 2k`).
pub fn vertical_harmonic_residual(
    alpha: &AlgebraForm1<f64>,
    ctx: &SplitContext,
) -> Result<LieField<f64>, LatticeError> {
    let pp = vertical_projector(ctx)?;
    let ap = alpha.apply(&pp);
    let ak = alpha.apply(ctx.p_k());
    Ok(ap.d_star().add(&ctx.bracket().wedge(&ak, &ap.hodge())))
}

/// `dα_𝔭 + [α_𝔨∧α_𝔭]`, the flatness companion of vertical harmonicity.
pub fn torsion_free_residual(alpha: &AlgebraForm1<f64>, ctx: &SplitContext) -> Result<LieField<f64>, LatticeError> {
    let pp = vertical_projector(ctx)?;
    let ap = alpha.apply(&pp);
    let ak = alpha.apply(ctx.p_k());
    Ok(ap.d().add(&ctx.bracket().wedge(&ak, &ap)))
}

fn n_real_field(ctx: &SplitContext, f: &LieField<f64>) -> LieField<f64> {
    f.apply(ctx.to_n())
}

/// Applies `X ↦ Λ(x)y` pointwise on `𝔫` coordinates.
fn lambda_pairs(conn: &OriginConnection, x: &LieField<f64>, y: &LieField<f64>) -> LieField<f64> {
    x.zip(y, x.dim(), |a, b| conn.lambda().eval(a, b))
}

/// Applies `[k, X]` pointwise with `k` in `𝔨` coordinates and `X` in `𝔫` coordinates.
fn isotropy_pairs(split: &ReductiveSplit, k: &LieField<f64>, x: &LieField<f64>) -> LieField<f64> {
    k.zip(x, split.dim_n(), |kk, xx| split.ad_k_of(kk) * xx)
}

/// The two holomorphic harmonicity equations of the canonical almost complex
/// structure `J` (`T^{1,0} = ⊕ 𝔤_{−j}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HolVariant {
    /// `t = 1`: the `T^{1,0}` part of `2(∂̄α_𝔫′ + [α₀″∧α_𝔫′] + [α_𝔫″∧α_𝔫′]_𝔫)`,
    /// i.e. `T_b + Jτ_b` for `∇¹`.
    One,
    /// `t = 0`: the `T^{0,1}` part of `2(∂̄α_𝔫′ + [α₀″∧α_𝔫′])`,
    /// i.e. `T_b − Jτ_b` for `∇⁰`.
    Zero,
}

impl HolVariant {
    /// The connection parameter `t`.
    pub fn t(self) -> f64 {
        match self {
            HolVariant::One => 1.0,
            HolVariant::Zero => 0.0,
        }
    }
}

/// Holomorphic harmonicity residual in two formulations.
#[derive(Debug, Clone)]
pub struct HolHarmonicReport {
    pub variant: HolVariant,
    /// Coefficient form built from complex grade projectors and the Wirtinger split.
    pub s_form: LieField<C64>,
    /// Invariant form `½(W ∓ iJW)` with `W = d^{∇^t}α_𝔫 ± Jτ^t`.
    pub invariant_form: LieField<C64>,
    /// The real field `W` of the invariant form.
    pub real_form: LieField<f64>,
    /// Same with `d^{∇^t}α_𝔫` replaced by the torsion pullback `T^t(a, b)`.
    pub torsion_form: LieField<C64>,
    /// `max |s_form − invariant_form|`.
    pub agreement: f64,
    /// `max |invariant_form − torsion_form|`; bounded by the Maurer-Cartan residual.
    pub torsion_defect: f64,
}

/// Residual of holomorphic harmonicity with respect to `∇^t`, `t ∈ {0, 1}`.
///
/// Requires a split whose canonical structure is an almost complex
/// structure on `𝔫` (odd order).
pub fn hol_harmonic_residual(
    alpha: &AlgebraForm1<f64>,
    ctx: &SplitContext,
    variant: HolVariant,
) -> Result<HolHarmonicReport, LatticeError> {
    let f = ctx.require_f()?.clone();
    let n = ctx.split().dim_n();
    let complex = linalg::max_abs(&(&f * &f + DMatrix::identity(n, n)));
    if complex > 1e-9 {
        return Err(LatticeError::NotComplex { residual: complex });
    }
    let t = variant.t();
    let br = ctx.bracket();
    let dec = ctx.split().grading().expect("graded split");
    let g = ctx.split().algebra().dim();

    // Coefficient form.
    let ac = alpha.to_complex();
    let an = ac.apply(ctx.p_n());
    let a0 = ac.apply(ctx.p_k());
    let an1 = AlgebraForm1::from_dz(&an.dz_part());
    let an2 = AlgebraForm1::from_dzbar(&an.dzbar_part());
    let a02 = AlgebraForm1::from_dzbar(&a0.dzbar_part());
    let mut q = an1.d().add(&br.wedge(&a02, &an1));
    if t != 0.0 {
        q = q.add(&br.wedge(&an2, &an1).apply(ctx.p_n()).scale(C64::new(t, 0.0)));
    }
    let mut proj = DMatrix::from_element(g, g, C64::new(0.0, 0.0));
    for j in 1..=dec.num_m() as i64 {
        proj += ctx.grade(match variant {
            HolVariant::One => -j,
            HolVariant::Zero => j,
        })?;
    }
    let s_form = q.apply_c(&proj).scale(C64::new(2.0, 0.0));

    // Invariant form in 𝔫 coordinates.
    let conn = connection_family(ctx.split(), t);
    let a_n = n_real_field(ctx, alpha.x());
    let b_n = n_real_field(ctx, alpha.y());
    let a_k = alpha.x().apply(&ctx.split().k_projection());
    let b_k = alpha.y().apply(&ctx.split().k_projection());
    let alpha_n = AlgebraForm1::new(a_n.clone(), b_n.clone())?;
    let split = ctx.split();
    let d_conn = alpha_n
        .d()
        .add(&isotropy_pairs(split, &a_k, &b_n))
        .sub(&isotropy_pairs(split, &b_k, &a_n))
        .add(&lambda_pairs(&conn, &a_n, &b_n))
        .sub(&lambda_pairs(&conn, &b_n, &a_n));
    let tension = alpha_n
        .d_star()
        .add(&isotropy_pairs(split, &a_k, &a_n))
        .add(&isotropy_pairs(split, &b_k, &b_n))
        .add(&lambda_pairs(&conn, &a_n, &a_n))
        .add(&lambda_pairs(&conn, &b_n, &b_n));
    let jt = match variant {
        HolVariant::One => f.clone(),
        HolVariant::Zero => -f.clone(),
    };
    let torsion = conn.torsion(split);
    let t_pull = a_n.zip(&b_n, n, |x, y| torsion.eval(x, y));
    let combine = |x: &LieField<f64>| -> (LieField<f64>, LieField<C64>) {
        let w = x.add(&tension.apply(&jt));
        let jw = w.apply(&jt).to_complex();
        let half = w
            .to_complex()
            .sub(&jw.scale(C64::new(0.0, 1.0)))
            .scale(C64::new(0.5, 0.0));
        (w, half)
    };
    let (w, inv_n) = combine(&d_conn);
    let (_, tor_n) = combine(&t_pull);
    let invariant_form = inv_n.apply(ctx.from_n());
    let torsion_form = tor_n.apply(ctx.from_n());
    let real_form = w.apply(ctx.from_n());
    Ok(HolHarmonicReport {
        variant,
        agreement: s_form.max_diff(&invariant_form),
        torsion_defect: invariant_form.max_diff(&torsion_form),
        s_form,
        invariant_form,
        real_form,
        torsion_form,
    })
}

/// Which action of the structure on the torsion enters the stringy equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StringyVariant {
    /// Stringy harmonicity `−τ + (F^⋆·T⁰)(f) = 0` for `F^⋆ = ⊕ (−1)^j F_{[𝔪_j]}`.
    Dot,
    /// `⋆`-stringy harmonicity `−τ + (F⋆T⁰)(f) = 0` for the canonical `F`.
    Star,
}

/// Parity of the order `k'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Stringy harmonicity residual in three formulations.
#[derive(Debug, Clone)]
pub struct StringyReport {
    pub variant: StringyVariant,
    pub parity: Parity,
    /// The maximal determined system written on `α`.
    pub system_form: LieField<f64>,
    /// The Maurer-Cartan form of the stringy equation for the variant's structure.
    pub mc_form: LieField<f64>,
    /// `τ⁰ − (F_v ∘ T⁰)♯(a, b)` from the invariant torsion tensor.
    pub tensor_form: LieField<f64>,
    /// `max |mc_form − tensor_form|`.
    pub mc_tensor_gap: f64,
    /// `max |system_form − tensor_form|`.
    pub system_tensor_gap: f64,
}

/// `F^⋆ = ⊕_j (−1)^j F_{[𝔪_j]} ⊕ 0`.
pub fn alternating_structure(ctx: &SplitContext) -> Result<DMatrix<f64>, LatticeError> {
    let f = ctx.require_f()?;
    let mut out = DMatrix::zeros(f.nrows(), f.ncols());
    for (j, p) in ctx.blocks().iter().enumerate() {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        out += f * p * sign;
    }
    Ok(out)
}

/// Residual of the stringy (`Dot`) or `⋆`-stringy (`Star`) harmonic map
/// equation for the canonical connection `∇⁰`.
pub fn stringy_residual(
    alpha: &AlgebraForm1<f64>,
    ctx: &SplitContext,
    metric: &InvariantMetric,
    variant: StringyVariant,
) -> Result<StringyReport, LatticeError> {
    let f = ctx.require_f()?.clone();
    let parity = if ctx.vertical().is_some() {
        Parity::Even
    } else {
        Parity::Odd
    };
    let br = ctx.bracket();
    let split = ctx.split();
    let dn = split.dim_n();
    let p_m: DMatrix<f64> = ctx.blocks().iter().fold(DMatrix::zeros(dn, dn), |acc, p| acc + p);
    let p_v = ctx.vertical().cloned().unwrap_or_else(|| DMatrix::zeros(dn, dn));
    let lift = |m: &DMatrix<f64>| ctx.lift(m);

    let a0 = alpha.apply(ctx.p_k());
    let am = alpha.apply(&lift(&p_m));
    let ap = alpha.apply(&lift(&p_v));
    let an = alpha.apply(ctx.p_n());
    let fg = lift(&f);
    let fam = am.apply(&fg);
    let tau0 = an.d_star().add(&br.wedge(&a0, &an.hodge()));

    // Maximal determined system.
    let mut system = tau0.clone();
    let half_f = br.wedge(&fam, &am).scale(0.5);
    system = system.add(&half_f.apply(&lift(&p_m)));
    let blocks: Vec<DMatrix<f64>> = ctx.blocks().iter().map(lift).collect();
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            let ai = alpha.apply(&blocks[i]).apply(&fg);
            let aj = alpha.apply(&blocks[j]);
            system = system.add(&br.wedge(&ai, &aj).apply(&blocks[j - i - 1]));
        }
    }
    if parity == Parity::Even {
        system = system
            .add(&br.wedge(&ap, &fam).apply(&lift(&p_m)))
            .add(&half_f.apply(&lift(&p_v)));
    }

    // Stringy equation for the variant's structure.
    let fv = match variant {
        StringyVariant::Star => f.clone(),
        StringyVariant::Dot => alternating_structure(ctx)?,
    };
    let jg = lift(&fv);
    let jam = am.apply(&jg);
    let to_m = lift(&p_m);
    let mut mc = tau0.clone();
    mc = mc.add(&br.wedge(&jam, &am).apply(&lift(&p_v)).scale(0.5));
    let jj = br.wedge(&jam, &jam).apply(&to_m);
    match variant {
        StringyVariant::Dot => {
            mc = mc.sub(&jj.apply(&jg).scale(0.5));
        }
        StringyVariant::Star => {
            let mm = br.wedge(&am, &am).apply(&to_m);
            mc = mc
                .add(&br.wedge(&jam, &am).apply(&to_m).scale(0.5))
                .add(&jj.add(&mm).apply(&jg).scale(0.25));
        }
    }
    if parity == Parity::Even {
        let coupling = br
            .wedge(&ap, &jam)
            .sub(&br.wedge(&ap, &am).apply(&jg))
            .apply(&to_m)
            .scale(0.5);
        mc = mc.add(&coupling);
    }

    // Tensor form.
    let t0 = OriginConnection::canonical(split).torsion(split);
    let action = match variant {
        StringyVariant::Star => JAction::Star,
        StringyVariant::Dot => JAction::Bullet,
    };
    let b_tensor = j_action(&t0.lower(metric.gram()), &fv, action).raise(metric.gram());
    let a_n = alpha.x().apply(ctx.to_n());
    let b_n = alpha.y().apply(ctx.to_n());
    let pulled = a_n.zip(&b_n, dn, |x, y| b_tensor.eval(x, y)).apply(ctx.from_n());
    let tensor = tau0.sub(&pulled);

    Ok(StringyReport {
        variant,
        parity,
        mc_tensor_gap: mc.max_diff(&tensor),
        system_tensor_gap: system.max_diff(&tensor),
        system_form: system,
        mc_form: mc,
        tensor_form: tensor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodecomp::grade;
    use crate::fixtures::{self, Fixture};
    use crate::lattice::field::GroupField;
    use crate::lattice::grid::{Boundary, LatticeGrid};
    use crate::lattice::tests_support::smooth_group_field;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};

    fn setup(f: &Fixture) -> (SplitContext, InvariantMetric) {
        let s = ReductiveSplit::from_decomposition(&f.algebra, &grade(&f.algebra, &f.tau)).unwrap();
        let m = InvariantMetric::from_inner(&s, &f.inner, 1e-9).unwrap();
        (SplitContext::new(&s), m)
    }

    fn grid() -> LatticeGrid {
        LatticeGrid::new(7, 6, 0.15, Boundary::Periodic).unwrap()
    }

    fn random_form(seed: u64, dim: usize) -> AlgebraForm1<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let mut sample = |_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let a = LieField::from_fn(g, dim, &mut sample);
        let b = LieField::from_fn(g, dim, &mut sample);
        AlgebraForm1::new(a, b).unwrap()
    }

    #[test]
    fn commuting_constant_form_is_flat() {
        let f = fixtures::su3_order3();
        let br = SparseBracket::new(&f.algebra);
        let mut xi = DVector::zeros(8);
        xi[0] = 0.7;
        let mut eta = DVector::zeros(8);
        eta[1] = -1.1;
        let alpha = AlgebraForm1::constant(grid(), &xi, &eta);
        assert_eq!(mc_residual(&alpha, &br).max_abs(), 0.0);
    }

    #[test]
    fn random_form_is_not_flat() {
        let f = fixtures::su3_order3();
        let br = SparseBracket::new(&f.algebra);
        assert!(mc_residual(&random_form(1, 8), &br).max_abs() > 1e-3);
    }

    #[test]
    fn pullback_of_group_field_is_second_order_flat() {
        let f = fixtures::su3_order4();
        let br = SparseBracket::new(&f.algebra);
        let mut res = Vec::new();
        for cells in [8, 16, 32] {
            let g = LatticeGrid::unit_square(cells).unwrap();
            let alpha = smooth_group_field(&f, g).maurer_cartan(&f.realization);
            res.push(mc_residual(&alpha, &br).max_abs());
        }
        for w in res.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 3.2 && r < 4.8, "ratio {r}");
        }
    }

    #[test]
    fn geodesic_is_harmonic_and_t_term_vanishes() {
        for f in [
            fixtures::su2_involution(),
            fixtures::su3_order3(),
            fixtures::su3_order5(),
        ] {
            let (ctx, _) = setup(&f);
            let xi = ctx.from_n() * DVector::from_fn(ctx.split().dim_n(), |i, _| 0.3 + 0.1 * i as f64);
            let alpha = AlgebraForm1::constant(grid(), &xi, &DVector::zeros(xi.len()));
            assert!(harmonic_residual(&alpha, &ctx, 0.0).max_abs() < 1e-14);
            let r = random_form(2, f.algebra.dim());
            assert!(harmonic_t_term(&r, &ctx).max_abs() < 1e-13);
            let d = harmonic_residual(&r, &ctx, 0.0).max_diff(&harmonic_residual(&r, &ctx, 1.0));
            assert!(d < 1e-13);
        }
    }

    #[test]
    fn vertical_residual_needs_even_order() {
        let (ctx, _) = setup(&fixtures::su3_order3());
        let r = random_form(3, 8);
        assert!(matches!(
            vertical_harmonic_residual(&r, &ctx),
            Err(LatticeError::MissingStructure(_))
        ));
        let (ctx4, _) = setup(&fixtures::su3_order4());
        let horizontal = r.apply(&ctx4.lift(&ctx4.blocks()[0]));
        assert_eq!(vertical_harmonic_residual(&horizontal, &ctx4).unwrap().max_abs(), 0.0);
        assert_eq!(torsion_free_residual(&horizontal, &ctx4).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn holomorphic_forms_agree_on_random_fields() {
        for f in [fixtures::su3_order3(), fixtures::su3_order5()] {
            let (ctx, _) = setup(&f);
            let br = SparseBracket::new(&f.algebra);
            for seed in 0..5 {
                let r = random_form(10 + seed, 8);
                let mc_n = mc_residual(&r, &br).apply(ctx.p_n()).max_abs();
                for v in [HolVariant::One, HolVariant::Zero] {
                    let rep = hol_harmonic_residual(&r, &ctx, v).unwrap();
                    assert!(rep.agreement < 1e-12, "{} {:?}: {}", f.name, v, rep.agreement);
                    assert!(rep.s_form.max_abs() > 1e-3);
                    assert!(rep.torsion_defect <= mc_n + 1e-12);
                }
            }
        }
    }

    #[test]
    fn hol_residual_rejects_f_structures() {
        let (ctx, _) = setup(&fixtures::su3_order4());
        assert!(matches!(
            hol_harmonic_residual(&random_form(4, 8), &ctx, HolVariant::One),
            Err(LatticeError::NotComplex { .. })
        ));
    }

    /// Lift `[[1, −z], [z̄, 1]]/√(1+|z|²)` of a curve in the `(0,1)` root
    /// sphere of the flag manifold, tangent to `𝔤_{−1}` (anti-holomorphic in `z`).
    fn sphere_curve(g: LatticeGrid) -> GroupField {
        let mats = (0..g.len())
            .map(|p| {
                let (x, y) = g.point(p);
                let z = C64::new(0.3 + x, 0.2 + y);
                let r = (1.0 + z.norm_sqr()).sqrt();
                let mut u = DMatrix::from_element(3, 3, C64::new(0.0, 0.0));
                u[(0, 0)] = C64::new(1.0 / r, 0.0);
                u[(0, 1)] = -z / r;
                u[(1, 0)] = z.conj() / r;
                u[(1, 1)] = C64::new(1.0 / r, 0.0);
                u[(2, 2)] = C64::new(1.0, 0.0);
                u
            })
            .collect();
        GroupField::new(g, mats).unwrap()
    }

    #[test]
    fn holomorphic_curve_is_antiholomorphically_harmonic() {
        // Composite stencils lose an order on the first ring of points, so
        // the convergence is measured two points away from the edges.
        let f = fixtures::su3_order3();
        let (ctx, _) = setup(&f);
        let mut res = Vec::new();
        for cells in [8, 16, 32] {
            let g = LatticeGrid::unit_square(cells).unwrap();
            let u = sphere_curve(g);
            assert!(u.membership_residual() < 1e-14);
            let alpha = u.maurer_cartan(&f.realization);
            let zero = hol_harmonic_residual(&alpha, &ctx, HolVariant::Zero).unwrap();
            res.push(zero.s_form.max_abs_inset(2));
            let generic = smooth_group_field(&f, g).maurer_cartan(&f.realization);
            let other = hol_harmonic_residual(&generic, &ctx, HolVariant::Zero).unwrap();
            assert!(other.s_form.max_abs_inset(2) > 0.05);
        }
        for w in res.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 3.0 && r < 5.2, "ratio {r}");
        }
    }

    fn tension0(alpha: &AlgebraForm1<f64>, ctx: &SplitContext) -> LieField<f64> {
        let an = alpha.apply(ctx.p_n());
        an.d_star()
            .add(&ctx.bracket().wedge(&alpha.apply(ctx.p_k()), &an.hodge()))
    }

    #[test]
    fn stringy_forms_agree_on_odd_fixtures() {
        for f in [fixtures::su3_order3(), fixtures::su3_order5()] {
            let (ctx, metric) = setup(&f);
            for seed in 0..3 {
                let r = random_form(20 + seed, 8);
                for v in [StringyVariant::Star, StringyVariant::Dot] {
                    let rep = stringy_residual(&r, &ctx, &metric, v).unwrap();
                    assert_eq!(rep.parity, Parity::Odd);
                    assert!(
                        rep.mc_tensor_gap < 1e-12,
                        "{} {:?} mc/tensor {}",
                        f.name,
                        v,
                        rep.mc_tensor_gap
                    );
                    assert!(
                        rep.system_tensor_gap < 1e-12,
                        "{} {:?} system/tensor {}",
                        f.name,
                        v,
                        rep.system_tensor_gap
                    );
                }
            }
        }
    }

    #[test]
    fn even_star_tensor_doubles_the_structure_terms() {
        // On su3_order4 every torsion term is of type (𝔪, 𝔪, 𝔭), where
        // F⋆T⁰ = F↻T⁰ carries twice the coefficient of the MC-level terms.
        let f = fixtures::su3_order4();
        let (ctx, metric) = setup(&f);
        let r = random_form(23, 8);
        let tau0 = tension0(&r, &ctx);
        let rep = stringy_residual(&r, &ctx, &metric, StringyVariant::Star).unwrap();
        assert_eq!(rep.parity, Parity::Even);
        assert!(rep.system_form.max_diff(&rep.mc_form) < 1e-12);
        let mc_terms = rep.mc_form.sub(&tau0);
        let tensor_terms = rep.tensor_form.sub(&tau0);
        assert!(mc_terms.max_abs() > 0.1);
        assert!(tensor_terms.max_diff(&mc_terms.scale(2.0)) < 1e-12);
        assert!(rep.mc_tensor_gap > 0.1);
    }

    #[test]
    fn even_dot_form_flips_the_structure_terms() {
        let f = fixtures::su3_order4();
        let (ctx, metric) = setup(&f);
        let r = random_form(24, 8);
        let tau0 = tension0(&r, &ctx);
        let rep = stringy_residual(&r, &ctx, &metric, StringyVariant::Dot).unwrap();
        let sys_terms = rep.system_form.sub(&tau0);
        let mc_terms = rep.mc_form.sub(&tau0);
        assert!(sys_terms.add(&mc_terms).max_abs() < 1e-12);
    }

    #[test]
    fn stringy_vanishes_without_horizontal_part() {
        let f = fixtures::su3_order4();
        let (ctx, metric) = setup(&f);
        let only_k = random_form(5, 8).apply(ctx.p_k());
        let rep = stringy_residual(&only_k, &ctx, &metric, StringyVariant::Star).unwrap();
        assert_eq!(rep.system_form.max_abs(), 0.0);
    }

    #[test]
    fn stringy_equals_holomorphic_on_three_symmetric_up_to_flatness() {
        // E = −J W + J [MC]_𝔪, so the two agree exactly on flat forms.
        let f = fixtures::su3_order3();
        let (ctx, metric) = setup(&f);
        let r = random_form(6, 8);
        let s = stringy_residual(&r, &ctx, &metric, StringyVariant::Star).unwrap();
        let hol = hol_harmonic_residual(&r, &ctx, HolVariant::One).unwrap();
        let j = ctx.lift(ctx.f().unwrap());
        let jw = hol.real_form.apply(&j);
        let jmc = mc_residual(&r, ctx.bracket()).apply(ctx.p_n()).apply(&j);
        assert!(s.system_form.max_diff(&jmc.sub(&jw)) < 1e-12);
        assert!(s.system_form.max_diff(&jw.scale(-1.0)) > 0.1);
    }
}

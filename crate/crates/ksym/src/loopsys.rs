//! Twisted loop algebra data and the coefficient equations of the m-th system.
//!
//! An element of `Λ_m𝔤_τ` is a Laurent band `η_λ = Σ_{|p|≤m} λ^p η̂_p` with
//! `η̂_p ∈ 𝔤_p^ℂ` (twist) and `η̂_{−p} = conj(η̂_p)` (reality). The system of
//! order `m` is written in the unknowns `u_j = w_j dz`, `0 ≤ j ≤ m`, which
//! assemble to `α_λ = Σ λ^{−j}u_j + λ^j ū_j` (minus convention, `u_j ∈ 𝔤_{−j}`)
//! or `α_λ = Σ λ^j u_j + λ^{−j} ū_j` (plus convention, `u_j ∈ 𝔤_j`).
//!
//! Lattice 1-forms are stored by their `dx` and `dy` samples. With
//! `∂_z̄ = ½(∂_x + i∂_y)`, the `dx∧dy` coefficients of the equations are
//!
//! * `S_j = 2i(∂_z̄ w_j + Σ_{i=0}^{m−j} [w̄_i, w_{i+j}])` for `1 ≤ j ≤ m`,
//! * `S_0 = 2i(∂_z̄ w_0 − ∂_z w̄_0 − Σ_{j=0}^{m} [w_j, w̄_j])`,
//!
//! and the Laurent coefficient of `dα_λ + ½[α_λ∧α_λ]` at `λ^{∓j}` equals `S_j`.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodecomp::{
    self, grade, lift_depth, root_of_unity, DecompError, FiniteOrderAutomorphism, GradedDecomposition,
};
use crate::fixtures::MatrixRealization;
use crate::lattice::{
    mc_residual, vertical_harmonic_residual, AlgebraForm1, Axis, FieldFile, GroupField, LatticeError, LatticeGrid,
    LieField, SparseBracket, SplitContext,
};
use crate::liealg::LieAlgebra;
use crate::linalg::C64;

/// Failures of the loop-algebra routines.
#[derive(Debug, thiserror::Error)]
pub enum LoopError {
    #[error("u_{j} leaves its graded piece: residual {residual:.3e}")]
    Grading { j: usize, residual: f64 },
    #[error("inconsistent Laurent band: {0}")]
    Band(String),
    #[error("cannot embed the order-{from} system into order {to}")]
    EmbedDown { from: usize, to: usize },
    #[error("gauge field does not commute with τ: residual {residual:.3e}")]
    Gauge { residual: f64 },
    #[error("α determines u only for m < k' (m = {m}, k' = {kprime})")]
    NotDetermined { m: usize, kprime: usize },
    #[error("α' has components outside the band: residual {residual:.3e}")]
    OutsideBand { residual: f64 },
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("system file: {0}")]
    File(String),
}

/// Sign convention for the spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `u_j ∈ 𝔤_{−j}` multiplies `λ^{−j}`.
    #[default]
    Minus,
    /// `u_j ∈ 𝔤_j` multiplies `λ^j`; the minus system of `τ⁻¹`.
    Plus,
}

impl Convention {
    /// Laurent degree (and grade) carried by `u_j`.
    pub fn degree(self, j: usize) -> i64 {
        match self {
            Convention::Minus => -(j as i64),
            Convention::Plus => j as i64,
        }
    }
}

/// Algebra, automorphism and the derived data shared by loop computations.
#[derive(Debug, Clone)]
pub struct LoopContext {
    algebra: LieAlgebra,
    tau: FiniteOrderAutomorphism,
    grading: GradedDecomposition,
    bracket: SparseBracket,
}

impl LoopContext {
    pub fn new(algebra: &LieAlgebra, tau: &FiniteOrderAutomorphism) -> Self {
        LoopContext {
            algebra: algebra.clone(),
            tau: tau.clone(),
            grading: grade(algebra, tau),
            bracket: SparseBracket::new(algebra),
        }
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn tau(&self) -> &FiniteOrderAutomorphism {
        &self.tau
    }

    pub fn grading(&self) -> &GradedDecomposition {
        &self.grading
    }

    pub fn bracket(&self) -> &SparseBracket {
        &self.bracket
    }

    pub fn kprime(&self) -> usize {
        self.grading.kprime()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// `max |(Id − P_p) v|` over the coordinates of `v`.
    fn off_grade(&self, p: i64, v: &DVector<C64>) -> f64 {
        let pv = self.grading.projector(p) * v;
        (v - pv).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn off_grade_field(&self, p: i64, f: &LieField<C64>) -> f64 {
        f.values().iter().map(|v| self.off_grade(p, v)).fold(0.0, f64::max)
    }
}

/// A single element of `Λ_m𝔤_τ^ℂ`, coefficients stored for `p = −m..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopBandElement {
    m: usize,
    coeffs: Vec<DVector<C64>>,
}

impl LoopBandElement {
    pub fn new(m: usize, coeffs: Vec<DVector<C64>>) -> Result<Self, LoopError> {
        if coeffs.len() != 2 * m + 1 {
            return Err(LoopError::Band(format!("{} coefficients for band {m}", coeffs.len())));
        }
        let n = coeffs[0].len();
        if coeffs.iter().any(|c| c.len() != n) {
            return Err(LoopError::Band("coefficients of different dimensions".into()));
        }
        Ok(LoopBandElement { m, coeffs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Coefficient `η̂_p`, zero outside the band.
    pub fn coeff(&self, p: i64) -> DVector<C64> {
        if p.unsigned_abs() as usize > self.m {
            DVector::zeros(self.coeffs[0].len())
        } else {
            self.coeffs[(p + self.m as i64) as usize].clone()
        }
    }

    /// `max_p |(Id − P_p) η̂_p|`.
    pub fn twist_residual(&self, ctx: &LoopContext) -> f64 {
        (0..self.coeffs.len())
            .map(|i| ctx.off_grade(i as i64 - self.m as i64, &self.coeffs[i]))
            .fold(0.0, f64::max)
    }

    /// `max_p |η̂_{−p} − conj(η̂_p)|`.
    pub fn reality_residual(&self) -> f64 {
        let n = self.coeffs.len();
        (0..n)
            .flat_map(|i| {
                let a = &self.coeffs[i];
                let b = &self.coeffs[n - 1 - i];
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y.conj()).norm())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// `η_λ = Σ λ^p η̂_p`.
    pub fn evaluate(&self, lambda: C64) -> DVector<C64> {
        let mut out = DVector::zeros(self.coeffs[0].len());
        for (i, c) in self.coeffs.iter().enumerate() {
            out += c * lambda.powi(i as i32 - self.m as i32);
        }
        out
    }
}

/// A lattice 1-form with values in `Λ_m𝔤^ℂ`: the `dx` coefficients `a_p` and
/// the `dy` coefficients `b_p` for `p = −m..m`.
#[derive(Debug, Clone)]
pub struct LoopForm1 {
    m: usize,
    a: Vec<LieField<C64>>,
    b: Vec<LieField<C64>>,
}

impl LoopForm1 {
    pub fn new(m: usize, a: Vec<LieField<C64>>, b: Vec<LieField<C64>>) -> Result<Self, LoopError> {
        if a.len() != 2 * m + 1 || b.len() != 2 * m + 1 {
            return Err(LoopError::Band(format!(
                "{} dx and {} dy coefficients for band {m}",
                a.len(),
                b.len()
            )));
        }
        let (g, n) = (*a[0].grid(), a[0].dim());
        if a.iter().chain(b.iter()).any(|f| *f.grid() != g || f.dim() != n) {
            return Err(LoopError::Band("coefficients on different grids or dimensions".into()));
        }
        Ok(LoopForm1 { m, a, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &LatticeGrid {
        self.a[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.a[0].dim()
    }

    fn index(&self, p: i64) -> Option<usize> {
        (p.unsigned_abs() as usize <= self.m).then(|| (p + self.m as i64) as usize)
    }

    /// `dx` coefficient at degree `p`.
    pub fn x(&self, p: i64) -> Option<&LieField<C64>> {
        self.index(p).map(|i| &self.a[i])
    }

    /// `dy` coefficient at degree `p`.
    pub fn y(&self, p: i64) -> Option<&LieField<C64>> {
        self.index(p).map(|i| &self.b[i])
    }

    /// The `dx` band at one lattice point.
    pub fn band_x(&self, point: usize) -> LoopBandElement {
        LoopBandElement {
            m: self.m,
            coeffs: self.a.iter().map(|f| f.at(point).clone()).collect(),
        }
    }

    /// The `dy` band at one lattice point.
    pub fn band_y(&self, point: usize) -> LoopBandElement {
        LoopBandElement {
            m: self.m,
            coeffs: self.b.iter().map(|f| f.at(point).clone()).collect(),
        }
    }

    /// Largest twist residual over both directions and all points.
    pub fn twist_residual(&self, ctx: &LoopContext) -> f64 {
        (0..2 * self.m + 1)
            .map(|i| {
                let p = i as i64 - self.m as i64;
                ctx.off_grade_field(p, &self.a[i])
                    .max(ctx.off_grade_field(p, &self.b[i]))
            })
            .fold(0.0, f64::max)
    }

    /// Largest reality residual over both directions and all points.
    pub fn reality_residual(&self) -> f64 {
        let n = 2 * self.m + 1;
        (0..n)
            .map(|i| {
                self.a[i]
                    .max_diff(&self.a[n - 1 - i].conj())
                    .max(self.b[i].max_diff(&self.b[n - 1 - i].conj()))
            })
            .fold(0.0, f64::max)
    }

    /// `α_λ` as a complex 1-form.
    pub fn at_lambda(&self, lambda: C64) -> AlgebraForm1<C64> {
        let g = *self.grid();
        let n = self.dim();
        let mut x = LieField::zeros(g, n);
        let mut y = LieField::zeros(g, n);
        for i in 0..2 * self.m + 1 {
            let w = lambda.powi(i as i32 - self.m as i32);
            x = x.add(&self.a[i].scale(w));
            y = y.add(&self.b[i].scale(w));
        }
        AlgebraForm1::new(x, y).expect("coefficients share a grid")
    }

    /// The real form `α = α_1`.
    pub fn at_one(&self) -> Result<AlgebraForm1<f64>, LoopError> {
        let c = self.at_lambda(C64::new(1.0, 0.0));
        let r = c.imaginary_residual();
        if r > 1e-12 * (1.0 + c.max_abs()) {
            return Err(LatticeError::NotReal { residual: r }.into());
        }
        Ok(c.re())
    }

    /// Largest coefficient over all degrees.
    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .map(|f| f.max_abs())
            .fold(0.0, f64::max)
    }
}

/// The unknowns `(w_0, …, w_m)` of the order-`m` system, `u_j = w_j dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemData {
    convention: Convention,
    w: Vec<LieField<C64>>,
}

impl SystemData {
    /// Validates the grading `(Id − P_{∓j}) w_j = 0` to within `tol`.
    pub fn new(w: Vec<LieField<C64>>, convention: Convention, ctx: &LoopContext, tol: f64) -> Result<Self, LoopError> {
        let first = w
            .first()
            .ok_or_else(|| LoopError::Band("at least u_0 is required".into()))?;
        let (g, n) = (*first.grid(), first.dim());
        if n != ctx.dim() || w.iter().any(|f| *f.grid() != g || f.dim() != n) {
            return Err(LoopError::Band(
                "unknowns on different grids or of the wrong dimension".into(),
            ));
        }
        for (j, f) in w.iter().enumerate() {
            let r = ctx.off_grade_field(convention.degree(j), f);
            if r > tol {
                return Err(LoopError::Grading { j, residual: r });
            }
        }
        Ok(SystemData { convention, w })
    }

    /// Zero unknowns of order `m`.
    pub fn zeros(grid: LatticeGrid, dim: usize, m: usize, convention: Convention) -> Self {
        SystemData {
            convention,
            w: vec![LieField::zeros(grid, dim); m + 1],
        }
    }

    /// Smooth pseudo-random unknowns: a few random plane waves per component,
    /// projected onto the graded pieces.
    pub fn random(ctx: &LoopContext, grid: LatticeGrid, m: usize, convention: Convention, rng: &mut impl Rng) -> Self {
        let n = ctx.dim();
        let w = (0..=m)
            .map(|j| {
                let waves: Vec<[f64; 6]> = (0..3 * n)
                    .map(|_| {
                        [
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-2.0..2.0),
                            rng.random_range(-2.0..2.0),
                            rng.random_range(0.0..std::f64::consts::TAU),
                            rng.random_range(0.0..std::f64::consts::TAU),
                        ]
                    })
                    .collect();
                let raw = LieField::<C64>::from_fn(grid, n, |p| {
                    let (x, y) = grid.point(p);
                    DVector::from_fn(n, |c, _| {
                        waves[3 * c..3 * c + 3]
                            .iter()
                            .map(|[re, im, kx, ky, p1, p2]| {
                                C64::new(re * (kx * x + ky * y + p1).cos(), im * (ky * x - kx * y + p2).sin())
                            })
                            .sum()
                    })
                });
                raw.apply_c(ctx.grading().projector(convention.degree(j)))
            })
            .collect();
        SystemData { convention, w }
    }

    /// Recovers `u_j = [α']_{∓j}` from a real form with `α'` in the band.
    ///
    /// Defined for `m < k'`, where the graded pieces `𝔤_{∓j}` are distinct;
    /// `tol` bounds the part of `α'` outside `⊕_j 𝔤_{∓j}`.
    pub fn from_form(
        alpha: &AlgebraForm1<f64>,
        m: usize,
        convention: Convention,
        ctx: &LoopContext,
        tol: f64,
    ) -> Result<Self, LoopError> {
        let k = ctx.kprime();
        if m >= k {
            return Err(LoopError::NotDetermined { m, kprime: k });
        }
        let dz = alpha.to_complex().dz_part();
        let w: Vec<LieField<C64>> = (0..=m)
            .map(|j| dz.apply_c(ctx.grading().projector(convention.degree(j))))
            .collect();
        let mut rest = dz.clone();
        for f in &w {
            rest = rest.sub(f);
        }
        let r = rest.max_abs();
        if r > tol {
            return Err(LoopError::OutsideBand { residual: r });
        }
        Ok(SystemData { convention, w })
    }

    pub fn m(&self) -> usize {
        self.w.len() - 1
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn grid(&self) -> &LatticeGrid {
        self.w[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.w[0].dim()
    }

    /// The `dz` coefficient `w_j` of `u_j`.
    pub fn w(&self, j: usize) -> &LieField<C64> {
        &self.w[j]
    }

    /// Pads with `u_j = 0` for `m < j ≤ m'`.
    pub fn embed_order(&self, m_new: usize) -> Result<SystemData, LoopError> {
        let m = self.m();
        if m_new < m {
            return Err(LoopError::EmbedDown { from: m, to: m_new });
        }
        let mut w = self.w.clone();
        w.resize(m_new + 1, LieField::zeros(*self.grid(), self.dim()));
        Ok(SystemData {
            convention: self.convention,
            w,
        })
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            m: self.m(),
            convention: self.convention,
            u: self.w.iter().map(FieldFile::from_complex).collect(),
        }
    }

    pub fn from_file(file: &SystemFile, ctx: &LoopContext, tol: f64) -> Result<Self, LoopError> {
        if file.u.len() != file.m + 1 {
            return Err(LoopError::File(format!("{} fields for order {}", file.u.len(), file.m)));
        }
        let w = file.u.iter().map(|f| f.to_complex()).collect::<Result<Vec<_>, _>>()?;
        SystemData::new(w, file.convention, ctx, tol)
    }
}

/// On-disk form of [`SystemData`]: the `dz` coefficients of `u_0..u_m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub m: usize,
    #[serde(default)]
    pub convention: Convention,
    pub u: Vec<FieldFile>,
}

/// `α_λ` from the unknowns: `w_j dz` at degree `∓j` and its conjugate at `±j`.
///
/// On `dx, dy` samples `w dz` contributes `(w, i w)` and `w̄ dz̄` contributes `(w̄, −i w̄)`.
pub fn assemble_alpha(u: &SystemData) -> LoopForm1 {
    let m = u.m();
    let (g, n) = (*u.grid(), u.dim());
    let i = C64::new(0.0, 1.0);
    let mut a = vec![LieField::zeros(g, n); 2 * m + 1];
    let mut b = vec![LieField::zeros(g, n); 2 * m + 1];
    for j in 0..=m {
        let p = u.convention.degree(j);
        let w = &u.w[j];
        let wb = w.conj();
        let lo = (p + m as i64) as usize;
        let hi = (-p + m as i64) as usize;
        a[lo] = a[lo].add(w);
        b[lo] = b[lo].add(&w.scale(i));
        a[hi] = a[hi].add(&wb);
        b[hi] = b[hi].add(&wb.scale(-i));
    }
    LoopForm1 { m, a, b }
}

/// Laurent coefficients of `dα_λ + ½[α_λ∧α_λ]` for `p = −2m..2m`, as `dx∧dy`
/// coefficients: `C_p = ∂_x b_p − ∂_y a_p + Σ_{r+s=p} [a_r, b_s]`.
pub fn curvature_coefficients(alpha: &LoopForm1, bracket: &SparseBracket) -> Vec<LieField<C64>> {
    let m = alpha.m as i64;
    let (g, n) = (*alpha.grid(), alpha.dim());
    (-2 * m..=2 * m)
        .map(|p| {
            let mut c = match (alpha.x(p), alpha.y(p)) {
                (Some(a), Some(b)) => b.derivative(Axis::X).sub(&a.derivative(Axis::Y)),
                _ => LieField::zeros(g, n),
            };
            for r in (p - m).max(-m)..=(p + m).min(m) {
                let (a, b) = (alpha.x(r).expect("in band"), alpha.y(p - r).expect("in band"));
                c = c.add(&bracket.field(a, b));
            }
            c
        })
        .collect()
}

/// The equation residuals `S_0, …, S_m` as `dx∧dy` coefficients.
pub fn system_residuals(u: &SystemData, bracket: &SparseBracket) -> Vec<LieField<C64>> {
    let m = u.m();
    let i2 = C64::new(0.0, 2.0);
    let bars: Vec<LieField<C64>> = u.w.iter().map(|w| w.conj()).collect();
    let mut out = Vec::with_capacity(m + 1);
    let mut s0 = u.w[0].d_zbar().sub(&bars[0].d_z());
    for (w, bar) in u.w.iter().zip(&bars) {
        s0 = s0.sub(&bracket.field(w, bar));
    }
    out.push(s0.scale(i2));
    for j in 1..=m {
        let mut s = u.w[j].d_zbar();
        for (bar, w) in bars.iter().zip(&u.w[j..]) {
            s = s.add(&bracket.field(bar, w));
        }
        out.push(s.scale(i2));
    }
    out
}

/// Sup-norms of the system residuals next to those of the Laurent coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct SystemResidualReport {
    pub m: usize,
    pub convention: Convention,
    /// `max |S_j|` for `j = 0..m`.
    pub system: Vec<f64>,
    /// `(p, max |C_p|)` for `p = −2m..2m`.
    pub laurent: Vec<(i64, f64)>,
    pub max_system: f64,
    pub max_laurent: f64,
    /// `max_j max |C_{∓j} − S_j|`; zero up to rounding.
    pub coefficient_gap: f64,
}

/// Evaluates both formulations of the system on the same samples.
pub fn residual_report(u: &SystemData, ctx: &LoopContext) -> SystemResidualReport {
    let s = system_residuals(u, ctx.bracket());
    let alpha = assemble_alpha(u);
    let c = curvature_coefficients(&alpha, ctx.bracket());
    let m = u.m() as i64;
    let system: Vec<f64> = s.iter().map(|f| f.max_abs()).collect();
    let laurent: Vec<(i64, f64)> = (-2 * m..=2 * m).zip(c.iter().map(|f| f.max_abs())).collect();
    let coefficient_gap = s
        .iter()
        .enumerate()
        .map(|(j, sj)| c[(u.convention.degree(j) + 2 * m) as usize].max_diff(sj))
        .fold(0.0, f64::max);
    SystemResidualReport {
        m: u.m(),
        convention: u.convention,
        max_system: system.iter().copied().fold(0.0, f64::max),
        max_laurent: laurent.iter().map(|x| x.1).fold(0.0, f64::max),
        system,
        laurent,
        coefficient_gap,
    }
}

/// Gap between the graded pieces of the Maurer-Cartan residual of `α = α_1`
/// and the regrouped system residuals.
#[derive(Debug, Clone, Serialize)]
pub struct RegroupReport {
    /// `(r, max |P_r MC(α) − Σ_{p ≡ r} C_p|)` for `r = 0..k'−1`, with `C_{∓j} = S_j`,
    /// `C_{±j} = conj(S_j)`.
    pub graded: Vec<(usize, f64)>,
    /// `max |[α'']_{−l}|` over `1 ≤ l ≤ k' − m − 1`, the holomorphicity
    /// conditions that hold by construction.
    pub horizontal: f64,
    /// For `k' = 2k` and `m = k`: `max |E_k − 2 Im S_k|` with `E_k` the
    /// vertical harmonic residual.
    pub vertical: Option<f64>,
    pub max_gap: f64,
}

/// Regroups the system residuals of `u` by `τ`-grade and compares them with
/// the Maurer-Cartan residual of the assembled real form.
///
/// `split` is required for the vertical comparison in the minimal even case.
pub fn regroup(u: &SystemData, ctx: &LoopContext, split: Option<&SplitContext>) -> Result<RegroupReport, LoopError> {
    let k = ctx.kprime() as i64;
    let m = u.m();
    let alpha = assemble_alpha(u).at_one()?;
    let mc = mc_residual(&alpha, ctx.bracket()).to_complex();
    let s = system_residuals(u, ctx.bracket());
    let (g, n) = (*u.grid(), u.dim());
    let mut graded = Vec::new();
    for r in 0..k {
        let lhs = mc.apply_c(ctx.grading().projector(r));
        let mut rhs = LieField::zeros(g, n);
        for (j, sj) in s.iter().enumerate() {
            let p = u.convention.degree(j);
            if (p - r).rem_euclid(k) == 0 {
                rhs = rhs.add(sj);
            }
            if j > 0 && (-p - r).rem_euclid(k) == 0 {
                rhs = rhs.add(&sj.conj());
            }
        }
        graded.push((r as usize, lhs.max_diff(&rhs)));
    }
    let second = alpha.to_complex().dzbar_part();
    let sign = match u.convention {
        Convention::Minus => 1,
        Convention::Plus => -1,
    };
    let horizontal = (1..(ctx.kprime().saturating_sub(m)))
        .map(|l| second.apply_c(ctx.grading().projector(-sign * l as i64)).max_abs())
        .fold(0.0, f64::max);
    let vertical = match split {
        Some(sc) if k % 2 == 0 && m == (k / 2) as usize => {
            let e = vertical_harmonic_residual(&alpha, sc)?;
            Some(e.max_diff(&s[m].im().scale(2.0)))
        }
        _ => None,
    };
    let max_gap = graded.iter().map(|x| x.1).chain(vertical).fold(horizontal, f64::max);
    Ok(RegroupReport {
        graded,
        horizontal,
        vertical,
        max_gap,
    })
}

/// `U₀·α_λ = Ad(U₀⁻¹)α_λ + U₀⁻¹dU₀`, the form of `α_λ` for the frame `U U₀`.
///
/// Each `Ad U₀` must commute with `τ` to within `tol`, which is what keeps
/// the twist invariant.
pub fn gauge_transform(
    alpha: &LoopForm1,
    u0: &GroupField,
    rep: &MatrixRealization,
    ctx: &LoopContext,
    tol: f64,
) -> Result<LoopForm1, LoopError> {
    let g = *alpha.grid();
    if *u0.grid() != g {
        return Err(LatticeError::Shape("gauge field on a different grid".into()).into());
    }
    let tau = ctx.tau().map();
    let mut ad_inv = Vec::with_capacity(g.len());
    let mut residual: f64 = 0.0;
    for p in 0..g.len() {
        let ad = rep.adjoint_of(u0.at(p));
        residual = residual.max((&ad * tau - tau * &ad).abs().max());
        ad_inv.push(rep.adjoint_of(&u0.at(p).clone().try_inverse().expect("invertible group element")));
    }
    if residual > tol {
        return Err(LoopError::Gauge { residual });
    }
    let conj = |f: &LieField<C64>| {
        LieField::from_fn(g, f.dim(), |p| {
            let v = f.at(p);
            DVector::from_fn(v.len(), |r, _| (0..v.len()).map(|c| v[c] * ad_inv[p][(r, c)]).sum())
        })
    };
    let mut a: Vec<LieField<C64>> = alpha.a.iter().map(conj).collect();
    let mut b: Vec<LieField<C64>> = alpha.b.iter().map(conj).collect();
    let mc = u0.maurer_cartan(rep);
    let mid = alpha.m;
    a[mid] = a[mid].add(&mc.x().to_complex());
    b[mid] = b[mid].add(&mc.y().to_complex());
    LoopForm1::new(alpha.m, a, b)
}

/// The lift `(α_λ, α_{ω̃λ}, …, α_{ω̃^q λ})` at the level of the unknowns:
/// block `l` of `ũ_j` is `ω̃^{l·(∓j)} u_j` with `ω̃ = e^{2πi/((q+1)k')}`.
///
/// For `q = 0` this is the identity.
pub fn lift_system(u: &SystemData, q: usize, kprime: usize) -> SystemData {
    let n = u.dim();
    let omega = root_of_unity((q + 1) * kprime);
    let w =
        u.w.iter()
            .enumerate()
            .map(|(j, f)| {
                let d = u.convention.degree(j);
                f.map(n * (q + 1), |v| {
                    DVector::from_fn(n * (q + 1), |i, _| v[i % n] * omega.powi((d * (i / n) as i64) as i32))
                })
            })
            .collect();
    SystemData {
        convention: u.convention,
        w,
    }
}

/// Underdetermined equivalence: the lifted context `(𝔤^{q+1}, τ̃)` with
/// `q = ⌊m/k'⌋` and the lifted unknowns, which solve a determined system.
pub fn underdetermined_equiv(u: &SystemData, ctx: &LoopContext) -> Result<(LoopContext, SystemData), LoopError> {
    let k = ctx.kprime();
    let m = u.m();
    let (big, tau) = autodecomp::underdetermined_lift(ctx.algebra(), ctx.tau(), m)?;
    let lifted = LoopContext::new(&big, &tau);
    Ok((lifted, lift_system(u, lift_depth(m, k), k)))
}

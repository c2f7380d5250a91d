//! The identity suite run by `ksym verify`.
//!
//! Each identity reduces to one nonnegative residual compared against the
//! run tolerance. Randomized identities draw from a ChaCha stream selected
//! by the identity's position in [`NAMES`], so `--only` reproduces the
//! values of a full run.

use std::f64::consts::PI;

use ksym::autodecomp::{grade, minimal_determined_order, GradedDecomposition};
use ksym::homogeo::{
    canonical_structures, canonical_top, characteristic_torsion_complex, characteristic_torsion_f, component_split,
    connection_family, extended_nijenhuis, horizontal_curvature, invariant_d, kahler_form, metric_family, nijenhuis,
    project_invariant, vertical_curvature, wess_zumino_forms, AltForm, InvariantMetric, OriginConnection,
    ReductiveSplit,
};
use ksym::isomtwist::{
    block_diag, canonical_representative, component_invariant, power_eigenspace_check, random_special_orthogonal,
    rotation2, ComponentInvariant, FiniteIsometry, ISOMETRY_TOL,
};
use ksym::lattice::LatticeGrid;
use ksym::lattice::SplitContext;
use ksym::loopsys::{
    regroup, residual_report, system_residuals, underdetermined_equiv, Convention, LoopContext, SystemData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::fixture::Loaded;

/// Every identity, in suite order.
pub const NAMES: [&str; 22] = [
    "projector_idempotence",
    "projector_orthogonality",
    "projector_resolution",
    "projector_twist",
    "projector_reality",
    "bracket_grading",
    "torsion_family",
    "symmetric_connections_coincide",
    "gauduchon_nijenhuis",
    "characteristic_torsion",
    "nearly_kahler_H",
    "dH_closed",
    "dHstar_closed",
    "f_characteristic_torsion",
    "global_G1",
    "d_squared",
    "system_equivalence",
    "system_regrouping",
    "embed_order_exact",
    "lift_transfer",
    "isometry_conjugation_invariance",
    "power_eigenspace",
];

/// Random lattice fields per randomized loop identity.
const FIELDS: usize = 5;
/// Random conjugations in the isometry identity.
const CONJUGATIONS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub identities: Vec<IdentityResult>,
    pub all_pass: bool,
}

struct Ctx<'a> {
    fixture: &'a Loaded,
    grading: GradedDecomposition,
    split: Option<ReductiveSplit>,
    metric: Option<InvariantMetric>,
    kprime: usize,
}

impl Ctx<'_> {
    fn geometry(&self) -> Option<(&ReductiveSplit, &InvariantMetric)> {
        Some((self.split.as_ref()?, self.metric.as_ref()?))
    }
}

fn applicable(name: &str, c: &Ctx) -> bool {
    let k = c.kprime;
    let geo = c.geometry().is_some_and(|(s, _)| s.dim_n() > 0);
    match name {
        "torsion_family" | "d_squared" => geo,
        "symmetric_connections_coincide" => geo && c.split.as_ref().is_some_and(|s| s.is_symmetric(1e-9)),
        "gauduchon_nijenhuis" | "characteristic_torsion" => geo && k >= 3 && k % 2 == 1,
        "nearly_kahler_H" => geo && k == 3,
        "dH_closed" | "dHstar_closed" => geo && k >= 3,
        "f_characteristic_torsion" | "global_G1" => geo && k >= 4 && k.is_multiple_of(2),
        _ => true,
    }
}

fn geometry_error(e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("geometry: {e}"))
}

fn random_form(n: usize, p: usize, rng: &mut impl Rng) -> AltForm {
    let data: Vec<f64> = (0..n.pow(p as u32)).map(|_| rng.random_range(-1.0..1.0)).collect();
    AltForm::antisymmetrize(n, p, &data)
}

/// `max |a − b| / max(1, max |b|)` for the coefficient and regrouping gaps.
fn relative(gap: f64, scale: f64) -> f64 {
    gap / scale.max(1.0)
}

/// Largest relative gap between the Laurent and system formulations on
/// random order-`m` unknowns.
pub fn equivalence_gap(lc: &LoopContext, m: usize, cells: usize, rng: &mut impl Rng) -> f64 {
    let g = LatticeGrid::unit_square(cells).expect("valid grid");
    (0..FIELDS)
        .map(|_| {
            let u = SystemData::random(lc, g, m, Convention::Minus, rng);
            let r = residual_report(&u, lc);
            relative(
                r.coefficient_gap.max((r.max_laurent - r.max_system).abs()),
                r.max_system,
            )
        })
        .fold(0.0, f64::max)
}

fn compute(name: &str, c: &Ctx, rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let res = c.grading.residuals(&c.fixture.algebra);
    let k = c.kprime;
    let geo = || c.geometry().expect("checked by applicable");
    let t0 = || {
        let (s, _) = geo();
        OriginConnection::canonical(s).torsion(s)
    };
    let lc = || LoopContext::new(&c.fixture.algebra, &c.fixture.tau);
    Ok(match name {
        "projector_idempotence" => res.idempotence,
        "projector_orthogonality" => res.orthogonality,
        "projector_resolution" => res.resolution,
        "projector_twist" => res.twist,
        "projector_reality" => res.reality,
        "bracket_grading" => res.grading,
        "torsion_family" => {
            let (s, _) = geo();
            [0.0, 0.25, 0.5, 1.0]
                .iter()
                .map(|&t| {
                    let expected = s.bracket_n_tensor().scale(2.0 * t - 1.0);
                    connection_family(s, t).torsion(s).max_diff(&expected)
                })
                .fold(0.0, f64::max)
        }
        "symmetric_connections_coincide" => {
            let (s, g) = geo();
            let reference = OriginConnection::canonical(s);
            [0.0, 0.25, 0.5, 1.0]
                .iter()
                .map(|&t| {
                    connection_family(s, t)
                        .lambda()
                        .max_diff(reference.lambda())
                        .max(metric_family(s, g, t).lambda().max_diff(reference.lambda()))
                })
                .fold(0.0, f64::max)
        }
        "gauduchon_nijenhuis" => {
            let (s, _) = geo();
            let j = canonical_top(s).map_err(geometry_error)?;
            let n = nijenhuis(s, &j, &OriginConnection::canonical(s), 1e-9).map_err(geometry_error)?;
            n.max_diff(&component_split(&t0(), j.matrix(), -1, -1).scale(4.0))
        }
        "characteristic_torsion" => {
            let (s, g) = geo();
            let j = canonical_top(s).map_err(geometry_error)?;
            let d_omega = invariant_d(s, &kahler_form(g, j.matrix()), 1e-9)
                .map_err(geometry_error)?
                .to_tensor3();
            match characteristic_torsion_complex(s, &j, g, &d_omega, 1e-9) {
                Ok(ch) => ch.torsion.max_diff(&t0().lower(g.gram())),
                Err(_) => f64::INFINITY,
            }
        }
        "nearly_kahler_H" => {
            let (s, g) = geo();
            let j = canonical_top(s).map_err(geometry_error)?;
            let d_omega = invariant_d(s, &kahler_form(g, j.matrix()), 1e-9)
                .map_err(geometry_error)?
                .to_tensor3();
            let h = t0().compose_out(j.matrix()).lower(g.gram());
            h.max_diff(&d_omega.scale(1.0 / 3.0))
        }
        "dH_closed" | "dHstar_closed" => {
            let (s, g) = geo();
            let f = canonical_top(s).map_err(geometry_error)?;
            let (h, hs) = wess_zumino_forms(g, f.matrix(), &t0());
            let form = if name == "dH_closed" { h } else { hs };
            match invariant_d(s, &form.to_form(), 1e-9) {
                Ok(d) => d.max_abs(),
                Err(_) => f64::INFINITY,
            }
        }
        "f_characteristic_torsion" | "global_G1" => {
            let (s, g) = geo();
            let fs = canonical_structures(s, 1).map_err(geometry_error)?;
            let phi = horizontal_curvature(s, &fs);
            let rv = vertical_curvature(s, &fs);
            if name == "global_G1" {
                extended_nijenhuis(s, &fs, g, &phi, &rv).total_skew_residual()
            } else {
                let q = fs.vertical();
                let t0l = t0().lower(g.gram());
                let alpha = t0l.precompose_all(&q, &q, &q);
                match characteristic_torsion_f(s, &fs, g, &phi, &rv, &alpha, 1e-9) {
                    Ok(ch) => ch.torsion.max_diff(&t0l),
                    Err(_) => f64::INFINITY,
                }
            }
        }
        "d_squared" => {
            let (s, _) = geo();
            let n = s.dim_n();
            let mut worst: f64 = 0.0;
            for i in 0..10 {
                let a = project_invariant(s, &random_form(n, 1 + i % 3, rng));
                let d = invariant_d(s, &a, 1e-9).map_err(geometry_error)?;
                let dd = invariant_d(s, &d, 1e-9).map_err(geometry_error)?;
                worst = worst.max(dd.max_abs());
            }
            worst
        }
        "system_equivalence" => equivalence_gap(&lc(), minimal_determined_order(k), 8, rng),
        "system_regrouping" => {
            let lc = lc();
            let m = minimal_determined_order(k);
            let sc = c.split.as_ref().map(SplitContext::new);
            let g = LatticeGrid::unit_square(8).expect("valid grid");
            let mut worst: f64 = 0.0;
            for _ in 0..FIELDS {
                let u = SystemData::random(&lc, g, m, Convention::Minus, rng);
                let scale = residual_report(&u, &lc).max_system;
                let r = regroup(&u, &lc, sc.as_ref()).map_err(|e| CliError::Input(e.to_string()))?;
                worst = worst.max(relative(r.max_gap, scale));
            }
            worst
        }
        "embed_order_exact" => {
            let lc = lc();
            let g = LatticeGrid::unit_square(6).expect("valid grid");
            let mut worst: f64 = 0.0;
            for _ in 0..FIELDS {
                let m = rng.random_range(0..=k);
                let u = SystemData::random(&lc, g, m, Convention::Minus, rng);
                let big = u.embed_order(m + 2).expect("larger order");
                let s = system_residuals(&u, lc.bracket());
                let t = system_residuals(&big, lc.bracket());
                for (a, b) in s.iter().zip(&t) {
                    if a.values() != b.values() {
                        worst = worst.max(a.max_diff(b)).max(f64::MIN_POSITIVE);
                    }
                }
                for extra in &t[m + 1..] {
                    worst = worst.max(extra.max_abs());
                }
            }
            worst
        }
        "lift_transfer" => {
            let lc = lc();
            let g = LatticeGrid::unit_square(6).expect("valid grid");
            let mut worst: f64 = 0.0;
            for _ in 0..FIELDS {
                let u = SystemData::random(&lc, g, k + 1, Convention::Minus, rng);
                let (big, lifted) = underdetermined_equiv(&u, &lc).map_err(|e| CliError::Input(e.to_string()))?;
                let r = residual_report(&u, &lc).max_system;
                let rl = residual_report(&lifted, &big).max_system;
                worst = worst.max((rl / r - 1.0).abs());
            }
            worst
        }
        "isometry_conjugation_invariance" => {
            let inv = ComponentInvariant { eps: -1, p: vec![2, 1] };
            let a = canonical_representative(&inv);
            let mut mismatches = 0usize;
            for _ in 0..CONJUGATIONS {
                let q = random_special_orthogonal(6, rng);
                match FiniteIsometry::new(&q * &a * q.transpose(), 3, ISOMETRY_TOL) {
                    Ok(b) if component_invariant(&b) == inv => {}
                    _ => mismatches += 1,
                }
            }
            mismatches as f64
        }
        "power_eigenspace" => {
            let a = block_diag(&[rotation2(PI / 3.0), rotation2(2.0 * PI / 3.0), rotation2(PI / 3.0)]);
            let a = FiniteIsometry::new(a, 3, ISOMETRY_TOL).map_err(|e| CliError::Input(e.to_string()))?;
            (0..=6)
                .map(|j| power_eigenspace_check(&a, j).residual)
                .fold(0.0, f64::max)
        }
        other => return Err(CliError::Input(format!("unknown identity {other}"))),
    })
}

/// Runs the identities selected by `only` (all applicable ones when empty).
pub fn run(fixture: &Loaded, tol: f64, seed: u64, only: &[String]) -> Result<SuiteResult, CliError> {
    let grading = grade(&fixture.algebra, &fixture.tau);
    let split = ReductiveSplit::from_decomposition(&fixture.algebra, &grading).ok();
    let metric = split
        .as_ref()
        .and_then(|s| InvariantMetric::from_inner(s, &fixture.inner, 1e-9).ok());
    let c = Ctx {
        fixture,
        kprime: grading.kprime(),
        grading,
        split,
        metric,
    };
    for name in only {
        if !NAMES.contains(&name.as_str()) {
            return Err(CliError::Input(format!(
                "unknown identity {name}; available: {}",
                NAMES.join(", ")
            )));
        }
        if !applicable(name, &c) {
            return Err(CliError::Input(format!(
                "identity {name} does not apply to fixture {}",
                fixture.id.name
            )));
        }
    }
    let mut identities = Vec::new();
    for (stream, name) in NAMES.iter().enumerate() {
        let selected = if only.is_empty() {
            applicable(name, &c)
        } else {
            only.iter().any(|o| o == name)
        };
        if !selected {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        let residual = compute(name, &c, &mut rng)?;
        identities.push(IdentityResult {
            name,
            residual,
            pass: residual <= tol,
        });
    }
    let all_pass = identities.iter().all(|i| i.pass);
    Ok(SuiteResult { identities, all_pass })
}

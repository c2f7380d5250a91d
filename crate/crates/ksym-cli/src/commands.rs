//! Command bodies. Each returns the serializable `result` block of its report.

use std::path::Path;

use ksym::autodecomp::{
    classify_system, grade, lift_depth, minimal_determined_order, DecompositionResiduals, SystemClass,
};
use ksym::homogeo::{InvariantMetric, ReductiveSplit};
use ksym::isomtwist::{classify, IsometryReport, IsometryRequest};
use ksym::lattice::{
    harmonic_residual, perturbed_geodesic, solve_harmonic, write_history_csv, write_plot_csv, GroupFieldFile,
    HistoryRow, LatticeError, LatticeGrid, Perturbation, SolverOptions, SplitContext,
};
use ksym::loopsys::{
    regroup, residual_report, underdetermined_equiv, Convention, LoopContext, RegroupReport, SystemData, SystemFile,
    SystemResidualReport,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::fixture::Loaded;

#[derive(Debug, Serialize)]
pub struct DecomposeResult {
    pub dim: usize,
    pub kprime: usize,
    pub dim_g0: usize,
    /// `dim 𝔪_j` for `j = 1..⌊(k'−1)/2⌋`.
    pub dim_m: Vec<usize>,
    /// `dim 𝔤_k` for even `k' = 2k`, else absent.
    pub dim_gk: Option<usize>,
    pub effective: bool,
    pub residuals: DecompositionResiduals,
    pub max_residual: f64,
    /// Classification of the order-`m` system for `m = 0..2k'`.
    pub systems: Vec<SystemClass>,
}

pub fn decompose(f: &Loaded) -> DecomposeResult {
    let d = grade(&f.algebra, &f.tau);
    let (dim_g0, dim_m, dim_gk) = d.dims();
    let kprime = d.kprime();
    let residuals = d.residuals(&f.algebra);
    DecomposeResult {
        dim: f.algebra.dim(),
        kprime,
        dim_g0,
        dim_m,
        dim_gk: (kprime.is_multiple_of(2) && kprime >= 2).then_some(dim_gk),
        effective: d.is_effective(),
        max_residual: residuals.max(),
        residuals,
        systems: (0..=2 * kprime).map(|m| classify_system(m, kprime)).collect(),
    }
}

pub fn classify_isometry(path: &Path, tol: f64) -> Result<IsometryReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let req: IsometryRequest =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: parse error: {e}", path.display())))?;
    Ok(classify(&req, tol))
}

#[derive(Debug, Serialize)]
pub struct LiftSummary {
    pub q: usize,
    pub lifted_order: usize,
    pub lifted_class: SystemClass,
    pub lifted_max_system: f64,
    /// Lifted over input maximum residual.
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct SystemResidualsResult {
    pub class: SystemClass,
    /// `random` (seeded smooth unknowns) or the input path.
    pub source: String,
    pub cells: usize,
    pub residuals: SystemResidualReport,
    pub regrouping: RegroupReport,
    pub lift: Option<LiftSummary>,
}

pub struct SystemArgs<'a> {
    pub m: Option<usize>,
    pub cells: usize,
    pub convention: Convention,
    pub input: Option<&'a Path>,
    pub seed: u64,
    pub tol: f64,
}

pub fn system_residuals(f: &Loaded, args: SystemArgs) -> Result<SystemResidualsResult, CliError> {
    let lc = LoopContext::new(&f.algebra, &f.tau);
    let kprime = lc.kprime();
    let (u, source) = match args.input {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let file: SystemFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: parse error: {e}", p.display())))?;
            let u = SystemData::from_file(&file, &lc, args.tol).map_err(|e| CliError::Input(e.to_string()))?;
            (u, p.display().to_string())
        }
        None => {
            let m = args.m.unwrap_or_else(|| minimal_determined_order(kprime));
            let grid = LatticeGrid::unit_square(args.cells).map_err(|e| CliError::Input(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (
                SystemData::random(&lc, grid, m, args.convention, &mut rng),
                "random".into(),
            )
        }
    };
    let m = u.m();
    let split = ReductiveSplit::from_decomposition(&f.algebra, lc.grading()).ok();
    let sc = split.as_ref().map(SplitContext::new);
    let residuals = residual_report(&u, &lc);
    let regrouping = regroup(&u, &lc, sc.as_ref()).map_err(|e| CliError::Input(e.to_string()))?;
    let lift = if m >= kprime {
        let (big, lifted) = underdetermined_equiv(&u, &lc).map_err(|e| CliError::Input(e.to_string()))?;
        let lifted_max_system = residual_report(&lifted, &big).max_system;
        Some(LiftSummary {
            q: lift_depth(m, kprime),
            lifted_order: big.kprime(),
            lifted_class: classify_system(m, big.kprime()),
            lifted_max_system,
            ratio: lifted_max_system / residuals.max_system,
        })
    } else {
        None
    };
    Ok(SystemResidualsResult {
        class: classify_system(m, kprime),
        source,
        cells: u.grid().nx() - 1,
        residuals,
        regrouping,
        lift,
    })
}

pub struct SolveArgs<'a> {
    pub cells: usize,
    pub steps: usize,
    pub rate: Option<f64>,
    pub amplitude: f64,
    pub tol: f64,
    pub out_dir: Option<&'a Path>,
    pub plot: Option<&'a Path>,
}

#[derive(Debug, Serialize)]
pub struct SolveResult {
    pub cells: usize,
    pub h: f64,
    pub steps_requested: usize,
    pub steps_taken: usize,
    pub rate: f64,
    pub amplitude: f64,
    pub converged: bool,
    /// Maximum link tension before the first step.
    pub initial_residual: f64,
    /// Maximum link tension at the end.
    pub final_residual: f64,
    /// `initial_residual / final_residual`.
    pub residual_drop: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Stencil harmonic residual of `U⁻¹DU` at interior points.
    pub final_harmonic_residual: f64,
    /// Residuals of the order-`(k'−1)` system assembled from the final field.
    pub system_order: usize,
    pub system_max_residual: f64,
    /// Files written next to the report.
    pub files: Vec<String>,
}

fn write_history(dir: Option<&Path>, history: &[HistoryRow], files: &mut Vec<String>) -> Result<(), CliError> {
    if let Some(d) = dir {
        let p = d.join("history.csv");
        let mut w = std::io::BufWriter::new(std::fs::File::create(&p)?);
        write_history_csv(history, &mut w)?;
        files.push("history.csv".into());
    }
    Ok(())
}

/// Relaxes a perturbed geodesic `exp(x ξ + amp·sin(πx)sin(πy) ζ)` with
/// `ξ = 0.7 n₀ − 0.4 n₁` and `ζ = n₀ + ½ n₁` in the first two `𝔫` basis vectors.
pub fn solve(f: &Loaded, args: SolveArgs) -> Result<SolveResult, CliError> {
    let rep = f.realization()?;
    let grading = grade(&f.algebra, &f.tau);
    let split = ReductiveSplit::from_decomposition(&f.algebra, &grading).map_err(|e| CliError::Input(e.to_string()))?;
    let metric = InvariantMetric::from_inner(&split, &f.inner, 1e-9).map_err(|e| CliError::Input(e.to_string()))?;
    if split.dim_n() < 2 {
        return Err(CliError::Input("solve needs dim 𝔫 ≥ 2".into()));
    }
    let ctx = SplitContext::new(&split);
    let grid = LatticeGrid::unit_square(args.cells).map_err(|e| CliError::Input(e.to_string()))?;
    let h = grid.h();
    let rate = args.rate.unwrap_or(0.2 * h * h);
    let nb = split.n_basis();
    let (n0, n1) = (nb.column(0).into_owned(), nb.column(1).into_owned());
    let xi: DVector<f64> = &n0 * 0.7 - &n1 * 0.4;
    let zeta: DVector<f64> = &n0 + &n1 * 0.5;
    let initial = perturbed_geodesic(grid, &xi, &zeta, args.amplitude, Perturbation::Bump, rep);
    let opts = SolverOptions {
        steps: args.steps,
        rate,
        tol: args.tol,
    };
    if let Some(d) = args.out_dir {
        std::fs::create_dir_all(d)?;
    }
    let mut files = Vec::new();
    let out = match solve_harmonic(&initial, &ctx, &metric, rep, opts) {
        Ok(o) => o,
        Err(LatticeError::Diverged { step, energy, history }) => {
            write_history(args.out_dir, &history, &mut files)?;
            return Err(CliError::Divergence(format!("energy {energy:.6e} at step {step}")));
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    write_history(args.out_dir, &out.history, &mut files)?;
    let alpha = out.field.maurer_cartan(rep);
    if let Some(d) = args.out_dir {
        let text = serde_json::to_string(&GroupFieldFile::new(&out.field)).expect("field serializes");
        std::fs::write(d.join("field.json"), text)?;
        files.push("field.json".into());
    }
    if let Some(p) = args.plot {
        let mut w = std::io::BufWriter::new(std::fs::File::create(p)?);
        write_plot_csv(&harmonic_residual(&alpha, &ctx, 0.0), &mut w)?;
    }
    let lc = LoopContext::new(&f.algebra, &f.tau);
    let system_order = grading.kprime().saturating_sub(1);
    let system_max_residual = SystemData::from_form(&alpha, system_order, Convention::Minus, &lc, 1e-9)
        .map(|u| residual_report(&u, &lc).max_system)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let first = out.history[0];
    let last = *out.history.last().expect("history has the initial row");
    Ok(SolveResult {
        cells: args.cells,
        h,
        steps_requested: args.steps,
        steps_taken: last.step,
        rate,
        amplitude: args.amplitude,
        converged: out.converged,
        initial_residual: first.residual,
        final_residual: out.final_residual,
        residual_drop: first.residual / out.final_residual,
        initial_energy: first.energy,
        final_energy: last.energy,
        final_harmonic_residual: out.final_harmonic_residual,
        system_order,
        system_max_residual,
        files,
    })
}

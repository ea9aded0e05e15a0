//! The SOLVE → ESTIMATE → MARK → REFINE loop.

use crate::assembly::{SparseSystem, DEFAULT_PENALTY};
use crate::bench::{example_spec, linf_error, ExampleSpec};
use crate::dg_space::DgFunction;
use crate::error::{Error, Result};
use crate::estimator::{contact_tolerance, estimate, EstimatorBreakdown, EstimatorInput};
use crate::mesh::Mesh;
use crate::scalar::Real;
use crate::solver::{solve_obstacle_from, ObstacleSolution, PdasOptions, SolveReport};

#[derive(Debug, Clone)]
pub struct AdaptConfig<T> {
    pub example: u32,
    /// Constant load of Example 3.
    pub load: f64,
    pub theta: T,
    pub gamma: T,
    pub max_levels: usize,
    pub max_dofs: usize,
    pub pdas: PdasOptions<T>,
    /// Seed each level's active set with the previous solution transferred
    /// to the refined mesh; otherwise every level starts unconstrained.
    pub warm_start: bool,
}

impl<T: Real> Default for AdaptConfig<T> {
    fn default() -> Self {
        AdaptConfig {
            example: 1,
            load: 0.0,
            theta: T::lit(0.3),
            gamma: T::lit(DEFAULT_PENALTY),
            max_levels: 30,
            max_dofs: 200_000,
            pdas: PdasOptions::default(),
            warm_start: true,
        }
    }
}

impl<T: Real> AdaptConfig<T> {
    pub fn for_example(example: u32, load: f64) -> Self {
        AdaptConfig {
            example,
            load,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > T::zero() && self.theta <= T::one()) {
            return Err(Error::InvalidParameter(format!("theta = {} not in (0, 1]", self.theta)));
        }
        if !(self.gamma > T::zero()) {
            return Err(Error::InvalidParameter(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.max_levels == 0 {
            return Err(Error::InvalidParameter("at least one level is required".into()));
        }
        Ok(())
    }
}

/// Discrete complementarity diagnostics of one solve, DOF by DOF.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktSummary {
    /// `max_i σ_i` (nonpositive for a valid multiplier).
    pub max_sigma: f64,
    /// `max |σ_i|` over DOFs with `u_i − χ_i > eps_c`.
    pub max_inactive_sigma: f64,
    /// `max_i |σ_i (u_i − χ_i)|`
    pub complementarity: f64,
    /// `min_i (u_i − χ_i)`
    pub min_gap: f64,
    /// `max(1, ‖F‖_∞)`
    pub scale: f64,
    pub eps_c: f64,
}

impl KktSummary {
    pub fn compute<T: Real>(u: &[T], sigma: &[T], chi: &[T], scale: T, eps_c: T) -> Self {
        let mut s = KktSummary {
            max_sigma: f64::NEG_INFINITY,
            min_gap: f64::INFINITY,
            scale: scale.to_f64_lossy(),
            eps_c: eps_c.to_f64_lossy(),
            ..Default::default()
        };
        for i in 0..u.len() {
            let gap = u[i] - chi[i];
            let sg = sigma[i].to_f64_lossy();
            s.max_sigma = s.max_sigma.max(sg);
            s.min_gap = s.min_gap.min(gap.to_f64_lossy());
            if gap > eps_c {
                s.max_inactive_sigma = s.max_inactive_sigma.max(sg.abs());
            }
            s.complementarity = s.complementarity.max((sigma[i] * gap).abs().to_f64_lossy());
        }
        s
    }

    /// All three sign and complementarity conditions within `tol · scale`.
    pub fn holds(&self, tol: f64) -> bool {
        let t = tol * self.scale;
        self.max_sigma <= t && self.max_inactive_sigma <= t && self.complementarity <= t
    }
}

/// One line of the convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub level: usize,
    pub dofs: usize,
    pub elements: usize,
    pub h_min: f64,
    pub eta: [f64; 6],
    pub osc: f64,
    pub eta_total: f64,
    pub linf_error: Option<f64>,
    /// `η_h / ‖u − u_h‖_∞`
    pub efficiency_index: Option<f64>,
    pub pdas_iterations: usize,
    pub linear_residual: f64,
    pub kkt: KktSummary,
    /// Element counts: contact, non-contact, free boundary.
    pub classes: [usize; 3],
    /// `max_T η₄(T) / (η₁(T) + Osc(f, T))`
    pub multiplier_gradient_ratio: f64,
    pub marked: usize,
}

/// State handed to the observer after each level has been estimated and marked.
pub struct LevelView<'a, T> {
    pub level: usize,
    pub mesh: &'a Mesh<T>,
    pub u: &'a DgFunction<T>,
    pub sigma: &'a DgFunction<T>,
    pub chi_h: &'a DgFunction<T>,
    pub estimate: &'a EstimatorBreakdown<T>,
    pub solution: &'a ObstacleSolution<T>,
    pub report: &'a SolveReport<T>,
    pub record: &'a RunRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    LevelCap,
    DofCap,
    /// Every indicator vanished.
    NothingMarked,
    Failed,
}

pub struct AdaptOutcome<T> {
    pub records: Vec<RunRecord>,
    /// Mesh of the last solved level (or the mesh that failed).
    pub mesh: Mesh<T>,
    pub u: Option<DgFunction<T>>,
    pub sigma: Option<DgFunction<T>>,
    pub estimate: Option<EstimatorBreakdown<T>>,
    pub stop: StopReason,
    pub failure: Option<Error>,
}

/// `{T : η(T) ≥ θ max η}`; empty when all indicators vanish.
pub fn mark_max<T: Real>(indicators: &[T], theta: T) -> Vec<usize> {
    let max = indicators.iter().copied().fold(T::zero(), T::max);
    if !(max > T::zero()) {
        return Vec::new();
    }
    let threshold = theta * max;
    (0..indicators.len())
        .filter(|&t| indicators[t] >= threshold)
        .collect()
}

/// Runs the benchmark selected by `config.example`.
pub fn adaptive_loop<T: Real>(
    config: &AdaptConfig<T>,
    observer: impl FnMut(&LevelView<'_, T>) -> Result<()>,
) -> Result<AdaptOutcome<T>> {
    config.validate()?;
    let spec = example_spec::<T>(config.example, config.load)?;
    let mesh = spec.initial_mesh()?;
    Ok(run_problem(&spec, mesh, config, observer))
}

/// Adaptive loop for an arbitrary problem starting from `mesh`. Failures
/// stop the loop and are returned together with the history so far.
pub fn run_problem<T: Real>(
    spec: &ExampleSpec<T>,
    mut mesh: Mesh<T>,
    config: &AdaptConfig<T>,
    mut observer: impl FnMut(&LevelView<'_, T>) -> Result<()>,
) -> AdaptOutcome<T> {
    let mut records = Vec::new();
    let mut last = None;
    let mut guess: Option<(DgFunction<T>, DgFunction<T>)> = None;
    let outcome = |records, mesh, last: Option<(DgFunction<T>, DgFunction<T>, EstimatorBreakdown<T>)>, stop, failure| {
        let (u, sigma, estimate) = match last {
            Some((u, s, e)) => (Some(u), Some(s), Some(e)),
            None => (None, None, None),
        };
        AdaptOutcome {
            records,
            mesh,
            u,
            sigma,
            estimate,
            stop,
            failure,
        }
    };
    if let Err(e) = config.validate() {
        return outcome(records, mesh, last, StopReason::Failed, Some(e));
    }

    for level in 0..config.max_levels {
        let step = solve_level(spec, &mesh, config, level, guess.take(), &mut observer);
        let (u, sigma, est, record, marked) = match step {
            Ok(v) => v,
            Err(e) => return outcome(records, mesh, last, StopReason::Failed, Some(e)),
        };
        records.push(record);
        last = Some((u, sigma, est));

        if level + 1 == config.max_levels {
            return outcome(records, mesh, last, StopReason::LevelCap, None);
        }
        if marked.is_empty() {
            return outcome(records, mesh, last, StopReason::NothingMarked, None);
        }
        let refined = match mesh.bisect(&marked) {
            Ok(r) => r,
            Err(e) => return outcome(records, mesh, last, StopReason::Failed, Some(e)),
        };
        if 3 * refined.mesh.num_triangles() > config.max_dofs {
            return outcome(records, mesh, last, StopReason::DofCap, None);
        }
        if config.warm_start {
            if let Some((u, sigma, _)) = &last {
                guess = Some((u.prolongate(&mesh, &refined), sigma.prolongate(&mesh, &refined)));
            }
        }
        mesh = refined.mesh;
    }
    unreachable!("the level cap returns inside the loop")
}

type LevelResult<T> = (DgFunction<T>, DgFunction<T>, EstimatorBreakdown<T>, RunRecord, Vec<usize>);

fn solve_level<T: Real>(
    spec: &ExampleSpec<T>,
    mesh: &Mesh<T>,
    config: &AdaptConfig<T>,
    level: usize,
    guess: Option<(DgFunction<T>, DgFunction<T>)>,
    observer: &mut impl FnMut(&LevelView<'_, T>) -> Result<()>,
) -> Result<LevelResult<T>> {
    let system = SparseSystem::assemble(
        mesh,
        config.gamma,
        &*spec.f,
        spec.boundary.as_deref().map(|g| g as &dyn Fn(T, T) -> T),
    )?;
    let chi_h = DgFunction::interpolate(mesh, &*spec.chi);
    let tau = config.pdas.active_tol * system.scale();
    let start: Vec<bool> = match &guess {
        Some((u0, s0)) => (0..system.dim())
            .map(|i| {
                -s0.values()[i] + config.pdas.c * (chi_h.values()[i] - u0.values()[i]) > tau
            })
            .collect(),
        None => vec![false; system.dim()],
    };
    let (solution, report) = solve_obstacle_from(&system, chi_h.values(), &config.pdas, &start)?;
    if !report.converged {
        return Err(Error::NotConverged(report.pdas_iterations));
    }
    let u = DgFunction::from_values(mesh, solution.u.clone())?;
    let sigma = DgFunction::from_values(mesh, solution.sigma.clone())?;
    let est = estimate(&EstimatorInput {
        mesh,
        u: &u,
        sigma: &sigma,
        chi_h: &chi_h,
        f: &*spec.f,
        chi: &*spec.chi,
        g: spec.boundary.as_deref().map(|g| g as &dyn Fn(T, T) -> T),
    });
    let linf = spec
        .exact_u
        .as_ref()
        .map(|ex| linf_error(mesh, &u, &**ex).to_f64_lossy());
    let eta_total = est.eta_total.to_f64_lossy();
    let marked = mark_max(&est.indicators, config.theta);
    let record = RunRecord {
        level,
        dofs: system.dim(),
        elements: mesh.num_triangles(),
        h_min: mesh.h_min().to_f64_lossy(),
        eta: est.eta.map(|v| v.to_f64_lossy()),
        osc: est.osc.to_f64_lossy(),
        eta_total,
        linf_error: linf,
        efficiency_index: linf.map(|e| eta_total / e),
        pdas_iterations: report.pdas_iterations,
        linear_residual: report
            .linear
            .iter()
            .map(|s| s.relative_residual.to_f64_lossy())
            .fold(0.0, f64::max),
        kkt: KktSummary::compute(
            &solution.u,
            &solution.sigma,
            chi_h.values(),
            system.scale(),
            contact_tolerance(&chi_h),
        ),
        classes: est.class_counts(),
        multiplier_gradient_ratio: est.multiplier_gradient_ratio().to_f64_lossy(),
        marked: marked.len(),
    };
    observer(&LevelView {
        level,
        mesh,
        u: &u,
        sigma: &sigma,
        chi_h: &chi_h,
        estimate: &est,
        solution: &solution,
        report: &report,
        record: &record,
    })?;
    Ok((u, sigma, est, record, marked))
}

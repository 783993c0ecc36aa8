//! Multi-start optimization of output purity over pure input states.
//!
//! Entropy is concave and the Schatten norms convex, and a channel is
//! affine, so the extremes over all input states are reached on pure
//! inputs. A pure state in `C^d` is searched as an unconstrained real vector
//! `v` of length `2d` with amplitudes `(v[2k] + i v[2k+1]) / |v|`.
//!
//! Starts are independent: start `k` draws its initial point from a
//! generator seeded by `derive_seed(seed, k)`, runs on the rayon pool, and
//! the reduction picks the best value with ties going to the lowest index,
//! so reports do not depend on thread count.

mod gradient;
mod nelder_mead;
mod oracle;

pub use oracle::{brute_force_oracle, OracleObjective, ORACLE_MAX_DIM};

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{PurityError, Result};
use crate::linalg::{self, ComplexVector};
use crate::random::{derive_seed, haar_random_pure_state, rng_from_seed};
use crate::state::{entropy_of, schatten_of, PureState, SchattenP};

use nelder_mead::{nelder_mead, SimplexOptions};

/// Tolerance of the CPTP precheck on optimized channels.
pub const CPTP_TOL: f64 = 1e-9;
/// Largest input dimension handled by the optimizers.
pub const MAX_OPT_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Nelder-Mead with restarts.
    DirectSearch,
    /// Tangent-space descent with finite-difference gradients.
    ProjectedGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
    pub method: Method,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { n_starts: 32, max_iters: 2000, step_tol: 1e-8, value_tol: 1e-10, seed: 0, method: Method::DirectSearch }
    }
}

impl OptimizerConfig {
    /// Defaults scaled to the input dimension: 32 starts up to `d = 4`, 128 beyond.
    pub fn for_dim(d: usize) -> Self {
        OptimizerConfig { n_starts: if d <= 4 { 32 } else { 128 }, ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, n_starts: usize) -> Self {
        self.n_starts = n_starts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(PurityError::InvalidConfig("n_starts must be at least 1".into()));
        }
        if !(self.step_tol > 0.0 && self.value_tol > 0.0) {
            return Err(PurityError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(PurityError::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// What is optimized over pure inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Minimize the output entropy.
    Entropy,
    /// Maximize the output Schatten norm.
    PNorm(SchattenP),
    /// Minimize the second-largest output eigenvalue.
    SecondEigenvalue,
}

impl Objective {
    fn maximizes(&self) -> bool {
        matches!(self, Objective::PNorm(_))
    }

    fn value_of(&self, eigs: &mut [f64]) -> f64 {
        for v in eigs.iter_mut() {
            *v = v.max(0.0);
        }
        match self {
            Objective::Entropy => entropy_of(eigs),
            Objective::PNorm(p) => schatten_of(eigs, *p),
            Objective::SecondEigenvalue => eigs.get(1).copied().unwrap_or(0.0),
        }
    }

    /// Objective value of a channel output on a pure input.
    pub fn evaluate(&self, phi: &Channel, amplitudes: &ComplexVector) -> f64 {
        let out = phi.apply_pure(amplitudes);
        let mut eigs = linalg::hermitian_eigenvalues_unchecked(&out);
        self.value_of(&mut eigs)
    }

    pub fn describe(&self) -> String {
        match self {
            Objective::Entropy => "min output entropy (nats)".into(),
            Objective::PNorm(p) => format!("max output {p}-norm"),
            Objective::SecondEigenvalue => "min second output eigenvalue".into(),
        }
    }

    /// `a` is at least as good as `b`.
    pub fn at_least_as_good(&self, a: f64, b: f64) -> bool {
        if self.maximizes() {
            a >= b
        } else {
            a <= b
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationReport {
    pub objective: String,
    pub value: f64,
    pub argopt: PureState,
    pub per_start_values: Vec<f64>,
    pub n_converged: usize,
    pub n_starts: usize,
    /// Best minus worst start value, in the objective's own sense.
    pub spread: f64,
    pub seed: u64,
}

/// One start's outcome; the state is kept for witness collection.
#[derive(Debug, Clone)]
pub(crate) struct StartOutcome {
    pub value: f64,
    pub state: PureState,
    pub converged: bool,
}

fn to_amplitudes(x: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(x.len() / 2, x.chunks_exact(2).map(|c| linalg::c(c[0], c[1])))
}

fn to_real(psi: &PureState) -> Vec<f64> {
    psi.amplitudes().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn ensure_cptp(phi: &Channel) -> Result<()> {
    let v = phi.is_cptp(CPTP_TOL);
    if !v.cptp {
        return Err(PurityError::NotCptp(format!(
            "{} (min Choi eigenvalue {:.3e}, trace residual {:.3e})",
            phi.label(),
            v.min_choi_eigenvalue,
            v.trace_residual
        )));
    }
    if phi.dim_in() > MAX_OPT_DIM {
        return Err(PurityError::DimensionTooLarge { dim: phi.dim_in(), limit: MAX_OPT_DIM });
    }
    Ok(())
}

/// Local search from one start; returns the value in the objective's sense.
fn local_search(phi: &Channel, objective: Objective, cfg: &OptimizerConfig, start: &PureState) -> StartOutcome {
    let sign = if objective.maximizes() { -1.0 } else { 1.0 };
    let loss = |x: &[f64]| {
        let amps = to_amplitudes(x);
        let norm = amps.norm();
        if norm.is_nan() || norm <= 1e-150 {
            return f64::INFINITY;
        }
        sign * objective.evaluate(phi, &amps.unscale(norm))
    };
    let mut x = to_real(start);
    let mut best = loss(&x);
    let mut converged = false;
    let mut budget = cfg.max_iters;
    match cfg.method {
        Method::DirectSearch => {
            // Restart from the incumbent with a fresh simplex until a round
            // stops improving; each round shares the iteration budget.
            let mut initial_step = 0.25;
            for _round in 0..6 {
                if budget == 0 {
                    break;
                }
                let opts = SimplexOptions { max_iters: budget, value_tol: cfg.value_tol, step_tol: cfg.step_tol, initial_step };
                let out = nelder_mead(&loss, &x, &opts);
                budget -= out.iterations.min(budget);
                let improvement = best - out.value;
                if out.value <= best {
                    x = out.x;
                    best = out.value;
                }
                converged = out.converged;
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= n);
                if out.converged && improvement <= cfg.value_tol {
                    break;
                }
                initial_step = 0.05;
            }
        }
        Method::ProjectedGradient => {
            let out = gradient::projected_gradient(&loss, &x, cfg.max_iters, cfg.value_tol, cfg.step_tol);
            if out.value <= best {
                x = out.x;
            }
            converged = out.converged;
        }
    }
    let state = PureState::normalized(to_amplitudes(&x)).expect("iterate is nonzero");
    let value = objective.evaluate(phi, state.amplitudes());
    StartOutcome { value, state, converged }
}

/// Runs every start; `seeds` are used first, the rest are Haar-random.
pub(crate) fn run_starts(phi: &Channel, objective: Objective, cfg: &OptimizerConfig, seeds: &[PureState]) -> Result<Vec<StartOutcome>> {
    cfg.validate()?;
    ensure_cptp(phi)?;
    if let Some(bad) = seeds.iter().find(|s| s.dim() != phi.dim_in()) {
        return Err(PurityError::DimensionMismatch { expected: phi.dim_in(), found: bad.dim() });
    }
    let d = phi.dim_in();
    let n = cfg.n_starts.max(seeds.len());
    Ok((0..n)
        .into_par_iter()
        .map(|k| {
            let start = match seeds.get(k) {
                Some(s) => s.clone(),
                None => haar_random_pure_state(d, &mut rng_from_seed(derive_seed(cfg.seed, k as u64))),
            };
            local_search(phi, objective, cfg, &start)
        })
        .collect())
}

pub(crate) fn summarize(objective: Objective, cfg: &OptimizerConfig, outcomes: &[StartOutcome]) -> OptimizationReport {
    let mut best = 0;
    for (k, o) in outcomes.iter().enumerate() {
        let better = if objective.maximizes() { o.value > outcomes[best].value } else { o.value < outcomes[best].value };
        if better {
            best = k;
        }
    }
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    OptimizationReport {
        objective: objective.describe(),
        value: outcomes[best].value,
        argopt: outcomes[best].state.clone(),
        n_converged: outcomes.iter().filter(|o| o.converged).count(),
        n_starts: outcomes.len(),
        per_start_values: values,
        spread: max - min,
        seed: cfg.seed,
    }
}

/// Optimizes `objective` with extra deterministic starting states.
pub fn optimize_seeded(phi: &Channel, objective: Objective, cfg: &OptimizerConfig, seeds: &[PureState]) -> Result<OptimizationReport> {
    let outcomes = run_starts(phi, objective, cfg, seeds)?;
    Ok(summarize(objective, cfg, &outcomes))
}

/// Minimal output entropy in nats.
pub fn minimize_output_entropy(phi: &Channel, cfg: &OptimizerConfig) -> Result<OptimizationReport> {
    optimize_seeded(phi, Objective::Entropy, cfg, &[])
}

/// Maximal output Schatten `p`-norm.
pub fn maximize_output_pnorm(phi: &Channel, p: SchattenP, cfg: &OptimizerConfig) -> Result<OptimizationReport> {
    optimize_seeded(phi, Objective::PNorm(p), cfg, &[])
}

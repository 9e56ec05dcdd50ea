//! Successive convex approximation of the relaxed downlink problem.
//!
//! Each subproblem replaces `log(tau_bar_k)` by its tangent at the previous
//! point and is solved exactly by the barrier solver. The recorded objective
//! `(1 - alpha) sum log2(1 + P_A ||g_k||^2 / tau_bar_k)` at the subproblem
//! solutions is a minorize-maximize sequence and therefore nondecreasing.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::problem::SdrProblem;
use super::sdp::{solve_sdp, Epigraph, LogFloor, LogTerm, SdpOptions, SdpProblem, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMat};

/// Which matrix variable the relaxation is solved over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lift {
    /// `N_t x N_t` transmit covariance `W_E W_E^†`; exact reformulation.
    #[default]
    Covariance,
    /// `N_t K_u x N_t K_u` matrix standing for `vec(W_E) vec(W_E)^†`.
    Vectorized,
}

impl Lift {
    pub fn dim(self, problem: &SdrProblem) -> usize {
        match self {
            Lift::Covariance => problem.n_tx,
            Lift::Vectorized => problem.n_tx * problem.k_ul,
        }
    }

    fn embed(self, problem: &SdrProblem, m: &CMat) -> CMat {
        match self {
            Lift::Covariance => m.clone(),
            Lift::Vectorized => kron(&CMat::identity(problem.k_ul, problem.k_ul), m),
        }
    }

    /// Covariance `sum_j W̄_jj` represented by a matrix in this lift.
    pub fn covariance(self, problem: &SdrProblem, w_bar: &CMat) -> CMat {
        match self {
            Lift::Covariance => w_bar.clone(),
            Lift::Vectorized => {
                let n = problem.n_tx;
                let mut x = CMat::zeros(n, n);
                for j in 0..problem.k_ul {
                    x += w_bar.view((j * n, j * n), (n, n));
                }
                x
            }
        }
    }

    /// Lifts a covariance to an SDR-feasible matrix of this lift.
    pub fn from_covariance(self, problem: &SdrProblem, x: &CMat) -> CMat {
        match self {
            Lift::Covariance => x.clone(),
            Lift::Vectorized => self.embed(problem, x).unscale(problem.k_ul as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub lift: Lift,
    #[serde(skip)]
    pub sdp: SdpOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        ScaOptions {
            tol: 1e-4,
            max_iter: 50,
            lift: Lift::Covariance,
            sdp: SdpOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaState {
    pub tau_bar: Vec<f64>,
    /// Relaxation variable in the lift used to produce it.
    pub w_bar: CMat,
    pub objective: f64,
    pub iteration: usize,
}

impl ScaState {
    /// Linearization point from a feasible covariance, with `tau_bar` set to
    /// the interference terms it produces.
    pub fn from_covariance(problem: &SdrProblem, x: &CMat, lift: Lift) -> Self {
        let tau_bar = problem.tau_bar(x);
        let objective = problem.objective_from_tau(&tau_bar);
        ScaState {
            tau_bar,
            w_bar: lift.from_covariance(problem, x),
            objective,
            iteration: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub state: ScaState,
    /// Objective after each subproblem.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub newton_steps: usize,
    /// Largest barrier duality-gap bound over the subproblems.
    pub max_gap: f64,
}

/// Convex subproblem at linearization point `tau0`.
pub fn subproblem(problem: &SdrProblem, tau0: &[f64], lift: Lift) -> SdpProblem {
    let a = problem.interference_scale();
    let epigraphs = problem
        .interference
        .iter()
        .zip(tau0)
        .zip(&problem.gains)
        .map(|((q, &t0), &g)| Epigraph {
            mat: lift.embed(problem, q).scale(a),
            offset: problem.sigma_n2,
            weight: 1.0,
            shift: problem.p_ap * g,
            price: 1.0 / t0,
        })
        .collect();
    let target = problem.uplink_target();
    let log_floor = (target > 0.0).then(|| LogFloor {
        terms: problem
            .sensor
            .iter()
            .enumerate()
            .map(|(k, b)| LogTerm {
                weight: 1.0,
                mat: lift.embed(problem, b).scale(problem.uplink_coeff(k)),
            })
            .collect(),
        floor: target * LN_2,
    });
    SdpProblem {
        dim: lift.dim(problem),
        trace: problem.trace_budget,
        linear: None,
        log_objective: Vec::new(),
        epigraphs,
        log_floor,
    }
}

/// Runs SCA from `state` until the relative objective change drops below
/// `opts.tol` or `opts.max_iter` subproblems have been solved.
pub fn sca_iterate(problem: &SdrProblem, state: ScaState, opts: &ScaOptions) -> Result<ScaOutcome> {
    if problem.uplink_rate_upper_bound() < problem.r_ul_min {
        return Err(Error::Infeasible(format!(
            "uplink floor {:.4} exceeds the largest reachable rate {:.4}",
            problem.r_ul_min,
            problem.uplink_rate_upper_bound()
        )));
    }
    let mut state = state;
    let mut trace = Vec::new();
    let mut steps = 0;
    let mut max_gap: f64 = 0.0;
    let mut prev = state.objective;
    let mut converged = false;
    for it in 1..=opts.max_iter {
        let sdp = subproblem(problem, &state.tau_bar, opts.lift);
        let sol = solve_sdp(&sdp, &opts.sdp)?;
        steps += sol.newton_steps + sol.phase_one_steps;
        max_gap = max_gap.max(sol.gap_bound);
        if sol.status != SdpStatus::Converged {
            return Err(Error::Numerical(format!(
                "SCA subproblem stopped after {} Newton steps (gap bound {:.2e})",
                sol.newton_steps, sol.gap_bound
            )));
        }
        let objective = problem.objective_from_tau(&sol.t);
        trace.push(objective);
        state = ScaState {
            tau_bar: sol.t,
            w_bar: sol.x,
            objective,
            iteration: it,
        };
        if (objective - prev).abs() <= opts.tol * prev.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        prev = objective;
    }
    Ok(ScaOutcome {
        state,
        trace,
        converged,
        newton_steps: steps,
        max_gap,
    })
}

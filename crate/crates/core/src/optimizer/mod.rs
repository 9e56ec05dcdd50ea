//! Energy-beamformer design: a semidefinite relaxation solved by successive
//! convex approximation, rank-one recovery, and a one-dimensional search over
//! the time split `alpha`.
//!
//! ```no_run
//! use fdhap::model::{draw_channels, PathLossProfile, RngStream, SystemParams};
//! use fdhap::optimizer::{optimize, OptimizeOptions};
//!
//! let params = SystemParams::default();
//! let losses = PathLossProfile::unit(&params);
//! let ch = draw_channels(&params, &losses, RngStream::new(1, 0)).unwrap();
//! let res = optimize(&ch, &losses, None, &params, &[0.2, 0.5], 0.5,
//!                    &OptimizeOptions::default(), RngStream::new(1, 1)).unwrap();
//! println!("alpha* = {}, dl = {}", res.alpha_star, res.dl_sum_rate);
//! ```

pub mod problem;
pub mod recovery;
pub mod sca;
pub mod sdp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::mrt_energy_beams;
use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::linalg::CMat;
use crate::model::{ChannelRealization, PathLossProfile, RngStream, SystemParams};

pub use problem::{build_sdr_problem, ConstraintForm, SdrProblem};
pub use recovery::{recover_from_covariance, recover_rank_one, Recovery, RecoveryOptions, RecoveryStatus};
pub use sca::{sca_iterate, Lift, ScaOptions, ScaOutcome, ScaState};
pub use sdp::{solve_sdp, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

/// Default time-split grid `{0.01, 0.02, ..., 0.99}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeOptions {
    pub form: ConstraintForm,
    pub sca: ScaOptions,
    pub recovery: RecoveryOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizationStatus {
    Optimal,
    RankApproximated,
    Infeasible,
}

/// Outcome at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaDiagnostics {
    pub alpha: f64,
    /// `None` when the uplink floor cannot be met at this `alpha`.
    pub status: Option<RecoveryStatus>,
    pub dl_sum_rate: f64,
    pub ul_sum_rate: f64,
    /// Downlink objective of the relaxed solution.
    pub sdr_dl_sum_rate: f64,
    pub sca_iterations: usize,
    pub sca_converged: bool,
    pub newton_steps: usize,
    pub max_gap: f64,
    pub rank_one_gap: f64,
    pub covariance_rank: usize,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    #[serde(skip)]
    pub w_e: CMat,
    pub alpha_star: f64,
    pub dl_sum_rate: f64,
    pub ul_sum_rate: f64,
    pub sdr_dl_sum_rate: f64,
    pub sca_trace: Vec<f64>,
    pub rank_one_gap: f64,
    pub status: OptimizationStatus,
    pub per_alpha: Vec<AlphaDiagnostics>,
}

struct PointResult {
    diag: AlphaDiagnostics,
    w_e: Option<CMat>,
    trace: Vec<f64>,
    numerical: Option<Error>,
}

fn infeasible_point(alpha: f64, message: String) -> PointResult {
    PointResult {
        diag: AlphaDiagnostics {
            alpha,
            status: None,
            dl_sum_rate: 0.0,
            ul_sum_rate: 0.0,
            sdr_dl_sum_rate: 0.0,
            sca_iterations: 0,
            sca_converged: false,
            newton_steps: 0,
            max_gap: 0.0,
            rank_one_gap: 0.0,
            covariance_rank: 0,
            message: Some(message),
        },
        w_e: None,
        trace: Vec::new(),
        numerical: None,
    }
}

fn solve_point(problem: &SdrProblem, w_start: &CMat, opts: &OptimizeOptions, rng: RngStream) -> PointResult {
    let lift = opts.sca.lift;
    let x0 = SdrProblem::covariance(w_start);
    let state = ScaState::from_covariance(problem, &x0, lift);
    let outcome = match sca_iterate(problem, state, &opts.sca) {
        Ok(o) => o,
        Err(e @ Error::Infeasible(_)) => return infeasible_point(problem.alpha, e.to_string()),
        Err(e) => {
            let mut p = infeasible_point(problem.alpha, e.to_string());
            p.numerical = Some(e);
            return p;
        }
    };
    let w_bar = &outcome.state.w_bar;
    let x = lift.covariance(problem, w_bar);
    let rec = match lift {
        Lift::Covariance => recover_from_covariance(&x, problem, rng, &opts.recovery),
        Lift::Vectorized => recover_rank_one(w_bar, problem, rng, &opts.recovery),
    };
    let feasible = rec.status != RecoveryStatus::Failed;
    PointResult {
        diag: AlphaDiagnostics {
            alpha: problem.alpha,
            status: Some(rec.status),
            dl_sum_rate: rec.dl_rate,
            ul_sum_rate: rec.ul_rate,
            sdr_dl_sum_rate: problem.downlink_rate(&x),
            sca_iterations: outcome.trace.len(),
            sca_converged: outcome.converged,
            newton_steps: outcome.newton_steps,
            max_gap: outcome.max_gap,
            rank_one_gap: rec.rank_one_gap,
            covariance_rank: rec.covariance_rank,
            message: (!feasible).then(|| "no randomized candidate met the uplink floor".to_string()),
        },
        w_e: feasible.then_some(rec.w_e),
        trace: outcome.trace,
        numerical: None,
    }
}

fn check_grid(alpha_grid: &[f64]) -> Result<()> {
    if alpha_grid.is_empty() {
        return Err(Error::config("alpha_grid", "grid is empty"));
    }
    if let Some(a) = alpha_grid.iter().find(|a| !(0.0..1.0).contains(*a)) {
        return Err(Error::config("alpha_grid", format!("value {a} outside [0, 1)")));
    }
    Ok(())
}

/// Searches `alpha_grid` for the split and energy beamformer with the largest
/// downlink sum-rate subject to the uplink floor `r_ul_min`.
///
/// Grid points are solved independently (in parallel when a thread pool is
/// available); grid point `i` draws its randomization candidates from
/// `rng.child(i)`.
#[allow(clippy::too_many_arguments)]
pub fn optimize(
    channels: &ChannelRealization,
    losses: &PathLossProfile,
    estimate: Option<&ChannelEstimate>,
    params: &SystemParams,
    alpha_grid: &[f64],
    r_ul_min: f64,
    opts: &OptimizeOptions,
    rng: RngStream,
) -> Result<OptimizationResult> {
    check_grid(alpha_grid)?;
    let params = SystemParams { r_ul_min, ..params.clone() };
    params.validate()?;
    losses.validate(&params)?;
    let w_start = mrt_energy_beams(&channels.g_ap_ul)?;
    let problems = alpha_grid
        .iter()
        .map(|&a| build_sdr_problem(channels, losses, estimate, &params, a, opts.form))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<PointResult> = problems
        .par_iter()
        .enumerate()
        .map(|(i, pr)| solve_point(pr, &w_start, opts, rng.child(i as u64)))
        .collect();
    assemble(points)
}

fn assemble(points: Vec<PointResult>) -> Result<OptimizationResult> {
    let best = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.w_e.is_some())
        .max_by(|a, b| a.1.diag.dl_sum_rate.total_cmp(&b.1.diag.dl_sum_rate))
        .map(|(i, _)| i);
    let Some(i) = best else {
        if let Some(e) = points.iter().find_map(|p| p.numerical.as_ref()) {
            return Err(Error::Numerical(format!("no grid point solved: {e}")));
        }
        return Ok(OptimizationResult {
            w_e: CMat::zeros(0, 0),
            alpha_star: f64::NAN,
            dl_sum_rate: 0.0,
            ul_sum_rate: 0.0,
            sdr_dl_sum_rate: 0.0,
            sca_trace: Vec::new(),
            rank_one_gap: f64::NAN,
            status: OptimizationStatus::Infeasible,
            per_alpha: points.into_iter().map(|p| p.diag).collect(),
        });
    };
    let mut points = points;
    let w_e = points[i].w_e.take().expect("chosen point is feasible");
    let trace = std::mem::take(&mut points[i].trace);
    let d = points[i].diag.clone();
    Ok(OptimizationResult {
        w_e,
        alpha_star: d.alpha,
        dl_sum_rate: d.dl_sum_rate,
        ul_sum_rate: d.ul_sum_rate,
        sdr_dl_sum_rate: d.sdr_dl_sum_rate,
        sca_trace: trace,
        rank_one_gap: d.rank_one_gap,
        status: match d.status {
            Some(RecoveryStatus::Optimal) => OptimizationStatus::Optimal,
            _ => OptimizationStatus::RankApproximated,
        },
        per_alpha: points.into_iter().map(|p| p.diag).collect(),
    })
}

/// MRT energy beamformer evaluated on the same grid and objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineResult {
    pub alpha_star: f64,
    pub dl_sum_rate: f64,
    pub ul_sum_rate: f64,
    pub feasible: bool,
}

pub fn mrt_energy_baseline(
    channels: &ChannelRealization,
    losses: &PathLossProfile,
    estimate: Option<&ChannelEstimate>,
    params: &SystemParams,
    alpha_grid: &[f64],
    r_ul_min: f64,
    form: ConstraintForm,
) -> Result<BaselineResult> {
    check_grid(alpha_grid)?;
    let params = SystemParams { r_ul_min, ..params.clone() };
    let w = mrt_energy_beams(&channels.g_ap_ul)?;
    let mut best = BaselineResult {
        alpha_star: f64::NAN,
        dl_sum_rate: 0.0,
        ul_sum_rate: 0.0,
        feasible: false,
    };
    for &a in alpha_grid {
        let pr = build_sdr_problem(channels, losses, estimate, &params, a, form)?;
        let (dl, ul) = pr.evaluate_beam(&w);
        if pr.meets_uplink(ul, 1e-9) && (!best.feasible || dl > best.dl_sum_rate) {
            best = BaselineResult {
                alpha_star: a,
                dl_sum_rate: dl,
                ul_sum_rate: ul,
                feasible: true,
            };
        }
    }
    Ok(best)
}

//! Extraction of a concrete energy beamformer `W_E` from a relaxed solution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::problem::SdrProblem;
use crate::linalg::{devec_cols, frob_sqr, herm_eigen, CMat, CVec, HermEigen};
use crate::model::{complex_gaussian, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryStatus {
    /// The relaxation is tight: the returned beamformer attains it.
    Optimal,
    /// Best feasible Gaussian-randomization candidate.
    RankApproximated,
    /// No candidate met the uplink constraint.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Rank-one test threshold on eigenvalue ratios.
    pub threshold: f64,
    pub candidates: usize,
    /// Slack allowed on the uplink floor when checking candidates.
    pub feasibility_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            threshold: 1e-6,
            candidates: 500,
            feasibility_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub w_e: CMat,
    pub status: RecoveryStatus,
    /// Distance from an exact factorization: `lambda_2 / lambda_1` of the
    /// vectorized relaxation, or `lambda_{K_u + 1} / lambda_1` of the
    /// covariance, which vanishes exactly when it has rank at most `K_u`.
    pub rank_one_gap: f64,
    /// Numerical rank of the transmit covariance.
    pub covariance_rank: usize,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub candidates_tried: usize,
}

fn ratio(values: &[f64], i: usize) -> f64 {
    if values.len() <= i || values[0] <= 0.0 {
        0.0
    } else {
        (values[i] / values[0]).max(0.0)
    }
}

fn numerical_rank(values: &[f64], threshold: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    values.iter().filter(|&&v| v > threshold * top).count()
}

fn finish(problem: &SdrProblem, w_e: CMat, status: RecoveryStatus, gap: f64, rank: usize, tried: usize) -> Recovery {
    let (dl_rate, ul_rate) = problem.evaluate_beam(&w_e);
    Recovery {
        w_e,
        status,
        rank_one_gap: gap,
        covariance_rank: rank,
        dl_rate,
        ul_rate,
        candidates_tried: tried,
    }
}

/// Beamformer from the vectorized relaxation `W̄` (size `N_t K_u`).
pub fn recover_rank_one(w_bar: &CMat, problem: &SdrProblem, rng: RngStream, opts: &RecoveryOptions) -> Recovery {
    let (nt, ku) = (problem.n_tx, problem.k_ul);
    let eig = herm_eigen(w_bar);
    let gap = ratio(&eig.values, 1);
    if gap < opts.threshold {
        let v: CVec = eig.vectors.column(0).scale(problem.trace_budget.sqrt());
        let w = devec_cols(&v, nt, ku);
        let rank = numerical_rank(&herm_eigen(&SdrProblem::covariance(&w)).values, opts.threshold);
        return finish(problem, w, RecoveryStatus::Optimal, gap, rank, 0);
    }
    let x = super::sca::Lift::Vectorized.covariance(problem, w_bar);
    let xe = herm_eigen(&x);
    if let Some(r) = exact_factor(problem, &xe, opts) {
        return r;
    }
    let sqrt = psd_sqrt(&eig);
    randomize(problem, &xe, gap, opts, rng, |rng| {
        let z = CVec::from_fn(nt * ku, |_, _| complex_gaussian(rng, 1.0));
        devec_cols(&(&sqrt * z), nt, ku)
    })
}

/// Beamformer from a transmit covariance `X` with `tr X = K_u`.
///
/// Any `X` of rank at most `K_u` factors exactly as `W_E W_E^†`, which is a
/// rank-one point of the vectorized relaxation. Otherwise candidates are drawn
/// from `vec(W_E) ~ CN(0, I ⊗ X / K_u)`, an optimal point of the vectorized
/// relaxation with the same covariance.
pub fn recover_from_covariance(x: &CMat, problem: &SdrProblem, rng: RngStream, opts: &RecoveryOptions) -> Recovery {
    let (nt, ku) = (problem.n_tx, problem.k_ul);
    let xe = herm_eigen(x);
    if let Some(r) = exact_factor(problem, &xe, opts) {
        return r;
    }
    let gap = ratio(&xe.values, ku);
    let sqrt = psd_sqrt(&xe).unscale((ku as f64).sqrt());
    randomize(problem, &xe, gap, opts, rng, |rng| {
        let z = CMat::from_fn(nt, ku, |_, _| complex_gaussian(rng, 1.0));
        &sqrt * z
    })
}

fn psd_sqrt(e: &HermEigen) -> CMat {
    let mut s = e.vectors.clone();
    for (j, &v) in e.values.iter().enumerate() {
        s.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    s
}

/// Columns `sqrt(lambda_i) u_i`, `i < K_u`, rescaled to the trace budget.
fn truncated_factor(problem: &SdrProblem, xe: &HermEigen) -> CMat {
    let (nt, ku) = (problem.n_tx, problem.k_ul);
    let mut w = CMat::zeros(nt, ku);
    for i in 0..ku.min(nt) {
        let col = xe.vectors.column(i).scale(xe.values[i].max(0.0).sqrt());
        w.set_column(i, &col);
    }
    normalize(problem, w)
}

fn normalize(problem: &SdrProblem, mut w: CMat) -> CMat {
    let f = frob_sqr(&w);
    if f > 0.0 {
        w.scale_mut((problem.trace_budget / f).sqrt());
    }
    w
}

fn exact_factor(problem: &SdrProblem, xe: &HermEigen, opts: &RecoveryOptions) -> Option<Recovery> {
    let rank = numerical_rank(&xe.values, opts.threshold);
    if rank > problem.k_ul {
        return None;
    }
    let w = truncated_factor(problem, xe);
    Some(finish(problem, w, RecoveryStatus::Optimal, 0.0, rank, 0))
}

fn randomize(
    problem: &SdrProblem,
    xe: &HermEigen,
    gap: f64,
    opts: &RecoveryOptions,
    rng: RngStream,
    mut draw: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> CMat,
) -> Recovery {
    let rank = numerical_rank(&xe.values, opts.threshold);
    let mut rng = rng.rng();
    let mut best: Option<(f64, f64, CMat)> = None;
    let mut consider = |w: CMat| {
        let (dl, ul) = problem.evaluate_beam(&w);
        if problem.meets_uplink(ul, opts.feasibility_tol) && best.as_ref().map_or(true, |b| dl > b.0) {
            best = Some((dl, ul, w));
        }
    };
    consider(truncated_factor(problem, xe));
    for _ in 0..opts.candidates {
        let w = draw(&mut rng);
        consider(normalize(problem, w));
    }
    // keep the stream position independent of how many candidates were feasible
    let _: u64 = rng.random();
    match best {
        Some((_, _, w)) => finish(problem, w, RecoveryStatus::RankApproximated, gap, rank, opts.candidates + 1),
        None => finish(
            problem,
            truncated_factor(problem, xe),
            RecoveryStatus::Failed,
            gap,
            rank,
            opts.candidates + 1,
        ),
    }
}

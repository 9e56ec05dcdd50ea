//! Monte Carlo estimates of the ergodic rates and the two system experiments
//! (uplink/downlink rate region, uplink sum-rate versus array size).
//!
//! Path losses stay fixed for a whole plan; only small-scale fading is
//! redrawn. Trial `i` uses `RngStream::new(base_seed, 0).child(i)` and results
//! are reduced in trial order, so estimates do not depend on scheduling.
//!
//! ```no_run
//! use fdhap::model::{PathLossProfile, SystemParams};
//! use fdhap::montecarlo::{mc_rates, TrialPlan};
//!
//! let params = SystemParams::default();
//! let plan = TrialPlan::new(params.clone(), PathLossProfile::unit(&params), 2000, 7);
//! let r = mc_rates(&plan).unwrap();
//! println!("uplink sum {:.3} +- {:.3}", r.uplink_sum.mean, r.uplink_sum.std_error);
//! ```

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    uplink_rate_asymptote_icsi, uplink_rate_asymptote_pcsi, uplink_rate_lower_bound_icsi_with,
    uplink_rate_lower_bound_with, uplink_sum, RateBoundInputs, UplinkBoundForm,
};
use crate::beamforming::{mrc_receive, mrt_energy_beams, mrt_transmit};
use crate::error::{Error, Result};
use crate::estimation::{design_training, estimate_channels, estimate_variance_si, estimate_variance_user, TrainingDesign};
use crate::linalg::{col_norm_sqr, herm_eigen, CMat};
use crate::model::{complex_gaussian, draw_channels_with, ChannelRealization, PathLossProfile, RngStream, SystemParams};
use crate::optimizer::{mrt_energy_baseline, optimize, OptimizationStatus, OptimizeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiMode {
    #[default]
    Perfect,
    /// User and SI channels known through MMSE training only.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamMode {
    #[default]
    MrtBaseline,
    /// Energy beams from [`optimize`] at the plan's `alpha` and uplink floor.
    Optimized,
}

/// Which SINR expression is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModel {
    /// Instantaneous SINRs with MRC/MRT and the actual energy beams.
    #[default]
    Exact,
    /// Large-array forms where the energy beam gain is replaced by its
    /// asymptotic value `N_t beta`.
    LargeAntenna,
}

#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub n_trials: usize,
    pub base_seed: u64,
    pub params: SystemParams,
    pub losses: PathLossProfile,
    pub csi_mode: CsiMode,
    pub beam_mode: BeamMode,
    pub model: RateModel,
    /// Options passed to the optimizer when `beam_mode` is `Optimized` and by
    /// [`rate_region`].
    pub optimize: OptimizeOptions,
}

impl TrialPlan {
    /// Perfect CSI, MRT energy beams, exact SINRs.
    pub fn new(params: SystemParams, losses: PathLossProfile, n_trials: usize, base_seed: u64) -> Self {
        TrialPlan {
            n_trials,
            base_seed,
            params,
            losses,
            csi_mode: CsiMode::Perfect,
            beam_mode: BeamMode::MrtBaseline,
            model: RateModel::Exact,
            optimize: OptimizeOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::config("n_trials", "must be at least 1"));
        }
        self.params.validate()?;
        self.losses.validate(&self.params)?;
        if self.csi_mode == CsiMode::Estimated {
            design_training(&self.params)?;
        }
        Ok(())
    }

    pub fn trial_stream(&self, i: usize) -> RngStream {
        RngStream::new(self.base_seed, 0).child(i as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
}

impl RateEstimate {
    /// Sample mean and `sample_std / sqrt(n)`, summed in slice order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return RateEstimate { mean: f64::NAN, std_error: f64::NAN, n_trials: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        RateEstimate { mean, std_error, n_trials: n }
    }
}

/// Per-sensor, per-user and sum-rate estimates from one pass over the trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McRates {
    pub uplink: Vec<RateEstimate>,
    pub downlink: Vec<RateEstimate>,
    pub uplink_sum: RateEstimate,
    pub downlink_sum: RateEstimate,
    /// Downlink rates from the across-trial moments of the effective channel,
    /// computed in both CSI modes. In the estimated mode these equal
    /// `downlink`.
    pub downlink_hardening: Vec<RateEstimate>,
    /// Trials where `Optimized` beams fell back to MRT because the uplink
    /// floor could not be met.
    pub fallbacks: usize,
}

/// Square factor `L` with `L L^† = a` for a Gram matrix.
fn gram_factor(a: &CMat) -> CMat {
    if let Some(c) = a.clone().cholesky() {
        return c.l();
    }
    let e = herm_eigen(a);
    let mut s = e.vectors.clone();
    for (j, &v) in e.values.iter().enumerate() {
        s.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    s
}

/// Sample of `W_r^† H^T W_t` for `H` with i.i.d. `CN(0, var)` entries.
///
/// The product is matrix-normal with row covariance `W_r^† W_r` and column
/// covariance `(W_t^† W_t)^*`, so it is drawn from a `K_u x K_d` Gaussian
/// instead of the full `N_r x N_t` matrix.
pub fn si_projection<R: Rng + ?Sized>(rng: &mut R, w_r: &CMat, w_t: &CMat, var: f64) -> CMat {
    let (ku, kd) = (w_r.ncols(), w_t.ncols());
    if ku == 0 || kd == 0 || var == 0.0 {
        return CMat::zeros(ku, kd);
    }
    let la = gram_factor(&w_r.ad_mul(w_r));
    let lb = gram_factor(&w_t.ad_mul(w_t).map(|z| z.conj()));
    let z = CMat::from_fn(ku, kd, |_, _| complex_gaussian(rng, var));
    la * z * lb.transpose()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: impl Fn(usize) -> f64) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        let v = var(j);
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng, v);
        }
    }
    m
}

/// Quantities one trial contributes.
struct TrialSample {
    ul: Vec<f64>,
    dl: Vec<f64>,
    /// Per user: effective gain `g_k^T w_t,k` and interference-plus-sensor
    /// power excluding noise.
    dl_moments: Vec<(Complex64, f64)>,
    fallback: bool,
}

fn bits(alpha: f64, sinr: f64) -> f64 {
    (1.0 - alpha) * sinr.ln_1p() / std::f64::consts::LN_2
}

fn energy_beams(plan: &TrialPlan, g_ul: &CMat, g_dl_hat: &CMat, stream: RngStream) -> Result<(CMat, bool)> {
    let mrt = mrt_energy_beams(g_ul)?;
    if plan.beam_mode == BeamMode::MrtBaseline || plan.params.k_ul == 0 {
        return Ok((mrt, false));
    }
    let p = &plan.params;
    // the optimizer sees only the sensor channels and the (estimated) user channels
    let ch = ChannelRealization {
        g_ap_dl: g_dl_hat.clone(),
        h_si: CMat::zeros(p.n_rx, p.n_tx),
        g_ap_ul: g_ul.clone(),
        g_dl_ul: CMat::zeros(p.k_dl, p.k_ul),
        g_ul_dl: CMat::zeros(p.k_ul, p.k_dl),
    };
    let res = optimize(&ch, &plan.losses, None, p, &[p.alpha], p.r_ul_min, &plan.optimize, stream)?;
    if res.status == OptimizationStatus::Infeasible {
        return Ok((mrt, true));
    }
    Ok((res.w_e, false))
}

fn run_trial(plan: &TrialPlan, stream: RngStream) -> Result<TrialSample> {
    let p = &plan.params;
    let l = &plan.losses;
    let (nt, nr, ku, kd) = (p.n_tx, p.n_rx, p.k_ul, p.k_dl);
    let mut rng = stream.rng();
    let g_ul = gaussian(&mut rng, nt, ku, |k| l.beta_ap_ul[k]);
    let (g_dl, g_dl_hat, si_var) = match plan.csi_mode {
        CsiMode::Perfect => {
            let g = gaussian(&mut rng, nr, kd, |k| l.beta_ap_dl[k]);
            (g.clone(), g, p.sigma_si2)
        }
        CsiMode::Estimated => {
            let hat = gaussian(&mut rng, nr, kd, |k| estimate_variance_user(p, l.beta_ap_dl[k]));
            let err = gaussian(&mut rng, nr, kd, |k| l.beta_ap_dl[k] - estimate_variance_user(p, l.beta_ap_dl[k]));
            (&hat + err, hat, p.sigma_si2 - estimate_variance_si(p))
        }
    };
    // entry (l, k): sensor l -> user k
    let g_ud = CMat::from_fn(ku, kd, |s, u| complex_gaussian(&mut rng, l.beta_ul_dl[(u, s)]));
    let w_r = mrc_receive(&g_ul)?;
    let w_t = mrt_transmit(&g_dl_hat)?;
    let si = si_projection(&mut rng, &w_r, &w_t, si_var);
    let (w_e, fallback) = energy_beams(plan, &g_ul, &g_dl_hat, stream.child(1))?;

    let kappa = p.kappa();
    let harvested = g_ul.tr_mul(&w_e);
    let p_ul: Vec<f64> = (0..ku).map(|s| kappa * p.p_ap * harvested.row(s).norm_squared()).collect();
    let big = kappa * p.p_ap * nt as f64;

    let proj = w_r.ad_mul(&g_ul);
    let mut ul = Vec::with_capacity(ku);
    for k in 0..ku {
        let si_pow = p.p_ap * si.row(k).norm_squared() + p.sigma_n2;
        let sinr = match plan.model {
            RateModel::Exact => {
                let inter: f64 = (0..ku).filter(|&j| j != k).map(|j| p_ul[j] * proj[(k, j)].norm_sqr()).sum();
                p_ul[k] * proj[(k, k)].norm_sqr() / (inter + si_pow)
            }
            RateModel::LargeAntenna => {
                let inter: f64 = (0..ku)
                    .filter(|&j| j != k)
                    .map(|j| l.beta_ap_ul[j] * proj[(k, j)].norm_sqr())
                    .sum();
                big * l.beta_ap_ul[k] * col_norm_sqr(&g_ul, k) / (big * inter + si_pow)
            }
        };
        ul.push(bits(p.alpha, sinr));
    }

    let eff = g_dl.tr_mul(&w_t);
    let mut dl = Vec::with_capacity(kd);
    let mut dl_moments = Vec::new();
    for k in 0..kd {
        let users: f64 = (0..kd).filter(|&j| j != k).map(|j| eff[(k, j)].norm_sqr()).sum::<f64>() * p.p_ap;
        let sensors_exact: f64 = (0..ku).map(|s| p_ul[s] * g_ud[(s, k)].norm_sqr()).sum();
        let sinr = match plan.model {
            RateModel::Exact => p.p_ap * eff[(k, k)].norm_sqr() / (users + sensors_exact + p.sigma_n2),
            RateModel::LargeAntenna => {
                let sensors: f64 = (0..ku).map(|s| l.beta_ap_ul[s] * g_ud[(s, k)].norm_sqr()).sum::<f64>() * big;
                p.p_ap * col_norm_sqr(&g_dl, k) / (users + sensors + p.sigma_n2)
            }
        };
        dl.push(bits(p.alpha, sinr));
        dl_moments.push((eff[(k, k)], users + sensors_exact));
    }
    Ok(TrialSample { ul, dl, dl_moments, fallback })
}

fn run_trials(plan: &TrialPlan) -> Result<Vec<TrialSample>> {
    plan.validate()?;
    (0..plan.n_trials)
        .into_par_iter()
        .map(|i| run_trial(plan, plan.trial_stream(i)))
        .collect()
}

const DL_BATCHES: usize = 20;

/// Rate from the across-trial moments of the effective downlink channel:
/// the known mean gain is the signal, its fluctuation is noise.
fn empirical_downlink(params: &SystemParams, moments: &[(Complex64, f64)]) -> f64 {
    let n = moments.len() as f64;
    let mean: Complex64 = moments.iter().map(|m| m.0).sum::<Complex64>() / n;
    let second: f64 = moments.iter().map(|m| m.0.norm_sqr()).sum::<f64>() / n;
    let var = (second - mean.norm_sqr()).max(0.0);
    let interference: f64 = moments.iter().map(|m| m.1).sum::<f64>() / n;
    let sinr = params.p_ap * mean.norm_sqr() / (params.p_ap * var + interference + params.sigma_n2);
    bits(params.alpha, sinr)
}

/// Full-sample rate with a batch-means standard error.
fn empirical_downlink_estimate(params: &SystemParams, moments: &[(Complex64, f64)]) -> RateEstimate {
    let n = moments.len();
    let mean = empirical_downlink(params, moments);
    let batches = DL_BATCHES.min(n / 2);
    let std_error = if batches >= 2 {
        let size = n / batches;
        let per: Vec<f64> = (0..batches)
            .map(|b| empirical_downlink(params, &moments[b * size..(b + 1) * size]))
            .collect();
        RateEstimate::from_samples(&per).std_error
    } else {
        0.0
    };
    RateEstimate { mean, std_error, n_trials: n }
}

/// All per-link and sum-rate estimates of a plan.
///
/// With estimated CSI the downlink rates use the across-trial mean and
/// variance of `g_k^T w_t,k` and the mean interference, so the per-user
/// estimates are not averages of per-trial rates; their standard errors come
/// from batch means.
pub fn mc_rates(plan: &TrialPlan) -> Result<McRates> {
    let samples = run_trials(plan)?;
    let p = &plan.params;
    let column = |f: &dyn Fn(&TrialSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let uplink: Vec<RateEstimate> = (0..p.k_ul)
        .map(|k| RateEstimate::from_samples(&column(&|s| s.ul[k])))
        .collect();
    let uplink_sum = RateEstimate::from_samples(&column(&|s| s.ul.iter().sum()));
    let downlink_hardening: Vec<RateEstimate> = (0..p.k_dl)
        .map(|k| {
            let m: Vec<(Complex64, f64)> = samples.iter().map(|s| s.dl_moments[k]).collect();
            empirical_downlink_estimate(p, &m)
        })
        .collect();
    let (downlink, downlink_sum) = match plan.csi_mode {
        CsiMode::Perfect => (
            (0..p.k_dl)
                .map(|k| RateEstimate::from_samples(&column(&|s| s.dl[k])))
                .collect(),
            RateEstimate::from_samples(&column(&|s| s.dl.iter().sum())),
        ),
        CsiMode::Estimated => {
            let per = downlink_hardening.clone();
            let mean = per.iter().map(|r| r.mean).sum();
            // users are treated as independent for the sum's error
            let se = per.iter().map(|r| r.std_error * r.std_error).sum::<f64>().sqrt();
            (per, RateEstimate { mean, std_error: se, n_trials: plan.n_trials })
        }
    };
    Ok(McRates {
        uplink,
        downlink,
        uplink_sum,
        downlink_sum,
        downlink_hardening,
        fallbacks: samples.iter().filter(|s| s.fallback).count(),
    })
}

/// Ergodic rate of sensor `k`.
pub fn mc_uplink_rate(plan: &TrialPlan, k: usize) -> Result<RateEstimate> {
    if k >= plan.params.k_ul {
        return Err(Error::Domain(format!("sensor index {k} out of range (K_u = {})", plan.params.k_ul)));
    }
    Ok(mc_rates(plan)?.uplink[k])
}

/// Ergodic rate of downlink user `k`.
pub fn mc_downlink_rate(plan: &TrialPlan, k: usize) -> Result<RateEstimate> {
    if k >= plan.params.k_dl {
        return Err(Error::Domain(format!("user index {k} out of range (K_d = {})", plan.params.k_dl)));
    }
    Ok(mc_rates(plan)?.downlink[k])
}

/// Averaged operating point of one frontier at one uplink floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub r_ul_min: f64,
    pub ul_sum_rate: f64,
    pub dl_sum_rate: f64,
    /// Mean relaxed downlink objective (optimized frontier only).
    pub sdr_dl_sum_rate: Option<f64>,
    /// Realizations where the floor was met; averages are over these.
    pub feasible_trials: usize,
    pub n_trials: usize,
}

impl FrontierPoint {
    pub fn infeasible(&self) -> bool {
        self.feasible_trials == 0
    }
}

/// One realization at one floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionTrial {
    pub trial: usize,
    pub r_ul_min: f64,
    pub optimized: Option<RegionOutcome>,
    pub baseline: Option<RegionOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOutcome {
    pub alpha: f64,
    pub ul_sum_rate: f64,
    pub dl_sum_rate: f64,
    /// Best relaxed downlink objective over the feasible grid points.
    pub sdr_dl_sum_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRegion {
    pub optimized: Vec<FrontierPoint>,
    pub baseline: Vec<FrontierPoint>,
    pub trials: Vec<RegionTrial>,
}

fn region_trial(
    plan: &TrialPlan,
    design: &Option<TrainingDesign>,
    trial: usize,
    r_ul_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<Vec<RegionTrial>> {
    let p = &plan.params;
    let stream = plan.trial_stream(trial);
    let mut rng = stream.rng();
    let ch = draw_channels_with(p, &plan.losses, &mut rng);
    let est = match plan.csi_mode {
        CsiMode::Perfect => None,
        CsiMode::Estimated => Some(estimate_channels(&ch, &plan.losses, design.as_ref().unwrap(), p, &mut rng)?),
    };
    let mut out = Vec::with_capacity(r_ul_grid.len());
    for (j, &r) in r_ul_grid.iter().enumerate() {
        let res = optimize(&ch, &plan.losses, est.as_ref(), p, alpha_grid, r, &plan.optimize, stream.child(j as u64))?;
        let optimized = (res.status != OptimizationStatus::Infeasible).then(|| RegionOutcome {
            alpha: res.alpha_star,
            ul_sum_rate: res.ul_sum_rate,
            dl_sum_rate: res.dl_sum_rate,
            sdr_dl_sum_rate: res
                .per_alpha
                .iter()
                .filter(|d| d.status.is_some())
                .map(|d| d.sdr_dl_sum_rate)
                .fold(f64::NEG_INFINITY, f64::max),
        });
        let b = mrt_energy_baseline(&ch, &plan.losses, est.as_ref(), p, alpha_grid, r, plan.optimize.form)?;
        let baseline = b.feasible.then_some(RegionOutcome {
            alpha: b.alpha_star,
            ul_sum_rate: b.ul_sum_rate,
            dl_sum_rate: b.dl_sum_rate,
            sdr_dl_sum_rate: b.dl_sum_rate,
        });
        out.push(RegionTrial { trial, r_ul_min: r, optimized, baseline });
    }
    Ok(out)
}

fn frontier(trials: &[RegionTrial], r: f64, n: usize, pick: impl Fn(&RegionTrial) -> Option<RegionOutcome>, sdr: bool) -> FrontierPoint {
    let hits: Vec<RegionOutcome> = trials.iter().filter(|t| t.r_ul_min == r).filter_map(&pick).collect();
    let m = hits.len();
    let avg = |f: fn(&RegionOutcome) -> f64| {
        if m == 0 {
            f64::NAN
        } else {
            hits.iter().map(f).sum::<f64>() / m as f64
        }
    };
    FrontierPoint {
        r_ul_min: r,
        ul_sum_rate: avg(|o| o.ul_sum_rate),
        dl_sum_rate: avg(|o| o.dl_sum_rate),
        sdr_dl_sum_rate: sdr.then(|| avg(|o| o.sdr_dl_sum_rate)),
        feasible_trials: m,
        n_trials: n,
    }
}

/// Sum-rate pairs of the optimized design and of the MRT energy baseline for
/// each uplink floor, averaged over `plan.n_trials` realizations.
///
/// The plan's `beam_mode`, `model` and `params.alpha` are ignored: `alpha` is
/// searched over `alpha_grid` and rates are the optimizer's objectives.
pub fn rate_region(plan: &TrialPlan, r_ul_grid: &[f64], alpha_grid: &[f64]) -> Result<RateRegion> {
    plan.validate()?;
    if r_ul_grid.is_empty() {
        return Err(Error::config("r_ul_grid", "grid is empty"));
    }
    if alpha_grid.is_empty() {
        return Err(Error::config("alpha_grid", "grid is empty"));
    }
    if let Some(r) = r_ul_grid.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::config("r_ul_grid", format!("floor {r} must be nonnegative")));
    }
    let design = match plan.csi_mode {
        CsiMode::Perfect => None,
        CsiMode::Estimated => Some(design_training(&plan.params)?),
    };
    let per: Vec<Vec<RegionTrial>> = (0..plan.n_trials)
        .into_par_iter()
        .map(|t| region_trial(plan, &design, t, r_ul_grid, alpha_grid))
        .collect::<Result<_>>()?;
    let trials: Vec<RegionTrial> = per.into_iter().flatten().collect();
    let n = plan.n_trials;
    Ok(RateRegion {
        optimized: r_ul_grid.iter().map(|&r| frontier(&trials, r, n, |t| t.optimized, true)).collect(),
        baseline: r_ul_grid.iter().map(|&r| frontier(&trials, r, n, |t| t.baseline, false)).collect(),
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLaw {
    /// `P_A = E_A / N_t^2`.
    InvSquare,
    /// `P_A = E_A / N_t`.
    InvLinear,
}

impl PowerLaw {
    pub fn power(self, e_ap: f64, n_tx: usize) -> f64 {
        match self {
            PowerLaw::InvSquare => e_ap / (n_tx * n_tx) as f64,
            PowerLaw::InvLinear => e_ap / n_tx as f64,
        }
    }
}

/// One array size of the scaling experiment; all rates are uplink sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_tx: usize,
    pub p_ap: f64,
    pub mc_rate: RateEstimate,
    pub bound: f64,
    pub asymptote: f64,
}

/// Uplink sum-rate versus `N_t` with the HAP power scaled by `power_law`.
///
/// `InvSquare` pairs with perfect CSI and the perfect-CSI bound; `InvLinear`
/// with the estimated-CSI bound. The plan's `csi_mode` selects the Monte
/// Carlo channel knowledge; `n_tx` and `p_ap` are overridden per row and the
/// pilot length is raised to `K_d + N_t` when needed. Row `i` uses base seed
/// `base_seed + i`.
pub fn scaling_experiment(
    plan: &TrialPlan,
    n_tx_list: &[usize],
    e_ap: f64,
    power_law: PowerLaw,
    form: UplinkBoundForm,
) -> Result<Vec<ScalingRow>> {
    if n_tx_list.is_empty() {
        return Err(Error::config("n_tx_list", "grid is empty"));
    }
    if n_tx_list.windows(2).any(|w| w[1] <= w[0]) || n_tx_list[0] < 2 {
        return Err(Error::config("n_tx_list", "must be increasing with every entry at least 2"));
    }
    if !(e_ap.is_finite() && e_ap >= 0.0) {
        return Err(Error::config("e_ap", format!("must be nonnegative, got {e_ap}")));
    }
    let mut rows = Vec::with_capacity(n_tx_list.len());
    for (i, &n) in n_tx_list.iter().enumerate() {
        let p_ap = power_law.power(e_ap, n);
        let mut params = SystemParams { n_tx: n, p_ap, ..plan.params.clone() };
        params.tau = params.tau.max(params.k_dl + n);
        let inputs = RateBoundInputs { params: params.clone(), losses: plan.losses.clone(), e_ap };
        if p_ap == 0.0 {
            rows.push(ScalingRow {
                n_tx: n,
                p_ap,
                mc_rate: RateEstimate { mean: 0.0, std_error: 0.0, n_trials: plan.n_trials },
                bound: 0.0,
                asymptote: 0.0,
            });
            continue;
        }
        let sub = TrialPlan {
            params: params.clone(),
            base_seed: plan.base_seed.wrapping_add(i as u64),
            ..plan.clone()
        };
        let mc = mc_rates(&sub)?;
        let (bound, asymptote) = match power_law {
            PowerLaw::InvSquare => (
                uplink_sum(&inputs, |x, k| uplink_rate_lower_bound_with(x, k, form))?,
                uplink_sum(&inputs, uplink_rate_asymptote_pcsi)?,
            ),
            PowerLaw::InvLinear => (
                uplink_sum(&inputs, |x, k| uplink_rate_lower_bound_icsi_with(x, k, form))?,
                uplink_sum(&inputs, uplink_rate_asymptote_icsi)?,
            ),
        };
        rows.push(ScalingRow { n_tx: n, p_ap, mc_rate: mc.uplink_sum, bound, asymptote });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use rand_chacha::rand_core::SeedableRng;

    fn small() -> SystemParams {
        SystemParams {
            n_tx: 8,
            n_rx: 16,
            k_ul: 2,
            k_dl: 3,
            tau: 11,
            ..SystemParams::default()
        }
    }

    #[test]
    fn estimate_from_constant_samples_has_zero_error() {
        let r = RateEstimate::from_samples(&[1.5; 17]);
        assert_eq!(r.mean, 1.5);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.n_trials, 17);
    }

    #[test]
    fn identical_plans_are_bit_identical() {
        let p = small();
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 300, 11);
        let a = mc_rates(&plan).unwrap();
        let b = mc_rates(&plan).unwrap();
        assert_eq!(a.uplink_sum.mean.to_bits(), b.uplink_sum.mean.to_bits());
        assert_eq!(a.downlink[2].std_error.to_bits(), b.downlink[2].std_error.to_bits());
    }

    #[test]
    fn sum_matches_per_sensor_means() {
        let p = small();
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 400, 3);
        let r = mc_rates(&plan).unwrap();
        let per: f64 = r.uplink.iter().map(|e| e.mean).sum();
        assert!((per - r.uplink_sum.mean).abs() < 1e-12);
        assert_eq!(mc_uplink_rate(&plan, 1).unwrap(), r.uplink[1]);
    }

    #[test]
    fn standard_error_shrinks_with_trials() {
        let p = small();
        let a = mc_uplink_rate(&TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 2000, 5), 0).unwrap();
        let b = mc_uplink_rate(&TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 4000, 5), 0).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.08, "ratio {ratio}");
    }

    #[test]
    fn si_projection_has_matrix_normal_second_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (nt, nr) = (5, 6);
        let w_r = mrc_receive(&gaussian(&mut rng, nt, 2, |_| 1.0)).unwrap();
        let w_t = mrt_transmit(&gaussian(&mut rng, nr, 2, |_| 1.0)).unwrap();
        let trials = 40_000;
        let (mut fast, mut direct) = (CMat::zeros(4, 4), CMat::zeros(4, 4));
        let flat = |m: &CMat| nalgebra::DVector::from_iterator(4, m.iter().copied());
        for _ in 0..trials {
            let a = flat(&si_projection(&mut rng, &w_r, &w_t, 2.0));
            fast += &a * a.adjoint();
            let h = gaussian(&mut rng, nr, nt, |_| 2.0);
            let b = flat(&(w_r.adjoint() * h.transpose() * &w_t));
            direct += &b * b.adjoint();
        }
        let diff = (fast - direct).unscale(trials as f64);
        assert!(diff.norm() < 0.12, "{diff}");
    }

    #[test]
    fn single_sensor_without_si_matches_gamma_expectation() {
        let p = SystemParams {
            n_tx: 4,
            n_rx: 4,
            k_ul: 1,
            k_dl: 0,
            tau: 1,
            p_ap: 2.0,
            alpha: 0.4,
            ..SystemParams::default()
        };
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 20_000, 8);
        let est = mc_uplink_rate(&plan, 0).unwrap();
        // SINR = kappa P_A X^2 / sigma^2 with X ~ Gamma(N_t, 1)
        let c = p.kappa() * p.p_ap / p.sigma_n2;
        let density = |x: f64| x.powi(3) * (-x).exp() / 6.0;
        let exact = integrate(|x| density(x) * (1.0 + c * x * x).log2(), 0.0, 60.0, 1e-12, 1e-14, 200)
            .unwrap()
            .value
            * (1.0 - p.alpha);
        assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{} vs {exact}", est.mean);
    }

    #[test]
    fn estimated_downlink_approaches_perfect_at_high_pilot_power() {
        let p = SystemParams { p_dl: 1e6, ..small() };
        let mut plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 4000, 2);
        let perfect: f64 = mc_rates(&plan).unwrap().downlink_hardening.iter().map(|r| r.mean).sum();
        plan.csi_mode = CsiMode::Estimated;
        let est = mc_rates(&plan).unwrap().downlink_sum.mean;
        assert!((est - perfect).abs() < 0.02 * perfect, "{est} vs {perfect}");
        plan.params.p_dl = 1e-2;
        let poor = mc_rates(&plan).unwrap().downlink_sum.mean;
        assert!(poor < 0.9 * est);
    }

    #[test]
    fn zero_energy_scaling_rows_are_zero() {
        let p = small();
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 10, 0);
        let rows = scaling_experiment(&plan, &[4, 8], 0.0, PowerLaw::InvSquare, UplinkBoundForm::AsPrinted).unwrap();
        assert!(rows.iter().all(|r| r.mc_rate.mean == 0.0 && r.bound == 0.0 && r.asymptote == 0.0));
    }

    #[test]
    fn region_zero_floor_is_downlink_maximal() {
        let p = SystemParams { n_tx: 4, n_rx: 8, k_ul: 2, k_dl: 2, tau: 6, ..SystemParams::default() };
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 2, 4);
        let reg = rate_region(&plan, &[0.0, 1.0, 2.0], &[0.2, 0.5, 0.8]).unwrap();
        assert_eq!(reg.optimized.len(), 3);
        for pair in reg.trials.chunks(3) {
            let sdr: Vec<f64> = pair.iter().filter_map(|t| t.optimized.map(|o| o.sdr_dl_sum_rate)).collect();
            for w in sdr.windows(2) {
                assert!(w[0] >= w[1] - 1e-4 * w[0], "{sdr:?}");
            }
        }
        for t in &reg.trials {
            if let (Some(o), Some(b)) = (t.optimized, t.baseline) {
                assert!(o.sdr_dl_sum_rate >= b.dl_sum_rate - 1e-6);
            }
        }
    }
}

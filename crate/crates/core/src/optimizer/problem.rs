//! Energy-beamformer design problem for one time split `alpha`.
//!
//! Every quadratic form in the problem is `tr(Q W_E W_E^†)` for some
//! `N_t x N_t` matrix `Q`, so the problem is stated over the transmit
//! covariance `X = W_E W_E^†`. The Kronecker-lifted matrices acting on
//! `vec(W_E)` are available through [`SdrProblem::lifted_a`] and
//! [`SdrProblem::lifted_b`].

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::beamforming::kappa;
use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::linalg::{col_norm_sqr, inner, kron, CMat, CVec};
use crate::model::{ChannelRealization, PathLossProfile, SystemParams};

/// How the uplink constraint coefficient is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintForm {
    /// `c_k alpha / (1 - alpha)` with `c_k` already containing `kappa`.
    #[default]
    AsPrinted,
    /// `c_k` alone, so the harvesting factor enters once.
    KappaConsistent,
}

#[derive(Debug, Clone)]
pub struct SdrProblem {
    pub n_tx: usize,
    pub k_ul: usize,
    /// Per-user interference matrices `sum_l |g_ud,k,l|^2 g_APu,l^* g_APu,l^T`.
    pub interference: Vec<CMat>,
    /// Per-sensor matrices `h_k^* h_k^T` with `h_k = g_APu,k / sqrt(beta_APu,k)`.
    pub sensor: Vec<CMat>,
    pub c_coeffs: Vec<f64>,
    /// `||g_APd,k||^2`, from the estimate when one is supplied.
    pub gains: Vec<f64>,
    pub alpha: f64,
    pub r_ul_min: f64,
    pub trace_budget: f64,
    pub sigma_n2: f64,
    pub eta: f64,
    pub p_ap: f64,
    pub form: ConstraintForm,
}

pub fn build_sdr_problem(
    channels: &ChannelRealization,
    losses: &PathLossProfile,
    estimate: Option<&ChannelEstimate>,
    params: &SystemParams,
    alpha: f64,
    form: ConstraintForm,
) -> Result<SdrProblem> {
    let kap = kappa(params.eta, alpha)?;
    if !channels.dims_match(params) {
        return Err(Error::config("channels", "realization does not match the system dimensions"));
    }
    let (nt, ku, kd) = (params.n_tx, params.k_ul, params.k_dl);
    let g = &channels.g_ap_ul;
    let outer = |v: CVec| -> CMat { v.map(|z| z.conj()) * v.transpose() };

    let interference = (0..kd)
        .map(|k| {
            let mut q = CMat::zeros(nt, nt);
            for l in 0..ku {
                let w = channels.g_ud(k, l).norm_sqr();
                q += outer(g.column(l).into_owned()).scale(w);
            }
            q
        })
        .collect();
    let sensor = (0..ku)
        .map(|k| outer(g.column(k).unscale(losses.beta_ap_ul[k].sqrt())))
        .collect();
    let denom = params.p_ap * params.sigma_si2 + params.sigma_n2;
    let c_coeffs = (0..ku)
        .map(|k| kap * params.p_ap * losses.beta_ap_ul[k] * col_norm_sqr(g, k) / denom)
        .collect();
    let g_dl = estimate.map_or(&channels.g_ap_dl, |e| &e.g_ap_dl_hat);
    let gains = (0..kd).map(|k| col_norm_sqr(g_dl, k)).collect();

    Ok(SdrProblem {
        n_tx: nt,
        k_ul: ku,
        interference,
        sensor,
        c_coeffs,
        gains,
        alpha,
        r_ul_min: params.r_ul_min,
        trace_budget: ku as f64,
        sigma_n2: params.sigma_n2,
        eta: params.eta,
        p_ap: params.p_ap,
        form,
    })
}

impl SdrProblem {
    pub fn k_dl(&self) -> usize {
        self.gains.len()
    }

    /// `eta P_A alpha / (1 - alpha)`.
    pub fn interference_scale(&self) -> f64 {
        self.eta * self.p_ap * self.alpha / (1.0 - self.alpha)
    }

    pub fn uplink_coeff(&self, k: usize) -> f64 {
        match self.form {
            ConstraintForm::AsPrinted => self.c_coeffs[k] * self.alpha / (1.0 - self.alpha),
            ConstraintForm::KappaConsistent => self.c_coeffs[k],
        }
    }

    /// Right-hand side of the log-sum constraint, in bits.
    pub fn uplink_target(&self) -> f64 {
        self.r_ul_min / (1.0 - self.alpha)
    }

    /// `I_{K_u} ⊗ Q_k`, acting on the column-major `vec(W_E)`.
    pub fn lifted_a(&self, k: usize) -> CMat {
        kron(&CMat::identity(self.k_ul, self.k_ul), &self.interference[k])
    }

    pub fn lifted_b(&self, k: usize) -> CMat {
        kron(&CMat::identity(self.k_ul, self.k_ul), &self.sensor[k])
    }

    /// Denominators `eta P_A alpha/(1-alpha) tr(Q_k X) + sigma_n^2`.
    pub fn tau_bar(&self, x: &CMat) -> Vec<f64> {
        let a = self.interference_scale();
        self.interference
            .iter()
            .map(|q| a * inner(q, x) + self.sigma_n2)
            .collect()
    }

    /// `(1 - alpha) sum_k log2(1 + P_A ||g_k||^2 / tau_k)`.
    pub fn objective_from_tau(&self, tau: &[f64]) -> f64 {
        (1.0 - self.alpha)
            * self
                .gains
                .iter()
                .zip(tau)
                .map(|(&g, &t)| (self.p_ap * g / t).ln_1p())
                .sum::<f64>()
            / LN_2
    }

    /// Large-array downlink sum-rate at covariance `x`.
    pub fn downlink_rate(&self, x: &CMat) -> f64 {
        self.objective_from_tau(&self.tau_bar(x))
    }

    /// `(1 - alpha) sum_k log2(1 + c'_k tr(B_k X))`.
    pub fn uplink_rate(&self, x: &CMat) -> f64 {
        (1.0 - self.alpha)
            * self
                .sensor
                .iter()
                .enumerate()
                .map(|(k, b)| (self.uplink_coeff(k) * inner(b, x).max(0.0)).ln_1p())
                .sum::<f64>()
            / LN_2
    }

    /// Upper bound on the uplink rate over the whole feasible set.
    pub fn uplink_rate_upper_bound(&self) -> f64 {
        (1.0 - self.alpha)
            * self
                .sensor
                .iter()
                .enumerate()
                .map(|(k, b)| (self.uplink_coeff(k) * self.trace_budget * crate::linalg::trace_re(b)).ln_1p())
                .sum::<f64>()
            / LN_2
    }

    pub fn covariance(w_e: &CMat) -> CMat {
        w_e * w_e.adjoint()
    }

    /// `(downlink, uplink)` rates of a concrete energy beamformer.
    pub fn evaluate_beam(&self, w_e: &CMat) -> (f64, f64) {
        let x = Self::covariance(w_e);
        (self.downlink_rate(&x), self.uplink_rate(&x))
    }

    pub fn meets_uplink(&self, ul_rate: f64, tol: f64) -> bool {
        self.r_ul_min <= 0.0 || ul_rate >= self.r_ul_min - tol
    }
}

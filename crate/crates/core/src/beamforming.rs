//! MRC/MRT and energy beamformers, harvested sensor powers, and the uplink and
//! downlink SINRs of one channel realization.

use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::linalg::{col_norm_sqr, CMat};
use crate::model::{ChannelRealization, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// `N_t x K_u` receive combiners, unit-norm columns.
    pub w_r: CMat,
    /// `N_r x K_d` transmit precoders, unit-norm columns.
    pub w_t: CMat,
    /// `N_t x K_u` energy beamformer, `||W_E||_F^2 = K_u`.
    pub w_e: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorPowers {
    pub p_ul: Vec<f64>,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub uplink: Vec<f64>,
    pub downlink: Vec<f64>,
    pub uplink_rate_sum: f64,
    pub downlink_rate_sum: f64,
}

impl SinrReport {
    pub fn new(uplink: Vec<f64>, downlink: Vec<f64>, alpha: f64) -> Self {
        let uplink_rate_sum = uplink.iter().map(|&g| rate(alpha, g)).sum();
        let downlink_rate_sum = downlink.iter().map(|&g| rate(alpha, g)).sum();
        SinrReport {
            uplink,
            downlink,
            uplink_rate_sum,
            downlink_rate_sum,
        }
    }
}

/// `(1 - alpha) log2(1 + sinr)`.
pub fn rate(alpha: f64, sinr: f64) -> f64 {
    (1.0 - alpha) * sinr.ln_1p() / std::f64::consts::LN_2
}

/// Harvesting factor `eta alpha / (1 - alpha)`.
pub fn kappa(eta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(eta * alpha / (1.0 - alpha))
}

fn normalized_columns(g: &CMat, conjugate: bool) -> Result<CMat> {
    let mut out = g.clone();
    for j in 0..g.ncols() {
        let n = col_norm_sqr(g, j).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::DegenerateChannel { column: j });
        }
        let mut col = out.column_mut(j);
        col.unscale_mut(n);
        if conjugate {
            col.iter_mut().for_each(|z| *z = z.conj());
        }
    }
    Ok(out)
}

/// Maximum-ratio combiner `g_k / ||g_k||` per column.
pub fn mrc_receive(g_ap_ul: &CMat) -> Result<CMat> {
    normalized_columns(g_ap_ul, false)
}

/// Maximum-ratio precoder `g_k^* / ||g_k||` per column.
pub fn mrt_transmit(g_ap_dl: &CMat) -> Result<CMat> {
    normalized_columns(g_ap_dl, true)
}

/// `(W_r, W_t)` from the true channels.
pub fn mrc_mrt_beams(channels: &ChannelRealization) -> Result<(CMat, CMat)> {
    Ok((mrc_receive(&channels.g_ap_ul)?, mrt_transmit(&channels.g_ap_dl)?))
}

/// `(W_r, W_t)` with the precoder built from the estimated user channels;
/// the sensor channels are known.
pub fn mrc_mrt_beams_estimated(
    channels: &ChannelRealization,
    estimate: &ChannelEstimate,
) -> Result<(CMat, CMat)> {
    Ok((mrc_receive(&channels.g_ap_ul)?, mrt_transmit(&estimate.g_ap_dl_hat)?))
}

/// MRT energy beamformer. Each column is `g_k^* / ||g_k||`, so the
/// Frobenius norm is `K_u` without further scaling.
pub fn mrt_energy_beams(g_ap_ul: &CMat) -> Result<CMat> {
    let mut w = normalized_columns(g_ap_ul, true)?;
    let ku = g_ap_ul.ncols();
    if ku > 0 {
        let f2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        w.scale_mut((ku as f64 / f2).sqrt());
    }
    Ok(w)
}

/// Full MRC/MRT set with MRT energy beams.
pub fn mrt_baseline(channels: &ChannelRealization) -> Result<BeamformerSet> {
    let (w_r, w_t) = mrc_mrt_beams(channels)?;
    Ok(BeamformerSet {
        w_r,
        w_t,
        w_e: mrt_energy_beams(&channels.g_ap_ul)?,
    })
}

/// `P_u,k = kappa P_A ||g_APu,k^T W_E||^2`.
pub fn harvested_powers(
    channels: &ChannelRealization,
    w_e: &CMat,
    params: &SystemParams,
) -> SensorPowers {
    let kappa = params.kappa();
    harvested_powers_with(channels, w_e, kappa, params.p_ap)
}

pub fn harvested_powers_with(
    channels: &ChannelRealization,
    w_e: &CMat,
    kappa: f64,
    p_ap: f64,
) -> SensorPowers {
    // row k of G^T W_E
    let gw = channels.g_ap_ul.transpose() * w_e;
    let p_ul = (0..gw.nrows())
        .map(|k| kappa * p_ap * gw.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    SensorPowers { p_ul, kappa }
}

/// Self-interference power leaking into each sensor stream,
/// `P_A sum_l |w_r,k^† H^T w_t,l|^2`, for an arbitrary SI matrix `h`.
pub fn si_leakage(h: &CMat, w_r: &CMat, w_t: &CMat, p_ap: f64) -> Vec<f64> {
    let leak = w_r.adjoint() * (h.transpose() * w_t);
    (0..leak.nrows())
        .map(|k| p_ap * leak.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect()
}

/// Residual SI after subtracting the part explained by the SI estimate:
/// only `E_SI` leaks through.
pub fn imperfect_csi_uplink_terms(
    estimate: &ChannelEstimate,
    beams: &BeamformerSet,
    params: &SystemParams,
) -> Vec<f64> {
    si_leakage(&estimate.e_si, &beams.w_r, &beams.w_t, params.p_ap)
}

/// Uplink SINR with perfect SI knowledge (no cancellation).
pub fn uplink_sinr(
    channels: &ChannelRealization,
    beams: &BeamformerSet,
    powers: &SensorPowers,
    params: &SystemParams,
) -> Vec<f64> {
    let si = si_leakage(&channels.h_si, &beams.w_r, &beams.w_t, params.p_ap);
    uplink_sinr_with_si(channels, beams, powers, params, &si)
}

/// Uplink SINR with a caller-supplied SI term per sensor. The noise power is
/// `sigma_n^2 ||w_r,k||^2`, which is `sigma_n^2` for unit-norm combiners.
pub fn uplink_sinr_with_si(
    channels: &ChannelRealization,
    beams: &BeamformerSet,
    powers: &SensorPowers,
    params: &SystemParams,
    si: &[f64],
) -> Vec<f64> {
    let ku = params.k_ul;
    let proj = beams.w_r.adjoint() * &channels.g_ap_ul; // (k, l) = w_r,k^† g_l
    (0..ku)
        .map(|k| {
            let signal = powers.p_ul[k] * proj[(k, k)].norm_sqr();
            let inter: f64 = (0..ku)
                .filter(|&l| l != k)
                .map(|l| powers.p_ul[l] * proj[(k, l)].norm_sqr())
                .sum();
            signal / (inter + si[k] + params.sigma_n2 * col_norm_sqr(&beams.w_r, k))
        })
        .collect()
}

/// Downlink SINR including sensor-to-user interference.
pub fn downlink_sinr(
    channels: &ChannelRealization,
    beams: &BeamformerSet,
    powers: &SensorPowers,
    params: &SystemParams,
) -> Vec<f64> {
    let kd = params.k_dl;
    let eff = channels.g_ap_dl.transpose() * &beams.w_t; // (k, l) = g_k^T w_t,l
    (0..kd)
        .map(|k| {
            let signal = params.p_ap * eff[(k, k)].norm_sqr();
            let inter: f64 = (0..kd)
                .filter(|&l| l != k)
                .map(|l| params.p_ap * eff[(k, l)].norm_sqr())
                .sum();
            let sensors: f64 = powers
                .p_ul
                .iter()
                .enumerate()
                .map(|(l, &p)| p * channels.g_ud(k, l).norm_sqr())
                .sum();
            signal / (inter + sensors + params.sigma_n2)
        })
        .collect()
}

/// Evaluates both links for a complete beamformer set.
pub fn evaluate(
    channels: &ChannelRealization,
    beams: &BeamformerSet,
    params: &SystemParams,
) -> SinrReport {
    let powers = harvested_powers(channels, &beams.w_e, params);
    SinrReport::new(
        uplink_sinr(channels, beams, &powers, params),
        downlink_sinr(channels, beams, &powers, params),
        params.alpha,
    )
}

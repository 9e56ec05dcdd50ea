//! Closed-form and single-integral expressions for the ergodic rates under
//! MRC/MRT processing with MRT energy beams.
//!
//! The integral forms use `E ln(1 + X/(Y + s)) = ∫ (1 - E e^{-zX}) E e^{-zY}
//! e^{-sz} / z dz` for independent nonnegative `X`, `Y`. The lower bounds
//! apply Jensen's inequality to `log2(1 + 1/x)`. Every rate is in bits/s/Hz.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PathLossProfile, SystemParams};
use crate::quadrature::integrate;

/// System description plus the energy constant used by the power-scaling
/// laws. Derived coefficients are recomputed on every call.
#[derive(Debug, Clone)]
pub struct RateBoundInputs {
    pub params: SystemParams,
    pub losses: PathLossProfile,
    /// `E_A` in `P_A = E_A / N_t^2` (or `E_A / N_t`), linear.
    pub e_ap: f64,
}

impl RateBoundInputs {
    pub fn new(params: SystemParams, losses: PathLossProfile) -> Self {
        RateBoundInputs { params, losses, e_ap: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa()
    }

    /// `kappa P_A N_t beta_APu,l^2`.
    pub fn phi(&self, l: usize) -> f64 {
        let b = self.losses.beta_ap_ul[l];
        self.kappa() * self.params.p_ap * self.params.n_tx as f64 * b * b
    }

    /// `P_A beta_APd,k`.
    pub fn psi_k(&self, k: usize) -> f64 {
        self.params.p_ap * self.losses.beta_ap_dl[k]
    }

    /// `kappa P_A N_t beta_APu,l beta_ud,k,l` for user `k`, sensor `l`.
    pub fn psi_ul(&self, k: usize, l: usize) -> f64 {
        self.kappa()
            * self.params.p_ap
            * self.params.n_tx as f64
            * self.losses.beta_ap_ul[l]
            * self.losses.beta_ul_dl[(k, l)]
    }

    fn check_sensor(&self, k: usize) -> Result<()> {
        if k >= self.params.k_ul {
            return Err(Error::Domain(format!("sensor index {k} out of range (K_u = {})", self.params.k_ul)));
        }
        Ok(())
    }

    fn check_user(&self, k: usize) -> Result<()> {
        if k >= self.params.k_dl {
            return Err(Error::Domain(format!("user index {k} out of range (K_d = {})", self.params.k_dl)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Below this `z` the integrand is replaced by its limit at zero.
    pub small_z_cutoff: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            small_z_cutoff: 1e-10,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.small_z_cutoff > 0.0) {
            return Err(Error::config("quadrature", "tolerances and cutoff must be positive"));
        }
        Ok(())
    }
}

/// One Laplace-transform integral in nats:
/// `∫ (1 - (1+a z)^-n) (1+b z)^-m prod_i (1+c_i z)^-1 e^{-s z} / z dz`.
#[derive(Debug, Clone)]
struct LaplaceIntegral {
    signal: f64,
    signal_order: f64,
    shared: f64,
    shared_order: f64,
    others: Vec<f64>,
    noise: f64,
}

impl LaplaceIntegral {
    /// `z` times the integrand.
    fn scaled_integrand(&self, z: f64) -> f64 {
        let sig = -(-self.signal_order * (self.signal * z).ln_1p()).exp_m1();
        let mut log_rest = -self.shared_order * (self.shared * z).ln_1p() - self.noise * z;
        for &c in &self.others {
            log_rest -= (c * z).ln_1p();
        }
        sig * log_rest.exp()
    }

    fn evaluate(&self, quad: &QuadratureConfig) -> Result<f64> {
        quad.validate()?;
        if self.signal <= 0.0 || self.signal_order <= 0.0 {
            return Ok(0.0);
        }
        if !(self.noise > 0.0) {
            return Err(Error::Domain("noise variance must be positive".into()));
        }
        let cut = quad.small_z_cutoff;
        // e^{-s z} < 1e-14 beyond this point
        let z_max = 14.0 * std::f64::consts::LN_10 / self.noise;
        if z_max <= cut {
            return Err(Error::Domain("noise variance too large for the small-z cutoff".into()));
        }
        let head = self.signal_order * self.signal * cut;
        let body = integrate(
            |u: f64| self.scaled_integrand(u.exp()),
            cut.ln(),
            z_max.ln(),
            quad.rel_tol,
            quad.abs_tol,
            quad.max_subdivisions,
        )?;
        Ok(head + body.value)
    }
}

fn bits(alpha: f64, nats: f64) -> f64 {
    (1.0 - alpha) * nats / LN_2
}

/// Large-array uplink rate of sensor `k` as a single integral.
pub fn uplink_rate_integral(inputs: &RateBoundInputs, k: usize, quad: &QuadratureConfig) -> Result<f64> {
    inputs.check_sensor(k)?;
    let p = &inputs.params;
    let li = LaplaceIntegral {
        signal: inputs.phi(k),
        signal_order: p.n_tx as f64,
        shared: p.p_ap * p.sigma_si2,
        shared_order: p.k_dl as f64,
        others: (0..p.k_ul).filter(|&l| l != k).map(|l| inputs.phi(l)).collect(),
        noise: p.sigma_n2,
    };
    Ok(bits(p.alpha, li.evaluate(quad)?))
}

/// Large-array downlink rate of user `k` as a single integral.
pub fn downlink_rate_integral(inputs: &RateBoundInputs, k: usize, quad: &QuadratureConfig) -> Result<f64> {
    inputs.check_user(k)?;
    let p = &inputs.params;
    let psi = inputs.psi_k(k);
    let li = LaplaceIntegral {
        signal: psi,
        signal_order: p.n_rx as f64,
        shared: psi,
        shared_order: (p.k_dl - 1) as f64,
        others: (0..p.k_ul).map(|l| inputs.psi_ul(k, l)).collect(),
        noise: p.sigma_n2,
    };
    Ok(bits(p.alpha, li.evaluate(quad)?))
}

/// Numerator multiplier applied to `kappa P_A beta_k^2` in the uplink bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UplinkBoundForm {
    /// `(N_t + 2)(N_t - 1)`.
    #[default]
    AsPrinted,
    /// `N_t (N_t - 1)`, Jensen's inequality applied to the large-array SINR.
    LargeArrayJensen,
}

/// Jensen-type uplink SINR bound. `si` is the total residual SI power term.
fn uplink_bound_sinr(
    kappa: f64,
    p_ap: f64,
    beta_k: f64,
    beta_others_sq: f64,
    n: usize,
    si: f64,
    sigma_n2: f64,
    form: UplinkBoundForm,
) -> f64 {
    let n = n as f64;
    let gain = match form {
        UplinkBoundForm::AsPrinted => (n + 2.0) * (n - 1.0),
        UplinkBoundForm::LargeArrayJensen => n * (n - 1.0),
    };
    kappa * p_ap * beta_k * beta_k * gain / (kappa * p_ap * n * beta_others_sq + si + sigma_n2)
}

fn uplink_bound(inputs: &RateBoundInputs, k: usize, si: f64, form: UplinkBoundForm) -> Result<f64> {
    inputs.check_sensor(k)?;
    let p = &inputs.params;
    if p.n_tx < 2 {
        return Err(Error::Domain(format!("uplink bound needs N_t >= 2, got {}", p.n_tx)));
    }
    let b = &inputs.losses.beta_ap_ul;
    let others: f64 = (0..p.k_ul).filter(|&l| l != k).map(|l| b[l] * b[l]).sum();
    let sinr = uplink_bound_sinr(inputs.kappa(), p.p_ap, b[k], others, p.n_tx, si, p.sigma_n2, form);
    Ok(bits(p.alpha, sinr.ln_1p()))
}

/// Closed-form uplink lower bound with perfect CSI.
pub fn uplink_rate_lower_bound(inputs: &RateBoundInputs, k: usize) -> Result<f64> {
    uplink_rate_lower_bound_with(inputs, k, UplinkBoundForm::AsPrinted)
}

pub fn uplink_rate_lower_bound_with(inputs: &RateBoundInputs, k: usize, form: UplinkBoundForm) -> Result<f64> {
    let p = &inputs.params;
    uplink_bound(inputs, k, p.k_dl as f64 * p.p_ap * p.sigma_si2, form)
}

/// Uplink lower bound when only the SI estimation error leaks through.
pub fn uplink_rate_lower_bound_icsi(inputs: &RateBoundInputs, k: usize) -> Result<f64> {
    uplink_rate_lower_bound_icsi_with(inputs, k, UplinkBoundForm::AsPrinted)
}

pub fn uplink_rate_lower_bound_icsi_with(inputs: &RateBoundInputs, k: usize, form: UplinkBoundForm) -> Result<f64> {
    let p = &inputs.params;
    let si = p.k_dl as f64 * p.p_ap * p.sigma_si2 / (p.tau as f64 * p.p_ap * p.sigma_si2 + 1.0);
    uplink_bound(inputs, k, si, form)
}

/// Limit of the perfect-CSI bound under `P_A = E_A / N_t^2`.
pub fn uplink_rate_asymptote_pcsi(inputs: &RateBoundInputs, k: usize) -> Result<f64> {
    inputs.check_sensor(k)?;
    if !(inputs.e_ap >= 0.0) {
        return Err(Error::Domain("E_A must be nonnegative".into()));
    }
    let p = &inputs.params;
    let b = inputs.losses.beta_ap_ul[k];
    let snr = inputs.kappa() * b * b * inputs.e_ap / p.sigma_n2;
    Ok(bits(p.alpha, snr.ln_1p()))
}

/// Stated imperfect-CSI limit under `P_A = E_A / N_t`; reference value only.
pub fn uplink_rate_asymptote_icsi(inputs: &RateBoundInputs, k: usize) -> Result<f64> {
    inputs.check_sensor(k)?;
    let p = &inputs.params;
    let b = inputs.losses.beta_ap_ul[k];
    let snr = inputs.e_ap * inputs.e_ap * inputs.kappa() * b * b / p.sigma_n2;
    Ok(bits(p.alpha, snr.ln_1p()))
}

/// Closed-form downlink lower bound with perfect CSI.
pub fn downlink_rate_lower_bound(inputs: &RateBoundInputs, k: usize) -> Result<f64> {
    inputs.check_user(k)?;
    let p = &inputs.params;
    if p.n_rx < 2 {
        return Err(Error::Domain(format!("downlink bound needs N_r >= 2, got {}", p.n_rx)));
    }
    let psi = inputs.psi_k(k);
    let sensors: f64 = (0..p.k_ul).map(|l| inputs.psi_ul(k, l)).sum();
    let sinr = psi * (p.n_rx - 1) as f64 / ((p.k_dl - 1) as f64 * psi + sensors + p.sigma_n2);
    Ok(bits(p.alpha, sinr.ln_1p()))
}

/// Downlink rate with MMSE-estimated CSI from per-user estimate variances.
///
/// Returned without the `(1 - alpha)` factor unless `with_prefactor` is set.
pub fn downlink_rate_icsi(inputs: &RateBoundInputs, var_g_hat: &[f64], k: usize, with_prefactor: bool) -> Result<f64> {
    inputs.check_user(k)?;
    let p = &inputs.params;
    if var_g_hat.len() != p.k_dl {
        return Err(Error::Domain(format!("expected {} estimate variances, got {}", p.k_dl, var_g_hat.len())));
    }
    let nr = p.n_rx as f64;
    let s2 = var_g_hat[k];
    let beta_sum: f64 = inputs.losses.beta_ap_dl.iter().sum();
    let sensors: f64 = (0..p.k_ul)
        .map(|l| inputs.losses.beta_ap_ul[l] * inputs.losses.beta_ul_dl[(k, l)])
        .sum();
    let num = p.p_ap * nr * nr * s2 * s2;
    let den = p.p_ap * nr * s2 * beta_sum
        + inputs.kappa() * p.p_ap * p.n_tx as f64 * p.k_ul as f64 * sensors
        + p.sigma_n2;
    let alpha = if with_prefactor { p.alpha } else { 0.0 };
    Ok(bits(alpha, (num / den).ln_1p()))
}

/// Sum over sensors of a per-sensor rate function.
pub fn uplink_sum<F>(inputs: &RateBoundInputs, f: F) -> Result<f64>
where
    F: Fn(&RateBoundInputs, usize) -> Result<f64>,
{
    (0..inputs.params.k_ul).map(|k| f(inputs, k)).sum()
}

/// Sum over users of a per-user rate function.
pub fn downlink_sum<F>(inputs: &RateBoundInputs, f: F) -> Result<f64>
where
    F: Fn(&RateBoundInputs, usize) -> Result<f64>,
{
    (0..inputs.params.k_dl).map(|k| f(inputs, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::estimate_variance_user;

    /// `e E_1(1)` from the convergent series for `E_1`.
    fn e_e1_one() -> f64 {
        let gamma = 0.577_215_664_901_532_9;
        let mut s = 0.0;
        let mut term = 1.0;
        for n in 1..60 {
            term *= -1.0 / n as f64;
            s += term / n as f64;
        }
        std::f64::consts::E * (-gamma - s)
    }

    fn inputs(nt: usize, nr: usize, ku: usize, kd: usize) -> RateBoundInputs {
        let p = SystemParams {
            n_tx: nt,
            n_rx: nr,
            k_ul: ku,
            k_dl: kd,
            tau: kd.max(1),
            ..SystemParams::default()
        };
        let l = PathLossProfile::unit(&p);
        RateBoundInputs::new(p, l)
    }

    #[test]
    fn exponential_integral_identity() {
        assert!((e_e1_one() - 0.596_347_362_323_194).abs() < 1e-14);
        let li = LaplaceIntegral {
            signal: 1.0,
            signal_order: 1.0,
            shared: 0.0,
            shared_order: 0.0,
            others: vec![],
            noise: 1.0,
        };
        let v = li.evaluate(&QuadratureConfig::default()).unwrap();
        assert!((v - e_e1_one()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn uplink_integral_single_sensor_case() {
        // phi = kappa P_A N_t beta^2 = 1 with kappa = 0.5 * 0.5 / 0.5
        let mut inp = inputs(1, 4, 1, 0);
        inp.params.alpha = 0.5;
        inp.params.p_ap = 2.0;
        inp.params.sigma_si2 = 0.0;
        assert!((inp.phi(0) - 1.0).abs() < 1e-15);
        let r = uplink_rate_integral(&inp, 0, &QuadratureConfig::default()).unwrap();
        assert!((r - 0.5 * e_e1_one() / LN_2).abs() < 1e-9);
    }

    #[test]
    fn downlink_integral_single_user_case() {
        let mut inp = inputs(4, 1, 0, 1);
        inp.params.p_ap = 1.0;
        inp.params.alpha = 0.0;
        let r = downlink_rate_integral(&inp, 0, &QuadratureConfig::default()).unwrap();
        assert!((r - e_e1_one() / LN_2).abs() < 1e-9);
    }

    #[test]
    fn integral_matches_brute_force_grid() {
        let inp = inputs(16, 16, 3, 5);
        let quad = QuadratureConfig::default();
        let r = uplink_rate_integral(&inp, 1, &quad).unwrap();
        // midpoint rule over u = ln z with a fine uniform grid
        let p = &inp.params;
        let f = |z: f64| {
            let sig = 1.0 - (1.0 + inp.phi(1) * z).powf(-(p.n_tx as f64));
            let si = (1.0 + p.p_ap * p.sigma_si2 * z).powf(-(p.k_dl as f64));
            let others: f64 = [0, 2].iter().map(|&l| 1.0 / (1.0 + inp.phi(l) * z)).product();
            sig * si * others * (-p.sigma_n2 * z).exp()
        };
        let (lo, hi, n) = ((1e-14f64).ln(), 40f64.ln(), 400_000);
        let h = (hi - lo) / n as f64;
        let brute: f64 = (0..n).map(|i| f((lo + (i as f64 + 0.5) * h).exp()) * h).sum();
        let brute = (1.0 - p.alpha) * brute / LN_2;
        assert!((r - brute).abs() < 1e-7 * brute, "{r} vs {brute}");
    }

    #[test]
    fn cutoff_halving_is_stable() {
        let inp = inputs(128, 128, 3, 5);
        let a = QuadratureConfig::default();
        let b = QuadratureConfig { small_z_cutoff: a.small_z_cutoff / 2.0, ..a };
        for k in 0..3 {
            let ra = uplink_rate_integral(&inp, k, &a).unwrap();
            let rb = uplink_rate_integral(&inp, k, &b).unwrap();
            assert!((ra - rb).abs() < 1e-3 * ra);
        }
        let ra = downlink_rate_integral(&inp, 0, &a).unwrap();
        let rb = downlink_rate_integral(&inp, 0, &b).unwrap();
        assert!((ra - rb).abs() < 1e-3 * ra);
    }

    #[test]
    fn zero_snr_limit() {
        let mut inp = inputs(8, 8, 2, 2);
        inp.params.alpha = 0.0; // kappa = 0 switches off harvesting
        assert_eq!(uplink_rate_integral(&inp, 0, &QuadratureConfig::default()).unwrap(), 0.0);
        inp.params.p_ap = 1e-12;
        let r = downlink_rate_integral(&inp, 0, &QuadratureConfig::default()).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn uplink_bound_hand_value() {
        let s = uplink_bound_sinr(1.0, 1.0, 1.0, 0.0, 2, 0.0, 1.0, UplinkBoundForm::AsPrinted);
        assert!(((1.0 + s).log2() - 5f64.log2()).abs() < 1e-12);
        let s = uplink_bound_sinr(1.0, 1.0, 1.0, 0.0, 2, 0.0, 1.0, UplinkBoundForm::LargeArrayJensen);
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bounds_reject_single_antenna() {
        let inp = inputs(1, 1, 1, 1);
        assert!(matches!(uplink_rate_lower_bound(&inp, 0), Err(Error::Domain(_))));
        assert!(matches!(uplink_rate_lower_bound_icsi(&inp, 0), Err(Error::Domain(_))));
        assert!(matches!(downlink_rate_lower_bound(&inp, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn uplink_bound_vanishes_as_alpha_tends_to_one() {
        let mut inp = inputs(8, 8, 2, 2);
        inp.params.alpha = 1.0 - 1e-12;
        assert!(uplink_rate_lower_bound(&inp, 0).unwrap() < 1e-9);
    }

    #[test]
    fn icsi_bound_with_no_training_matches_pcsi() {
        let mut inp = inputs(8, 8, 2, 3);
        inp.params.tau = 0;
        assert_eq!(
            uplink_rate_lower_bound_icsi(&inp, 1).unwrap(),
            uplink_rate_lower_bound(&inp, 1).unwrap()
        );
    }

    #[test]
    fn icsi_bound_halves_si_at_unit_training_energy() {
        let mut inp = inputs(8, 8, 2, 3);
        inp.params.tau = 1;
        inp.params.p_ap = 1.0;
        let direct = |si: f64| {
            let s = uplink_bound_sinr(inp.kappa(), 1.0, 1.0, 1.0, 8, si, 1.0, UplinkBoundForm::AsPrinted);
            bits(inp.params.alpha, s.ln_1p())
        };
        assert!((uplink_rate_lower_bound_icsi(&inp, 0).unwrap() - direct(1.5)).abs() < 1e-14);
        assert!((uplink_rate_lower_bound(&inp, 0).unwrap() - direct(3.0)).abs() < 1e-14);
        let inp64 = inputs(64, 64, 3, 5);
        assert!(uplink_rate_lower_bound_icsi(&inp64, 0).unwrap() >= uplink_rate_lower_bound(&inp64, 0).unwrap());
    }

    #[test]
    fn asymptote_values() {
        let mut inp = inputs(8, 8, 1, 1);
        inp.params.alpha = 0.5; // kappa = 0.5
        inp.e_ap = 2.0;
        assert!((uplink_rate_asymptote_pcsi(&inp, 0).unwrap() - 0.5).abs() < 1e-15);
        inp.e_ap = 0.0;
        assert_eq!(uplink_rate_asymptote_pcsi(&inp, 0).unwrap(), 0.0);
    }

    #[test]
    fn scaled_bound_approaches_asymptote() {
        let mut inp = inputs(512, 8, 3, 5);
        inp.e_ap = 10.0;
        inp.params.p_ap = inp.e_ap / (512.0 * 512.0);
        let lb = uplink_rate_lower_bound(&inp, 0).unwrap();
        let asym = uplink_rate_asymptote_pcsi(&inp, 0).unwrap();
        assert!((lb - asym).abs() < 0.02 * asym, "{lb} vs {asym}");
        let mut last = f64::INFINITY;
        for nt in [16usize, 64, 256, 1024] {
            inp.params.n_tx = nt;
            inp.params.p_ap = inp.e_ap / (nt * nt) as f64;
            let gap = (uplink_rate_lower_bound(&inp, 0).unwrap() - asym).abs();
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn downlink_bound_hand_value() {
        let mut inp = inputs(2, 2, 0, 1);
        inp.params.p_ap = 1.0;
        inp.params.alpha = 0.0;
        assert!((downlink_rate_lower_bound(&inp, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn downlink_bound_sensor_term_is_linear_in_kappa() {
        let mut inp = inputs(4, 4, 2, 2);
        inp.params.eta = 0.2;
        let s1: f64 = (0..2).map(|l| inp.psi_ul(0, l)).sum();
        inp.params.eta = 0.4;
        let s2: f64 = (0..2).map(|l| inp.psi_ul(0, l)).sum();
        assert!((s2 / s1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn downlink_icsi_hand_value() {
        let mut inp = inputs(1, 1, 0, 1);
        inp.params.p_ap = 1.0;
        let r = downlink_rate_icsi(&inp, &[1.0], 0, false).unwrap();
        assert!((r - 1.5f64.log2()).abs() < 1e-15);
        let with = downlink_rate_icsi(&inp, &[1.0], 0, true).unwrap();
        assert!((with - (1.0 - inp.params.alpha) * r).abs() < 1e-15);
    }

    #[test]
    fn downlink_icsi_perfect_estimation_limit() {
        // with estimate variance equal to beta the SINR grows like the
        // perfect-CSI bound to leading order in N_r
        for nr in [1_000usize, 100_000] {
            let mut inp = inputs(4, nr, 0, 3);
            inp.params.p_ap = 10.0;
            let v = vec![1.0; 3];
            let icsi = downlink_rate_icsi(&inp, &v, 0, true).unwrap();
            let pcsi = downlink_rate_lower_bound(&inp, 0).unwrap();
            assert!((icsi - pcsi).abs() / pcsi < 0.2);
        }
        let mut inp = inputs(4, 64, 0, 3);
        inp.params.p_dl = 1e9;
        let v: Vec<f64> = (0..3).map(|_| estimate_variance_user(&inp.params, 1.0)).collect();
        assert!((v[0] - 1.0).abs() < 1e-6);
        inp.params.p_ap = 1e-14;
        assert!(downlink_rate_icsi(&inp, &v, 0, false).unwrap() < 1e-9);
    }

    #[test]
    fn rates_increase_with_signal_coefficient() {
        let mut inp = inputs(32, 32, 3, 5);
        let quad = QuadratureConfig::default();
        let mut prev = (0.0, 0.0, 0.0);
        for b in [0.5, 1.0, 2.0] {
            inp.losses.beta_ap_ul[0] = b;
            inp.losses.beta_ap_dl[0] = b;
            let cur = (
                uplink_rate_integral(&inp, 0, &quad).unwrap(),
                uplink_rate_lower_bound(&inp, 0).unwrap(),
                downlink_rate_integral(&inp, 0, &quad).unwrap(),
            );
            assert!(cur.0 > prev.0 && cur.1 > prev.1 && cur.2 > prev.2);
            prev = cur;
        }
    }
}

//! Pilot/energy training design and MMSE estimation of the combined
//! user-to-HAP and self-interference channel.
//!
//! During training the HAP receives `Y = H_bar X_p + N` with
//! `H_bar = [G_APd, H_SI]` and `X_p` stacking the user pilots above the
//! energy sequence. Because the pilot rows and energy rows are mutually
//! orthogonal, the estimator decouples per column of `H_bar`, but it is
//! computed here through the generic linear-MMSE formula with a single
//! `tau x tau` Hermitian solve.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{herm_condition, CMat};
use crate::model::{
    complex_gaussian, draw_channels_with, ChannelRealization, PathLossProfile, RngStream,
    SystemParams,
};

/// User pilots and HAP energy sequence for one training block.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDesign {
    /// `K_d x tau`, rows orthonormal.
    pub pilots: CMat,
    /// `N_t x tau`, `(1/tau) E E^† = I`.
    pub energy_seq: CMat,
    /// Pilot symbol power `tau * P_d`.
    pub p_pilot: f64,
}

/// Rows of the unitary DFT of size `tau`: pilots take rows `0..K_d`, the
/// energy sequence takes the next `N_t` rows scaled by `sqrt(tau)`.
pub fn design_training(params: &SystemParams) -> Result<TrainingDesign> {
    let (kd, nt, tau) = (params.k_dl, params.n_tx, params.tau);
    if tau < kd + nt {
        return Err(Error::InfeasibleTraining {
            tau,
            required: kd + nt,
        });
    }
    let scale = 1.0 / (tau as f64).sqrt();
    let dft_row = |r: usize| {
        (0..tau).map(move |c| {
            let phase = -std::f64::consts::TAU * ((r * c) % tau) as f64 / tau as f64;
            Complex64::from_polar(scale, phase)
        })
    };
    let mut pilots = CMat::zeros(kd, tau);
    for r in 0..kd {
        for (c, z) in dft_row(r).enumerate() {
            pilots[(r, c)] = z;
        }
    }
    let sqrt_tau = (tau as f64).sqrt();
    let mut energy_seq = CMat::zeros(nt, tau);
    for r in 0..nt {
        for (c, z) in dft_row(kd + r).enumerate() {
            energy_seq[(r, c)] = z * sqrt_tau;
        }
    }
    Ok(TrainingDesign {
        pilots,
        energy_seq,
        p_pilot: tau as f64 * params.p_dl,
    })
}

/// Combined channel, training signal and prior covariance of one block.
#[derive(Debug, Clone)]
pub struct CombinedChannel {
    /// `N_r x (K_d + N_t)`, `[G_APd, H_SI]`.
    pub h_bar: CMat,
    /// `(K_d + N_t) x tau`.
    pub x_p: CMat,
    /// Diagonal of the per-row prior covariance `diag{D_APd, sigma_SI^2 I}`.
    pub c_hbar: DVector<f64>,
}

impl CombinedChannel {
    pub fn new(
        channels: &ChannelRealization,
        losses: &PathLossProfile,
        design: &TrainingDesign,
        params: &SystemParams,
    ) -> Self {
        let (kd, nt, nr, tau) = (params.k_dl, params.n_tx, params.n_rx, params.tau);
        let mut h_bar = CMat::zeros(nr, kd + nt);
        h_bar.columns_mut(0, kd).copy_from(&channels.g_ap_dl);
        h_bar.columns_mut(kd, nt).copy_from(&channels.h_si);

        let mut x_p = CMat::zeros(kd + nt, tau);
        x_p.rows_mut(0, kd)
            .copy_from(&design.pilots.scale(design.p_pilot.sqrt()));
        // The energy sequence already carries the sqrt(tau) normalization, so
        // each SI row sees a total training energy tau * P_A.
        x_p.rows_mut(kd, nt)
            .copy_from(&design.energy_seq.scale(params.p_ap.sqrt()));

        let c_hbar = DVector::from_iterator(
            kd + nt,
            losses
                .beta_ap_dl
                .iter()
                .copied()
                .chain(std::iter::repeat_n(params.sigma_si2, nt)),
        );
        CombinedChannel { h_bar, x_p, c_hbar }
    }
}

/// Received training block `Y = H_bar X_p + N`.
pub fn observe<R: Rng + ?Sized>(
    combined: &CombinedChannel,
    params: &SystemParams,
    rng: &mut R,
) -> CMat {
    let mut y = &combined.h_bar * &combined.x_p;
    for z in y.iter_mut() {
        *z += complex_gaussian(rng, params.sigma_n2);
    }
    y
}

/// MMSE estimate with its decomposition into estimate plus error.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub g_ap_dl_hat: CMat,
    pub e_ap_dl: CMat,
    pub h_si_hat: CMat,
    pub e_si: CMat,
    /// Per-user estimate variance.
    pub var_g_hat: Vec<f64>,
    /// Per-entry variance of the SI estimate.
    pub var_si_hat: f64,
}

impl ChannelEstimate {
    /// Writes every matrix entry as `matrix,row,col,re,im`, for debugging.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["matrix", "row", "col", "re", "im"])?;
        let mats = [
            ("g_ap_dl_hat", &self.g_ap_dl_hat),
            ("e_ap_dl", &self.e_ap_dl),
            ("h_si_hat", &self.h_si_hat),
            ("e_si", &self.e_si),
        ];
        for (name, m) in mats {
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    let z = m[(r, c)];
                    w.write_record([name.to_string(), r.to_string(), c.to_string(), z.re.to_string(), z.im.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Variance of each entry of the estimated user channel.
pub fn estimate_variance_user(params: &SystemParams, beta: f64) -> f64 {
    let snr = params.tau as f64 * params.p_dl;
    snr * beta * beta / (params.sigma_n2 + snr * beta)
}

/// Variance of each entry of the estimated SI channel.
pub fn estimate_variance_si(params: &SystemParams) -> f64 {
    let e = params.tau as f64 * params.p_ap;
    e * params.sigma_si2 * params.sigma_si2 / (params.sigma_n2 + e * params.sigma_si2)
}

/// Linear MMSE estimate `Y [X^† C X + sigma_n^2 I]^-1 X^† C`.
pub fn mmse_estimate(
    obs: &CMat,
    combined: &CombinedChannel,
    losses: &PathLossProfile,
    params: &SystemParams,
) -> Result<ChannelEstimate> {
    let (kd, nt, tau) = (params.k_dl, params.n_tx, params.tau);
    if obs.shape() != (params.n_rx, tau) {
        return Err(Error::config(
            "obs",
            format!("expected {}x{tau}, got {:?}", params.n_rx, obs.shape()),
        ));
    }
    let c = combined.c_hbar.map(|v| Complex64::new(v, 0.0));
    // X^† C, tau x (K_d + N_t)
    let mut xhc = combined.x_p.adjoint();
    for (j, mut col) in xhc.column_iter_mut().enumerate() {
        col *= c[j];
    }
    let mut normal = &xhc * &combined.x_p;
    for i in 0..tau {
        normal[(i, i)] += Complex64::new(params.sigma_n2, 0.0);
    }
    let chol = normal.clone().cholesky().ok_or_else(|| {
        Error::Numerical(format!(
            "MMSE normal matrix not positive definite (condition number {:.3e})",
            herm_condition(&normal)
        ))
    })?;
    let gain = chol.solve(&xhc);
    let h_hat = obs * gain;

    let g_ap_dl_hat = h_hat.columns(0, kd).into_owned();
    let h_si_hat = h_hat.columns(kd, nt).into_owned();
    let e_ap_dl = combined.h_bar.columns(0, kd) - &g_ap_dl_hat;
    let e_si = combined.h_bar.columns(kd, nt) - &h_si_hat;
    Ok(ChannelEstimate {
        g_ap_dl_hat,
        e_ap_dl,
        h_si_hat,
        e_si,
        var_g_hat: losses
            .beta_ap_dl
            .iter()
            .map(|&b| estimate_variance_user(params, b))
            .collect(),
        var_si_hat: estimate_variance_si(params),
    })
}

/// Runs one full training block on a given realization.
pub fn estimate_channels<R: Rng + ?Sized>(
    channels: &ChannelRealization,
    losses: &PathLossProfile,
    design: &TrainingDesign,
    params: &SystemParams,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    let combined = CombinedChannel::new(channels, losses, design, params);
    let y = observe(&combined, params, rng);
    mmse_estimate(&y, &combined, losses, params)
}

/// Empirical second-order statistics of the estimator.
#[derive(Debug, Clone)]
pub struct EstimationStats {
    pub trials: usize,
    /// Per-user sample variance of the estimate entries.
    pub var_g_hat: Vec<f64>,
    /// Per-user sample variance of the error entries.
    pub var_e_ap_dl: Vec<f64>,
    /// `|E{g_hat^* e}| / sqrt(E|g_hat|^2 E|e|^2)` pooled over users.
    pub corr_g: f64,
    pub var_si_hat: f64,
    pub var_e_si: f64,
    pub corr_si: f64,
}

/// Monte Carlo check of the MMSE decomposition over independent blocks.
pub fn estimation_error_stats(
    params: &SystemParams,
    losses: &PathLossProfile,
    stream: RngStream,
    trials: usize,
) -> Result<EstimationStats> {
    if trials < 1000 {
        return Err(Error::config("trials", "need at least 1000 trials"));
    }
    params.validate()?;
    losses.validate(params)?;
    let design = design_training(params)?;
    let kd = params.k_dl;
    let mut g2 = vec![0.0; kd];
    let mut e2 = vec![0.0; kd];
    let mut cross_g = Complex64::new(0.0, 0.0);
    let (mut s2, mut es2) = (0.0, 0.0);
    let mut cross_s = Complex64::new(0.0, 0.0);
    for t in 0..trials {
        let mut rng = stream.child(t as u64).rng();
        let ch = draw_channels_with(params, losses, &mut rng);
        let est = estimate_channels(&ch, losses, &design, params, &mut rng)?;
        for k in 0..kd {
            for (a, b) in est.g_ap_dl_hat.column(k).iter().zip(est.e_ap_dl.column(k).iter()) {
                g2[k] += a.norm_sqr();
                e2[k] += b.norm_sqr();
                cross_g += a.conj() * b;
            }
        }
        for (a, b) in est.h_si_hat.iter().zip(est.e_si.iter()) {
            s2 += a.norm_sqr();
            es2 += b.norm_sqr();
            cross_s += a.conj() * b;
        }
    }
    let per_user = (trials * params.n_rx) as f64;
    let si_count = (trials * params.n_rx * params.n_tx) as f64;
    let corr = |x: Complex64, a: f64, b: f64| {
        if a > 0.0 && b > 0.0 {
            x.norm() / (a * b).sqrt()
        } else {
            0.0
        }
    };
    Ok(EstimationStats {
        trials,
        corr_g: corr(cross_g, g2.iter().sum(), e2.iter().sum()),
        var_g_hat: g2.iter().map(|v| v / per_user).collect(),
        var_e_ap_dl: e2.iter().map(|v| v / per_user).collect(),
        var_si_hat: s2 / si_count,
        var_e_si: es2 / si_count,
        corr_si: corr(cross_s, s2, es2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kd: usize, nt: usize, tau: usize) -> SystemParams {
        SystemParams {
            n_tx: nt,
            n_rx: 4,
            k_dl: kd,
            k_ul: 1,
            tau,
            ..SystemParams::default()
        }
    }

    fn max_dev(m: &CMat, target: &CMat) -> f64 {
        (m - target).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_orthogonality(d: &TrainingDesign, tau: usize) -> f64 {
        let kd = d.pilots.nrows();
        let nt = d.energy_seq.nrows();
        let a = max_dev(&(&d.pilots * d.pilots.adjoint()), &CMat::identity(kd, kd));
        let b = max_dev(
            &(&d.energy_seq * d.energy_seq.adjoint()).unscale(tau as f64),
            &CMat::identity(nt, nt),
        );
        let c = max_dev(&(&d.energy_seq * d.pilots.adjoint()), &CMat::zeros(nt, kd));
        let e = max_dev(&(&d.pilots * d.energy_seq.adjoint()), &CMat::zeros(kd, nt));
        a.max(b).max(c).max(e)
    }

    #[test]
    fn training_orthogonality() {
        for (kd, nt, tau) in [(2, 2, 4), (1, 1, 2), (5, 10, 15), (3, 4, 11)] {
            let d = design_training(&params(kd, nt, tau)).unwrap();
            assert!(check_orthogonality(&d, tau) < 1e-12, "({kd},{nt},{tau})");
        }
    }

    #[test]
    fn two_by_two_design() {
        let d = design_training(&params(1, 1, 2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.pilots[(0, 0)] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((d.pilots[(0, 1)] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((d.energy_seq[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((d.energy_seq[(0, 1)] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(d, design_training(&params(1, 1, 2)).unwrap());
    }

    #[test]
    fn short_training_rejected() {
        assert!(matches!(
            design_training(&params(5, 10, 14)),
            Err(Error::InfeasibleTraining { tau: 14, required: 15 })
        ));
    }

    #[test]
    fn closed_form_variance() {
        let p = SystemParams {
            tau: 1,
            p_dl: 1.0,
            k_dl: 1,
            ..params(1, 1, 1)
        };
        assert!((estimate_variance_user(&p, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn high_pilot_power_is_consistent() {
        let p = SystemParams {
            p_dl: 1e8,
            p_ap: 1e8,
            ..params(2, 3, 6)
        };
        let losses = PathLossProfile::unit(&p);
        let design = design_training(&p).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        let ch = draw_channels_with(&p, &losses, &mut rng);
        let est = estimate_channels(&ch, &losses, &design, &p, &mut rng).unwrap();
        let rel = est.e_ap_dl.norm() / ch.g_ap_dl.norm();
        assert!(rel < 1e-3, "relative error {rel}");
        assert!(est.e_si.norm() / ch.h_si.norm() < 1e-3);
        // decomposition is exact by construction
        assert!((&est.g_ap_dl_hat + &est.e_ap_dl - &ch.g_ap_dl).norm() < 1e-12);
    }

    #[test]
    fn csv_dump_lists_every_entry() {
        let p = params(2, 3, 6);
        let losses = PathLossProfile::unit(&p);
        let design = design_training(&p).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let ch = draw_channels_with(&p, &losses, &mut rng);
        let est = estimate_channels(&ch, &losses, &design, &p, &mut rng).unwrap();
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let nr = p.n_rx;
        assert_eq!(text.lines().count(), 1 + 2 * nr * p.k_dl + 2 * nr * p.n_tx);
        assert!(text.starts_with("matrix,row,col,re,im\n"));
    }
}

//! System parameters, large-scale path loss and random channel generation for
//! one coherence interval.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Scalar constants of the full-duplex HAP system. All powers and variances
/// are linear (not dB).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// HAP antennas serving the sensors (`N_t`).
    pub n_tx: usize,
    /// HAP antennas serving the downlink users (`N_r`).
    pub n_rx: usize,
    /// Downlink users (`K_d`).
    pub k_dl: usize,
    /// Uplink sensors (`K_u`).
    pub k_ul: usize,
    /// HAP transmit power `P_A`.
    pub p_ap: f64,
    /// Per-user pilot power `P_d`.
    pub p_dl: f64,
    /// Pilot length in symbols.
    pub tau: usize,
    /// Fraction of the frame spent on energy transfer and training.
    pub alpha: f64,
    /// Energy conversion efficiency.
    pub eta: f64,
    /// AWGN variance.
    pub sigma_n2: f64,
    /// Residual self-interference variance.
    pub sigma_si2: f64,
    /// Uplink sum-rate floor in bits/s/Hz.
    pub r_ul_min: f64,
}

impl Default for SystemParams {
    /// Constants of the reference setting: `eta = 0.5`, `K_u = 3`, `K_d = 5`,
    /// unit noise and residual-SI variance, `P_A = 20 dB`, `N_t = 10`,
    /// `N_r = 50`.
    fn default() -> Self {
        SystemParams {
            n_tx: 10,
            n_rx: 50,
            k_dl: 5,
            k_ul: 3,
            p_ap: 100.0,
            p_dl: 1.0,
            tau: 15,
            alpha: 0.5,
            eta: 0.5,
            sigma_n2: 1.0,
            sigma_si2: 1.0,
            r_ul_min: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 {
            return Err(Error::config("n_tx", "must be positive"));
        }
        if self.n_rx == 0 {
            return Err(Error::config("n_rx", "must be positive"));
        }
        if self.tau < self.k_dl {
            return Err(Error::config(
                "tau",
                format!("pilot length {} shorter than K_d = {}", self.tau, self.k_dl),
            ));
        }
        for (name, v) in [
            ("p_ap", self.p_ap),
            ("p_dl", self.p_dl),
            ("sigma_n2", self.sigma_n2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.sigma_si2.is_finite() && self.sigma_si2 >= 0.0) {
            return Err(Error::config("sigma_si2", format!("must be nonnegative and finite, got {}", self.sigma_si2)));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::config(
                "alpha",
                format!("time split must lie in [0, 1), got {}", self.alpha),
            ));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::config("eta", format!("must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.r_ul_min.is_finite() && self.r_ul_min >= 0.0) {
            return Err(Error::config("r_ul_min", "must be nonnegative"));
        }
        Ok(())
    }

    /// Harvesting factor `eta * alpha / (1 - alpha)` at the configured split.
    pub fn kappa(&self) -> f64 {
        self.eta * self.alpha / (1.0 - self.alpha)
    }

    /// Total HAP antennas `N_r + N_t`.
    pub fn total_antennas(&self) -> usize {
        self.n_rx + self.n_tx
    }
}

/// Large-scale path-loss coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossProfile {
    /// HAP <-> user `k`, length `K_d`.
    pub beta_ap_dl: Vec<f64>,
    /// HAP <-> sensor `k`, length `K_u`.
    pub beta_ap_ul: Vec<f64>,
    /// `K_u x K_d`; entry `(k, m)` is user `m` -> sensor `k`.
    pub beta_dl_ul: DMatrix<f64>,
    /// `K_d x K_u`; entry `(k, m)` is sensor `m` -> user `k`.
    pub beta_ul_dl: DMatrix<f64>,
}

impl PathLossProfile {
    /// Every coefficient equal to one.
    pub fn unit(params: &SystemParams) -> Self {
        Self::constant(params, 1.0)
    }

    pub fn constant(params: &SystemParams, beta: f64) -> Self {
        PathLossProfile {
            beta_ap_dl: vec![beta; params.k_dl],
            beta_ap_ul: vec![beta; params.k_ul],
            beta_dl_ul: DMatrix::from_element(params.k_ul, params.k_dl, beta),
            beta_ul_dl: DMatrix::from_element(params.k_dl, params.k_ul, beta),
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let (kd, ku) = (params.k_dl, params.k_ul);
        if self.beta_ap_dl.len() != kd {
            return Err(Error::config(
                "losses.beta_ap_dl",
                format!("expected {kd} entries, got {}", self.beta_ap_dl.len()),
            ));
        }
        if self.beta_ap_ul.len() != ku {
            return Err(Error::config(
                "losses.beta_ap_ul",
                format!("expected {ku} entries, got {}", self.beta_ap_ul.len()),
            ));
        }
        if self.beta_dl_ul.shape() != (ku, kd) {
            return Err(Error::config(
                "losses.beta_dl_ul",
                format!("expected {ku}x{kd}, got {:?}", self.beta_dl_ul.shape()),
            ));
        }
        if self.beta_ul_dl.shape() != (kd, ku) {
            return Err(Error::config(
                "losses.beta_ul_dl",
                format!("expected {kd}x{ku}, got {:?}", self.beta_ul_dl.shape()),
            ));
        }
        let all = self
            .beta_ap_dl
            .iter()
            .chain(&self.beta_ap_ul)
            .chain(self.beta_dl_ul.iter())
            .chain(self.beta_ul_dl.iter());
        for &b in all {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::config("losses", format!("path loss must be positive and finite, got {b}")));
            }
        }
        Ok(())
    }
}

/// Uniform-disk distance model: nodes are dropped uniformly in a disk centred
/// on the HAP and `beta = reference_gain * (d / reference_distance)^-exponent`,
/// with `d` clamped below at `reference_distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskModel {
    pub radius: f64,
    pub exponent: f64,
    pub reference_gain: f64,
    pub reference_distance: f64,
}

impl DiskModel {
    pub fn gain(&self, distance: f64) -> f64 {
        let d = distance.max(self.reference_distance);
        self.reference_gain * (d / self.reference_distance).powf(-self.exponent)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius", self.radius),
            ("reference_gain", self.reference_gain),
            ("reference_distance", self.reference_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("losses.{name}"), "must be positive"));
            }
        }
        if !(self.exponent.is_finite() && self.exponent >= 0.0) {
            return Err(Error::config("losses.exponent", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathLossModel {
    Unit,
    Explicit(PathLossProfile),
    Disk(DiskModel),
}

/// Reproducible source of randomness: a ChaCha stream selected by
/// `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent sub-stream, e.g. one per Monte Carlo trial.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One draw of every channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_r x K_d`, users -> HAP.
    pub g_ap_dl: CMat,
    /// `N_r x N_t`, self-interference.
    pub h_si: CMat,
    /// `N_t x K_u`, sensors -> HAP.
    pub g_ap_ul: CMat,
    /// `K_d x K_u`; column `k` holds the user -> sensor `k` coefficients.
    pub g_dl_ul: CMat,
    /// `K_u x K_d`; entry `(l, k)` is sensor `l` -> user `k`.
    pub g_ul_dl: CMat,
}

impl ChannelRealization {
    /// Sensor `sensor` -> user `user` coefficient.
    pub fn g_ud(&self, user: usize, sensor: usize) -> Complex64 {
        self.g_ul_dl[(sensor, user)]
    }

    pub fn dims_match(&self, params: &SystemParams) -> bool {
        self.g_ap_dl.shape() == (params.n_rx, params.k_dl)
            && self.h_si.shape() == (params.n_rx, params.n_tx)
            && self.g_ap_ul.shape() == (params.n_tx, params.k_ul)
            && self.g_dl_ul.shape() == (params.k_dl, params.k_ul)
            && self.g_ul_dl.shape() == (params.k_ul, params.k_dl)
    }
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// `rows x cols` matrix whose column `j` has per-entry variance `var(j)`.
fn gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    var: impl Fn(usize, usize) -> f64,
) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng, var(i, j));
        }
    }
    m
}

/// Draws one coherence interval of Rayleigh fading scaled by the path losses.
pub fn draw_channels(
    params: &SystemParams,
    losses: &PathLossProfile,
    stream: RngStream,
) -> Result<ChannelRealization> {
    losses.validate(params)?;
    let mut rng = stream.rng();
    Ok(draw_channels_with(params, losses, &mut rng))
}

/// Same as [`draw_channels`] but pulling from a caller-owned generator.
/// Dimensions are assumed to have been validated.
pub fn draw_channels_with<R: Rng + ?Sized>(
    params: &SystemParams,
    losses: &PathLossProfile,
    rng: &mut R,
) -> ChannelRealization {
    let (nr, nt, kd, ku) = (params.n_rx, params.n_tx, params.k_dl, params.k_ul);
    let g_ap_dl = gaussian_matrix(rng, nr, kd, |_, k| losses.beta_ap_dl[k]);
    let h_si = gaussian_matrix(rng, nr, nt, |_, _| params.sigma_si2);
    let g_ap_ul = gaussian_matrix(rng, nt, ku, |_, k| losses.beta_ap_ul[k]);
    let g_dl_ul = gaussian_matrix(rng, kd, ku, |m, k| losses.beta_dl_ul[(k, m)]);
    let g_ul_dl = gaussian_matrix(rng, ku, kd, |l, k| losses.beta_ul_dl[(k, l)]);
    ChannelRealization {
        g_ap_dl,
        h_si,
        g_ap_ul,
        g_dl_ul,
        g_ul_dl,
    }
}

/// Resolves a path-loss model into concrete coefficients.
pub fn sample_path_losses(
    model: &PathLossModel,
    params: &SystemParams,
    stream: RngStream,
) -> Result<PathLossProfile> {
    let profile = match model {
        PathLossModel::Unit => PathLossProfile::unit(params),
        PathLossModel::Explicit(p) => p.clone(),
        PathLossModel::Disk(disk) => {
            disk.validate()?;
            let mut rng = stream.rng();
            let mut drop = |_: usize| {
                let r = disk.radius * rng.random::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                (r * theta.cos(), r * theta.sin())
            };
            let users: Vec<(f64, f64)> = (0..params.k_dl).map(&mut drop).collect();
            let sensors: Vec<(f64, f64)> = (0..params.k_ul).map(&mut drop).collect();
            let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
            let origin = (0.0, 0.0);
            PathLossProfile {
                beta_ap_dl: users.iter().map(|&u| disk.gain(dist(u, origin))).collect(),
                beta_ap_ul: sensors.iter().map(|&s| disk.gain(dist(s, origin))).collect(),
                beta_dl_ul: DMatrix::from_fn(params.k_ul, params.k_dl, |k, m| {
                    disk.gain(dist(sensors[k], users[m]))
                }),
                beta_ul_dl: DMatrix::from_fn(params.k_dl, params.k_ul, |k, m| {
                    disk.gain(dist(users[k], sensors[m]))
                }),
            }
        }
    };
    profile.validate(params)?;
    Ok(profile)
}

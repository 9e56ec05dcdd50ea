//! Experiment dispatch and result files.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{db_to_linear, ExperimentConfig, ExperimentKind};
use crate::analysis::{
    downlink_rate_integral, downlink_rate_lower_bound, uplink_rate_integral, uplink_rate_lower_bound_icsi_with,
    uplink_rate_lower_bound_with, QuadratureConfig, RateBoundInputs,
};
use crate::error::{Error, Result};
use crate::estimation::{design_training, estimate_channels};
use crate::model::{draw_channels_with, PathLossProfile, RngStream, SystemParams};
use crate::montecarlo::{mc_rates, rate_region, scaling_experiment, CsiMode, RateModel, TrialPlan};
use crate::optimizer::{mrt_energy_baseline, optimize, OptimizationStatus};

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
}

/// Sidecar written next to the CSV files as `run_report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// CSV files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    pub timing: Timing,
}

pub fn version_string() -> String {
    match option_env!("FDHAP_GIT_REV") {
        Some(rev) => format!("{}-{rev}", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], outputs: &mut Vec<String>) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(dir.join(name))?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    outputs.push(name.to_string());
    Ok(())
}

/// Runs `kind` and writes its CSV files plus `run_report.json` into `out`.
///
/// An optimize-once run whose uplink floor cannot be met still writes its
/// files and then returns [`Error::Infeasible`].
pub fn run(config: &ExperimentConfig, kind: ExperimentKind, out: &Path) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let params = config.params()?;
    let losses = config.path_losses()?;
    let mut outputs = Vec::new();
    let (summary, failure) = match kind {
        ExperimentKind::RateRegion => (run_rate_region(config, &params, &losses, out, &mut outputs)?, None),
        ExperimentKind::UlRateVsAntennas => (run_scaling(config, &params, &losses, out, &mut outputs)?, None),
        ExperimentKind::ValidateBounds => (run_validate(config, &params, &losses, out, &mut outputs)?, None),
        ExperimentKind::OptimizeOnce => run_optimize_once(config, &params, &losses, out, &mut outputs)?,
    };
    let report = RunReport {
        version: version_string(),
        experiment: kind,
        seed: config.seed,
        config: config.clone(),
        outputs,
        summary,
        timing: Timing { total_seconds: start.elapsed().as_secs_f64() },
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(out.join("run_report.json"), text + "\n")?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn plan(config: &ExperimentConfig, params: &SystemParams, losses: &PathLossProfile, trials: usize) -> TrialPlan {
    let mut p = TrialPlan::new(params.clone(), losses.clone(), trials, config.seed);
    p.csi_mode = config.system.csi;
    p.optimize = config.optimizer.options();
    p
}

#[derive(Serialize)]
struct FrontierRow {
    seed: u64,
    r_ul_min: f64,
    ul_sum_rate: f64,
    dl_sum_rate: f64,
    sdr_dl_sum_rate: Option<f64>,
    feasible_trials: usize,
    n_trials: usize,
    infeasible: bool,
}

#[derive(Serialize)]
struct RegionTrialRow {
    seed: u64,
    trial: usize,
    r_ul_min: f64,
    opt_alpha: Option<f64>,
    opt_ul_sum_rate: Option<f64>,
    opt_dl_sum_rate: Option<f64>,
    opt_sdr_dl_sum_rate: Option<f64>,
    base_alpha: Option<f64>,
    base_ul_sum_rate: Option<f64>,
    base_dl_sum_rate: Option<f64>,
}

fn run_rate_region(
    config: &ExperimentConfig,
    params: &SystemParams,
    losses: &PathLossProfile,
    out: &Path,
    outputs: &mut Vec<String>,
) -> Result<serde_json::Value> {
    let plan = plan(config, params, losses, config.trials.region);
    let region = rate_region(&plan, &config.grids.r_ul, &config.grids.alpha)?;
    let seed = config.seed;
    let frontier = |pts: &[crate::montecarlo::FrontierPoint]| -> Vec<FrontierRow> {
        pts.iter()
            .map(|p| FrontierRow {
                seed,
                r_ul_min: p.r_ul_min,
                ul_sum_rate: p.ul_sum_rate,
                dl_sum_rate: p.dl_sum_rate,
                sdr_dl_sum_rate: p.sdr_dl_sum_rate,
                feasible_trials: p.feasible_trials,
                n_trials: p.n_trials,
                infeasible: p.infeasible(),
            })
            .collect()
    };
    write_csv(out, "frontier_optimized.csv", &frontier(&region.optimized), outputs)?;
    write_csv(out, "frontier_baseline.csv", &frontier(&region.baseline), outputs)?;
    let rows: Vec<RegionTrialRow> = region
        .trials
        .iter()
        .map(|t| RegionTrialRow {
            seed,
            trial: t.trial,
            r_ul_min: t.r_ul_min,
            opt_alpha: t.optimized.map(|o| o.alpha),
            opt_ul_sum_rate: t.optimized.map(|o| o.ul_sum_rate),
            opt_dl_sum_rate: t.optimized.map(|o| o.dl_sum_rate),
            opt_sdr_dl_sum_rate: t.optimized.map(|o| o.sdr_dl_sum_rate),
            base_alpha: t.baseline.map(|o| o.alpha),
            base_ul_sum_rate: t.baseline.map(|o| o.ul_sum_rate),
            base_dl_sum_rate: t.baseline.map(|o| o.dl_sum_rate),
        })
        .collect();
    write_csv(out, "region_trials.csv", &rows, outputs)?;
    let pairs = region.trials.iter().filter(|t| t.optimized.is_some() && t.baseline.is_some()).count();
    let sdr_wins = region
        .trials
        .iter()
        .filter(|t| matches!((t.optimized, t.baseline), (Some(o), Some(b)) if o.sdr_dl_sum_rate >= b.dl_sum_rate - 1e-9))
        .count();
    let recovered_wins = region
        .trials
        .iter()
        .filter(|t| matches!((t.optimized, t.baseline), (Some(o), Some(b)) if o.dl_sum_rate >= b.dl_sum_rate - 1e-9))
        .count();
    Ok(json!({
        "realizations": config.trials.region,
        "comparable_points": pairs,
        "sdr_at_least_baseline": sdr_wins,
        "recovered_at_least_baseline": recovered_wins,
    }))
}

#[derive(Serialize)]
struct ScalingCsvRow {
    seed: u64,
    n_tx: usize,
    p_ap: f64,
    alpha: f64,
    mc_rate: f64,
    std_error: f64,
    n_trials: usize,
    bound: f64,
    asymptote: f64,
}

fn run_scaling(
    config: &ExperimentConfig,
    params: &SystemParams,
    losses: &PathLossProfile,
    out: &Path,
    outputs: &mut Vec<String>,
) -> Result<serde_json::Value> {
    let mut plan = plan(config, params, losses, config.trials.rate);
    plan.model = config.scaling.rate_model;
    let s = &config.scaling;
    let rows = scaling_experiment(&plan, &config.grids.n_tx, db_to_linear(s.e_ap_db), s.power_law, s.bound_form)?;
    let csv_rows: Vec<ScalingCsvRow> = rows
        .iter()
        .map(|r| ScalingCsvRow {
            seed: config.seed,
            n_tx: r.n_tx,
            p_ap: r.p_ap,
            alpha: params.alpha,
            mc_rate: r.mc_rate.mean,
            std_error: r.mc_rate.std_error,
            n_trials: r.mc_rate.n_trials,
            bound: r.bound,
            asymptote: r.asymptote,
        })
        .collect();
    write_csv(out, "ul_rate_vs_antennas.csv", &csv_rows, outputs)?;
    let gaps: Vec<f64> = rows.iter().map(|r| (r.mc_rate.mean - r.asymptote).abs()).collect();
    Ok(json!({
        "n_rows": rows.len(),
        "gap_to_asymptote": gaps,
        "gap_decreasing": gaps.windows(2).all(|w| w[1] < w[0]),
    }))
}

#[derive(Serialize)]
struct BoundRow {
    seed: u64,
    link: &'static str,
    csi: &'static str,
    k: usize,
    mc_rate: f64,
    std_error: f64,
    lower_bound: f64,
    integral: Option<f64>,
    large_array_mc: Option<f64>,
    ok_flag: bool,
}

fn run_validate(
    config: &ExperimentConfig,
    params: &SystemParams,
    losses: &PathLossProfile,
    out: &Path,
    outputs: &mut Vec<String>,
) -> Result<serde_json::Value> {
    let inputs = RateBoundInputs::new(params.clone(), losses.clone());
    let quad = QuadratureConfig::default();
    let mut base = plan(config, params, losses, config.trials.rate);
    base.csi_mode = CsiMode::Perfect;
    let perfect = mc_rates(&base)?;
    let large = mc_rates(&TrialPlan { model: RateModel::LargeAntenna, ..base.clone() })?;
    let design_ok = design_training(params).is_ok();
    let estimated = if design_ok {
        Some(mc_rates(&TrialPlan { csi_mode: CsiMode::Estimated, ..base.clone() })?)
    } else {
        None
    };
    let form = config.scaling.bound_form;
    let seed = config.seed;
    let mut rows = Vec::new();
    for k in 0..params.k_ul {
        let mc = perfect.uplink[k];
        let lb = uplink_rate_lower_bound_with(&inputs, k, form)?;
        rows.push(BoundRow {
            seed,
            link: "uplink",
            csi: "perfect",
            k,
            mc_rate: mc.mean,
            std_error: mc.std_error,
            lower_bound: lb,
            integral: Some(uplink_rate_integral(&inputs, k, &quad)?),
            large_array_mc: Some(large.uplink[k].mean),
            ok_flag: lb <= mc.mean + 3.0 * mc.std_error,
        });
    }
    if let Some(est) = &estimated {
        for k in 0..params.k_ul {
            let mc = est.uplink[k];
            let lb = uplink_rate_lower_bound_icsi_with(&inputs, k, form)?;
            rows.push(BoundRow {
                seed,
                link: "uplink",
                csi: "estimated",
                k,
                mc_rate: mc.mean,
                std_error: mc.std_error,
                lower_bound: lb,
                integral: None,
                large_array_mc: None,
                ok_flag: lb <= mc.mean + 3.0 * mc.std_error,
            });
        }
    }
    for k in 0..params.k_dl {
        let mc = perfect.downlink[k];
        let lb = downlink_rate_lower_bound(&inputs, k)?;
        rows.push(BoundRow {
            seed,
            link: "downlink",
            csi: "perfect",
            k,
            mc_rate: mc.mean,
            std_error: mc.std_error,
            lower_bound: lb,
            integral: Some(downlink_rate_integral(&inputs, k, &quad)?),
            large_array_mc: Some(large.downlink[k].mean),
            ok_flag: lb <= mc.mean + 3.0 * mc.std_error,
        });
    }
    write_csv(out, "validate_bounds.csv", &rows, outputs)?;
    Ok(json!({
        "rows": rows.len(),
        "all_ok": rows.iter().all(|r| r.ok_flag),
        "estimated_csi_rows": design_ok,
    }))
}

#[derive(Serialize)]
struct AlphaRow {
    seed: u64,
    alpha: f64,
    status: String,
    dl_sum_rate: f64,
    ul_sum_rate: f64,
    sdr_dl_sum_rate: f64,
    sca_iterations: usize,
    sca_converged: bool,
    newton_steps: usize,
    max_gap: f64,
    rank_one_gap: f64,
    covariance_rank: usize,
}

fn run_optimize_once(
    config: &ExperimentConfig,
    params: &SystemParams,
    losses: &PathLossProfile,
    out: &Path,
    outputs: &mut Vec<String>,
) -> Result<(serde_json::Value, Option<Error>)> {
    let stream = RngStream::new(config.seed, 0);
    let mut rng = stream.rng();
    let ch = draw_channels_with(params, losses, &mut rng);
    let est = match config.system.csi {
        CsiMode::Perfect => None,
        CsiMode::Estimated => Some(estimate_channels(&ch, losses, &design_training(params)?, params, &mut rng)?),
    };
    let opts = config.optimizer.options();
    let grid = &config.grids.alpha;
    let res = optimize(&ch, losses, est.as_ref(), params, grid, params.r_ul_min, &opts, stream.child(1))?;
    let base = mrt_energy_baseline(&ch, losses, est.as_ref(), params, grid, params.r_ul_min, opts.form)?;
    let rows: Vec<AlphaRow> = res
        .per_alpha
        .iter()
        .map(|d| AlphaRow {
            seed: config.seed,
            alpha: d.alpha,
            status: match d.status {
                Some(s) => serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                None => "infeasible".to_string(),
            },
            dl_sum_rate: d.dl_sum_rate,
            ul_sum_rate: d.ul_sum_rate,
            sdr_dl_sum_rate: d.sdr_dl_sum_rate,
            sca_iterations: d.sca_iterations,
            sca_converged: d.sca_converged,
            newton_steps: d.newton_steps,
            max_gap: d.max_gap,
            rank_one_gap: d.rank_one_gap,
            covariance_rank: d.covariance_rank,
        })
        .collect();
    write_csv(out, "optimize_once.csv", &rows, outputs)?;
    let summary = json!({
        "status": res.status,
        "alpha_star": if res.alpha_star.is_finite() { json!(res.alpha_star) } else { json!(null) },
        "dl_sum_rate": res.dl_sum_rate,
        "ul_sum_rate": res.ul_sum_rate,
        "sdr_dl_sum_rate": res.sdr_dl_sum_rate,
        "rank_one_gap": if res.rank_one_gap.is_finite() { json!(res.rank_one_gap) } else { json!(null) },
        "sca_trace": res.sca_trace,
        "baseline": base,
    });
    let failure = (res.status == OptimizationStatus::Infeasible).then(|| {
        Error::Infeasible(format!("uplink floor {} cannot be met on any grid point", params.r_ul_min))
    });
    Ok((summary, failure))
}

/// Output directory: `--out`, then the config's `output`, then `results`.
pub fn output_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("results"))
}

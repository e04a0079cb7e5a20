//! Canned experiment scenarios with built-in statistical verdicts. Each
//! scenario writes its plot-ready CSVs and a JSON report, then fails with a
//! statistical-acceptance error (exit code 3) if its checks do not hold.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use ramanpol_core::engine::{pulse_seed, PulseSample, SimConfig, SimGrid, Solver};
use ramanpol_core::measure::{
    apply_digitizer, expected_measured_density, theta_from_energies, DigitizerConfig,
};
use ramanpol_core::stats::{
    chi2_against, circular_std_deg, histogram, ks_two_sample, min_entropy_mcv, pe_battery,
    MinEntropyReport, ThetaSequence, PE_THRESHOLDS,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{write_curve_csv, write_histogram_csv, write_json, CsvMeta};

pub fn run(scenario: &str, cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    match scenario {
        "fig3" => offset_collapse(cfg, out_dir),
        "fig4" => measured_density(cfg, out_dir),
        "table1" => certification_table(cfg, out_dir),
        other => Err(CliError::usage(format!(
            "unknown scenario '{other}'; expected fig3, fig4, or table1"
        ))),
    }
}

fn folded(samples: &[PulseSample<f64>]) -> Vec<f64> {
    samples.iter().map(|s| s.folded_theta_deg()).collect()
}

/// Scenario parameters for the offset collapse. The gain is set high enough
/// that the eigenchannel splitting at a 1 degree offset clearly beats the
/// sampling noise of the angle spread, and the axial step count keeps the
/// per-step gain increment inside the integrator's stability margin.
const COLLAPSE_GAIN: f64 = 44.0;
const COLLAPSE_N_Z: usize = 480;
const COLLAPSE_OFFSETS_DEG: [f64; 4] = [0.0, 1.0, 2.0, 5.0];

#[derive(Serialize)]
struct CollapseReport {
    version: &'static str,
    command: &'static str,
    master_seed: u64,
    config_sha256: String,
    pulses_per_offset: usize,
    total_gain: f64,
    n_z: usize,
    n_tau: usize,
    offsets_deg: Vec<f64>,
    circular_std_deg: Vec<f64>,
    histogram_csvs: Vec<String>,
    strictly_decreasing: bool,
}

fn offset_collapse(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let hash = cfg.sha256();
    let grid = SimGrid::new(COLLAPSE_N_Z, cfg.n_tau, cfg.length, cfg.window)?;
    let mut spreads = Vec::new();
    let mut csvs = Vec::new();
    for offset_deg in COLLAPSE_OFFSETS_DEG {
        // One master seed across offsets: common random numbers make the
        // spread comparison far less noisy than independent draws.
        let sim = SimConfig::with_total_gain(offset_deg.to_radians(), COLLAPSE_GAIN, grid)?;
        let thetas = folded(&sim.run_ensemble(cfg.master_seed, cfg.pulses)?);
        let spread = circular_std_deg(&thetas, 90.0)?;
        let counts = histogram(&ThetaSequence::new(thetas)?, 1.0)?;
        let name = format!("hist_offset_{offset_deg}.csv");
        write_histogram_csv(&out_dir.join(&name), &CsvMeta::seeded(cfg.master_seed, &hash), 1.0, &counts)?;
        spreads.push(spread);
        csvs.push(name);
    }
    let decreasing = spreads.windows(2).all(|w| w[1] < w[0]);
    write_json(
        &out_dir.join("fig3_report.json"),
        &CollapseReport {
            version: env!("CARGO_PKG_VERSION"),
            command: "reproduce fig3",
            master_seed: cfg.master_seed,
            config_sha256: hash,
            pulses_per_offset: cfg.pulses,
            total_gain: COLLAPSE_GAIN,
            n_z: COLLAPSE_N_Z,
            n_tau: cfg.n_tau,
            offsets_deg: COLLAPSE_OFFSETS_DEG.to_vec(),
            circular_std_deg: spreads.clone(),
            histogram_csvs: csvs,
            strictly_decreasing: decreasing,
        },
    )?;
    println!(
        "fig3: circular std by offset {:?} -> {:?}",
        COLLAPSE_OFFSETS_DEG,
        spreads.iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    if !decreasing {
        return Err(CliError::Statistical(format!(
            "angle spread is not strictly decreasing across offsets: {spreads:?}"
        )));
    }
    Ok(())
}

/// Mean pulse energy, in window units, for the measured-density scenario.
const DENSITY_MEAN_ENERGY: f64 = 3.0;
const DENSITY_ROTATION_DEG: f64 = 31.0;

#[derive(Serialize)]
struct DensityReport {
    version: &'static str,
    command: &'static str,
    master_seed: u64,
    config_sha256: String,
    n_pulses: usize,
    kept: usize,
    kept_rotated: usize,
    chi2_statistic: f64,
    chi2_dof: usize,
    chi2_p_value: f64,
    rotation_deg: f64,
    rotated_ks_statistic: f64,
    rotated_ks_p_value: f64,
    passed: bool,
}

/// Monte Carlo of the measurement chain alone: uniformly oriented linear
/// pulses with exponentially distributed energy, pushed through the digitizer
/// window. The kept-angle histogram is compared with the closed-form density,
/// and a second run with the analyzer basis rotated checks that the
/// distribution's shape does not move.
fn measured_density(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let hash = cfg.sha256();
    let dig = DigitizerConfig::relative_to_mean(DENSITY_MEAN_ENERGY)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.master_seed);
    let mut kept = Vec::new();
    let mut rotated = Vec::new();
    for i in 0..cfg.pulses as u64 {
        let theta: f64 = rng.gen_range(0.0..90.0);
        let energy = -DENSITY_MEAN_ENERGY * (1.0 - rng.gen::<f64>()).ln();
        let r = apply_digitizer(
            &PulseSample::linear(theta, energy),
            &dig,
            pulse_seed(cfg.master_seed ^ 0x6d65_6173_7572_6531, i),
        );
        if r.measurable {
            kept.push(theta_from_energies(r.e_h, r.e_v, cfg.eta)?);
        }
        let theta_rot = (theta + DENSITY_ROTATION_DEG).rem_euclid(90.0);
        let r = apply_digitizer(
            &PulseSample::linear(theta_rot, energy),
            &dig,
            pulse_seed(cfg.master_seed ^ 0x6d65_6173_7572_6532, i),
        );
        if r.measurable {
            rotated.push(theta_from_energies(r.e_h, r.e_v, cfg.eta)?);
        }
    }

    let centers: Vec<f64> = (0..90).map(|k| k as f64 + 0.5).collect();
    let density = expected_measured_density(&centers, &dig, DENSITY_MEAN_ENERGY)?;
    let counts = histogram(&ThetaSequence::new(kept.clone())?, 1.0)?;
    let counts_rot = histogram(&ThetaSequence::new(rotated.clone())?, 1.0)?;
    let gof = chi2_against(&counts, &density, 5.0)?;
    let ks = ks_two_sample(&kept, &rotated)?;
    let passed = gof.p_value > 0.01 && ks.p_value > 0.01;

    let meta = CsvMeta::seeded(cfg.master_seed, &hash);
    write_histogram_csv(&out_dir.join("hist_measured.csv"), &meta, 1.0, &counts)?;
    write_histogram_csv(&out_dir.join("hist_rotated.csv"), &meta, 1.0, &counts_rot)?;
    write_curve_csv(
        &out_dir.join("expected_density.csv"),
        &meta,
        "theta_deg, density_per_deg",
        centers.iter().copied().zip(density.iter().copied()),
    )?;
    write_json(
        &out_dir.join("fig4_report.json"),
        &DensityReport {
            version: env!("CARGO_PKG_VERSION"),
            command: "reproduce fig4",
            master_seed: cfg.master_seed,
            config_sha256: hash,
            n_pulses: cfg.pulses,
            kept: kept.len(),
            kept_rotated: rotated.len(),
            chi2_statistic: gof.statistic,
            chi2_dof: gof.dof,
            chi2_p_value: gof.p_value,
            rotation_deg: DENSITY_ROTATION_DEG,
            rotated_ks_statistic: ks.statistic,
            rotated_ks_p_value: ks.p_value,
            passed,
        },
    )?;
    println!(
        "fig4: kept {}/{}, density chi2 p {:.4}, rotated KS p {:.4}",
        kept.len(),
        cfg.pulses,
        gof.p_value,
        ks.p_value
    );
    if !passed {
        return Err(CliError::Statistical(format!(
            "measured-density checks failed: chi2 p {:.4}, rotated KS p {:.4}",
            gof.p_value, ks.p_value
        )));
    }
    Ok(())
}

/// Fast symmetric configuration for generating a long certification
/// sequence: low gain on a coarse grid, kernel-quadrature solver.
const TABLE_GAIN: f64 = 4.0;
const TABLE_N_Z: usize = 48;
const TABLE_N_TAU: usize = 64;
const TABLE_DIMENSIONS: [usize; 3] = [3, 4, 5];
const TABLE_T_MAX: usize = 100;
const MCV_BIN_WIDTHS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Serialize)]
struct BatteryRowReport {
    dimension: usize,
    tests_run: usize,
    skipped: usize,
    thresholds: [f64; 3],
    below_threshold: [usize; 3],
    expected_below: [f64; 3],
    band_low: [f64; 3],
    band_high: [f64; 3],
    within_bands: bool,
}

#[derive(Serialize)]
struct TableReport {
    version: &'static str,
    command: &'static str,
    master_seed: u64,
    config_sha256: String,
    n_pulses: usize,
    t_max: usize,
    rows: Vec<BatteryRowReport>,
    min_entropy: Vec<MinEntropyReport>,
    passed: bool,
}

fn certification_table(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let hash = cfg.sha256();
    let grid = SimGrid::new(TABLE_N_Z, TABLE_N_TAU, cfg.length, cfg.window)?;
    let mut sim = SimConfig::with_total_gain(0.0, TABLE_GAIN, grid)?;
    sim.solver = Solver::Analytic;
    let thetas = folded(&sim.run_ensemble(cfg.master_seed, cfg.pulses)?);
    let seq = ThetaSequence::new(thetas)?;

    let battery = pe_battery(&seq, &TABLE_DIMENSIONS, TABLE_T_MAX)?;
    let mut rows = Vec::new();
    let mut passed = true;
    for row in &battery.rows {
        let m = row.tests_run() as f64;
        let mut band_low = [0.0; 3];
        let mut band_high = [0.0; 3];
        let mut ok = true;
        for (slot, &p) in PE_THRESHOLDS.iter().enumerate() {
            let sigma = (m * p * (1.0 - p)).sqrt();
            band_low[slot] = (m * p - 3.0 * sigma).max(0.0);
            band_high[slot] = m * p + 3.0 * sigma;
            let c = row.below_threshold[slot] as f64;
            ok &= c >= band_low[slot] && c <= band_high[slot];
        }
        passed &= ok;
        rows.push(BatteryRowReport {
            dimension: row.d,
            tests_run: row.tests_run(),
            skipped: row.skipped,
            thresholds: PE_THRESHOLDS,
            below_threshold: row.below_threshold,
            expected_below: row.expected_below,
            band_low,
            band_high,
            within_bands: ok,
        });
    }

    let min_entropy: Vec<MinEntropyReport> = MCV_BIN_WIDTHS
        .iter()
        .map(|&w| min_entropy_mcv(&seq, w))
        .collect::<ramanpol_core::Result<_>>()?;

    write_json(
        &out_dir.join("table1_report.json"),
        &TableReport {
            version: env!("CARGO_PKG_VERSION"),
            command: "reproduce table1",
            master_seed: cfg.master_seed,
            config_sha256: hash,
            n_pulses: cfg.pulses,
            t_max: TABLE_T_MAX,
            rows,
            min_entropy,
            passed,
        },
    )?;
    for row in &battery.rows {
        let expected: Vec<String> =
            row.expected_below.iter().map(|e| format!("{e:.1}")).collect();
        println!(
            "table1: d={} below {:?} of {} tests (expected [{}])",
            row.d,
            row.below_threshold,
            row.tests_run(),
            expected.join(", ")
        );
    }
    if !passed {
        return Err(CliError::Statistical(
            "battery threshold counts fall outside the iid 3-sigma bands".into(),
        ));
    }
    Ok(())
}

//! The six run operations behind the CLI subcommands.
//!
//! Each operation builds the model from one validated configuration,
//! computes its product (mode table, intensity or squeezing spectrum,
//! cavity mapping, stochastic trajectories), and serializes it into the
//! output directory: CSV for numeric tables, a JSON manifest carrying the
//! parameter echo, the derived scalars, and the config hash that stamps
//! every file of the run. The sweep operation fans a one-axis family of
//! configurations over a work pool and aggregates the stamped results.

use crate::config::{build_model, omega_grid, Model, OutputFormat, RunConfig};
use crate::fault::{CliResult, Fault};
use crate::output::{
    config_hash, hash_of_value, read_csv_hash, read_json, sig17, write_csv, write_json,
};
use nalgebra::DVector;
use optomech::cavity::{adiabatic_cavity_coefficients, map_parameters};
use optomech::dipole::reflection_coefficient;
use optomech::langevin::{psd_estimate, simulate};
use optomech::scalar::cmod2;
use optomech::spectra::intensity_spectrum;
use optomech::squeezing::squeezing_spectrum;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

/// Which operation a run or sweep point executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RunKind {
    Modes,
    Intensity,
    Squeezing,
    CavityMap,
    Langevin,
}

/// Runs one operation into `out`, creating the directory first.
pub fn dispatch(kind: RunKind, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| Fault::io(out, e))?;
    match kind {
        RunKind::Modes => run_modes(cfg, out),
        RunKind::Intensity => run_intensity(cfg, out),
        RunKind::Squeezing => run_squeezing(cfg, out),
        RunKind::CavityMap => run_cavity_map(cfg, out),
        RunKind::Langevin => run_langevin(cfg, out),
    }
}

/// Collective-mode table: frequencies, friction, static shifts.
pub fn run_modes(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let hash = config_hash(cfg);
    let model = build_model(cfg)?;
    let mut run = RunFiles::new(cfg, out, hash);

    let n = model.modes.n_modes();
    let columns = vec![
        "j".to_string(),
        "nu_over_gamma".to_string(),
        "alpha_over_gamma".to_string(),
        "static_shift_over_lambda".to_string(),
        "weight_center".to_string(),
    ];
    let rows: Vec<Vec<String>> = (0..n)
        .map(|j| {
            vec![
                j.to_string(),
                sig17(model.modes.frequencies[j]),
                sig17(model.modes.mode_friction[j]),
                sig17(model.modes.static_shift[j]),
                sig17(model.modes.transform[(j, 0)]),
            ]
        })
        .collect();
    run.csv("modes.csv", &columns, &rows)?;

    let mut summary = BTreeMap::new();
    summary.insert("nu_min".into(), model.modes.frequencies.min());
    summary.insert("nu_max".into(), model.modes.frequencies.max());
    summary.insert("alpha_min".into(), model.modes.mode_friction.min());
    summary.insert("alpha_max".into(), model.modes.mode_friction.max());
    summary.insert("static_shift_max_abs".into(), model.modes.static_shift.amax());
    run.manifest("modes", &model, summary, Value::Null)
}

/// Motional-sideband intensity spectra, one file per detection angle.
pub fn run_intensity(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let hash = config_hash(cfg);
    let model = build_model(cfg)?;
    let det = cfg.detection()?;
    let grid = omega_grid(det, &model.trap);
    let mut run = RunFiles::new(cfg, out, hash);

    let columns = vec![
        "omega_over_gamma".to_string(),
        "nonlinear".to_string(),
        "total_rendered".to_string(),
    ];
    let mut entries = Vec::new();
    let mut summary = BTreeMap::new();
    for (i, &k) in det.k_perp.iter().enumerate() {
        let s = intensity_spectrum(
            &model.geom, &model.modes, &model.fc, &model.drive, &model.coop, &model.trap, k,
            &grid,
        )
        .map_err(Fault::from_lib)?;
        let total = s.total_rendered();
        let rows: Vec<Vec<String>> = (0..grid.len())
            .map(|w| vec![sig17(grid[w]), sig17(s.nonlinear[w]), sig17(total[w])])
            .collect();
        let name = format!("intensity_{i:03}.csv");
        run.csv(&name, &columns, &rows)?;
        let asym = sideband_asymmetry(&grid, &s.nonlinear);
        entries.push(json!({
            "file": name,
            "k_perp_over_q": k,
            "linear_weight": s.linear_weight,
            "delta_render_width": s.delta_render_width,
            "sideband_power": s.sideband_power(),
            "nonlinear_peak": s.nonlinear.amax(),
            "asymmetry_ratio": asym,
            "slow_band_warning": s.slow_band_warning,
        }));
        if i == 0 {
            summary.insert("linear_weight".into(), s.linear_weight);
            summary.insert("sideband_power".into(), s.sideband_power());
            summary.insert("nonlinear_peak".into(), s.nonlinear.amax());
            summary.insert("asymmetry_ratio".into(), asym);
        }
    }
    run.manifest("intensity", &model, summary, json!({ "spectra": entries }))
}

/// Squeezing spectrum over the configured (k, omega) grid.
pub fn run_squeezing(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let hash = config_hash(cfg);
    let model = build_model(cfg)?;
    let det = cfg.detection()?;
    let grid = omega_grid(det, &model.trap);
    let mut run = RunFiles::new(cfg, out, hash);

    let sq = squeezing_spectrum(
        &model.geom, &model.fc, &model.trap, &model.drive, &model.coop, &det.k_perp, &grid,
    )
    .map_err(Fault::from_lib)?;

    let columns = vec![
        "kx_over_q".to_string(),
        "ky_over_q".to_string(),
        "omega_over_gamma".to_string(),
        "s".to_string(),
        "s_approx".to_string(),
        "valid".to_string(),
        "re_v".to_string(),
        "im_v".to_string(),
    ];
    let mut rows = Vec::with_capacity(det.k_perp.len() * grid.len());
    for (i, &k) in det.k_perp.iter().enumerate() {
        for w in 0..grid.len() {
            rows.push(vec![
                sig17(k[0]),
                sig17(k[1]),
                sig17(grid[w]),
                sig17(sq.s[(i, w)]),
                sig17(sq.s_approx[(i, w)]),
                if sq.valid[(i, w)] { "1".into() } else { "0".into() },
                sig17(sq.v[(i, w)].re),
                sig17(sq.v[(i, w)].im),
            ]);
        }
    }
    run.csv("squeezing.csv", &columns, &rows)?;

    // Deepest squeezing over the adiabatically valid grid points.
    let mut s_min = f64::INFINITY;
    let mut at = (0usize, 0usize);
    for i in 0..det.k_perp.len() {
        for w in 0..grid.len() {
            if sq.valid[(i, w)] && sq.s[(i, w)] < s_min {
                s_min = sq.s[(i, w)];
                at = (i, w);
            }
        }
    }
    let width = squeezed_width(&grid, &sq.s, &sq.valid, 0);
    // The bandwidth parameter must agree with its equivalent-resonator
    // form 16 |g|^2 / (kappa nu).
    let mapping = map_parameters(&model.trap, &model.drive, &model.coop, model.detuning, 0)
        .map_err(Fault::from_lib)?;
    let b_cavity =
        16.0 * cmod2(mapping.g_bar) / (mapping.kappa * mapping.nu);
    let b_residual = sq.bandwidth_b / b_cavity - 1.0;

    let mut summary = BTreeMap::new();
    summary.insert("bandwidth_b".into(), sq.bandwidth_b);
    summary.insert("s_min".into(), s_min);
    summary.insert("s_min_omega".into(), grid[at.1]);
    summary.insert("squeezed_width_first_k".into(), width);
    summary.insert("w_first_k".into(), sq.w_k[0]);
    let extra = json!({
        "squeezing": {
            "alpha": sq.alpha,
            "nu_k": sq.nu_k.iter().copied().collect::<Vec<f64>>(),
            "w_k": sq.w_k.iter().copied().collect::<Vec<f64>>(),
            "bandwidth_b": sq.bandwidth_b,
            "bandwidth_vs_cavity_residual": b_residual,
            "s_min_k_index": at.0,
        }
    });
    run.manifest("squeezing", &model, summary, extra)
}

/// Equivalent-resonator report: mapped parameters and consistency checks.
pub fn run_cavity_map(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let hash = config_hash(cfg);
    let model = build_model(cfg)?;
    let run = RunFiles::new(cfg, out, hash);

    let mapping = map_parameters(&model.trap, &model.drive, &model.coop, model.detuning, 0)
        .map_err(Fault::from_lib)?;
    let coeffs =
        adiabatic_cavity_coefficients(&mapping, model.trap.nu).map_err(Fault::from_lib)?;
    let g_abs = cmod2(mapping.g_bar).sqrt();
    let b_cavity = 16.0 * cmod2(mapping.g_bar) / (mapping.kappa * mapping.nu);
    let alpha_site = model.fc.friction[0];
    let usb_residual = mapping.alpha_opt_usb / alpha_site - 1.0;
    let diff = mapping.g_bar.conj() * (coeffs.coeff_b - coeffs.coeff_bdag);
    let reconstructed = -2.0 * diff.im;
    let adiabatic_residual = reconstructed / mapping.alpha_opt_exact - 1.0;

    let cavity = json!({
        "g_bar": { "re": mapping.g_bar.re, "im": mapping.g_bar.im },
        "coupling_magnitude": g_abs,
        "delta_c": mapping.delta_c,
        "kappa": mapping.kappa,
        "nu": mapping.nu,
        "kappa_over_nu": mapping.kappa / mapping.nu,
        "kappa_over_coupling": mapping.kappa / g_abs,
        "alpha_exact": mapping.alpha_opt_exact,
        "alpha_usb": mapping.alpha_opt_usb,
        "alpha_site": alpha_site,
        "bandwidth_b": b_cavity,
        "coeff_b": { "re": coeffs.coeff_b.re, "im": coeffs.coeff_b.im },
        "coeff_bdag": { "re": coeffs.coeff_bdag.re, "im": coeffs.coeff_bdag.im },
        "noise_weight": { "re": coeffs.noise_weight.re, "im": coeffs.noise_weight.im },
        "weak_coupling_warning": coeffs.weak_coupling_warning,
        "residual_usb_vs_site_friction": usb_residual,
        "residual_adiabatic_vs_exact": adiabatic_residual,
        "residual_exact_vs_usb": mapping.alpha_opt_exact / mapping.alpha_opt_usb - 1.0,
    });

    let mut summary = BTreeMap::new();
    summary.insert("bandwidth_b".into(), b_cavity);
    summary.insert("alpha_usb".into(), mapping.alpha_opt_usb);
    summary.insert("alpha_exact".into(), mapping.alpha_opt_exact);
    summary.insert("kappa_over_nu".into(), mapping.kappa / mapping.nu);
    summary.insert("residual_usb_vs_site_friction".into(), usb_residual);
    let manifest = run.manifest_value("cavity-map", &model, summary, json!({ "cavity": cavity }))?;
    println!("{}", serde_json::to_string_pretty(&manifest).expect("report serializes"));
    Ok(())
}

/// Stochastic oracle run: Welch PSDs, optional decimated trajectories.
pub fn run_langevin(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let hash = config_hash(cfg);
    let model = build_model(cfg)?;
    let oracle = cfg.oracle()?;
    let mut run = RunFiles::new(cfg, out, hash);

    let lcfg = oracle.langevin_config();
    let traj = simulate(&model.fc, &model.trap, &lcfg).map_err(Fault::from_lib)?;
    let seg = oracle.segment_len();
    let psd = psd_estimate(&traj, &model.modes, seg).map_err(Fault::from_lib)?;

    let n_modes = model.modes.n_modes();
    let mut columns = vec!["omega_over_gamma".to_string()];
    columns.extend((0..n_modes).map(|j| format!("mode_{j:03}")));
    let rows: Vec<Vec<String>> = (0..psd.omega.len())
        .map(|w| {
            let mut row = vec![sig17(psd.omega[w])];
            row.extend((0..n_modes).map(|j| sig17(psd.psd[(j, w)])));
            row
        })
        .collect();
    run.csv("psd.csv", &columns, &rows)?;

    if let Some(stride) = oracle.trajectory_stride {
        let n_sites = traj.n_sites();
        let mut columns = vec!["member".to_string(), "step".to_string()];
        columns.extend((0..n_sites).map(|s| format!("z_{s:03}")));
        columns.extend((0..n_sites).map(|s| format!("p_{s:03}")));
        let mut rows = Vec::new();
        for m in 0..traj.n_members() {
            for step in (0..traj.n_recorded()).step_by(stride) {
                let mut row = vec![m.to_string(), step.to_string()];
                row.extend((0..n_sites).map(|s| sig17(traj.z[m][(step, s)])));
                row.extend((0..n_sites).map(|s| sig17(traj.p[m][(step, s)])));
                rows.push(row);
            }
        }
        run.csv("trajectories.csv", &columns, &rows)?;
    }

    let mut psd_peak = f64::NEG_INFINITY;
    let mut peak_omega = 0.0;
    for j in 0..n_modes {
        for w in 0..psd.omega.len() {
            if psd.psd[(j, w)] > psd_peak {
                psd_peak = psd.psd[(j, w)];
                peak_omega = psd.omega[w];
            }
        }
    }
    let mut summary = BTreeMap::new();
    summary.insert("psd_peak".into(), psd_peak);
    summary.insert("psd_peak_omega".into(), peak_omega);
    summary.insert("n_segments".into(), psd.n_segments as f64);
    let extra = json!({
        "oracle": {
            "seed": oracle.seed,
            "streams": traj.streams,
            "recorded_steps": traj.n_recorded(),
            "segment_len": psd.segment_len,
            "n_segments": psd.n_segments,
        }
    });
    run.manifest("langevin", &model, summary, extra)
}

/// One-axis sweep: run the inner operation per value in its own
/// directory, then aggregate the stamped summaries.
pub fn run_sweep(
    base: &RunConfig,
    out: &Path,
    field: &str,
    values: &[f64],
    kind: RunKind,
) -> CliResult<()> {
    if values.is_empty() {
        return Err(Fault::Config("sweep: axis has zero length".into()));
    }
    let pointer = format!("/{}", field.replace('.', "/"));
    let base_value = serde_json::to_value(base).expect("config serializes");
    match base_value.pointer(&pointer) {
        Some(Value::Number(_)) => {}
        Some(_) => {
            return Err(Fault::Config(format!("sweep: field {field} is not numeric")));
        }
        None => return Err(Fault::Config(format!("sweep: unknown field {field}"))),
    }
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let mut val = base_value.clone();
        // Integral values stay integers so integer-typed fields sweep too.
        *val.pointer_mut(&pointer).expect("pointer checked") =
            if v.fract() == 0.0 && v.abs() < 9.0e15 {
                json!(v as i64)
            } else {
                json!(v)
            };
        let cfg: RunConfig = serde_json::from_value(val)
            .map_err(|e| Fault::Config(format!("sweep: {field} = {v}: {e}")))?;
        cfg.validate()?;
        configs.push(cfg);
    }

    std::fs::create_dir_all(out).map_err(|e| Fault::io(out, e))?;
    let results: Vec<CliResult<()>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| dispatch(kind, cfg, &out.join(format!("run_{i:03}"))))
        .collect();
    for r in results {
        r?;
    }

    // Aggregate from disk, refusing runs whose stamps disagree.
    let mut keys: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let dir = out.join(format!("run_{i:03}"));
        let (hash, summary) = load_stamped_run(&dir)?;
        if i == 0 {
            keys = summary.keys().cloned().collect();
        }
        let mut row = vec![i.to_string(), sig17(v), hash];
        for key in &keys {
            let value = summary.get(key).ok_or_else(|| {
                Fault::Config(format!(
                    "sweep: run {i} summary misses key {key}; refusing to aggregate"
                ))
            })?;
            row.push(sig17(*value));
        }
        rows.push(row);
    }
    let mut columns = vec!["run".to_string(), field.to_string(), "config_sha256".to_string()];
    columns.extend(keys);
    write_csv(&out.join("aggregate.csv"), &config_hash(base), &columns, &rows)?;
    println!("sweep: {} runs -> {}", values.len(), out.display());
    Ok(())
}

/// Loads one stamped run directory: verifies the manifest hash against
/// the recomputed hash of the config echo and against every CSV stamp,
/// then returns the hash and the summary scalars.
pub fn load_stamped_run(dir: &Path) -> CliResult<(String, BTreeMap<String, f64>)> {
    let path = dir.join("manifest.json");
    let manifest = read_json(&path)?;
    let hash = manifest["config_sha256"]
        .as_str()
        .ok_or_else(|| Fault::Config(format!("{}: missing config_sha256", path.display())))?
        .to_string();
    let echo = manifest
        .get("config")
        .ok_or_else(|| Fault::Config(format!("{}: missing config echo", path.display())))?;
    if hash_of_value(echo) != hash {
        return Err(Fault::Config(format!(
            "{}: config hash does not match the echoed config; refusing to aggregate",
            path.display()
        )));
    }
    if let Some(files) = manifest["files"].as_array() {
        for f in files {
            let name = f.as_str().unwrap_or_default();
            let stamped = read_csv_hash(&dir.join(name))?;
            if stamped != hash {
                return Err(Fault::Config(format!(
                    "{}: stamp disagrees with the manifest; refusing to aggregate",
                    dir.join(name).display()
                )));
            }
        }
    }
    let mut summary = BTreeMap::new();
    if let Some(map) = manifest["summary"].as_object() {
        for (k, v) in map {
            if let Some(x) = v.as_f64() {
                summary.insert(k.clone(), x);
            }
        }
    }
    Ok((hash, summary))
}

/// Accumulates the files of one run and assembles its manifest.
struct RunFiles<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    hash: String,
    csv_enabled: bool,
    json_enabled: bool,
    files: Vec<String>,
}

impl<'a> RunFiles<'a> {
    fn new(cfg: &'a RunConfig, out: &'a Path, hash: String) -> Self {
        let formats = cfg.output().formats;
        RunFiles {
            cfg,
            out,
            hash,
            csv_enabled: formats.contains(&OutputFormat::Csv),
            json_enabled: formats.contains(&OutputFormat::Json),
            files: Vec::new(),
        }
    }

    fn csv(&mut self, name: &str, columns: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        if !self.csv_enabled {
            return Ok(());
        }
        write_csv(&self.out.join(name), &self.hash, columns, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn manifest_value(
        &self,
        command: &str,
        model: &Model,
        summary: BTreeMap<String, f64>,
        extra: Value,
    ) -> CliResult<Value> {
        let mut manifest = base_manifest(self.cfg, &self.hash, command, model)?;
        let map = manifest.as_object_mut().expect("manifest is an object");
        map.insert("files".into(), json!(self.files));
        map.insert("summary".into(), json!(summary));
        if let Value::Object(extra) = extra {
            for (k, v) in extra {
                map.insert(k, v);
            }
        }
        if self.json_enabled {
            write_json(&self.out.join("manifest.json"), &manifest)?;
        }
        Ok(manifest)
    }

    fn manifest(
        &self,
        command: &str,
        model: &Model,
        summary: BTreeMap<String, f64>,
        extra: Value,
    ) -> CliResult<()> {
        self.manifest_value(command, model, summary, extra)?;
        println!("{command}: wrote {}", self.out.display());
        Ok(())
    }
}

/// Manifest skeleton: hash, parameter echo, units, derived scalars, the
/// cross-module identity residuals, and any active warnings.
fn base_manifest(
    cfg: &RunConfig,
    hash: &str,
    command: &str,
    model: &Model,
) -> CliResult<Value> {
    let r = reflection_coefficient(model.detuning, model.coop.linewidth())
        .map_err(Fault::from_lib)?;
    let r2 = cmod2(r);
    let one_plus = num_complex::Complex::new(1.0 + r.re, r.im);
    let unitarity = r2 + cmod2(one_plus) - 1.0;
    let lamb_dicke =
        model.trap.eta * model.trap.eta - model.trap.recoil / (2.0 * model.trap.nu);
    let mut warnings: Vec<String> = Vec::new();
    if model.drive.saturation_warning(model.coop.linewidth()) {
        warnings.push(
            "drive amplitude exceeds half the cooperative linewidth; \
             the linear-response expansion is marginal"
                .into(),
        );
    }
    Ok(json!({
        "command": command,
        "config_sha256": hash,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "units": {
            "rates": "gamma",
            "lengths": "lambda",
            "wavevectors": "q = 2 pi / lambda",
            "energies_and_temperatures": "hbar gamma",
            "masses": "hbar / (gamma lambda^2)",
        },
        "derived": {
            "n_sites": model.geom.n_sites(),
            "cooperative_shift": model.coop.delta,
            "cooperative_width": model.coop.gamma_coop,
            "linewidth": model.coop.linewidth(),
            "uniform_mode_width": model.coop.uniform_mode_width(),
            "detuning_over_gamma": model.detuning,
            "effective_temperature": model.fc.t_eff,
            "central_friction": model.fc.friction[0],
            "eta": model.trap.eta,
            "nu": model.trap.nu,
            "mass": model.trap.mass,
            "recoil": model.trap.recoil,
            "zero_point_length": model.trap.x0,
            "reflection": { "re": r.re, "im": r.im, "magnitude_squared": r2 },
        },
        "identities": {
            "reflection_unitarity_residual": unitarity,
            "lamb_dicke_residual": lamb_dicke,
        },
        "warnings": warnings,
    }))
}

/// Ratio of integrated sideband weight at positive envelope frequencies
/// to the weight at negative ones; 1 for a symmetric spectrum.
pub fn sideband_asymmetry(grid: &DVector<f64>, nonlinear: &DVector<f64>) -> f64 {
    let mut high = 0.0;
    let mut low = 0.0;
    for i in 1..grid.len() {
        let mid = 0.5 * (grid[i - 1] + grid[i]);
        let area = 0.5 * (nonlinear[i - 1] + nonlinear[i]) * (grid[i] - grid[i - 1]);
        if mid > 0.0 {
            high += area;
        } else {
            low += area;
        }
    }
    high / low
}

/// Spectral measure (grid bins times spacing) of the region where the
/// squeezing at one k point drops below 1/2, counting valid points only.
fn squeezed_width(
    grid: &DVector<f64>,
    s: &nalgebra::DMatrix<f64>,
    valid: &nalgebra::DMatrix<bool>,
    k_idx: usize,
) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let dw = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let count = (0..grid.len())
        .filter(|&w| valid[(k_idx, w)] && s[(k_idx, w)] < 0.5)
        .count();
    count as f64 * dw
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_spectra_have_unit_asymmetry() {
        let grid = DVector::from_fn(101, |i, _| -1.0 + 0.02 * i as f64);
        let even = grid.map(|w: f64| (-w * w).exp());
        assert_relative_eq!(sideband_asymmetry(&grid, &even), 1.0, max_relative = 1e-12);
        let tilted = DVector::from_fn(101, |i, _| {
            let w = grid[i];
            (-(w - 0.3) * (w - 0.3) * 20.0).exp()
        });
        assert!(sideband_asymmetry(&grid, &tilted) > 2.0);
    }

    #[test]
    fn squeezed_width_counts_valid_bins_only() {
        let grid = DVector::from_fn(5, |i, _| i as f64);
        let s = nalgebra::DMatrix::from_row_slice(1, 5, &[0.1, 0.1, 0.9, 0.1, 0.1]);
        let mut valid = nalgebra::DMatrix::from_element(1, 5, true);
        assert_relative_eq!(squeezed_width(&grid, &s, &valid, 0), 4.0);
        valid[(0, 0)] = false;
        assert_relative_eq!(squeezed_width(&grid, &s, &valid, 0), 3.0);
    }

    #[test]
    fn stamped_run_loader_refuses_mismatched_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = json!({
            "config_sha256": "0000",
            "config": { "a": 1 },
            "files": [],
            "summary": { "x": 1.0 },
        });
        write_json(&dir.path().join("manifest.json"), &manifest).unwrap();
        let err = load_stamped_run(dir.path()).unwrap_err();
        assert!(err.to_string().contains("refusing to aggregate"), "{err}");

        let echo = json!({ "a": 1 });
        let good = json!({
            "config_sha256": hash_of_value(&echo),
            "config": echo,
            "files": ["t.csv"],
            "summary": { "x": 2.5 },
        });
        write_json(&dir.path().join("manifest.json"), &good).unwrap();
        write_csv(
            &dir.path().join("t.csv"),
            "deadbeef",
            &["x".into()],
            &[vec!["1".into()]],
        )
        .unwrap();
        let err = load_stamped_run(dir.path()).unwrap_err();
        assert!(err.to_string().contains("stamp disagrees"), "{err}");

        let hash = good["config_sha256"].as_str().unwrap().to_string();
        write_csv(&dir.path().join("t.csv"), &hash, &["x".into()], &[vec!["1".into()]])
            .unwrap();
        let (h, summary) = load_stamped_run(dir.path()).unwrap();
        assert_eq!(h, hash);
        assert_eq!(summary["x"], 2.5);
    }
}

//! Experiment runners: simulate, embed, decompose, project, and emit every
//! artifact for one declarative config.
//!
//! Output layout per run: `<out>/<experiment>/<run-id>/{data/*.csv,
//! plots/*.svg, metadata.json}`. Everything is deterministic — rerunning a
//! config reproduces every file byte for byte — and a failed experiment
//! removes its whole output directory rather than leaving partial files.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use serde_json::{Map, Value};

use phaselens_core::embed::{even_stride, hankel_embed, snapshot_embed, TimeSeries};
use phaselens_core::ode::StepSpec;
use phaselens_core::pca::{
    covariance, normalized_spectrum, project, select_components, svd, PcaProjection, ReducedMatrix,
    SelectionRule, SvdResult,
};
use phaselens_core::systems::{
    lorenz_trajectory, simulate_kdv, FieldSnapshotMatrix, KdvParams, LorenzParams, LorenzState,
};
use phaselens_core::Matrix;

use crate::chart::{emit_svg, Chart, Series};
use crate::config::{DecomposeTarget, ExperimentConfig, KdvRunConfig, PcaConfig, SystemKind};
use crate::error::PipelineError;
use crate::manifest::{ArtifactKind, RunArtifacts};
use crate::table::{emit_csv, Cell, Table};

/// Runs a validated config, dispatching on its system.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_root: &Path,
) -> Result<RunArtifacts, PipelineError> {
    match cfg.system {
        SystemKind::Lorenz => run_lorenz_experiment(cfg, out_root),
        SystemKind::Kdv => run_kdv_experiment(cfg, out_root),
    }
}

pub fn run_lorenz_experiment(
    cfg: &ExperimentConfig,
    out_root: &Path,
) -> Result<RunArtifacts, PipelineError> {
    cfg.validate()?;
    if cfg.system != SystemKind::Lorenz {
        return Err(PipelineError::Config(
            "run_lorenz_experiment needs a lorenz config".into(),
        ));
    }
    let exp_dir = out_root.join(&cfg.experiment);
    reset_dir(&exp_dir)?;
    let result = lorenz_run(cfg, &exp_dir).and_then(|a| a.verify().map(|_| a));
    if result.is_err() {
        let _ = fs::remove_dir_all(&exp_dir);
    }
    result
}

pub fn run_kdv_experiment(
    cfg: &ExperimentConfig,
    out_root: &Path,
) -> Result<RunArtifacts, PipelineError> {
    cfg.validate()?;
    if cfg.system != SystemKind::Kdv {
        return Err(PipelineError::Config(
            "run_kdv_experiment needs a kdv config".into(),
        ));
    }
    let runs = cfg.runs.clone().unwrap_or_default();
    let exp_dir = out_root.join(&cfg.experiment);
    reset_dir(&exp_dir)?;

    // Runs are independent pure computations writing disjoint
    // subdirectories, so they fan out to one worker each; results are
    // merged in config order to keep the manifest deterministic.
    let results: Vec<Result<RunArtifacts, PipelineError>> = thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|run| {
                let exp_dir = &exp_dir;
                scope.spawn(move || kdv_run(cfg, run, exp_dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("kdv worker panicked"))
            .collect()
    });

    let mut artifacts = RunArtifacts::default();
    for result in results {
        match result {
            Ok(part) => artifacts.merge(part),
            Err(e) => {
                let _ = fs::remove_dir_all(&exp_dir);
                return Err(e);
            }
        }
    }
    if let Err(e) = artifacts.verify() {
        let _ = fs::remove_dir_all(&exp_dir);
        return Err(e);
    }
    Ok(artifacts)
}

fn lorenz_run(cfg: &ExperimentConfig, exp_dir: &Path) -> Result<RunArtifacts, PipelineError> {
    let lz = cfg.lorenz();
    let run_dir = exp_dir.join("base");
    let (data_dir, plots_dir) = make_run_dirs(&run_dir)?;
    let mut artifacts = RunArtifacts::default();

    let params = LorenzParams {
        sigma: lz.sigma,
        r: lz.r,
        b: lz.b,
    };
    let spec = StepSpec::new(0.0, lz.dt, lz.steps)?;
    let y0 = LorenzState::new(lz.x0, lz.y0, lz.z0);
    let states = lorenz_trajectory(&params, &y0, &spec)?;

    let ts_path = data_dir.join("timeseries.csv");
    write_lorenz_timeseries_csv(&states, &spec, &ts_path)?;
    artifacts.push(ArtifactKind::TimeseriesCsv, ts_path);

    let axis = |name: &str, s: &LorenzState| match name {
        "x" => s.x,
        "y" => s.y,
        _ => s.z,
    };
    for (a, b) in [("x", "y"), ("x", "z"), ("y", "z")] {
        let points: Vec<(f64, f64)> = states.iter().map(|s| (axis(a, s), axis(b, s))).collect();
        let chart = Chart::new(format!("Lorenz trajectory: {a} vs {b}"), a, b)
            .with_series(Series::new(format!("{a}-{b}"), points));
        let path = plots_dir.join(format!("phase-{a}{b}.svg"));
        emit_svg(&chart, &path)?;
        artifacts.push(ArtifactKind::PhasePortraitSvg, path);
    }

    // Spectra per window from the x(t) series.
    let xs: Vec<f64> = states.iter().map(|s| s.x).collect();
    let series = TimeSeries::new(xs, lz.dt)?;
    let windows = cfg.windows();
    let mut spectra: Vec<(usize, Vec<f64>)> = Vec::with_capacity(windows.len());
    let mut portrait: Option<(Matrix, SvdResult)> = None;
    for &window in &windows {
        let traj = hankel_embed(&series, window)?;
        let obs = traj.observations();
        let decomposition = decompose(&obs, &cfg.pca)?;
        let spectrum = normalized_spectrum(&decomposition)?;
        if window == cfg.portrait_window() {
            portrait = Some((obs, decomposition));
        }
        spectra.push((window, spectrum));
    }

    let spectrum_csv = data_dir.join("spectrum.csv");
    write_spectrum_overlay_csv(&spectra, &spectrum_csv)?;
    artifacts.push(ArtifactKind::SpectrumCsv, spectrum_csv);

    let mut chart = Chart::new("Normalized singular spectrum", "index", "sigma / sigma_1").log_y();
    for (window, spectrum) in &spectra {
        let points: Vec<(f64, f64)> = spectrum
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64, v))
            .collect();
        chart = chart.with_series(Series::new(format!("window {window}"), points));
    }
    let spectrum_svg = plots_dir.join("spectrum.svg");
    emit_svg(&chart, &spectrum_svg)?;
    artifacts.push(ArtifactKind::SpectrumSvg, spectrum_svg);

    // Components of the portrait window.
    let (obs, decomposition) =
        portrait.expect("portrait window is validated to be in the windows list");
    let projection = select_components(&decomposition, selection_rule(&cfg.pca))?;
    let energy = energy_captured(&decomposition, projection.component_count());
    let lagged_vector_count = obs.rows();
    let reduced = project_configured(&obs, &projection, "c", &cfg.pca)?;

    let components_csv = data_dir.join("components.csv");
    write_components_csv(&reduced, &components_csv)?;
    artifacts.push(ArtifactKind::ComponentsCsv, components_csv);
    pairwise_portraits(
        &reduced,
        "Reconstructed phase space",
        ArtifactKind::ReconstructionSvg,
        &plots_dir,
        &mut artifacts,
    )?;

    let mut meta = Map::new();
    meta.insert("experiment".into(), cfg.experiment.clone().into());
    meta.insert("system".into(), "lorenz".into());
    meta.insert("run".into(), "base".into());
    meta.insert("sigma".into(), lz.sigma.into());
    meta.insert("r".into(), lz.r.into());
    meta.insert("b".into(), lz.b.into());
    meta.insert("x0".into(), lz.x0.into());
    meta.insert("y0".into(), lz.y0.into());
    meta.insert("z0".into(), lz.z0.into());
    meta.insert("dt".into(), lz.dt.into());
    meta.insert("steps".into(), (lz.steps as u64).into());
    meta.insert(
        "windows".into(),
        Value::Array(windows.iter().map(|&w| (w as u64).into()).collect()),
    );
    meta.insert(
        "portrait_window".into(),
        (cfg.portrait_window() as u64).into(),
    );
    meta.insert(
        "lagged_vector_count".into(),
        (lagged_vector_count as u64).into(),
    );
    meta.insert(
        "final_state_max_norm".into(),
        states.last().map(|s| s.max_norm()).unwrap_or(0.0).into(),
    );
    insert_pca_metadata(&mut meta, &cfg.pca, projection.component_count(), energy);

    let meta_path = run_dir.join("metadata.json");
    write_metadata(meta, &meta_path)?;
    artifacts.push(ArtifactKind::MetadataJson, meta_path);

    Ok(artifacts)
}

fn kdv_run(
    cfg: &ExperimentConfig,
    run: &KdvRunConfig,
    exp_dir: &Path,
) -> Result<RunArtifacts, PipelineError> {
    let steps = run
        .steps
        .unwrap_or_else(|| KdvParams::default_steps(run.grid));
    let mut params = KdvParams::new(run.grid, run.velocity, steps)?;
    if let Some(dt) = run.dt {
        params = params.with_dt(dt)?;
    }
    if let Some(l) = cfg.half_length {
        params = params.with_half_length(l)?;
    }

    let run_id = format!("n{}-v{}", run.grid, fmt_velocity(run.velocity));
    let run_dir = exp_dir.join(&run_id);
    let (data_dir, plots_dir) = make_run_dirs(&run_dir)?;
    let mut artifacts = RunArtifacts::default();

    let field = simulate_kdv(&params)?;

    let field_csv = data_dir.join("field.csv");
    write_field_csv(&field, &field_csv)?;
    artifacts.push(ArtifactKind::FieldCsv, field_csv);

    let grid_csv = data_dir.join("grid.csv");
    write_grid_csv(&field, &grid_csv)?;
    artifacts.push(ArtifactKind::GridCsv, grid_csv);

    let rows = cfg.snapshot_rows();
    let stride = cfg
        .stride
        .unwrap_or_else(|| even_stride(field.values.rows(), rows));
    let traj = snapshot_embed(&field, rows, stride)?;
    let obs = traj.observations();

    let embedding_csv = data_dir.join("embedding.csv");
    write_matrix_csv(&obs, "u", &embedding_csv)?;
    artifacts.push(ArtifactKind::EmbeddingCsv, embedding_csv);

    let decomposition = decompose(&obs, &cfg.pca)?;
    let spectrum = normalized_spectrum(&decomposition)?;

    let spectrum_csv = data_dir.join("spectrum.csv");
    let mut table = Table::new(vec!["index", "sigma", "normalized"]);
    for (i, (&sigma, &norm)) in decomposition
        .singular_values()
        .iter()
        .zip(&spectrum)
        .enumerate()
    {
        table.push_row(vec![
            Cell::Int((i + 1) as i64),
            Cell::Real(sigma),
            Cell::Real(norm),
        ]);
    }
    emit_csv(&table, &spectrum_csv)?;
    artifacts.push(ArtifactKind::SpectrumCsv, spectrum_csv);

    let points: Vec<(f64, f64)> = spectrum
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64, v))
        .collect();
    let chart = Chart::new("Normalized singular spectrum", "index", "sigma / sigma_1")
        .log_y()
        .with_series(Series::new(format!("N = {}", run.grid), points));
    let spectrum_svg = plots_dir.join("spectrum.svg");
    emit_svg(&chart, &spectrum_svg)?;
    artifacts.push(ArtifactKind::SpectrumSvg, spectrum_svg);

    let projection = select_components(&decomposition, selection_rule(&cfg.pca))?;
    let energy = energy_captured(&decomposition, projection.component_count());
    let reduced = project_configured(&obs, &projection, "y", &cfg.pca)?;

    let components_csv = data_dir.join("components.csv");
    write_components_csv(&reduced, &components_csv)?;
    artifacts.push(ArtifactKind::ComponentsCsv, components_csv);
    pairwise_portraits(
        &reduced,
        "Reduced phase space",
        ArtifactKind::ReconstructionSvg,
        &plots_dir,
        &mut artifacts,
    )?;

    let mut meta = Map::new();
    meta.insert("experiment".into(), cfg.experiment.clone().into());
    meta.insert("system".into(), "kdv".into());
    meta.insert("run".into(), run_id.clone().into());
    meta.insert("grid".into(), (run.grid as u64).into());
    meta.insert("velocity".into(), run.velocity.into());
    meta.insert("dt".into(), params.dt().into());
    meta.insert("steps".into(), (params.steps() as u64).into());
    meta.insert("half_length".into(), params.l().into());
    meta.insert("rows".into(), (rows as u64).into());
    meta.insert("stride".into(), (stride as u64).into());
    meta.insert(
        "snapshots_total".into(),
        (field.values.rows() as u64).into(),
    );
    insert_pca_metadata(&mut meta, &cfg.pca, projection.component_count(), energy);

    let meta_path = run_dir.join("metadata.json");
    write_metadata(meta, &meta_path)?;
    artifacts.push(ArtifactKind::MetadataJson, meta_path);

    Ok(artifacts)
}

/// Decomposes the observation matrix per config: SVD of its covariance, or
/// of the (optionally centered) matrix itself.
fn decompose(obs: &Matrix, pca_cfg: &PcaConfig) -> Result<SvdResult, PipelineError> {
    match pca_cfg.decompose {
        DecomposeTarget::Covariance => {
            let cov = covariance(obs, pca_cfg.center)?;
            Ok(svd(cov.matrix())?)
        }
        DecomposeTarget::Trajectory => {
            if pca_cfg.center {
                Ok(svd(&centered_columns(obs))?)
            } else {
                Ok(svd(obs)?)
            }
        }
    }
}

fn project_configured(
    obs: &Matrix,
    projection: &PcaProjection,
    prefix: &str,
    pca_cfg: &PcaConfig,
) -> Result<ReducedMatrix, PipelineError> {
    if pca_cfg.project_centered {
        Ok(project(&centered_columns(obs), projection, prefix)?)
    } else {
        Ok(project(obs, projection, prefix)?)
    }
}

fn centered_columns(m: &Matrix) -> Matrix {
    let n = m.rows();
    let means: Vec<f64> = (0..m.cols())
        .map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    Matrix::from_fn(n, m.cols(), |i, j| m[(i, j)] - means[j])
}

fn selection_rule(pca_cfg: &PcaConfig) -> SelectionRule {
    match (pca_cfg.k, pca_cfg.energy) {
        (Some(k), _) => SelectionRule::FixedCount(k),
        (None, Some(e)) => SelectionRule::EnergyThreshold(e),
        (None, None) => unreachable!("config validation requires k or energy"),
    }
}

fn energy_captured(s: &SvdResult, k: usize) -> f64 {
    let total: f64 = s.singular_values().iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    s.singular_values()[..k].iter().sum::<f64>() / total
}

fn insert_pca_metadata(meta: &mut Map<String, Value>, pca_cfg: &PcaConfig, k_chosen: usize, energy: f64) {
    if let Some(k) = pca_cfg.k {
        meta.insert("k".into(), (k as u64).into());
    }
    if let Some(e) = pca_cfg.energy {
        meta.insert("energy".into(), e.into());
    }
    meta.insert("center".into(), pca_cfg.center.into());
    meta.insert("decompose".into(), pca_cfg.decompose.label().into());
    meta.insert("project_centered".into(), pca_cfg.project_centered.into());
    meta.insert("k_chosen".into(), (k_chosen as u64).into());
    meta.insert("energy_captured".into(), energy.into());
}

fn pairwise_portraits(
    reduced: &ReducedMatrix,
    title: &str,
    kind: ArtifactKind,
    plots_dir: &Path,
    artifacts: &mut RunArtifacts,
) -> Result<(), PipelineError> {
    let names = reduced.names();
    let m = reduced.entries();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let points: Vec<(f64, f64)> = (0..m.rows()).map(|r| (m[(r, i)], m[(r, j)])).collect();
            let chart = Chart::new(
                format!("{title}: {} vs {}", names[i], names[j]),
                names[i].clone(),
                names[j].clone(),
            )
            .with_series(Series::new(format!("{}-{}", names[i], names[j]), points));
            let path = plots_dir.join(format!("portrait-{}-{}.svg", names[i], names[j]));
            emit_svg(&chart, &path)?;
            artifacts.push(kind, path);
        }
    }
    Ok(())
}

/// t, x, y, z per integration node.
pub fn write_lorenz_timeseries_csv(
    states: &[LorenzState],
    spec: &StepSpec,
    path: &Path,
) -> Result<(), PipelineError> {
    let mut table = Table::new(vec!["t", "x", "y", "z"]);
    for (i, s) in states.iter().enumerate() {
        table.push_row(vec![
            Cell::Real(spec.time_at(i)),
            Cell::Real(s.x),
            Cell::Real(s.y),
            Cell::Real(s.z),
        ]);
    }
    emit_csv(&table, path)
}

/// Wide space-time table: t, then one column per grid node.
pub fn write_field_csv(field: &FieldSnapshotMatrix, path: &Path) -> Result<(), PipelineError> {
    let n = field.values.cols();
    let mut headers = vec!["t".to_string()];
    headers.extend((0..n).map(|j| format!("u{j}")));
    let mut table = Table::new(headers);
    for (i, &t) in field.times.iter().enumerate() {
        let mut row = Vec::with_capacity(n + 1);
        row.push(Cell::Real(t));
        row.extend(field.values.row(i).iter().map(|&u| Cell::Real(u)));
        table.push_row(row);
    }
    emit_csv(&table, path)
}

/// Grid nodes: index, mapped coordinate z in [0, 2π), physical x.
pub fn write_grid_csv(field: &FieldSnapshotMatrix, path: &Path) -> Result<(), PipelineError> {
    let n = field.grid.len();
    let mut table = Table::new(vec!["j", "z", "x"]);
    for (j, &x) in field.grid.iter().enumerate() {
        let z = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
        table.push_row(vec![Cell::Int(j as i64), Cell::Real(z), Cell::Real(x)]);
    }
    emit_csv(&table, path)
}

/// Plain numeric matrix with `<prefix>0..<prefix>{cols-1}` headers.
pub fn write_matrix_csv(m: &Matrix, prefix: &str, path: &Path) -> Result<(), PipelineError> {
    let headers: Vec<String> = (0..m.cols()).map(|j| format!("{prefix}{j}")).collect();
    let mut table = Table::new(headers);
    for i in 0..m.rows() {
        table.push_row(m.row(i).iter().map(|&v| Cell::Real(v)).collect());
    }
    emit_csv(&table, path)
}

fn write_components_csv(reduced: &ReducedMatrix, path: &Path) -> Result<(), PipelineError> {
    let mut table = Table::new(reduced.names().to_vec());
    let m = reduced.entries();
    for i in 0..m.rows() {
        table.push_row(m.row(i).iter().map(|&v| Cell::Real(v)).collect());
    }
    emit_csv(&table, path)
}

/// Ragged overlay: one column per window, shorter spectra padded with
/// empty cells.
fn write_spectrum_overlay_csv(
    spectra: &[(usize, Vec<f64>)],
    path: &Path,
) -> Result<(), PipelineError> {
    let mut headers = vec!["index".to_string()];
    headers.extend(spectra.iter().map(|(w, _)| format!("window{w}")));
    let max_len = spectra.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let mut table = Table::new(headers);
    for i in 0..max_len {
        let mut row = vec![Cell::Int((i + 1) as i64)];
        for (_, spectrum) in spectra {
            row.push(match spectrum.get(i) {
                Some(&v) => Cell::Real(v),
                None => Cell::Empty,
            });
        }
        table.push_row(row);
    }
    emit_csv(&table, path)
}

fn write_metadata(meta: Map<String, Value>, path: &Path) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(&Value::Object(meta))
        .expect("metadata is valid JSON by construction");
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn make_run_dirs(run_dir: &Path) -> Result<(PathBuf, PathBuf), PipelineError> {
    let data_dir = run_dir.join("data");
    let plots_dir = run_dir.join("plots");
    fs::create_dir_all(&data_dir).map_err(|e| PipelineError::io(&data_dir, e))?;
    fs::create_dir_all(&plots_dir).map_err(|e| PipelineError::io(&plots_dir, e))?;
    Ok((data_dir, plots_dir))
}

/// Clears any previous output for the experiment so reruns start clean.
fn reset_dir(dir: &Path) -> Result<(), PipelineError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

fn fmt_velocity(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

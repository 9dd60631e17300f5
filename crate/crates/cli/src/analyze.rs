use crate::config::{AnalyzeSection, RunConfig, FORMAT_VERSION};
use crate::error::CliError;
use crate::manifest::{now, sha256_file, RunManifest, MANIFEST_FILE};
use crate::simulate::{resolve_ising, resolve_walk};
use prewet_core::analysis::{
    diagnostics, height_scaling_fit, ks_against_fs, l1_null_quantile, rescale_interface, two_time_check,
    two_time_prediction, DiagnosticsReport, InterfaceRecord, KsAtTime, Provenance, RescaledEnsemble, ScalingFit,
    Thresholds, TwoTimeGrid, TwoTimeResult, DEFAULT_RESAMPLES, DEFAULT_WINDOW, MIN_KS_SAMPLES,
};
use prewet_core::cone::{estimate_chi, EffectiveWalk, Step};
use prewet_core::fs::spectral::{stationary_density, FsParams, Spectrum};
use prewet_core::io::{group_by, open_csv, read_interfaces, read_law, read_walks, LawRow, Schema, StepRow, WalkRow};
use prewet_core::model::spontaneous_magnetization;
use prewet_core::walk::rescale_diffusive;
use prewet_core::Point;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const REPORT_FILE: &str = "report.json";
pub const DEFAULT_TIMES: [f64; 3] = [-0.25, 0.0, 0.25];
pub const DEFAULT_TWO_TIME: (f64, f64) = (-0.25, 0.25);
pub const TWO_TIME_BINS: usize = 8;
pub const NULL_RESAMPLES: usize = 200;

pub const CALIBRATION_NOTE: &str = "KS and two-time thresholds at finite N are calibration choices: \
no quantitative convergence rate to the Ferrari-Spohn limit is available.";

#[derive(Debug, Serialize)]
pub struct TwoTimeEntry {
    #[serde(flatten)]
    pub result: TwoTimeResult,
    /// 95% quantile of the discrepancy of exact draws from the prediction.
    pub null_q95: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub input: PathBuf,
    pub command: String,
    pub provenance: Provenance,
    pub n: usize,
    pub lambda: f64,
    pub beta: f64,
    pub chi: f64,
    pub chi_source: &'static str,
    pub chi_std_error: Option<f64>,
    /// Slope `c` of the reference potential.
    pub fs_c: f64,
    pub samples: usize,
    pub mean_midpoint_height: f64,
    pub ks: Vec<KsAtTime>,
    pub two_time: Vec<TwoTimeEntry>,
    pub diagnostics: Option<DiagnosticsReport>,
}

#[derive(Debug, Serialize)]
pub struct ScalingReport {
    pub ns: Vec<f64>,
    pub mean_heights: Vec<f64>,
    #[serde(flatten)]
    pub fit: ScalingFit,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub window: f64,
    pub resamples: usize,
    pub calibration_note: &'static str,
    pub runs: Vec<RunReport>,
    pub scaling: Option<ScalingReport>,
}

struct Settings {
    seed: u64,
    chi: Option<f64>,
    window: f64,
    times: Vec<f64>,
    two_time: (f64, f64),
    resamples: usize,
    kappa: Option<f64>,
    c_area: Option<f64>,
    c_len: Option<f64>,
}

fn steps_walks(path: &Path) -> Result<Vec<EffectiveWalk>, CliError> {
    let mut out = Vec::new();
    for g in group_by(open_csv::<StepRow>(path)?, |r| (r.replica, r.sample)) {
        let (_, rows) = g?;
        let steps: Vec<Step> = rows.iter().map(|r| Step::new(r.theta, r.zeta)).collect();
        out.push(EffectiveWalk::from_steps(Point::new(0, 0), &steps)?);
    }
    Ok(out)
}

fn ks_and_two_time(
    ens: &RescaledEnsemble,
    params: &FsParams,
    st: &Settings,
) -> Result<(Vec<KsAtTime>, Vec<TwoTimeEntry>), CliError> {
    if ens.len() < MIN_KS_SAMPLES {
        return Ok((Vec::new(), Vec::new()));
    }
    let rho = stationary_density(params);
    let mut ks = Vec::new();
    for (i, &t) in st.times.iter().enumerate() {
        let result = ks_against_fs(ens, t, &rho, st.resamples, st.seed.wrapping_add(i as u64))?;
        ks.push(KsAtTime { t, result });
    }
    let spec = Spectrum::new(params.clone());
    let grid = TwoTimeGrid { bins: TWO_TIME_BINS, r_max: rho.quantile(0.99) };
    let result = two_time_check(ens, st.two_time, &spec, grid)?;
    let pred = two_time_prediction(&spec, st.two_time.1 - st.two_time.0, grid);
    let null_q95 = l1_null_quantile(&pred, ens.len(), NULL_RESAMPLES, 0.95, st.seed);
    Ok((ks, vec![TwoTimeEntry { result, null_q95 }]))
}

fn analyze_ising(dir: &Path, m: &RunManifest, st: &Settings) -> Result<RunReport, CliError> {
    let sec = resolve_ising(m.config.ising.clone().unwrap_or_default())?;
    let (beta, lambda, n) = (sec.beta.unwrap(), sec.lambda.unwrap(), sec.n.unwrap());
    let walks = steps_walks(&dir.join(StepRow::FILE))?;
    let (chi, chi_source, chi_std_error) = match st.chi {
        Some(c) => (c, "override", None),
        None => {
            let e = estimate_chi(&walks)?;
            (e.chi, "estimated from steps.csv", Some(e.std_error))
        }
    };
    let params = FsParams::from_walk(lambda, spontaneous_magnetization(beta)?, chi)?;
    let interfaces = read_interfaces(dir)?;
    let mids: Vec<f64> = interfaces.iter().map(|(_, p)| p.gamma_plus_at(0) as f64).collect();
    let profiles = interfaces.iter().map(|(_, p)| rescale_interface(p, n as f64, chi)).collect::<Result<_, _>>()?;
    let ens = RescaledEnsemble::new(Provenance::Ising, n as f64, lambda, Some(beta), chi, st.window, profiles)?;
    let mut th = Thresholds::defaults(n);
    th.kappa = st.kappa.unwrap_or(th.kappa);
    th.c_area = st.c_area.unwrap_or(th.c_area);
    th.c_len = st.c_len.unwrap_or(th.c_len);
    let records: Vec<InterfaceRecord> = interfaces
        .into_iter()
        .map(|(s, profile)| InterfaceRecord { profile, max_closed_diameter: s.max_closed_diameter })
        .collect();
    let mut diag = diagnostics(&records, n, th);
    let (ks, two_time) = ks_and_two_time(&ens, &params, st)?;
    diag.ks = ks.clone();
    diag.two_time = two_time.iter().map(|e| e.result.clone()).collect();
    Ok(RunReport {
        input: dir.to_path_buf(),
        command: m.command.clone(),
        provenance: Provenance::Ising,
        n,
        lambda,
        beta,
        chi,
        chi_source,
        chi_std_error,
        fs_c: params.c(),
        samples: ens.len(),
        mean_midpoint_height: prewet_core::stats::mean(&mids),
        ks,
        two_time,
        diagnostics: Some(diag),
    })
}

fn analyze_walk(dir: &Path, m: &RunManifest, st: &Settings) -> Result<RunReport, CliError> {
    let sec = resolve_walk(m.config.walk.clone().unwrap_or_default())?;
    let (beta, lambda, n) = (sec.beta.unwrap(), sec.lambda.unwrap(), sec.n.unwrap());
    let (chi, chi_source) = match st.chi {
        Some(c) => (c, "override"),
        None => (read_law(&dir.join(LawRow::FILE))?.chi(), "step law"),
    };
    let params = FsParams::from_walk(lambda, spontaneous_magnetization(beta)?, chi)?;
    let mut profiles = Vec::new();
    let mut mids = Vec::new();
    for w in read_walks(&dir.join(WalkRow::FILE))? {
        let (_, w) = w?;
        mids.push(w.height_at(0.0));
        profiles.push(rescale_diffusive(&w, n as f64, chi)?);
    }
    let ens = RescaledEnsemble::new(Provenance::Walk, n as f64, lambda, Some(beta), chi, st.window, profiles)?;
    let (ks, two_time) = ks_and_two_time(&ens, &params, st)?;
    Ok(RunReport {
        input: dir.to_path_buf(),
        command: m.command.clone(),
        provenance: Provenance::Walk,
        n,
        lambda,
        beta,
        chi,
        chi_source,
        chi_std_error: None,
        fs_c: params.c(),
        samples: ens.len(),
        mean_midpoint_height: prewet_core::stats::mean(&mids),
        ks,
        two_time,
        diagnostics: None,
    })
}

fn settings(cfg: &RunConfig) -> (AnalyzeSection, Settings) {
    let sec = cfg.analyze.clone().unwrap_or_default();
    let full = AnalyzeSection {
        inputs: sec.inputs.clone(),
        chi: sec.chi,
        window: Some(sec.window.unwrap_or(DEFAULT_WINDOW)),
        times: Some(sec.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec())),
        two_time: Some(sec.two_time.unwrap_or(DEFAULT_TWO_TIME)),
        resamples: Some(sec.resamples.unwrap_or(DEFAULT_RESAMPLES)),
        kappa: sec.kappa,
        c_area: sec.c_area,
        c_len: sec.c_len,
    };
    let st = Settings {
        seed: cfg.seed.unwrap_or(0),
        chi: full.chi,
        window: full.window.unwrap(),
        times: full.times.clone().unwrap(),
        two_time: full.two_time.unwrap(),
        resamples: full.resamples.unwrap(),
        kappa: full.kappa,
        c_area: full.c_area,
        c_len: full.c_len,
    };
    (full, st)
}

pub fn run(cfg: RunConfig) -> Result<(), CliError> {
    let started = now();
    let (sec, st) = settings(&cfg);
    let inputs = sec.inputs.clone().unwrap_or_default();
    if inputs.is_empty() {
        return Err(CliError::validation("inputs", "no run directories given"));
    }
    if st.times.iter().any(|t| t.abs() > st.window) {
        return Err(CliError::validation("times", "marked times must lie inside the window"));
    }
    let out = cfg.out.clone().ok_or_else(|| CliError::validation("out", "an output directory is required (--out)"))?;
    let mut runs = Vec::new();
    let mut digests = std::collections::BTreeMap::new();
    for dir in &inputs {
        let m = RunManifest::load(dir)?;
        m.verify(dir)?;
        digests.insert(dir.join(MANIFEST_FILE).display().to_string(), sha256_file(&dir.join(MANIFEST_FILE))?);
        runs.push(match m.command.as_str() {
            "simulate-ising" => analyze_ising(dir, &m, &st)?,
            "simulate-walk" => analyze_walk(dir, &m, &st)?,
            other => {
                return Err(CliError::validation(
                    "inputs",
                    format!("{}: cannot analyze a `{other}` run", dir.display()),
                ))
            }
        });
    }
    let scaling = scaling_fit(&inputs, &runs, &st)?;
    let report = Report {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: st.seed,
        window: st.window,
        resamples: st.resamples,
        calibration_note: CALIBRATION_NOTE,
        runs,
        scaling,
    };
    std::fs::create_dir_all(&out)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(out.join(REPORT_FILE), text)?;
    let config = RunConfig {
        format_version: Some(FORMAT_VERSION),
        seed: Some(st.seed),
        replicas: None,
        out: Some(out.clone()),
        analyze: Some(sec),
        ..Default::default()
    };
    let mut m = RunManifest::new("analyze", config, Vec::new(), started);
    m.inputs = digests;
    m.finish(&out, &[REPORT_FILE])?;
    Ok(())
}

/// Fits the midpoint-height exponent when at least four walk runs with
/// distinct `n` are present.
fn scaling_fit(inputs: &[PathBuf], runs: &[RunReport], st: &Settings) -> Result<Option<ScalingReport>, CliError> {
    let mut walk_runs: Vec<(usize, &Path)> = runs
        .iter()
        .zip(inputs)
        .filter(|(r, _)| r.provenance == Provenance::Walk)
        .map(|(r, d)| (r.n, d.as_path()))
        .collect();
    walk_runs.sort_by_key(|w| w.0);
    walk_runs.dedup_by_key(|w| w.0);
    if walk_runs.len() < 4 {
        return Ok(None);
    }
    let mut ns = Vec::new();
    let mut heights = Vec::new();
    for (n, dir) in walk_runs {
        let mut h = Vec::new();
        for w in read_walks(&dir.join(WalkRow::FILE))? {
            h.push(w?.1.height_at(0.0));
        }
        ns.push(n as f64);
        heights.push(h);
    }
    let fit = height_scaling_fit(&ns, &heights, st.resamples, st.seed)?;
    let mean_heights = heights.iter().map(|h| prewet_core::stats::mean(h)).collect();
    Ok(Some(ScalingReport { ns, mean_heights, fit }))
}

use crate::config::{FsSection, IsingSection, RunConfig, WalkSection, FORMAT_VERSION};
use crate::error::CliError;
use crate::manifest::{now, sha256_file, RunManifest};
use prewet_core::analysis::Thresholds;
use prewet_core::cone::{decompose, effective_walk};
use prewet_core::fs::spectral::{stationary_density, FsParams, Spectrum};
use prewet_core::interface::{extract, SplitConvention};
use prewet_core::io::{
    create_csv, fs_reference_rows, interface_rows, law_rows, read_law, step_rows, walk_rows, write_csv, FsReferenceRow,
    InterfaceRow, InterfaceSummaryRow, LawRow, Schema, StepRow, WalkRow, WalkStatsRow,
};
use prewet_core::ising::{run_replica, SampleSchedule};
use prewet_core::model::spontaneous_magnetization;
use prewet_core::rng::{domain, StreamKey};
use prewet_core::walk::{BridgeSampler, StepLaw, TiltParams, WalkSampleStats};
use prewet_core::{BoxGeometry, ModelParams, Point};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub const DEFAULT_KERNEL_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
pub const KERNEL_TOLERANCE: f64 = 1e-6;

struct Shared {
    seed: u64,
    replicas: usize,
    out: PathBuf,
}

fn shared(cfg: &RunConfig) -> Result<Shared, CliError> {
    let replicas = cfg.replicas.unwrap_or(1);
    if replicas == 0 {
        return Err(CliError::validation("replicas", "replicas must be >= 1"));
    }
    let out = cfg.out.clone().ok_or_else(|| CliError::validation("out", "an output directory is required (--out)"))?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::runtime("io", format!("{}: {e}", out.display())))?;
    Ok(Shared { seed: cfg.seed.unwrap_or(0), replicas, out })
}

fn resolved(s: &Shared, cfg: RunConfig) -> RunConfig {
    RunConfig {
        format_version: Some(FORMAT_VERSION),
        seed: Some(s.seed),
        replicas: Some(s.replicas),
        out: Some(s.out.clone()),
        ..cfg
    }
}

fn replica_seeds(s: &Shared) -> Vec<u64> {
    (0..s.replicas).map(|r| StreamKey::new(s.seed, r as u64).replica_seed()).collect()
}

fn positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::validation(name, format!("{name} must be >= 1")));
    }
    Ok(v)
}

pub(crate) fn resolve_ising(sec: IsingSection) -> Result<IsingSection, CliError> {
    let n = sec.n.unwrap_or(64);
    let thin = positive("thin", sec.thin.unwrap_or(n))?;
    let samples = match (sec.samples, sec.sweeps) {
        (Some(s), Some(w)) if s * thin != w => {
            return Err(CliError::validation(
                "sweeps",
                format!("sweeps ({w}) must equal samples ({s}) x thin ({thin})"),
            ))
        }
        (Some(s), _) => s,
        (None, Some(w)) => w / thin,
        (None, None) => 100,
    };
    let samples = positive("samples", samples)?;
    Ok(IsingSection {
        beta: Some(sec.beta.unwrap_or(1.0)),
        lambda: Some(sec.lambda.unwrap_or(1.0)),
        n: Some(n),
        sweeps: Some(samples * thin),
        burnin: Some(positive("burnin", sec.burnin.unwrap_or(20 * n))?),
        samples: Some(samples),
        thin: Some(thin),
    })
}

struct IsingReplica {
    interface: Vec<InterfaceRow>,
    summary: Vec<InterfaceSummaryRow>,
    steps: Vec<StepRow>,
}

pub fn ising(cfg: RunConfig) -> Result<(), CliError> {
    let started = now();
    let sec = resolve_ising(cfg.ising.clone().unwrap_or_default())?;
    let (beta, lambda, n) = (sec.beta.unwrap(), sec.lambda.unwrap(), sec.n.unwrap());
    let params = ModelParams::new(beta, lambda, n)?;
    let schedule = SampleSchedule::new(sec.burnin.unwrap(), sec.thin.unwrap(), sec.samples.unwrap())?;
    let s = shared(&cfg)?;
    let th = Thresholds::defaults(n);
    let geometry = BoxGeometry::lambda_n(n);
    let runs: Vec<Result<IsingReplica, CliError>> = (0..s.replicas)
        .into_par_iter()
        .map(|r| {
            let mut out = IsingReplica { interface: Vec::new(), summary: Vec::new(), steps: Vec::new() };
            run_replica(&params, geometry, &schedule, s.seed, r, |k, config| -> Result<(), CliError> {
                let x = extract(config)?;
                let (r, k) = (r as u32, k as u32);
                out.interface.extend(interface_rows(r, k, &x.profile));
                out.summary.push(InterfaceSummaryRow::of(r, k, &x, th.box_half_width, th.box_height));
                let walk = effective_walk(&decompose(&x.contours.open_gamma)?)?;
                out.steps.extend(step_rows(r, k, &walk));
                Ok(())
            })?;
            Ok(out)
        })
        .collect();
    let mut wi = create_csv::<InterfaceRow>(&s.out.join(InterfaceRow::FILE))?;
    let mut ws = create_csv::<InterfaceSummaryRow>(&s.out.join(InterfaceSummaryRow::FILE))?;
    let mut wt = create_csv::<StepRow>(&s.out.join(StepRow::FILE))?;
    for run in runs {
        let run = run?;
        run.interface.iter().try_for_each(|r| wi.write(r))?;
        run.summary.iter().try_for_each(|r| ws.write(r))?;
        run.steps.iter().try_for_each(|r| wt.write(r))?;
    }
    wi.finish()?;
    ws.finish()?;
    wt.finish()?;
    let config = resolved(&s, RunConfig { ising: Some(sec), ..Default::default() });
    let mut m = RunManifest::new("simulate-ising", config, replica_seeds(&s), started);
    m.notes.insert("contour_convention".into(), SplitConvention::NeSw.tag().into());
    m.notes.insert("equilibration".into(), "not certified; burn-in and thinning are user choices".into());
    m.finish(&s.out, &[InterfaceRow::FILE, InterfaceSummaryRow::FILE, StepRow::FILE])?;
    Ok(())
}

pub(crate) fn resolve_walk(sec: WalkSection) -> Result<WalkSection, CliError> {
    Ok(WalkSection {
        beta: Some(sec.beta.unwrap_or(1.0)),
        lambda: Some(sec.lambda.unwrap_or(1.0)),
        n: Some(positive("n", sec.n.unwrap_or(256))?),
        samples: Some(positive("samples", sec.samples.unwrap_or(100))?),
        law: sec.law,
    })
}

pub fn load_law(path: Option<&Path>) -> Result<StepLaw, CliError> {
    match path {
        Some(p) => Ok(read_law(p)?),
        None => Ok(StepLaw::default_law()),
    }
}

pub fn walk(cfg: RunConfig) -> Result<(), CliError> {
    let started = now();
    let sec = resolve_walk(cfg.walk.clone().unwrap_or_default())?;
    let (beta, lambda, n, samples) = (sec.beta.unwrap(), sec.lambda.unwrap(), sec.n.unwrap(), sec.samples.unwrap());
    let law = load_law(sec.law.as_deref())?;
    let m_star = spontaneous_magnetization(beta)?;
    let tilt = TiltParams::new(lambda, m_star, n)?;
    let half = n as i64;
    let sampler = BridgeSampler::new(&law, &tilt, Point::new(-half, 0), Point::new(half, 0))?;
    let s = shared(&cfg)?;
    let mut ww = create_csv::<WalkRow>(&s.out.join(WalkRow::FILE))?;
    let mut wt = create_csv::<StepRow>(&s.out.join(StepRow::FILE))?;
    let mut wst = create_csv::<WalkStatsRow>(&s.out.join(WalkStatsRow::FILE))?;
    for r in 0..s.replicas {
        let key = StreamKey::new(s.seed, r as u64);
        let walks: Vec<_> =
            (0..samples).into_par_iter().map(|k| sampler.sample(&mut key.stream(domain::WALK, k as u64))).collect();
        for (k, w) in walks.iter().enumerate() {
            let (r, k) = (r as u32, k as u32);
            walk_rows(r, k, w).try_for_each(|row| ww.write(&row))?;
            step_rows(r, k, w).try_for_each(|row| wt.write(&row))?;
            wst.write(&WalkStatsRow::of(r, k, &WalkSampleStats::of(w)?))?;
        }
    }
    ww.finish()?;
    wt.finish()?;
    wst.finish()?;
    write_csv::<LawRow>(&s.out.join(LawRow::FILE), &law_rows(&law))?;
    let mut m = RunManifest::new(
        "simulate-walk",
        resolved(&s, RunConfig { walk: Some(sec.clone()), ..Default::default() }),
        replica_seeds(&s),
        started,
    );
    if let Some(p) = &sec.law {
        m.inputs.insert(p.display().to_string(), sha256_file(p)?);
    }
    m.finish(&s.out, &[WalkRow::FILE, StepRow::FILE, WalkStatsRow::FILE, LawRow::FILE])?;
    Ok(())
}

pub fn fs_reference(cfg: RunConfig) -> Result<(), CliError> {
    let started = now();
    let sec = cfg.fs.clone().unwrap_or_default();
    let sec = FsSection {
        beta: Some(sec.beta.unwrap_or(1.0)),
        lambda: Some(sec.lambda.unwrap_or(1.0)),
        chi: Some(sec.chi.unwrap_or_else(|| StepLaw::default_law().chi())),
        n: Some(positive("n", sec.n.unwrap_or(400))?),
        kernel_times: Some(sec.kernel_times.unwrap_or_else(|| DEFAULT_KERNEL_TIMES.to_vec())),
        kernel_points: Some(sec.kernel_points.unwrap_or(25)),
    };
    let m_star = spontaneous_magnetization(sec.beta.unwrap())?;
    let params = FsParams::from_walk(sec.lambda.unwrap(), m_star, sec.chi.unwrap())?;
    if sec.lambda.unwrap() == 0.0 {
        return Err(CliError::validation("lambda", "the reference needs lambda > 0"));
    }
    let times = sec.kernel_times.clone().unwrap();
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::validation("kernel_times", "kernel times must be positive"));
    }
    let spec = Spectrum::new(params.clone());
    for &t in &times {
        let tail = spec.tail_bound(t, spec.num_modes());
        if tail > KERNEL_TOLERANCE {
            return Err(prewet_core::Error::ModesInsufficient {
                modes: spec.num_modes(),
                tail,
                tolerance: KERNEL_TOLERANCE,
            }
            .into());
        }
    }
    let rho = stationary_density(&params);
    let r_max = (params.omega()[0] + 10.0) / params.big_c();
    let n = sec.n.unwrap();
    let grid: Vec<f64> = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
    let kp = sec.kernel_points.unwrap();
    let kgrid: Vec<f64> = (1..=kp).map(|i| r_max * i as f64 / kp as f64).collect();
    let rows = fs_reference_rows(&rho, &spec, &grid, &times, &kgrid)?;
    let s = shared(&cfg)?;
    write_csv::<FsReferenceRow>(&s.out.join(FsReferenceRow::FILE), &rows)?;
    let config = resolved(&s, RunConfig { fs: Some(sec), ..Default::default() });
    RunManifest::new("fs-reference", config, replica_seeds(&s), started).finish(&s.out, &[FsReferenceRow::FILE])?;
    Ok(())
}

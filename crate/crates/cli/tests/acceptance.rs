//! Exit criteria of the toolkit. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any criterion fails.

use prewet_core::analysis::{height_scaling_fit, ks_values_against_fs, ScalingFit};
use prewet_core::cone::Step;
use prewet_core::fs::airy;
use prewet_core::fs::quad::integrate;
use prewet_core::fs::sde::sample_path;
use prewet_core::fs::spectral::{stationary_density, FsParams, Spectrum};
use prewet_core::fs::trotter::{airy_semigroup, sup_gap, trotter_kurtz, Bump};
use prewet_core::interface::{envelopes, omega_gamma, reconstruct, s_cluster, trace_contours, EdgeSet};
use prewet_core::io::{read_csv, Schema, StepRow};
use prewet_core::model::{flip_delta, hamiltonian_with, spontaneous_magnetization, Boundary, BoxGeometry, SpinConfig};
use prewet_core::path::Point;
use prewet_core::rng::{domain, mix64, StreamKey};
use prewet_core::stats::{ks_statistic, mean, std_error};
use prewet_core::walk::{self, reference, BridgeSampler, StepLaw, TiltParams};
use serde_json::Value;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

/// Tilt strength of the effective-walk experiments.
const WALK_LAMBDA: f64 = 0.2;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn airy_golden() -> Check {
    let ai0 = airy::ai(0.0);
    let aip0 = airy::aip(0.0);
    let (w1, w2) = (airy::airy_zero(1), airy::airy_zero(2));
    let pass = (ai0 - 0.3550280539).abs() <= 1e-9
        && (aip0 + 0.2588194038).abs() <= 1e-9
        && (w1 - 2.3381074105).abs() <= 1e-8
        && (w2 - 4.0879494441).abs() <= 1e-8;
    check(pass, format!("Ai(0)={ai0:.12} Ai'(0)={aip0:.12} w1={w1:.12} w2={w2:.12}"))
}

fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = [-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0];
    let mut s = -205.0 / 72.0 * f(x);
    for (j, cj) in c.iter().enumerate() {
        let k = (4 - j) as f64;
        s += cj * (f(x + k * h) + f(x - k * h));
    }
    s / (h * h)
}

fn fs_eigen() -> Check {
    let (mut residual, mut ortho) = (0.0f64, 0.0f64);
    for c in [0.5, 1.0, 2.0] {
        let spec = Spectrum::new(FsParams::new(c).unwrap());
        let p = spec.params().clone();
        let upper = (16.0 + p.omega()[5]) / p.big_c();
        for k in 0..=5 {
            let norm = spec.quadrature_norm(k);
            let phi = |r: f64| p.raw_mode(k, r) / norm;
            let a = spec.eigenvalue(k);
            for i in 0..=1000 {
                let r = upper * i as f64 / 1000.0;
                let res = 0.5 * d2(phi, r, 2e-3) - c * r * phi(r) + a * phi(r);
                residual = residual.max(res.abs());
            }
            for j in 0..=k {
                let g = integrate(|r| spec.phi(j, r) * spec.phi(k, r), 0.0, upper, 1e-12);
                ortho = ortho.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    check(residual <= 1e-6 && ortho <= 1e-6, format!("max residual {residual:.2e}, max Gram error {ortho:.2e}"))
}

fn fs_ergodicity() -> Check {
    let p = FsParams::new(1.0).unwrap();
    let rho = stationary_density(&p);
    let mut rng = StreamKey::new(2024, 0).stream(domain::FS_PATH, 0);
    let x0 = rho.sample(&mut rng);
    let path = sample_path(&p, x0, 1e4, 0.01, &mut rng).unwrap();
    let ks = ks_statistic(&path.values[1..], |r| rho.cdf(r));
    check(path.num_steps() == 1_000_000 && ks < 0.02, format!("{} steps, KS {ks:.4}", path.num_steps()))
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * b.abs().max(a.abs())
}

/// Step laws with at most four atoms in the `θ <= 3` cone: every one- and
/// two-atom law plus hashed three- and four-atom laws.
fn small_laws() -> Vec<StepLaw> {
    let steps: Vec<Step> = (1..=3).flat_map(|t| (-t..=t).map(move |z| Step::new(t, z))).collect();
    let mut laws = Vec::new();
    let mut push = |atoms: &[usize], salt: u64| {
        let w: Vec<f64> =
            atoms.iter().enumerate().map(|(i, _)| 0.1 + (mix64(salt + i as u64) % 1000) as f64 / 1000.0).collect();
        let total: f64 = w.iter().sum();
        let mut e: Vec<(Step, f64)> = atoms.iter().zip(&w).map(|(&a, &x)| (steps[a], x / total)).collect();
        let s: f64 = e.iter().map(|x| x.1).sum();
        e[0].1 += 1.0 - s;
        laws.push(StepLaw::with_drift(e).unwrap());
    };
    for a in 0..steps.len() {
        push(&[a], a as u64);
        for b in a + 1..steps.len() {
            push(&[a, b], (a * 31 + b) as u64);
        }
    }
    for k in 0..120u64 {
        let size = 3 + (k % 2) as usize;
        let mut atoms = BTreeSet::new();
        let mut s = k * 977;
        while atoms.len() < size {
            s = mix64(s);
            atoms.insert((s % steps.len() as u64) as usize);
        }
        push(&atoms.into_iter().collect::<Vec<_>>(), k);
    }
    laws
}

fn dp_vs_enumeration() -> Check {
    let laws = small_laws();
    let (mut instances, mut bad) = (0usize, 0usize);
    for (li, law) in laws.iter().enumerate() {
        for c in [0.0, 0.45] {
            for h in 0..=8usize {
                let tilt = TiltParams::from_coefficient(c, h);
                for z0 in [0, h as i64 / 2, h as i64] {
                    let u = Point::new(0, z0);
                    let dp = walk::column_dp(law, &tilt, u, 7).unwrap();
                    let bf = reference::column_weights(law, &tilt, u, 7);
                    for dx in 0..=7 {
                        for z in 0..=h {
                            instances += 1;
                            bad += !close(dp.weight(dx as i64, z as i64), bf[dx][z]) as usize;
                        }
                    }
                    let f = |z: i64| 1.0 + 0.7 * z as f64;
                    for n in 0..=4 {
                        instances += 1;
                        let a = walk::n_step_partition(law, &tilt, u, n, f).unwrap();
                        bad += !close(a, reference::n_step_partition(law, &tilt, u, n, f)) as usize;
                    }
                    if h == 0 || li % 3 != 0 {
                        continue;
                    }
                    let g = |z: i64| (-0.8 * z as f64).exp() + 0.5;
                    for (span, z1, n) in [(4, 0, 2), (5, h as i64, 3), (7, 1, 4)] {
                        let v = Point::new(span, z1);
                        for k in 1..n {
                            let marks: [(usize, &dyn Fn(i64) -> f64); 1] = [(k, &g)];
                            let dp = walk::fdd_weights(law, &tilt, u, v, n, &marks).unwrap();
                            let bf = reference::fdd_weights(law, &tilt, u, v, n, &marks);
                            instances += 1;
                            bad += !(close(dp, bf) || (dp - bf).abs() < 1e-300) as usize;
                        }
                    }
                }
            }
        }
    }
    check(bad == 0, format!("{} laws, {instances} comparisons, {bad} mismatches", laws.len()))
}

fn midpoint_heights(lambda: f64, n: usize, samples: usize, seed: u64) -> Vec<f64> {
    let law = StepLaw::default_law();
    let tilt = TiltParams::new(lambda, spontaneous_magnetization(1.0).unwrap(), n).unwrap();
    let half = n as i64;
    let s = BridgeSampler::new(&law, &tilt, Point::new(-half, 0), Point::new(half, 0)).unwrap();
    let key = StreamKey::new(seed, n as u64);
    (0..samples).map(|k| s.sample(&mut key.stream(domain::WALK, k as u64)).height_at(0.0)).collect()
}

fn height_fit(lambda: f64) -> ScalingFit {
    let ns: Vec<usize> = (6..=12).map(|e| 1 << e).collect();
    let heights: Vec<Vec<f64>> = ns.iter().map(|&n| midpoint_heights(lambda, n, 4000, 11)).collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    height_scaling_fit(&nf, &heights, 1000, 5).unwrap()
}

fn height_scaling() -> Check {
    let fit = height_fit(WALK_LAMBDA);
    let pass = (0.25..=0.42).contains(&fit.slope) && fit.ci.width() < 0.1;
    check(pass, format!("lambda={WALK_LAMBDA}: slope {:.4}, CI [{:.4}, {:.4}]", fit.slope, fit.ci.lo, fit.ci.hi))
}

fn walk_ks(lambda: f64, samples: usize) -> (Vec<f64>, String) {
    let law = StepLaw::default_law();
    let chi = law.chi();
    let m = spontaneous_magnetization(1.0).unwrap();
    let rho = stationary_density(&FsParams::from_walk(lambda, m, chi).unwrap());
    let ks: Vec<f64> = [256usize, 1024, 4096]
        .iter()
        .map(|&n| {
            let scale = (n as f64).cbrt() * chi.sqrt();
            let v: Vec<f64> = midpoint_heights(lambda, n, samples, 23).iter().map(|h| h / scale).collect();
            ks_values_against_fs(&v, &rho, 200, 1).unwrap().statistic
        })
        .collect();
    let detail = format!("lambda={lambda}: KS at N=256,1024,4096 = {:.4}, {:.4}, {:.4}", ks[0], ks[1], ks[2]);
    (ks, detail)
}

fn walk_marginal() -> Check {
    let (ks, detail) = walk_ks(WALK_LAMBDA, 10_000);
    check(ks.windows(2).all(|w| w[1] <= w[0]) && ks[2] < 0.08, detail)
}

fn trotter() -> Check {
    let law = StepLaw::default_law();
    let m = spontaneous_magnetization(1.0).unwrap();
    let f = Bump::new(1.2, 0.8).unwrap();
    let spec = Spectrum::new(FsParams::from_walk(1.0, m, law.chi()).unwrap());
    let gaps: Vec<f64> = [10, 12, 14]
        .iter()
        .map(|&e| {
            let tilt = TiltParams::new(1.0, m, 1 << e).unwrap();
            let tk = trotter_kurtz(&law, &tilt, &f, 0.5).unwrap();
            sup_gap(&tk.values, &airy_semigroup(&spec, &f, 0.5, &tk.grid))
        })
        .collect();
    check(
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("sup gaps at n=2^10,2^12,2^14: {:.3e}, {:.3e}, {:.3e}", gaps[0], gaps[1], gaps[2]),
    )
}

fn prewet(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_prewet")).args(args).output().map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("prewet {}: {}", args[0], String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ising_sanity() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let (run, an) = (tmp.path().join("ising"), tmp.path().join("analysis"));
    let sim = [
        "simulate-ising",
        "--beta",
        "1.0",
        "--lambda",
        "1",
        "--n",
        "128",
        "--burnin",
        "2560",
        "--thin",
        "200",
        "--samples",
        "125",
        "--replicas",
        "4",
        "--seed",
        "1",
        "--out",
        s(&run),
    ];
    if let Err(e) = prewet(&sim).and_then(|_| prewet(&["analyze", s(&run), "--out", s(&an)])) {
        return check(false, e);
    }
    let report = json(&an.join("report.json"));
    let r = &report["runs"][0];
    let d = &r["diagnostics"];
    let rate = |k: &str| d[k].as_f64().unwrap();
    let zeta: Vec<f64> = read_csv::<StepRow>(&run.join(StepRow::FILE)).unwrap().iter().map(|s| s.zeta as f64).collect();
    let (mz, se) = (mean(&zeta), std_error(&zeta));
    let samples = r["samples"].as_u64().unwrap();
    let (rp, hit, area, len) = (
        rate("restricted_phase_rate"),
        rate("repulsion_hit_rate"),
        rate("area_exceed_rate"),
        rate("length_exceed_rate"),
    );
    let parts = [
        (samples >= 500, format!("samples {samples}")),
        (rp >= 0.99, format!("restricted-phase {rp:.3}")),
        (
            hit <= 0.2,
            format!(
                "repulsion hit {hit:.3} (M={}, R={})",
                d["thresholds"]["box_half_width"], d["thresholds"]["box_height"]
            ),
        ),
        (area <= 0.05, format!("area-exceed {area:.3}")),
        (len <= 0.01, format!("length-exceed {len:.3}")),
        (mz.abs() <= 3.0 * se, format!("E[zeta] {mz:.4} +- {se:.4} over {} steps", zeta.len())),
    ];
    let failed: Vec<&str> = parts.iter().filter(|p| !p.0).map(|p| p.1.as_str()).collect();
    let all: Vec<&str> = parts.iter().map(|p| p.1.as_str()).collect();
    let mut detail = all.join("; ");
    if !failed.is_empty() {
        detail = format!("{detail}; failing: {}", failed.join(", "));
    }
    check(failed.is_empty(), detail)
}

fn plus_region(g: BoxGeometry, blocked: &HashSet<(i64, i64)>) -> BTreeSet<(i64, i64)> {
    let moves = [(1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1)];
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for x in g.x_min..=g.x_max {
        for y in 0..=g.height {
            let exterior = moves.iter().any(|&(dx, dy)| !g.contains(x + dx, y + dy) && g.boundary.spin(y + dy) == 1);
            if exterior && !blocked.contains(&(x, y)) && seen.insert((x, y)) {
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in moves {
            let n = (x + dx, y + dy);
            if g.contains(n.0, n.1) && !blocked.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn exhaustive_box() -> Check {
    let g = BoxGeometry::rect(0, 3, 2, Boundary::Mixed);
    let mut errors = Vec::new();
    let mut count = 0;
    for m in 0..1u64 << g.num_sites() {
        let cfg = SpinConfig::from_mask(g, m);
        count += 1;
        let c = trace_contours(&cfg).unwrap();
        let edges: usize = std::iter::once(&c.open_gamma).chain(&c.closed).map(|p| p.vertices.len() - 1).sum();
        if reconstruct(&c) != cfg || edges != EdgeSet::from_config(&cfg).len() {
            errors.push(format!("roundtrip {m}"));
        }
        for (beta, h) in [(1.0, 0.0), (0.7, 0.3), (0.45, -0.2)] {
            let e0 = hamiltonian_with(&cfg, beta, h);
            for x in g.x_min..=g.x_max {
                for y in 0..=g.height {
                    let mut f = cfg.clone();
                    f.set(x, y, -cfg.spin(x, y));
                    if (hamiltonian_with(&f, beta, h) - e0 - flip_delta(&cfg, x, y, beta, h)).abs() > 1e-12 {
                        errors.push(format!("energy {m} ({x},{y})"));
                    }
                }
            }
        }
        let omega = omega_gamma(&c);
        let cluster: HashSet<(i64, i64)> = s_cluster(&cfg).into_iter().collect();
        let plus: BTreeSet<(i64, i64)> = (g.x_min..=g.x_max)
            .flat_map(|x| (0..=g.height).map(move |y| (x, y)))
            .filter(|&(x, y)| omega.spin(x, y) == 1)
            .collect();
        let again = trace_contours(&omega).unwrap();
        if cluster.iter().any(|&(x, y)| omega.spin(x, y) != -1)
            || plus != plus_region(g, &cluster)
            || !again.closed.is_empty()
            || again.open_gamma != c.open_gamma
            || envelopes(&c).minus_area != g.num_sites() - plus.len()
        {
            errors.push(format!("s-cluster {m}"));
        }
    }
    let first = errors.first().cloned().unwrap_or_default();
    check(errors.is_empty() && count == 4096, format!("{count} configurations, {} failures {first}", errors.len()))
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name);
    let runs: [(&str, Vec<&str>); 3] = [
        (
            "ising",
            vec![
                "simulate-ising",
                "--n",
                "16",
                "--burnin",
                "100",
                "--samples",
                "110",
                "--thin",
                "4",
                "--replicas",
                "2",
                "--seed",
                "9",
            ],
        ),
        (
            "walk",
            vec!["simulate-walk", "--lambda", "0.2", "--n", "64", "--samples", "150", "--replicas", "2", "--seed", "9"],
        ),
        ("fs", vec!["fs-reference", "--lambda", "1", "--chi", "0.4"]),
    ];
    let mut compared = 0;
    for (name, args) in &runs {
        let a = d(&format!("{name}-a"));
        let b = d(&format!("{name}-b"));
        let first = [&args[..], &["--out", s(&a)]].concat();
        let manifest = a.join("manifest.json");
        let rerun = [args[0], "--config", s(&manifest), "--out", s(&b)];
        if let Err(e) = prewet(&first).and_then(|_| prewet(&rerun)) {
            return check(false, e);
        }
        let (mut ma, mut mb) = (json(&a.join("manifest.json")), json(&b.join("manifest.json")));
        for m in [&mut ma, &mut mb] {
            m["config"].as_object_mut().unwrap().remove("out");
        }
        if ma["outputs"] != mb["outputs"] || ma["config"] != mb["config"] {
            return check(false, format!("{name}: rerun outputs differ"));
        }
        for f in ma["outputs"].as_object().unwrap().keys() {
            if std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap() {
                return check(false, format!("{name}: {f} differs"));
            }
            compared += 1;
        }
    }
    let (an, bn) = (d("an-a"), d("an-b"));
    let analyze = prewet(&["analyze", s(&d("ising-a")), s(&d("walk-a")), "--out", s(&an)])
        .and_then(|_| prewet(&["analyze", "--config", s(&an.join("manifest.json")), "--out", s(&bn)]));
    if let Err(e) = analyze {
        return check(false, e);
    }
    let same = std::fs::read(an.join("report.json")).unwrap() == std::fs::read(bn.join("report.json")).unwrap();
    compared += 1;
    check(same, format!("{compared} output files byte-identical across reruns from manifest"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("airy golden values", Duration::from_secs(1), airy_golden),
        ("FS eigen-residual and orthonormality", Duration::from_secs(10), fs_eigen),
        ("FS sampler ergodicity", Duration::from_secs(60), fs_ergodicity),
        ("DP vs enumeration", Duration::from_secs(60), dp_vs_enumeration),
        ("tilted-bridge height scaling", Duration::from_secs(600), height_scaling),
        ("tilted-walk marginal vs FS", Duration::from_secs(900), walk_marginal),
        ("Trotter-Kurtz gap", Duration::from_secs(300), trotter),
        ("Ising pipeline sanity", Duration::from_secs(1800), ising_sanity),
        ("exhaustive 4x3 box", Duration::from_secs(60), exhaustive_box),
        ("determinism from manifest", Duration::from_secs(300), determinism),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let t = Instant::now();
        let c = run();
        let elapsed = t.elapsed();
        let pass = c.pass && elapsed < budget;
        failures += !pass as usize;
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{:.1}s, budget {}s]", c.detail, elapsed.as_secs_f64(), budget.as_secs());
        if name == "tilted-bridge height scaling" {
            let fit = height_fit(1.0);
            println!("INFO {name} at lambda=1: slope {:.4}, CI [{:.4}, {:.4}]", fit.slope, fit.ci.lo, fit.ci.hi);
        }
        if name == "tilted-walk marginal vs FS" {
            let (_, detail) = walk_ks(1.0, 10_000);
            println!("INFO {name} at {detail}");
        }
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

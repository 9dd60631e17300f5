//! Path sampler and Trotter–Kurtz iteration.

use prewet_core::fs::sde::*;
use prewet_core::fs::spectral::*;
use prewet_core::fs::trotter::*;
use prewet_core::model::spontaneous_magnetization;
use prewet_core::rng::{domain, StreamKey};
use prewet_core::stats::{ks_pvalue, ks_statistic};
use prewet_core::walk::{StepLaw, TiltParams};
use prewet_core::Error;

#[test]
fn same_seed_same_path() {
    let p = FsParams::new(1.0).unwrap();
    let key = StreamKey::new(11, 2);
    let a = sample_path(&p, 1.0, 10.0, 0.01, &mut key.stream(domain::FS_PATH, 0)).unwrap();
    let b = sample_path(&p, 1.0, 10.0, 0.01, &mut key.stream(domain::FS_PATH, 0)).unwrap();
    let c = sample_path(&p, 1.0, 10.0, 0.01, &mut StreamKey::new(12, 2).stream(domain::FS_PATH, 0)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values, c.values);
    assert_eq!(a.num_steps(), 1000);
    assert!(a.values.iter().all(|&x| x > 0.0));
}

#[test]
fn rejects_bad_inputs() {
    let p = FsParams::new(1.0).unwrap();
    let mut rng = StreamKey::new(0, 0).stream(domain::FS_PATH, 0);
    assert!(matches!(sample_path(&p, 1.0, 1.0, 0.01, &mut rng), Err(Error::InvalidParameter(_))));
    assert!(matches!(sample_path(&p, 0.0, 10.0, 0.01, &mut rng), Err(Error::Domain(_))));
}

#[test]
fn coarse_steps_without_near_zero_rule_are_flagged() {
    let p = FsParams::new(1.0).unwrap();
    let mut rng = StreamKey::new(5, 0).stream(domain::FS_PATH, 0);
    let scheme = SdeScheme { dt: 0.2, rule: NearZeroRule::None, noise: true };
    match sample_path_with(&p, 1.0, 1000.0, scheme, &mut rng) {
        Err(Error::StepTooCoarse { rate }) => assert!(rate > 1e-4),
        other => panic!("expected StepTooCoarse, got {:?}", other.map(|q| q.violations)),
    }
}

#[test]
fn occupation_measure_matches_density() {
    let p = FsParams::new(1.0).unwrap();
    let rho = stationary_density(&p);
    let mut rng = StreamKey::new(2024, 0).stream(domain::FS_PATH, 0);
    let x0 = rho.sample(&mut rng);
    let path = sample_path(&p, x0, 1e4, 0.01, &mut rng).unwrap();
    assert_eq!(path.num_steps(), 1_000_000);
    let ks = ks_statistic(&path.values[1..], |r| rho.cdf(r));
    assert!(ks < 0.02, "occupation KS {ks}");
}

#[test]
fn zero_noise_flow_reaches_mode() {
    let p = FsParams::new(1.0).unwrap();
    let mode = stationary_density(&p).mode();
    for x0 in [1e-3, 0.2, 1.0, 3.0, 8.0] {
        let path = deterministic_flow(&p, x0, 50.0, 0.005).unwrap();
        let end = *path.values.last().unwrap();
        assert!((end - mode).abs() < 1e-6, "from {x0}: {end} vs {mode}");
    }
}

#[test]
fn marginal_at_time_ten_is_stationary() {
    let p = FsParams::new(1.0).unwrap();
    let rho = stationary_density(&p);
    let mut rng = StreamKey::new(77, 0).stream(domain::FS_PATH, u64::MAX);
    let starts: Vec<f64> = (0..100_000).map(|_| rho.sample(&mut rng)).collect();
    let paths = sample_paths(&p, &starts, 10.0, SdeScheme::new(0.005), StreamKey::new(77, 0)).unwrap();
    let end: Vec<f64> = paths.iter().map(|q| *q.values.last().unwrap()).collect();
    let ks = ks_statistic(&end, |r| rho.cdf(r));
    assert!(ks_pvalue(ks, end.len()) > 0.01, "KS {ks}");
}

#[test]
fn marginals_approach_stationarity() {
    let p = FsParams::new(0.1).unwrap();
    let rho = stationary_density(&p);
    let paths = sample_paths(&p, &vec![0.1; 20_000], 10.0, SdeScheme::new(0.01), StreamKey::new(9, 0)).unwrap();
    let ks: Vec<f64> = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&t| {
            let v: Vec<f64> = paths.iter().map(|q| q.at(t)).collect();
            ks_statistic(&v, |r| rho.cdf(r))
        })
        .collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
}

fn setup() -> (StepLaw, f64, Bump) {
    let law = StepLaw::default_law();
    let m = spontaneous_magnetization(1.0).unwrap();
    (law, m, Bump::new(1.2, 0.8).unwrap())
}

#[test]
fn zero_time_returns_input() {
    let (law, m, f) = setup();
    let tilt = TiltParams::new(1.0, m, 1 << 12).unwrap();
    let tk = trotter_kurtz(&law, &tilt, &f, 0.0).unwrap();
    assert_eq!(tk.iterations, 0);
    for (r, v) in tk.grid.iter().zip(&tk.values) {
        assert_eq!(*v, f.eval(*r));
    }
}

#[test]
fn coarse_grid_rejected() {
    let (law, m, _) = setup();
    let f = Bump::new(1.0, 0.3).unwrap();
    let tilt = TiltParams::new(1.0, m, 1 << 8).unwrap();
    assert!(matches!(trotter_kurtz(&law, &tilt, &f, 0.5), Err(Error::GridResolution(_))));
    assert!(Bump::new(0.5, 0.6).is_err());
}

#[test]
fn trotter_kurtz_gap_decreases() {
    let (law, m, f) = setup();
    let spec = Spectrum::new(FsParams::from_walk(1.0, m, law.chi()).unwrap());
    let gaps: Vec<f64> = [10, 12, 14]
        .iter()
        .map(|&e| {
            let tilt = TiltParams::new(1.0, m, 1 << e).unwrap();
            let tk = trotter_kurtz(&law, &tilt, &f, 0.5).unwrap();
            assert_eq!(tk.iterations, (0.5 * ((1u64 << e) as f64).powf(2.0 / 3.0) / law.mean_theta()) as usize);
            sup_gap(&tk.values, &airy_semigroup(&spec, &f, 0.5, &tk.grid))
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn untilted_iterate_matches_dirichlet_heat() {
    let (law, m, f) = setup();
    for e in [10, 12, 14] {
        let tilt = TiltParams::new(0.0, m, 1 << e).unwrap();
        let tk = trotter_kurtz(&law, &tilt, &f, 0.5).unwrap();
        let gap = sup_gap(&tk.values, &dirichlet_heat(&f, 0.5, &tk.grid));
        assert!(gap < 0.5 * tk.spacing, "n=2^{e}: gap {gap}, spacing {}", tk.spacing);
    }
}

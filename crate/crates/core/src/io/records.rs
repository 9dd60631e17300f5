use super::{group_by, Schema};
use crate::cone::{EffectiveWalk, Step};
use crate::error::{Error, Result};
use crate::fs::spectral::{transition_kernel, Spectrum, StationaryDensity};
use crate::interface::{hits_box, InterfaceProfile, InterfaceSample};
use crate::path::Point;
use crate::walk::{StepLaw, WalkSampleStats};
use serde::{Deserialize, Serialize};
use std::path::Path;

macro_rules! schema {
    ($t:ty, $file:expr, [$($c:expr),*]) => {
        impl Schema for $t {
            const FILE: &'static str = $file;
            const COLUMNS: &'static [&'static str] = &[$($c),*];
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceRow {
    pub replica: u32,
    pub sample: u32,
    pub i: i64,
    pub gamma_plus: i64,
    pub gamma_minus: i64,
}
schema!(InterfaceRow, "interface.csv", ["replica", "sample", "i", "gamma_plus", "gamma_minus"]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceSummaryRow {
    pub replica: u32,
    pub sample: u32,
    pub minus_area: u64,
    pub gamma_length: u64,
    pub max_closed_diameter: i64,
    pub hits_box: bool,
}
schema!(
    InterfaceSummaryRow,
    "interface_summary.csv",
    ["replica", "sample", "minus_area", "gamma_length", "max_closed_diameter", "hits_box"]
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRow {
    pub replica: u32,
    pub sample: u32,
    pub step_index: u32,
    pub theta: i64,
    pub zeta: i64,
}
schema!(StepRow, "steps.csv", ["replica", "sample", "step_index", "theta", "zeta"]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkRow {
    pub replica: u32,
    pub sample: u32,
    pub k: u32,
    #[serde(rename = "T")]
    pub t: i64,
    #[serde(rename = "Z")]
    pub z: i64,
}
schema!(WalkRow, "walks.csv", ["replica", "sample", "k", "T", "Z"]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkStatsRow {
    pub replica: u32,
    pub sample: u32,
    pub area: i64,
    pub nsteps: u64,
    pub gap: f64,
}
schema!(WalkStatsRow, "walk_stats.csv", ["replica", "sample", "area", "nsteps", "gap"]);

/// Either a density row (`r, phi0, density`) or a kernel row
/// (`t, r, y, kernel`); unused fields are empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsReferenceRow {
    pub r: f64,
    pub phi0: Option<f64>,
    pub density: Option<f64>,
    pub t: Option<f64>,
    pub y: Option<f64>,
    pub kernel: Option<f64>,
}
schema!(FsReferenceRow, "fs_reference.csv", ["r", "phi0", "density", "t", "y", "kernel"]);

/// One entry of a user-supplied step law: nonnegative weight of `(θ, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawRow {
    pub theta: i64,
    pub zeta: i64,
    pub weight: f64,
}
schema!(LawRow, "law.csv", ["theta", "zeta", "weight"]);

pub fn interface_rows(replica: u32, sample: u32, p: &InterfaceProfile) -> impl Iterator<Item = InterfaceRow> + '_ {
    (p.x_min..=p.x_max()).map(move |i| InterfaceRow {
        replica,
        sample,
        i,
        gamma_plus: p.gamma_plus_at(i),
        gamma_minus: p.gamma_minus_at(i),
    })
}

impl InterfaceSummaryRow {
    pub fn of(replica: u32, sample: u32, s: &InterfaceSample, box_half_width: i64, box_height: i64) -> Self {
        Self {
            replica,
            sample,
            minus_area: s.profile.minus_area as u64,
            gamma_length: s.profile.gamma_length as u64,
            max_closed_diameter: s.max_closed_diameter,
            hits_box: hits_box(&s.profile, box_half_width, box_height),
        }
    }
}

/// Rebuilds a profile from one sample's rows and its summary.
pub fn profile_from_rows(rows: &[InterfaceRow], summary: &InterfaceSummaryRow) -> Result<InterfaceProfile> {
    let first = rows.first().ok_or_else(|| Error::InsufficientData("interface sample without rows".into()))?;
    if let Some((k, r)) = rows.iter().enumerate().find(|(k, r)| r.i != first.i + *k as i64) {
        return Err(Error::SchemaMismatch {
            file: InterfaceRow::FILE.into(),
            row: 0,
            column: "i".into(),
            message: format!("sample ({}, {}) has non-consecutive column {} at offset {k}", r.replica, r.sample, r.i),
        });
    }
    Ok(InterfaceProfile {
        x_min: first.i,
        gamma_plus: rows.iter().map(|r| r.gamma_plus).collect(),
        gamma_minus: rows.iter().map(|r| r.gamma_minus).collect(),
        minus_area: summary.minus_area as usize,
        gamma_length: summary.gamma_length as usize,
    })
}

/// Pairs `interface.csv` with `interface_summary.csv`, in file order.
pub fn read_interfaces(dir: &Path) -> Result<Vec<(InterfaceSummaryRow, InterfaceProfile)>> {
    let summaries = super::read_csv::<InterfaceSummaryRow>(&dir.join(InterfaceSummaryRow::FILE))?;
    let rows = super::open_csv::<InterfaceRow>(&dir.join(InterfaceRow::FILE))?;
    let mut out = Vec::with_capacity(summaries.len());
    let mut it = summaries.into_iter();
    for g in group_by(rows, |r| (r.replica, r.sample)) {
        let ((replica, sample), rows) = g?;
        let s =
            it.next().filter(|s| (s.replica, s.sample) == (replica, sample)).ok_or_else(|| Error::SchemaMismatch {
                file: InterfaceSummaryRow::FILE.into(),
                row: out.len() as u64 + 2,
                column: "replica".into(),
                message: format!("no summary for sample ({replica}, {sample})"),
            })?;
        let p = profile_from_rows(&rows, &s)?;
        out.push((s, p));
    }
    Ok(out)
}

pub fn walk_rows(replica: u32, sample: u32, w: &EffectiveWalk) -> impl Iterator<Item = WalkRow> + '_ {
    w.points.iter().enumerate().map(move |(k, p)| WalkRow { replica, sample, k: k as u32, t: p.x, z: p.y })
}

pub fn step_rows(replica: u32, sample: u32, w: &EffectiveWalk) -> impl Iterator<Item = StepRow> {
    w.steps().into_iter().enumerate().map(move |(k, s)| StepRow {
        replica,
        sample,
        step_index: k as u32,
        theta: s.theta,
        zeta: s.zeta,
    })
}

impl WalkStatsRow {
    pub fn of(replica: u32, sample: u32, s: &WalkSampleStats) -> Self {
        Self { replica, sample, area: s.area, nsteps: s.nsteps as u64, gap: s.gap }
    }
}

pub fn walk_from_rows(rows: &[WalkRow]) -> Result<EffectiveWalk> {
    EffectiveWalk::new(rows.iter().map(|r| Point::new(r.t, r.z)).collect())
}

/// Streams `walks.csv` into walks, one sample at a time.
pub fn read_walks(path: &Path) -> Result<impl Iterator<Item = Result<((u32, u32), EffectiveWalk)>>> {
    let rows = super::open_csv::<WalkRow>(path)?;
    Ok(group_by(rows, |r| (r.replica, r.sample)).map(|g| {
        let (k, rows) = g?;
        Ok((k, walk_from_rows(&rows)?))
    }))
}

/// Density rows on `r_grid` followed by kernel rows on `times × grid × grid`.
pub fn fs_reference_rows(
    rho: &StationaryDensity,
    spec: &Spectrum,
    r_grid: &[f64],
    times: &[f64],
    kernel_grid: &[f64],
) -> Result<Vec<FsReferenceRow>> {
    let mut out: Vec<FsReferenceRow> = r_grid
        .iter()
        .map(|&r| FsReferenceRow {
            r,
            phi0: Some(spec.phi(0, r)),
            density: Some(rho.density(r)),
            t: None,
            y: None,
            kernel: None,
        })
        .collect();
    for &t in times {
        for &r in kernel_grid {
            for &y in kernel_grid {
                let k = transition_kernel(spec, t, r, y, spec.num_modes(), f64::INFINITY)?;
                out.push(FsReferenceRow {
                    r,
                    phi0: None,
                    density: None,
                    t: Some(t),
                    y: Some(y),
                    kernel: Some(k.value),
                });
            }
        }
    }
    Ok(out)
}

/// Normalizes the weights of a law file; the result must have zero
/// vertical mean.
pub fn law_from_rows(rows: &[LawRow]) -> Result<StepLaw> {
    let total: f64 = rows.iter().map(|r| r.weight).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidParameter("step-law weights must have positive finite mass".into()));
    }
    let mut entries: Vec<(Step, f64)> = rows.iter().map(|r| (Step::new(r.theta, r.zeta), r.weight / total)).collect();
    let sum: f64 = entries.iter().map(|e| e.1).sum();
    if let Some(last) = entries.iter_mut().rev().find(|e| e.1 > 0.0) {
        last.1 += 1.0 - sum;
    }
    StepLaw::new(entries)
}

pub fn read_law(path: &Path) -> Result<StepLaw> {
    law_from_rows(&super::read_csv::<LawRow>(path)?)
}

pub fn law_rows(law: &StepLaw) -> Vec<LawRow> {
    law.entries().iter().map(|(s, p)| LawRow { theta: s.theta, zeta: s.zeta, weight: *p }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{CsvRows, CsvWriter};

    fn roundtrip<T: Schema + PartialEq + std::fmt::Debug>(rows: &[T]) -> String {
        let mut w = CsvWriter::<T, _>::new(Vec::new()).unwrap();
        for r in rows {
            w.write(r).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back: Vec<T> = CsvRows::new(&bytes[..], "mem").unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(back, rows);
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn walk_rows_roundtrip() {
        let w = EffectiveWalk::new(vec![Point::new(0, 0), Point::new(2, 1), Point::new(3, 0)]).unwrap();
        let rows: Vec<WalkRow> = walk_rows(1, 4, &w).collect();
        let text = roundtrip(&rows);
        assert!(text.starts_with("replica,sample,k,T,Z\n1,4,0,0,0\n"));
        assert!(!text.contains('\r'));
        assert_eq!(walk_from_rows(&rows).unwrap(), w);
    }

    #[test]
    fn reference_rows_roundtrip() {
        let rows = vec![
            FsReferenceRow { r: 0.1, phi0: Some(0.25), density: Some(1.0 / 3.0), t: None, y: None, kernel: None },
            FsReferenceRow { r: 1e-7, phi0: None, density: None, t: Some(2.5), y: Some(0.3), kernel: Some(0.1 + 0.2) },
        ];
        let text = roundtrip(&rows);
        assert!(text.contains("0.30000000000000004"));
        assert!(text.lines().nth(1).unwrap().ends_with(",,,"));
    }

    #[test]
    fn summary_bools_roundtrip() {
        let rows = vec![InterfaceSummaryRow {
            replica: 0,
            sample: 2,
            minus_area: 17,
            gamma_length: 40,
            max_closed_diameter: 3,
            hits_box: true,
        }];
        roundtrip(&rows);
    }

    #[test]
    fn missing_column_is_located() {
        let text = "replica,sample,k,T\n0,0,0,0\n";
        let err = CsvRows::<WalkRow, _>::new(text.as_bytes(), "walks.csv").err().unwrap();
        assert!(matches!(err, Error::SchemaMismatch { row: 1, ref column, .. } if column == "Z"), "{err}");
    }

    #[test]
    fn bad_cell_is_located() {
        let text = "replica,sample,k,T,Z\n0,0,0,0,0\n0,0,1,x,1\n";
        let rows: Vec<Result<WalkRow>> = CsvRows::new(text.as_bytes(), "walks.csv").unwrap().collect();
        assert!(rows[0].is_ok());
        match &rows[1] {
            Err(Error::SchemaMismatch { row, column, .. }) => assert_eq!((*row, column.as_str()), (3, "T")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn law_file_normalizes() {
        let rows = vec![
            LawRow { theta: 1, zeta: 0, weight: 2.0 },
            LawRow { theta: 1, zeta: 1, weight: 1.0 },
            LawRow { theta: 1, zeta: -1, weight: 1.0 },
        ];
        let law = law_from_rows(&rows).unwrap();
        assert_eq!(law.prob(Step::new(1, 0)), 0.5);
        let skew = vec![LawRow { theta: 1, zeta: 1, weight: 1.0 }];
        assert!(law_from_rows(&skew).is_err());
        assert_eq!(law_from_rows(&law_rows(&law)).unwrap(), law);
    }
}

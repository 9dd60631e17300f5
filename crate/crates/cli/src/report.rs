use crate::analyze::REPORT_FILE;
use crate::error::CliError;
use crate::manifest::{sha256_file, RunManifest};
use serde_json::Value;
use std::path::Path;

/// Verifies `dir` and the runs it was computed from, then prints a summary
/// of its report.
pub fn run(dir: &Path) -> Result<(), CliError> {
    let m = RunManifest::load(dir)?;
    m.verify(dir)?;
    for (path, want) in &m.inputs {
        let p = Path::new(path);
        let got = sha256_file(p)?;
        if &got != want {
            return Err(CliError::validation("digest", format!("{path} has digest {got}, manifest records {want}")));
        }
        if p.file_name().is_some_and(|f| f == crate::manifest::MANIFEST_FILE) {
            let parent = p.parent().unwrap_or(Path::new("."));
            RunManifest::load(parent)?.verify(parent)?;
        }
    }
    if m.command != "analyze" {
        println!("{}: {} run verified ({} files)", dir.display(), m.command, m.outputs.len());
        return Ok(());
    }
    let text = std::fs::read_to_string(dir.join(REPORT_FILE))?;
    let report: Value = serde_json::from_str(&text).map_err(|e| CliError::validation("report", e.to_string()))?;
    println!("{}", report["calibration_note"].as_str().unwrap_or(""));
    for r in report["runs"].as_array().into_iter().flatten() {
        println!(
            "{} [{}] n={} lambda={} chi={:.6} samples={}",
            r["input"].as_str().unwrap_or("?"),
            r["provenance"].as_str().unwrap_or("?"),
            r["n"],
            r["lambda"],
            r["chi"].as_f64().unwrap_or(f64::NAN),
            r["samples"]
        );
        for k in r["ks"].as_array().into_iter().flatten() {
            println!(
                "  KS(t={}) = {:.4}  p = {:.3}",
                k["t"],
                k["result"]["statistic"].as_f64().unwrap_or(f64::NAN),
                k["result"]["p_value"].as_f64().unwrap_or(f64::NAN)
            );
        }
        for t in r["two_time"].as_array().into_iter().flatten() {
            println!(
                "  two-time L1 = {:.4}  null q95 = {:.4}",
                t["discrepancy"].as_f64().unwrap_or(f64::NAN),
                t["null_q95"].as_f64().unwrap_or(f64::NAN)
            );
        }
        if let Some(d) = r["diagnostics"].as_object() {
            for key in [
                "restricted_phase_rate",
                "repulsion_hit_rate",
                "area_exceed_rate",
                "length_exceed_rate",
                "width_exceed_rate",
            ] {
                println!("  {key} = {}", d[key]);
            }
        }
    }
    if let Some(s) = report["scaling"].as_object() {
        println!(
            "height exponent {:.4}  95% CI [{:.4}, {:.4}]",
            s["slope"].as_f64().unwrap_or(f64::NAN),
            s["ci"]["lo"].as_f64().unwrap_or(f64::NAN),
            s["ci"]["hi"].as_f64().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

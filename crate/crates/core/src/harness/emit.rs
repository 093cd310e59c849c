use super::{ResultRow, RunReport, Value};
use crate::Result;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

const RUNTIME_COLUMNS: [&str; 2] = ["runtime_oracle_ms", "runtime_dual_ms"];

/// CSV column names. Runtime columns come last so that the rest of a file
/// is reproducible byte for byte.
pub fn csv_header(alphas: &[f64], include_runtime: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "seed",
        "t",
        "in_regime",
        "E_oracle",
        "E_dual",
        "I_half_oracle",
        "I_half_dual",
        "S_half_A",
        "S_half_B",
        "E_2_oracle",
        "E_2_dual",
        "E_4_oracle",
        "E_4_dual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(alphas.iter().map(|a| format!("R_{a}")));
    h.extend(
        [
            "residual_relation",
            "residual_pipelines",
            "S_half_A_dual",
            "S_half_B_dual",
            "ratio_residual",
            "anti_hermitian",
            "s_A_stab",
            "s_B_stab",
            "s_C_stab",
            "e_AB",
            "g_ABC",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    if include_runtime {
        h.extend(RUNTIME_COLUMNS.iter().map(|s| s.to_string()));
    }
    h
}

fn record(row: &ResultRow, include_runtime: bool) -> Vec<String> {
    let v = |x: Value| x.to_string();
    let x = &row.extras;
    let mut r = vec![row.seed.to_string(), row.t.to_string(), row.in_regime.to_string()];
    r.extend(
        [
            row.e_oracle,
            row.e_dual,
            row.i_half_oracle,
            row.i_half_dual,
            row.s_half_a,
            row.s_half_b,
            row.e2_oracle,
            row.e2_dual,
            row.e4_oracle,
            row.e4_dual,
        ]
        .into_iter()
        .map(v),
    );
    r.extend(row.r_alpha.iter().copied().map(v));
    r.extend(
        [
            row.residual_relation,
            row.residual_pipelines,
            x.s_half_a_dual,
            x.s_half_b_dual,
            x.ratio_residual,
            x.anti_hermitian,
            x.s_a_stab,
            x.s_b_stab,
            x.s_c_stab,
            x.e_ab,
            x.g_abc,
        ]
        .into_iter()
        .map(v),
    );
    if include_runtime {
        r.push(format!("{:.3}", row.runtime_oracle_ms));
        r.push(format!("{:.3}", row.runtime_dual_ms));
    }
    r
}

pub fn write_csv<W: Write>(rows: &[ResultRow], alphas: &[f64], include_runtime: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(alphas, include_runtime))?;
    for row in rows {
        w.write_record(record(row, include_runtime))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &RunReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

/// `t` against `2E` and `I^(1/2)` per seed, preferring oracle values.
pub fn write_plot<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "t", "in_regime", "two_E", "I_half"])?;
    for r in rows {
        let e = r.e_oracle.get().or(r.e_dual.get());
        let i = r.i_half_oracle.get().or(r.i_half_dual.get());
        let cell = |x: Option<f64>| x.map_or_else(String::new, |x| x.to_string());
        w.write_record([
            r.seed.to_string(),
            r.t.to_string(),
            r.in_regime.to_string(),
            cell(e.map(|e| 2.0 * e)),
            cell(i),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `results.json` and `plot.csv` into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let paths = ["results.csv", "results.json", "plot.csv"].map(|f| dir.join(f));
    write_csv(&report.rows, &report.alpha_grid, true, BufWriter::new(File::create(&paths[0])?))?;
    write_json(report, BufWriter::new(File::create(&paths[1])?))?;
    write_plot(&report.rows, BufWriter::new(File::create(&paths[2])?))?;
    Ok(paths.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Extras, Skip, Summary};

    fn row(seed: u64, t: usize) -> ResultRow {
        let n = Value::Number(0.25 * t as f64);
        let s = Value::Skipped(Skip::Size);
        ResultRow {
            seed,
            t,
            in_regime: t < 2,
            e_oracle: n,
            e_dual: n,
            i_half_oracle: n,
            i_half_dual: s,
            s_half_a: n,
            s_half_b: n,
            e2_oracle: n,
            e2_dual: n,
            e4_oracle: s,
            e4_dual: n,
            r_alpha: vec![n, s],
            residual_relation: n,
            residual_pipelines: n,
            extras: Extras {
                s_half_a_dual: n,
                s_half_b_dual: n,
                ratio_residual: n,
                anti_hermitian: n,
                s_a_stab: s,
                s_b_stab: s,
                s_c_stab: s,
                e_ab: s,
                g_abc: s,
            },
            runtime_oracle_ms: 1.5,
            runtime_dual_ms: 2.5,
        }
    }

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_csv(&[], &[1.0, 2.0], false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("R_1,R_2,residual_relation"));
    }

    #[test]
    fn stable_columns() {
        let rows = vec![row(1, 0), row(1, 1), row(2, 2)];
        let mut buf = Vec::new();
        write_csv(&rows, &[1.0, 0.5], true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        let width = lines[0].split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == width));
        assert!(lines[2].starts_with("1,1,true,0.25,0.25,0.25,skipped: size"));
        assert!(lines[0].ends_with("runtime_oracle_ms,runtime_dual_ms"));
    }

    #[test]
    fn json_round_trip() {
        let rep = RunReport {
            alpha_grid: vec![1.0, 2.0],
            rows: vec![row(3, 1), row(3, 2)],
            summary: Summary::default(),
        };
        let mut buf = Vec::new();
        write_json(&rep, &mut buf).unwrap();
        let back: RunReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back.rows, rep.rows);
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let rep = RunReport {
            alpha_grid: vec![1.0, 2.0],
            rows: vec![row(0, 1)],
            summary: Summary::default(),
        };
        for p in write_outputs(&rep, &dir.path().join("out")).unwrap() {
            assert!(p.exists());
        }
    }
}

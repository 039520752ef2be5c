//! CSV writers. Every file is assembled in memory and moved into place with
//! a rename, so readers never see a partial file.

use crate::amplitude::AmplitudeTrajectory;
use crate::correlation::{CorrelationRecord, Partition};
use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// `t, re_b, im_b, pop, omega_shift, gamma_rate`; undefined rates are empty.
pub fn trajectory_csv(traj: &AmplitudeTrajectory, stride: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "re_b", "im_b", "pop", "omega_shift", "gamma_rate"])?;
    for i in (0..traj.len()).step_by(stride.max(1)) {
        let b = traj.b[i];
        w.write_record([
            traj.t[i].to_string(),
            b.re.to_string(),
            b.im.to_string(),
            b.norm_sqr().to_string(),
            opt(traj.omega_shift[i]),
            opt(traj.gamma_rate[i]),
        ])?;
    }
    finish(w)
}

/// Trajectory CSV preceded by `# key = value` metadata lines.
pub fn annotated_trajectory_csv(traj: &AmplitudeTrajectory, stride: usize, meta: &[(&str, String)]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (k, v) in meta {
        writeln!(out, "# {k} = {v}")?;
    }
    out.extend(trajectory_csv(traj, stride)?);
    Ok(out)
}

/// `t, qd_<p>, eof_<p>, mi_<p>` for each partition in order.
pub fn correlations_csv(records: &[CorrelationRecord], partitions: &[Partition]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for p in partitions {
        header.push(format!("qd_{p}"));
        header.push(format!("eof_{p}"));
        header.push(format!("mi_{p}"));
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.t.to_string()];
        for p in partitions {
            let v = r
                .get(*p)
                .ok_or_else(|| Error::Config(format!("record at t = {} lacks partition {p}", r.t)))?;
            row.push(v.qd.to_string());
            row.push(v.eof.to_string());
            row.push(v.mi.to_string());
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// A shared x column followed by named y columns.
pub fn columns_csv(x_name: &str, x: &[f64], columns: &[(String, Vec<f64>)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![x_name.to_string()];
    header.extend(columns.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (i, xi) in x.iter().enumerate() {
        let mut row = vec![xi.to_string()];
        for (name, col) in columns {
            let v = col
                .get(i)
                .ok_or_else(|| Error::Config(format!("column {name} is shorter than {x_name}")))?;
            row.push(v.to_string());
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// Header plus string rows, for summaries with mixed or missing fields.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w)
}

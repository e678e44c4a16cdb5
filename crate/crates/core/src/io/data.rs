use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::cooling::{NbarPoint, PulseKind, PulseSchedule, PulseSpec};
use crate::dynamics::{FlopResult, ScanResult, Shots};
use crate::error::{Error, Result};
use crate::quantum::FockDistribution;

pub const SCAN_COLUMNS: [&str; 3] = ["detuning_hz", "p_f1", "shots"];
pub const FLOP_COLUMNS: [&str; 3] = ["time_s", "p_f1", "shots"];
pub const NBAR_COLUMNS: [&str; 3] = ["pulse_index", "nbar", "t_elapsed_s"];
pub const DISTRIBUTION_COLUMNS: [&str; 2] = ["n", "population"];
pub const SCHEDULE_COLUMNS: [&str; 4] = ["index", "kind", "target_n", "duration_s"];
pub const HEATING_COLUMNS: [&str; 3] = ["delay_s", "nbar", "nbar_err"];

fn data_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn shots_text(s: Shots) -> String {
    match s {
        Shots::Exact => "inf".to_string(),
        Shots::Count(n) => n.to_string(),
    }
}

/// Writes a header and rows with LF line endings.
pub fn write_rows<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let f = std::fs::File::create(path)?;
    write_rows(std::io::BufWriter::new(f), header, rows)
}

/// Reads a CSV whose header must equal `header`; returns the data rows.
fn read_file(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(data_err(path, "file is empty"));
    }
    let mut r = ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let got = r.headers()?.clone();
    for (i, want) in header.iter().enumerate() {
        match got.get(i) {
            Some(g) if g == *want => {}
            Some(g) => return Err(data_err(path, format!("column {} is `{g}`, expected `{want}`", i + 1))),
            None => return Err(data_err(path, format!("missing column `{want}`"))),
        }
    }
    if got.len() > header.len() {
        return Err(data_err(path, format!("unexpected column `{}`", &got[header.len()])));
    }
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(data_err(path, "no data rows"));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let s = rec.get(i).ok_or_else(|| data_err(path, format!("line {line}: missing `{name}`")))?;
    s.parse()
        .map_err(|_| data_err(path, format!("line {line}: cannot parse `{s}` in column `{name}`")))
}

fn parse_shots(path: &Path, rows: &[csv::StringRecord]) -> Result<Shots> {
    let first = rows[0].get(2).unwrap_or("");
    if rows.iter().any(|r| r.get(2) != Some(first)) {
        return Err(data_err(path, "`shots` must be the same on every row"));
    }
    if first == "inf" {
        Ok(Shots::Exact)
    } else {
        Ok(Shots::Count(field(path, &rows[0], 2, "shots")?))
    }
}

fn curve_rows(x: &[f64], p: &[f64], shots: Shots) -> Vec<Vec<String>> {
    let s = shots_text(shots);
    x.iter()
        .zip(p)
        .map(|(x, p)| vec![x.to_string(), p.to_string(), s.clone()])
        .collect()
}

pub fn write_scan<W: Write>(out: W, scan: &ScanResult) -> Result<()> {
    write_rows(out, &SCAN_COLUMNS, curve_rows(scan.detuning_hz(), scan.p_f1(), scan.shots()))
}

pub fn save_scan(path: &Path, scan: &ScanResult) -> Result<()> {
    write_file(path, &SCAN_COLUMNS, curve_rows(scan.detuning_hz(), scan.p_f1(), scan.shots()))
}

fn read_curve(path: &Path, header: &[&str; 3]) -> Result<(Vec<f64>, Vec<f64>, Shots)> {
    let rows = read_file(path, header)?;
    let x = rows.iter().map(|r| field(path, r, 0, header[0])).collect::<Result<Vec<f64>>>()?;
    let p = rows.iter().map(|r| field(path, r, 1, header[1])).collect::<Result<Vec<f64>>>()?;
    Ok((x, p, parse_shots(path, &rows)?))
}

pub fn load_scan(path: &Path) -> Result<ScanResult> {
    let (x, p, s) = read_curve(path, &SCAN_COLUMNS)?;
    ScanResult::new(x, p, s).map_err(|e| data_err(path, e.to_string()))
}

pub fn save_flop(path: &Path, flop: &FlopResult) -> Result<()> {
    write_file(path, &FLOP_COLUMNS, curve_rows(flop.time_s(), flop.p_f1(), flop.shots()))
}

pub fn load_flop(path: &Path) -> Result<FlopResult> {
    let (x, p, s) = read_curve(path, &FLOP_COLUMNS)?;
    FlopResult::new(x, p, s).map_err(|e| data_err(path, e.to_string()))
}

pub fn save_nbar_series(path: &Path, series: &[NbarPoint]) -> Result<()> {
    write_file(
        path,
        &NBAR_COLUMNS,
        series
            .iter()
            .map(|p| vec![p.pulse_index.to_string(), p.nbar.to_string(), p.t_elapsed_s.to_string()]),
    )
}

pub fn save_distribution(path: &Path, dist: &FockDistribution) -> Result<()> {
    write_file(
        path,
        &DISTRIBUTION_COLUMNS,
        dist.populations()
            .iter()
            .enumerate()
            .map(|(n, p)| vec![n.to_string(), p.to_string()]),
    )
}

pub fn save_schedule(path: &Path, schedule: &PulseSchedule) -> Result<()> {
    write_file(
        path,
        &SCHEDULE_COLUMNS,
        schedule.pulses().iter().enumerate().map(|(i, p)| {
            vec![
                i.to_string(),
                p.kind.as_str().to_string(),
                p.target_n.map(|n| n.to_string()).unwrap_or_default(),
                p.duration.to_string(),
            ]
        }),
    )
}

/// Reads a schedule back; `sideband_rabi_1` is not stored in the file.
pub fn load_schedule(path: &Path, sideband_rabi_1: f64) -> Result<PulseSchedule> {
    let rows = read_file(path, &SCHEDULE_COLUMNS)?;
    let mut pulses = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let index: usize = field(path, r, 0, "index")?;
        if index != i {
            return Err(data_err(path, format!("row {} has index {index}", i + 1)));
        }
        let kind: PulseKind = r[1].parse().map_err(|e: Error| data_err(path, e.to_string()))?;
        let target_n = if r[2].is_empty() { None } else { Some(field(path, r, 2, "target_n")?) };
        pulses.push(PulseSpec {
            kind,
            duration: field(path, r, 3, "duration_s")?,
            target_n,
        });
    }
    let n_start = pulses.iter().filter_map(|p| p.target_n).max().unwrap_or(0);
    PulseSchedule::new(pulses, n_start, sideband_rabi_1).map_err(|e| data_err(path, e.to_string()))
}

/// Mean phonon number versus delay, as fed to the heating-rate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingData {
    pub delay_s: Vec<f64>,
    pub nbar: Vec<f64>,
    pub nbar_err: Vec<f64>,
}

pub fn save_heating_data(path: &Path, d: &HeatingData) -> Result<()> {
    write_file(
        path,
        &HEATING_COLUMNS,
        (0..d.delay_s.len()).map(|i| vec![d.delay_s[i].to_string(), d.nbar[i].to_string(), d.nbar_err[i].to_string()]),
    )
}

pub fn load_heating_data(path: &Path) -> Result<HeatingData> {
    let rows = read_file(path, &HEATING_COLUMNS)?;
    let col = |i: usize, name: &str| rows.iter().map(|r| field(path, r, i, name)).collect::<Result<Vec<f64>>>();
    Ok(HeatingData {
        delay_s: col(0, "delay_s")?,
        nbar: col(1, "nbar")?,
        nbar_err: col(2, "nbar_err")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::{build_schedule, RepumpModel};

    #[test]
    fn scan_csv_layout() {
        let s = ScanResult::new(vec![-1.5, 2.0], vec![0.25, 1.0], Shots::Count(100)).unwrap();
        let mut buf = Vec::new();
        write_scan(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "detuning_hz,p_f1,shots\n-1.5,0.25,100\n2,1,100\n");
    }

    #[test]
    fn scan_file_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scan.csv");
        let s = ScanResult::new(vec![0.1, 0.2, 0.30000000000000004], vec![0.0, 0.5, 0.123456789], Shots::Exact).unwrap();
        save_scan(&p, &s).unwrap();
        assert_eq!(load_scan(&p).unwrap(), s);
    }

    #[test]
    fn bad_inputs_are_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        let e = load_scan(&empty).unwrap_err().to_string();
        assert!(e.contains("empty"), "{e}");

        let header_only = dir.path().join("h.csv");
        std::fs::write(&header_only, "detuning_hz,p_f1,shots\n").unwrap();
        assert!(load_scan(&header_only).unwrap_err().to_string().contains("no data"));

        let wrong = dir.path().join("wrong.csv");
        std::fs::write(&wrong, "detuning_hz,prob,shots\n1,0.5,100\n").unwrap();
        let e = load_scan(&wrong).unwrap_err().to_string();
        assert!(e.contains("`prob`") && e.contains("`p_f1`"), "{e}");

        let junk = dir.path().join("junk.csv");
        std::fs::write(&junk, "time_s,p_f1,shots\n0.1,abc,inf\n").unwrap();
        assert!(load_flop(&junk).unwrap_err().to_string().contains("p_f1"));
    }

    #[test]
    fn schedule_file_replays() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = build_schedule(5, 392.0, RepumpModel::default()).unwrap();
        save_schedule(&p, &s).unwrap();
        assert_eq!(load_schedule(&p, 392.0).unwrap(), s);
    }
}

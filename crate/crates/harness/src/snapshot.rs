//! CSV snapshots and their JSON metadata sidecars.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swe_ofdg::{DGField1D, DGField2D};

use crate::runner::Field;
use crate::HarnessError;

/// Everything needed to reproduce a snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub case: String,
    pub degree: usize,
    pub cells: Vec<usize>,
    pub cfl: f64,
    pub t_final: f64,
    /// Time of this snapshot.
    pub time: f64,
    pub limiter: bool,
    pub damping: bool,
    pub g: f64,
    pub build: String,
}

impl RunMetadata {
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows `x, h, hu, b, h+b` at both endpoints and the midpoint of every cell.
pub fn write_csv_1d<W: std::io::Write>(field: &DGField1D, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "h", "hu", "b", "h+b"])?;
    for j in 0..field.mesh.cells() {
        let (a, b) = field.mesh.cell(j);
        for x in [a, 0.5 * (a + b), b] {
            let (h, hu, bot) = field.eval_in_cell(j, x);
            w.write_record([fmt(x), fmt(h), fmt(hu), fmt(bot), fmt(h + bot)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows `x, y, h, hu, hv, b, h+b` at every cell centre.
pub fn write_csv_2d<W: std::io::Write>(field: &DGField2D, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "h", "hu", "hv", "b", "h+b"])?;
    for j in 0..field.mesh.ny() {
        for i in 0..field.mesh.nx() {
            let (x, y) = field.mesh.cell_center(i, j);
            let [h, hu, hv, b] = field.eval_in_cell(i, j, x, y);
            w.write_record([fmt(x), fmt(y), fmt(h), fmt(hu), fmt(hv), fmt(b), fmt(h + b)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
pub fn write_snapshot(dir: &Path, stem: &str, field: &Field, meta: &RunMetadata) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let w = BufWriter::new(File::create(&csv_path)?);
    match field {
        Field::OneD(f) => write_csv_1d(f, w)?,
        Field::TwoD(f) => write_csv_2d(f, w)?,
    }
    meta.write(&dir.join(format!("{stem}.json")))?;
    Ok(csv_path)
}

/// File stem for a snapshot, e.g. `dambreak-1d_k2_n400_t15.000000`.
pub fn snapshot_stem(case: &str, degree: usize, cells: &[usize], time: f64) -> String {
    let cells: Vec<String> = cells.iter().map(|n| n.to_string()).collect();
    format!("{case}_k{degree}_n{}_t{time:.6}", cells.join("x"))
}

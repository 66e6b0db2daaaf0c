//! Diagnostics CSV and binary snapshots.
//!
//! Snapshot layout, all little-endian: the 8-byte magic `PRIMEQ01`; `nx`, `ny`,
//! `nz` as `u64`; `h`, `alpha`, `beta_tau`, `beta_sigma`, `t` as `f64`; then
//! `v1`, `v2`, `tau`, `sigma`, each `(nz+1)·ny·nx` values of `f64` with the
//! level index outermost and `i` innermost.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use primeq::solver::State;
use primeq::{DiagnosticsRecord, Grid, HVectorField, PhysParams, ScalarField};

use crate::error::{HarnessError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"PRIMEQ01";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(out: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DiagnosticsRecord::CSV_HEADER)?;
    for r in records {
        w.write_record(r.csv_values().iter().map(|v| format_value(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), records)
}

/// Rows of a diagnostics CSV, checked against the fixed header.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<[f64; 12]>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != DiagnosticsRecord::CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut row = [0.0; 12];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|e| HarnessError::Config(format!("bad CSV value `{field}`: {e}")))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Contents of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub params: PhysParams,
    /// Surface pressure is not stored and reads back as zero.
    pub state: State,
}

pub fn write_snapshot<W: Write>(mut out: W, grid: &Grid, params: &PhysParams, state: &State) -> Result<()> {
    out.write_all(SNAPSHOT_MAGIC)?;
    for n in [grid.nx, grid.ny, grid.nz] {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    for x in [grid.h, params.alpha, params.beta_tau, params.beta_sigma, state.t] {
        out.write_all(&x.to_le_bytes())?;
    }
    for f in [&state.v.v1, &state.v.v2, &state.tau, &state.sigma] {
        for x in &f.data {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot_file(path: &Path, grid: &Grid, params: &PhysParams, state: &State) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), grid, params, state)
}

fn read_array<const N: usize, R: Read>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|_| HarnessError::Snapshot(format!("truncated while reading {what}")))?;
    Ok(buf)
}

pub fn read_snapshot_from<R: Read>(mut r: R) -> Result<Snapshot> {
    if &read_array::<8, _>(&mut r, "magic")? != SNAPSHOT_MAGIC {
        return Err(HarnessError::Snapshot("bad magic".into()));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(u64::from_le_bytes(read_array(&mut r, "dimensions")?))
            .map_err(|_| HarnessError::Snapshot("dimension overflow".into()))?;
    }
    let mut reals = [0.0; 5];
    for x in &mut reals {
        *x = f64::from_le_bytes(read_array(&mut r, "header")?);
    }
    let [h, alpha, beta_tau, beta_sigma, t] = reals;
    let grid = Grid::new(dims[0], dims[1], dims[2], h).map_err(|e| HarnessError::Snapshot(e.to_string()))?;
    let params = PhysParams::new(alpha, beta_tau, beta_sigma).map_err(|e| HarnessError::Snapshot(e.to_string()))?;
    let mut field = |name: &str| -> Result<ScalarField> {
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            data.push(f64::from_le_bytes(read_array(&mut r, name)?));
        }
        Ok(ScalarField::from_vec(grid, data)?)
    };
    let v = HVectorField { v1: field("v1")?, v2: field("v2")? };
    let tau = field("tau")?;
    let sigma = field("sigma")?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(HarnessError::Snapshot("trailing bytes".into()));
    }
    Ok(Snapshot { grid, params, state: State::new(t, v, tau, sigma)? })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    read_snapshot_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use primeq::profiles::white_noise;

    #[test]
    fn snapshot_is_bit_exact() {
        let g = Grid::new(4, 6, 4, 0.5).unwrap();
        let p = PhysParams::new(2.0, 0.5, 0.25).unwrap();
        let v = HVectorField { v1: white_noise(g, 1, 1.0), v2: white_noise(g, 2, 1.0) };
        let s = State::new(0.125, v, white_noise(g, 3, 1.0), white_noise(g, 4, 1e-300)).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &p, &s).unwrap();
        assert_eq!(buf.len(), 8 + 3 * 8 + 5 * 8 + 4 * 8 * g.len());
        let back = read_snapshot_from(buf.as_slice()).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.params, p);
        assert_eq!(back.state, s);
        assert!(read_snapshot_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot_from(bad.as_slice()).is_err());
    }

    #[test]
    fn csv_has_fixed_header_and_round_trips() {
        let rec = DiagnosticsRecord { t: 0.1, e_v: 1.0 / 3.0, energy_residual: -2e-17, ..Default::default() };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec, rec]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,E_v,E_tau,E_sigma,D_v,D_zeta,robin_term,mean_sigma,dtv_norm,lapv_norm,gradpi_norm,energy_residual\n"));
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], rec.csv_values());
    }
}

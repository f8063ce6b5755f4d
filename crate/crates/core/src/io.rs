//! CSV readers and writers. Files are strictly SI; floats are written in the
//! shortest form that parses back to the identical value.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::area::AreaFunction;
use crate::calibration::CalibrationRecord;
use crate::error::{Error, Result};
use crate::signal::ImpedanceSpectrum;

pub const IMPEDANCE_HEADER: [&str; 3] = ["frequency_hz", "real", "imag"];
pub const AREA_HEADER: [&str; 2] = ["x_m", "area_m2"];
pub const SWEEP_HEADER: [&str; 6] = ["f_sup_hz", "f_cut_hz", "f_lim_hz", "item_id", "L_lme_db", "theta_lme_deg"];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_error)?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_field(record: &csv::StringRecord, i: usize, line: u64) -> Result<f64> {
    let raw = record.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column {}", i + 1),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{raw}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("`{raw}` is not finite"),
        });
    }
    Ok(v)
}

fn rows(reader: impl Read, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    // A zero-byte file holds no rows rather than a malformed header.
    if rdr.headers().map_err(csv_error)?.iter().all(|h| h.trim().is_empty()) && rdr.is_done() {
        return Ok(Vec::new());
    }
    check_header(&mut rdr, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let vals = (0..header.len()).map(|i| parse_field(&rec, i, line)).collect::<Result<_>>()?;
        out.push((line, vals));
    }
    Ok(out)
}

/// Read a `frequency_hz,real,imag` file. `f_lim` defaults to the last row.
pub fn read_impedance_csv(reader: impl Read) -> Result<ImpedanceSpectrum> {
    let rows = rows(reader, &IMPEDANCE_HEADER)?;
    if rows.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    for w in rows.windows(2) {
        if !(w[1].1[0] > w[0].1[0]) {
            return Err(Error::Parse {
                line: w[1].0,
                message: format!("frequency {} does not increase past {}", w[1].1[0], w[0].1[0]),
            });
        }
    }
    let f = rows.iter().map(|r| r.1[0]).collect();
    let v = rows.iter().map(|r| Complex64::new(r.1[1], r.1[2])).collect();
    ImpedanceSpectrum::new(f, v)
}

pub fn write_impedance_csv(mut writer: impl Write, z: &ImpedanceSpectrum) -> Result<()> {
    writeln!(writer, "{}", IMPEDANCE_HEADER.join(","))?;
    for (f, v) in z.iter() {
        writeln!(writer, "{f},{},{}", v.re, v.im)?;
    }
    Ok(())
}

/// Read an `x_m,area_m2` file on a uniform grid starting at zero.
pub fn read_area_csv(reader: impl Read) -> Result<AreaFunction> {
    let rows = rows(reader, &AREA_HEADER)?;
    if rows.is_empty() {
        return Err(Error::EmptyAreaFunction);
    }
    if rows[0].1[0].abs() > 1e-12 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: format!("area function must start at x = 0, got {}", rows[0].1[0]),
        });
    }
    let dx = if rows.len() > 1 { rows[1].1[0] - rows[0].1[0] } else { 1e-4 };
    for (i, (line, r)) in rows.iter().enumerate() {
        let expect = i as f64 * dx;
        if (r[0] - expect).abs() > 1e-6 * dx.max(expect) {
            return Err(Error::Parse {
                line: *line,
                message: format!("x = {} breaks the uniform step {dx}", r[0]),
            });
        }
    }
    AreaFunction::from_areas(dx, rows.iter().map(|r| r.1[1]).collect())
}

pub fn write_area_csv(mut writer: impl Write, af: &AreaFunction) -> Result<()> {
    writeln!(writer, "{}", AREA_HEADER.join(","))?;
    for (i, a) in af.areas.iter().enumerate() {
        writeln!(writer, "{},{a}", af.position(i))?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Long-format sweep results, one row per grid point and item.
pub fn write_sweep_long_csv(mut writer: impl Write, rec: &CalibrationRecord) -> Result<()> {
    writeln!(writer, "{}", SWEEP_HEADER.join(","))?;
    for c in &rec.cells {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            c.f_sup,
            c.f_cut,
            rec.f_lim,
            c.item_id,
            opt(c.l_lme_db),
            opt(c.theta_lme_deg)
        )?;
    }
    Ok(())
}

/// Mean least level error matrix: one row per `f_sup`, one column per `f_cut`.
pub fn write_sweep_matrix_csv(mut writer: impl Write, rec: &CalibrationRecord, phase: bool) -> Result<()> {
    let cols: Vec<String> = rec.f_cut_grid.iter().map(|f| f.to_string()).collect();
    writeln!(writer, "f_sup_hz\\f_cut_hz,{}", cols.join(","))?;
    let m = if phase { &rec.theta_mlme } else { &rec.l_mlme };
    for (f_sup, row) in rec.f_sup_grid.iter().zip(m) {
        let vals: Vec<String> = row.iter().map(|v| opt(*v)).collect();
        writeln!(writer, "{f_sup},{}", vals.join(","))?;
    }
    Ok(())
}

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{GridSpec, RadialField, RadialGrid};
use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `r,re,im` rows with a header line.
pub fn write_field_csv<W: Write>(writer: W, u: &RadialField) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["r", "re", "im"])?;
    for (r, z) in u.grid().nodes().iter().zip(u.values()) {
        out.write_record([fmt_f64(*r), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`]; its radii must match `grid`.
pub fn read_field_csv<R: Read>(reader: R, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    let mut input = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = input.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "re", "im"] {
        return Err(Error::InvalidParameter(format!(
            "field CSV must have columns r,re,im; found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (j, record) in input.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i].trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("row {j}: cannot parse {:?}", &record[i]))
            })
        };
        let (r, re, im) = (parse(0)?, parse(1)?, parse(2)?);
        let node = grid.nodes().get(j).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("field CSV has more rows than the {}-point grid", grid.len()))
        })?;
        if (r - node).abs() > 1e-9 * grid.radius() {
            return Err(Error::InvalidParameter(format!(
                "row {j}: radius {r} does not match grid node {node}"
            )));
        }
        values.push(Complex64::new(re, im));
    }
    RadialField::new(grid.clone(), values)
}

pub fn write_grid_json<W: Write>(writer: W, spec: &GridSpec) -> Result<()> {
    serde_json::to_writer_pretty(writer, spec)?;
    Ok(())
}

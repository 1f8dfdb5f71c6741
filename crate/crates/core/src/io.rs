//! CSV encodings: signals as `t,re,im`, spectra as `w,re,im`.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! enough to round-trip an `f64` exactly.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::Real;
use crate::signal::{SampledSignal, Spectrum};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_signal_csv<T: Real, W: Write>(s: &SampledSignal<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im"])?;
    for (t, v) in s.grid().times().zip(s.values()) {
        w.write_record([fmt_num(t.as_f64()), fmt_num(v.re.as_f64()), fmt_num(v.im.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<T: Real, W: Write>(s: &Spectrum<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["w", "re", "im"])?;
    for (f, v) in s.frequency_grid().frequencies().zip(s.values()) {
        w.write_record([fmt_num(f.as_f64()), fmt_num(v.re.as_f64()), fmt_num(v.im.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

fn read_triples<R: Read>(input: R, first: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let expected = [first, "re", "im"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Parse(format!("expected header {}, got {:?}", expected.join(","), headers)));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut vals = [0.0; 3];
        for (slot, field) in vals.iter_mut().zip(rec.iter()) {
            *slot = field
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad number {field:?}: {e}")))?;
        }
        rows.push((vals[0], vals[1], vals[2]));
    }
    Ok(rows)
}

fn grid_from_axis<T: Real>(axis: &[f64]) -> Result<(f64, f64)> {
    if axis.len() < 2 {
        return Err(Error::Parse("need at least two rows".into()));
    }
    let step = axis[1] - axis[0];
    if !(step > 0.0) {
        return Err(Error::Parse("axis must be increasing".into()));
    }
    for (m, x) in axis.iter().enumerate() {
        let expect = axis[0] + m as f64 * step;
        if (x - expect).abs() > 1e-9 * step.max(expect.abs()) {
            return Err(Error::Parse(format!("row {m} is off the uniform axis")));
        }
    }
    Ok((axis[0], step))
}

pub fn read_signal_csv<T: Real, R: Read>(input: R) -> Result<SampledSignal<T>> {
    let rows = read_triples(input, "t")?;
    let axis: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (t0, dt) = grid_from_axis::<T>(&axis)?;
    let grid = TimeGrid::new(T::of(t0), T::of(dt), rows.len())?;
    SampledSignal::new(grid, rows.iter().map(|r| Complex::new(T::of(r.1), T::of(r.2))).collect())
}

pub fn read_spectrum_csv<T: Real, R: Read>(input: R) -> Result<Spectrum<T>> {
    let rows = read_triples(input, "w")?;
    let axis: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (w0, dw) = grid_from_axis::<T>(&axis)?;
    let n = rows.len();
    let span = 1.0 / dw;
    if (w0 + (n / 2) as f64 * dw).abs() > 1e-9 * dw {
        return Err(Error::Parse("frequency axis must start at -n/2 * dw".into()));
    }
    let grid = TimeGrid::centered(T::of(span), n)?;
    Spectrum::new(grid, rows.iter().map(|r| Complex::new(T::of(r.1), T::of(r.2))).collect())
}

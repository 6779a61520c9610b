//! Export formats.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so every value
//! round-trips exactly, and no file carries a timestamp: identical inputs
//! give byte-identical files.

use std::io::{Read, Write};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::classical::{DimensionEstimate, EscapeHistogram, IntervalCover};
use crate::matrix::{ComplexMatrix, C64};
use crate::quantum::Scheme;
use crate::spectral::{CountingCurve, MapKind, ShapeSample, SpectrumRecord, WeylFit};
use crate::walsh::AnalyticWalshSpectrum;
use crate::{Error, Result, LOG2_LOG3};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err)
}

fn fraction(x: Rational64) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// One `interval` row per cover interval, then one `summary` row.
pub fn write_cover_csv<W: Write>(w: W, cover: &IntervalCover, fit: Option<&DimensionEstimate>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["record", "depth", "left", "width", "slope", "residual"])
        .map_err(csv_err)?;
    let depth = cover.depth().to_string();
    let width = fraction(cover.width());
    for (left, _) in cover.intervals() {
        out.write_record(["interval", &depth, &fraction(left), &width, "", ""])
            .map_err(csv_err)?;
    }
    if let Some(fit) = fit {
        out.write_record(["summary", &depth, "", "", &fmt_f64(fit.value), &fmt_f64(fit.residual)])
            .map_err(csv_err)?;
    }
    finish(out)
}

#[derive(Debug, Deserialize)]
struct CoverRow {
    record: String,
    depth: u32,
    left: String,
    #[allow(dead_code)]
    width: String,
    slope: Option<f64>,
    #[allow(dead_code)]
    residual: Option<f64>,
}

/// Reads back a cover and, if present, the fitted slope.
pub fn read_cover_csv<R: Read>(r: R) -> Result<(IntervalCover, Option<f64>)> {
    let rows: Vec<CoverRow> = read_rows(r)?;
    let mut depth = None;
    let mut numerators = Vec::new();
    let mut slope = None;
    for row in rows {
        depth.get_or_insert(row.depth);
        match row.record.as_str() {
            "interval" => {
                let left: Rational64 = row
                    .left
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad fraction '{}'", row.left)))?;
                let scaled = left * Rational64::from_integer(3i64.pow(row.depth));
                if !scaled.is_integer() || scaled < Rational64::from_integer(0) {
                    return Err(Error::Parse(format!("left endpoint {} is off the 3^-depth grid", row.left)));
                }
                numerators.push(scaled.to_integer() as u64);
            }
            "summary" => slope = row.slope,
            other => return Err(Error::Parse(format!("unknown cover record '{other}'"))),
        }
    }
    let depth = depth.ok_or_else(|| Error::Parse("empty cover file".into()))?;
    Ok((IntervalCover::new(depth, numerators)?, slope))
}

pub fn write_matrix_csv<W: Write>(w: W, m: &ComplexMatrix) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["row", "col", "re", "im"]).map_err(csv_err)?;
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out.write_record([&i.to_string(), &j.to_string(), &fmt_f64(z.re), &fmt_f64(z.im)])
                .map_err(csv_err)?;
        }
    }
    finish(out)
}

#[derive(Debug, Deserialize)]
struct MatrixRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

/// Entries not listed are zero; the dimension is one past the largest index.
pub fn read_matrix_csv<R: Read>(r: R) -> Result<ComplexMatrix> {
    let rows: Vec<MatrixRow> = read_rows(r)?;
    let n = rows.iter().map(|e| e.row.max(e.col) + 1).max().unwrap_or(0);
    let mut m = ComplexMatrix::zeros(n);
    for e in rows {
        m[(e.row, e.col)] = C64::new(e.re, e.im);
    }
    Ok(m)
}

pub const BINARY_MAGIC: &[u8; 4] = b"BKRS";
pub const BINARY_VERSION: u32 = 1;

/// `BKRS`, version `u32`, dim `u32`, scheme `u8`, then row-major `re, im` as little-endian `f64`.
pub fn write_matrix_binary<W: Write>(mut w: W, m: &ComplexMatrix, scheme: Scheme) -> Result<()> {
    let dim = u32::try_from(m.dim()).map_err(|_| Error::InvalidArgument("matrix too large for u32 header".into()))?;
    let mut buf = Vec::with_capacity(13 + 16 * m.as_slice().len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim.to_le_bytes());
    buf.push(scheme.code());
    for z in m.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<(ComplexMatrix, Scheme)> {
    let mut header = [0u8; 13];
    r.read_exact(&mut header)?;
    if &header[..4] != BINARY_MAGIC {
        return Err(Error::Parse("missing BKRS magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported BKRS version {version}")));
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let scheme = Scheme::from_code(header[12])?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 16 * dim * dim {
        return Err(Error::Parse(format!(
            "BKRS body has {} bytes, expected {}",
            body.len(),
            16 * dim * dim
        )));
    }
    let entries = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok((ComplexMatrix::from_row_major(dim, entries)?, scheme))
}

pub fn write_spectrum_csv<W: Write>(w: W, s: &SpectrumRecord) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["N", "map_kind", "scheme", "re", "im"]).map_err(csv_err)?;
    let n = s.n.to_string();
    for z in &s.eigenvalues {
        out.write_record([&n, s.map_kind.name(), s.scheme.name(), &fmt_f64(z.re), &fmt_f64(z.im)])
            .map_err(csv_err)?;
    }
    finish(out)
}

#[derive(Debug, Deserialize)]
struct SpectrumRow {
    #[serde(rename = "N")]
    n: usize,
    map_kind: String,
    scheme: String,
    re: f64,
    im: f64,
}

/// Groups consecutive rows by `(N, map_kind, scheme)`. The solver residual
/// is not stored and reads back as NaN.
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<Vec<SpectrumRecord>> {
    let rows: Vec<SpectrumRow> = read_rows(r)?;
    let mut out: Vec<SpectrumRecord> = Vec::new();
    for row in rows {
        let kind: MapKind = row.map_kind.parse()?;
        let scheme: Scheme = row.scheme.parse()?;
        let z = C64::new(row.re, row.im);
        match out.last_mut() {
            Some(last) if last.n == row.n && last.map_kind == kind && last.scheme == scheme => {
                last.eigenvalues.push(z)
            }
            _ => out.push(SpectrumRecord {
                n: row.n,
                map_kind: kind,
                scheme,
                eigenvalues: vec![z],
                solver_residual: f64::NAN,
            }),
        }
    }
    Ok(out)
}

pub fn write_counting_csv<W: Write>(w: W, samples: &[ShapeSample]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["N", "r", "count", "rescaled"]).map_err(csv_err)?;
    for s in samples {
        out.write_record([&s.n.to_string(), &fmt_f64(s.r), &s.count.to_string(), &fmt_f64(s.rescaled)])
            .map_err(csv_err)?;
    }
    finish(out)
}

#[derive(Debug, Deserialize)]
struct CountingRow {
    #[serde(rename = "N")]
    n: usize,
    r: f64,
    count: usize,
    #[allow(dead_code)]
    rescaled: f64,
}

pub fn read_counting_csv<R: Read>(r: R) -> Result<Vec<CountingCurve>> {
    let rows: Vec<CountingRow> = read_rows(r)?;
    let mut out: Vec<CountingCurve> = Vec::new();
    for row in rows {
        match out.last_mut() {
            Some(last) if last.n == row.n => last.samples.push((row.r, row.count)),
            _ => out.push(CountingCurve {
                n: row.n,
                samples: vec![(row.r, row.count)],
            }),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylFitJson {
    pub radius: f64,
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub target: f64,
}

impl From<&WeylFit> for WeylFitJson {
    fn from(fit: &WeylFit) -> Self {
        Self {
            radius: fit.radius,
            ns: fit.sequence.iter().map(|(n, _)| *n).collect(),
            counts: fit.sequence.iter().map(|(_, c)| *c).collect(),
            slope: fit.slope,
            intercept: fit.intercept,
            rms_residual: fit.rms_residual,
            target: LOG2_LOG3,
        }
    }
}

pub fn write_weyl_json<W: Write>(mut w: W, fit: &WeylFit) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &WeylFitJson::from(fit))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_weyl_json<R: Read>(r: R) -> Result<WeylFitJson> {
    Ok(serde_json::from_reader(r)?)
}

/// `radius, slope, target, deviation` for a set of fits.
pub fn write_weyl_summary<W: Write>(w: W, fits: &[WeylFit]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["radius", "slope", "target", "deviation"]).map_err(csv_err)?;
    for f in fits {
        out.write_record([
            fmt_f64(f.radius),
            fmt_f64(f.slope),
            fmt_f64(LOG2_LOG3),
            fmt_f64(f.slope - LOG2_LOG3),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

/// Rows `(k, re, im, multiplicity, radius, p, j)`, with `p = −1` on the
/// pure `λ₊`, `λ₋` entries.
pub fn write_analytic_spectrum_csv<W: Write>(w: W, s: &AnalyticWalshSpectrum) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["k", "re", "im", "multiplicity", "radius", "p", "j"])
        .map_err(csv_err)?;
    let k = s.k.to_string();
    for e in &s.entries {
        let p = e.p.map_or_else(|| "-1".to_string(), |p| p.to_string());
        out.write_record([
            k.clone(),
            fmt_f64(e.value.re),
            fmt_f64(e.value.im),
            e.multiplicity.to_string(),
            fmt_f64(e.radius()),
            p,
            e.j.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

/// `t, escaped, survivors, fraction, expected` with `expected = (2/3)^t`.
pub fn write_escape_csv<W: Write>(w: W, h: &EscapeHistogram) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "escaped", "survivors", "fraction", "expected"])
        .map_err(csv_err)?;
    for t in 0..=h.tmax {
        out.write_record([
            t.to_string(),
            h.escaped_at[t].to_string(),
            h.survivors_at(t).to_string(),
            fmt_f64(h.survivor_fraction(t)),
            fmt_f64((2.0f64 / 3.0).powi(t as i32)),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{box_dimension, trapped_cover};
    use crate::spectral::rescale;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn cover_round_trip() {
        let cover = trapped_cover(3).unwrap();
        let fit = box_dimension(&cover).unwrap();
        let mut buf = Vec::new();
        write_cover_csv(&mut buf, &cover, Some(&fit)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("record,depth,left,width,slope,residual\ninterval,3,0/1,1/27,,\n"));
        let (back, slope) = read_cover_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cover);
        assert_eq!(slope, Some(fit.value));
    }

    #[test]
    fn matrix_csv_and_binary_round_trip() {
        let m = ComplexMatrix::from_fn(4, |i, j| C64::new(i as f64 / 3.0, -(j as f64) * 0.1));
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice()).unwrap(), m);

        let mut bin = Vec::new();
        write_matrix_binary(&mut bin, &m, Scheme::Antiperiodic).unwrap();
        assert_eq!(&bin[..4], b"BKRS");
        assert_eq!(bin.len(), 13 + 16 * 16);
        let (back, scheme) = read_matrix_binary(bin.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(scheme, Scheme::Antiperiodic);
        bin[0] = b'X';
        assert!(read_matrix_binary(bin.as_slice()).is_err());
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let mut bin = Vec::new();
        write_matrix_binary(&mut bin, &ComplexMatrix::identity(3), Scheme::Plain).unwrap();
        bin.pop();
        assert!(matches!(read_matrix_binary(bin.as_slice()), Err(Error::Parse(_))));
    }

    #[test]
    fn spectrum_round_trip() {
        let s = SpectrumRecord {
            n: 9,
            map_kind: MapKind::OpenBaker,
            scheme: Scheme::Plain,
            eigenvalues: vec![C64::new(0.5, -0.25), C64::new(0.0, 0.0)],
            solver_residual: 1e-16,
        };
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("N,map_kind,scheme,re,im\n9,open-baker,plain,"));
        let back = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].eigenvalues, s.eigenvalues);
    }

    #[test]
    fn counting_round_trip() {
        let curve = CountingCurve::from_moduli(27, &[0.1, 0.6, 0.9], &[0.25, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_counting_csv(&mut buf, &rescale(&curve)).unwrap();
        assert_eq!(read_counting_csv(buf.as_slice()).unwrap(), vec![curve]);
    }

    #[test]
    fn weyl_json_fields() {
        let fit = WeylFit {
            radius: 0.5,
            sequence: vec![(27, 8), (81, 16)],
            slope: 0.63,
            intercept: 0.1,
            rms_residual: 0.01,
        };
        let mut buf = Vec::new();
        write_weyl_json(&mut buf, &fit).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for key in ["radius", "Ns", "counts", "slope", "intercept", "rms_residual", "target"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back = read_weyl_json(buf.as_slice()).unwrap();
        assert_eq!(back.ns, vec![27, 81]);
        assert!((back.target - 0.63093).abs() < 1e-5);
    }
}

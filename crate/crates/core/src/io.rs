//! Self-describing CSV outputs and content digests.
//!
//! Every file starts with `# key: value` comment lines followed by a header
//! row. Floats are written in Rust's shortest round-trip form, so identical
//! runs produce identical bytes.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expfit::ExpFitResult;
use crate::observer::{RelaxationSeries, SeriesSource};

/// First 64 bits of the SHA-256 of `bytes`, as 16 hex digits.
pub fn digest64(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of the canonical JSON form of `value`.
pub fn hash_of<T: Serialize>(value: &T) -> String {
    digest64(serde_json::to_string(value).expect("plain data serializes").as_bytes())
}

/// An in-memory CSV document with leading comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvDoc {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn comment(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.comments.push(format!("{key}: {value}"));
        self
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> &mut Self {
        self.rows.push(fields.into_iter().collect());
        self
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for c in &self.comments {
            out.extend_from_slice(b"# ");
            out.extend_from_slice(c.as_bytes());
            out.push(b'\n');
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| Error::io("<memory>", e.into_error()))
    }

    /// Writes the document and returns the digest of the bytes written.
    pub fn write(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes()?;
        fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        Ok(digest64(&bytes))
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// `t,x_mean` document for a relaxation series.
pub fn series_doc(series: &RelaxationSeries) -> CsvDoc {
    let mut doc = CsvDoc::new(["t", "x_mean"]);
    doc.comment("kinex", "relaxation series");
    doc.comment("spec_hash", hash_of(&series.source));
    doc.comment("seed", series.master_seed);
    match &series.source {
        SeriesSource::Exchange { spec, n_agents } => {
            doc.comment("n", n_agents);
            doc.comment("spec", serde_json::to_string(spec).expect("spec serializes"));
            doc.comment("units", "t in time steps of n interactions; x_mean in money units");
        }
        SeriesSource::Resistor { side, g_window } => {
            doc.comment("L", side);
            doc.comment("g_window", format!("{},{}", g_window.0, g_window.1));
            doc.comment("units", "t in Jacobi sweeps; x_mean in volts");
        }
        SeriesSource::External => {
            doc.comment("units", "as supplied");
        }
    }
    doc.comment("n_configs", series.n_configs);
    for (t, x) in series.t.iter().zip(&series.x_mean) {
        doc.row([t.to_string(), fmt_f64(*x)]);
    }
    doc
}

/// Reads the `t,x_mean` columns of a series file; comment lines are skipped.
pub fn read_series(path: &Path) -> Result<RelaxationSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{} has no `{name}` column", path.display())))
    };
    let (ti, xi) = (col("t")?, col("x_mean")?);
    let (mut t, mut x) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let parse_err = |what: &str| Error::Config(format!("{}: bad {what} in {rec:?}", path.display()));
        t.push(rec[ti].parse::<u64>().map_err(|_| parse_err("t"))?);
        x.push(rec[xi].parse::<f64>().map_err(|_| parse_err("x_mean"))?);
    }
    RelaxationSeries::from_values(t, x)
}

pub const FIT_COLUMNS: [&str; 9] = [
    "form",
    "t_lo",
    "t_hi",
    "x0",
    "amplitude",
    "tau",
    "r_squared",
    "tau_std_err",
    "status",
];

/// One fit-report row; failed fits keep the form and carry the error tag.
pub fn fit_row(form: crate::expfit::FitForm, fit: &Result<ExpFitResult>) -> Vec<String> {
    match fit {
        Ok(f) => vec![
            form.as_str().into(),
            f.window.0.to_string(),
            f.window.1.to_string(),
            fmt_f64(f.x0),
            fmt_f64(f.amplitude),
            fmt_f64(f.tau),
            fmt_f64(f.r_squared),
            fmt_f64(f.tau_std_err),
            "ok".into(),
        ],
        Err(e) => {
            let mut row = vec![form.as_str().to_string()];
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(e.tag().into());
            row
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfit::{fit_pure, FitForm};

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest64(b""), "e3b0c44298fc1c14");
        assert_eq!(digest64(b"abc"), "ba7816bf8f01cfea");
    }

    #[test]
    fn series_round_trip() {
        let s = RelaxationSeries::from_fn(12, |t| 0.1 / t + 1e-17 * t);
        let doc = series_doc(&s);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        doc.write(&path).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back.t, s.t);
        assert_eq!(back.x_mean, s.x_mean);

        let text = String::from_utf8(doc.to_bytes().unwrap()).unwrap();
        assert!(text.starts_with("# kinex: relaxation series\n# spec_hash: "));
        assert!(text.contains("\nt,x_mean\n1,0.1"));
    }

    #[test]
    fn fit_rows() {
        let s = RelaxationSeries::from_fn(20, |t| (-t / 4.0).exp());
        let ok = fit_row(FitForm::PureDecay, &fit_pure(&s, (1, 20)));
        assert_eq!(ok.len(), FIT_COLUMNS.len());
        assert_eq!(ok[8], "ok");
        let flat = RelaxationSeries::from_fn(20, |_| 1.0);
        let bad = fit_row(FitForm::PureDecay, &fit_pure(&flat, (1, 20)));
        assert_eq!(bad.len(), FIT_COLUMNS.len());
        assert_eq!((bad[0].as_str(), bad[8].as_str()), ("pure", "NotDecaying"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_series(Path::new("/nonexistent/series.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}

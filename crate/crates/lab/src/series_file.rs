//! CSV time series with a companion `key = value` metadata record.

use std::path::{Path, PathBuf};

use vns_core::diagnostics::{DiagnosticSeries, OsgoodEnvelope};

use crate::error::{LabError, Result};

pub const COLUMNS: [&str; 11] = [
    "t",
    "e_fluid",
    "m2",
    "diss_visc",
    "diss_drag",
    "u_inf",
    "q",
    "h",
    "a",
    "gamma_hat",
    "env",
];

pub type Row = [Option<f64>; 11];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesFile {
    pub rows: Vec<Row>,
    /// Ordered `(key, value)` pairs.
    pub metadata: Vec<(String, String)>,
}

impl SeriesFile {
    /// Rows at every `cadence`-th record, plus the last one.
    pub fn from_series(series: &DiagnosticSeries, env: Option<&OsgoodEnvelope>, cadence: usize) -> Self {
        let cadence = cadence.max(1);
        let last = series.len().saturating_sub(1);
        let rows = (0..series.len())
            .filter(|&k| k % cadence == 0 || k == last)
            .map(|k| {
                let t = series.times[k];
                let r = &series.records[k];
                let tw = r.twin;
                [
                    Some(t),
                    Some(r.e_fluid),
                    Some(r.m2),
                    Some(r.diss_visc),
                    Some(r.diss_drag),
                    Some(r.u_inf),
                    tw.map(|x| x.q),
                    tw.map(|x| x.h),
                    tw.map(|x| x.a),
                    r.gamma_hat,
                    env.and_then(|e| e.at(t)),
                ]
            })
            .collect();
        SeriesFile {
            rows,
            metadata: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = COLUMNS.iter().position(|&n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// Times strictly increasing.
    pub fn check_invariants(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for (k, r) in self.rows.iter().enumerate() {
            let t = r[0].ok_or_else(|| LabError::invalid(format!("row {k} has no time")))?;
            if !(t > prev) {
                return Err(LabError::invalid(format!("times not increasing at row {k}")));
            }
            prev = t;
        }
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.meta` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|source| LabError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let meta_path = dir.join(format!("{stem}.meta"));
        let csv_err = |source| LabError::Csv {
            path: csv_path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
        w.write_record(COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.map(|v| format!("{v:e}")).unwrap_or_default()))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|source| LabError::Io {
            path: csv_path.clone(),
            source,
        })?;
        let text: String = self.metadata.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        std::fs::write(&meta_path, text).map_err(|source| LabError::Io {
            path: meta_path.clone(),
            source,
        })?;
        Ok((csv_path, meta_path))
    }

    pub fn read(csv_path: &Path, meta_path: &Path) -> Result<Self> {
        let csv_err = |source| LabError::Csv {
            path: csv_path.to_path_buf(),
            source,
        };
        let bad = |msg: String| LabError::Format {
            path: csv_path.to_path_buf(),
            msg,
        };
        let mut r = csv::Reader::from_path(csv_path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().ne(COLUMNS) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let mut row: Row = [None; 11];
            for (c, cell) in rec.iter().enumerate() {
                if !cell.is_empty() {
                    row[c] = Some(cell.parse().map_err(|e| bad(format!("cell `{cell}`: {e}")))?);
                }
            }
            rows.push(row);
        }
        let text = std::fs::read_to_string(meta_path).map_err(|source| LabError::Io {
            path: meta_path.to_path_buf(),
            source,
        })?;
        let metadata = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once(" = ")
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| LabError::Format {
                        path: meta_path.to_path_buf(),
                        msg: format!("bad metadata line `{l}`"),
                    })
            })
            .collect::<Result<_>>()?;
        Ok(SeriesFile { rows, metadata })
    }
}

/// Reads a `key = value` file into pairs, skipping blanks and `#` comments.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i + 1, l))
        })
        .map(|(line, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or(LabError::Config {
                    line,
                    msg: format!("expected `key = value`, got `{l}`"),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = SeriesFile {
            rows: vec![
                [Some(0.0), Some(0.1), None, None, None, None, None, None, None, None, None],
                [Some(1e-3), Some(1.0 / 3.0), Some(-2.5e-300), None, None, None, Some(0.0), None, None, None, Some(7.0)],
            ],
            metadata: vec![],
        };
        f.push_meta("config.n", 64);
        f.push_meta("measured.k_hat", 1.25);
        let (c, m) = f.write(dir.path(), "run").unwrap();
        let back = SeriesFile::read(&c, &m).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.meta("measured.k_hat"), Some("1.25"));
        let header = std::fs::read_to_string(&c).unwrap();
        assert!(header.starts_with("t,e_fluid,m2,diss_visc,diss_drag,u_inf,q,h,a,gamma_hat,env\n"));
        back.check_invariants().unwrap();
    }

    #[test]
    fn invariants_catch_time_reversal() {
        let mut row: Row = [None; 11];
        row[0] = Some(1.0);
        let f = SeriesFile {
            rows: vec![row, row],
            metadata: vec![],
        };
        assert!(f.check_invariants().is_err());
    }
}

//! Pipeline reports and their CSV/JSON serialisation.
//!
//! Reports contain no wall-clock data, so identical inputs give identical
//! bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::fitting::FitResult;

/// A plot-ready numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width mismatch in table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Non-finite cells are written empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .map(|v| if v.is_finite() { v.to_string() } else { String::new() }),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub n_realizations: usize,
    pub code_version: String,
}

impl Provenance {
    pub fn of(config: &ExperimentConfig) -> Self {
        Self {
            config_hash: config.hash(),
            seed: config.seed,
            n_realizations: config.n_realizations,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFit {
    pub label: String,
    pub fit: FitResult,
}

/// Output of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub pipeline: String,
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub fits: Vec<LabeledFit>,
    /// Headline numbers, keyed by name.
    pub summary: BTreeMap<String, f64>,
    pub tables: Vec<DataTable>,
}

impl PipelineReport {
    pub fn new(pipeline: &str, config: &ExperimentConfig) -> Self {
        Self {
            pipeline: pipeline.into(),
            provenance: Provenance::of(config),
            config: config.clone(),
            fits: Vec::new(),
            summary: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&DataTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, label: &str) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.label == label).map(|f| &f.fit)
    }

    /// Pretty JSON without the tables, which go to CSV.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct View<'a> {
            pipeline: &'a str,
            provenance: &'a Provenance,
            config: &'a ExperimentConfig,
            fits: &'a [LabeledFit],
            summary: &'a BTreeMap<String, f64>,
            tables: Vec<&'a str>,
        }
        let view = View {
            pipeline: &self.pipeline,
            provenance: &self.provenance,
            config: &self.config,
            fits: &self.fits,
            summary: &self.summary,
            tables: self.tables.iter().map(|t| t.name.as_str()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&view)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<pipeline>.json` and `<pipeline>_<table>.csv` into `dir` and
    /// returns the paths in that order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(1 + self.tables.len());
        let json = dir.join(format!("{}.json", self.pipeline));
        fs::write(&json, self.to_json()?)?;
        paths.push(json);
        for t in &self.tables {
            if t.name.contains(['/', '\\']) {
                return Err(Error::domain(format!("table name {:?} is not a file name", t.name)));
            }
            let p = dir.join(format!("{}_{}.csv", self.pipeline, t.name));
            t.write_csv(fs::File::create(&p)?)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

//! Optional TOML run configuration. Command-line flags override file
//! values, which override the case defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cases::BenchmarkCase;
use crate::runner::RunSettings;
use crate::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub degree: Option<usize>,
    pub cells: Option<Vec<usize>>,
    pub cfl: Option<f64>,
    pub t_final: Option<f64>,
    pub limiter: Option<bool>,
    pub damping: Option<bool>,
    pub sequential: Option<bool>,
    pub output_times: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Layers `self` over `base`, field by field.
    pub fn overlay(self, base: FileConfig) -> FileConfig {
        FileConfig {
            case: self.case.or(base.case),
            degree: self.degree.or(base.degree),
            cells: self.cells.or(base.cells),
            cfl: self.cfl.or(base.cfl),
            t_final: self.t_final.or(base.t_final),
            limiter: self.limiter.or(base.limiter),
            damping: self.damping.or(base.damping),
            sequential: self.sequential.or(base.sequential),
            output_times: self.output_times.or(base.output_times),
            output_dir: self.output_dir.or(base.output_dir),
        }
    }

    /// Case defaults with the configured values applied. The CFL default
    /// follows the (possibly overridden) degree.
    pub fn settings(&self, case: &BenchmarkCase) -> Result<RunSettings, HarnessError> {
        let mut s = RunSettings::defaults(case, self.degree.unwrap_or(2));
        if let Some(c) = &self.cells {
            s.cells = c.clone();
        }
        if let Some(v) = self.cfl {
            s.cfl = v;
        }
        if let Some(v) = self.t_final {
            s.t_final = v;
        }
        if let Some(v) = self.limiter {
            s.limiter = v;
        }
        if let Some(v) = self.damping {
            s.damping = v;
        }
        if let Some(v) = self.sequential {
            s.sequential = v;
        }
        if let Some(v) = &self.output_times {
            s.output_times = v.clone();
        }
        s.validate(case)?;
        Ok(s)
    }
}

//! Run configuration for the command-line driver.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::harness::{default_corpus, CorpusSpec, EvalSettings, Family, TestMatrix};
use crate::seminorms::Cutoff;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub m: f64,
}

impl GridSettings {
    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.dim, self.half_width, self.n, self.m)
    }
}

/// Parameter grid for the `norms` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsSettings {
    /// Exponents for Morrey and Campanato rows (Campanato takes 1 and 2 only).
    pub q: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho: Vec<Cutoff>,
    /// Campanato degrees `k` (fits by `P_{k-1}`) and derivative orders.
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Default for NormsSettings {
    fn default() -> Self {
        Self {
            q: vec![1.0, 2.0],
            lambda: vec![0.0, 0.5, 1.0],
            rho: vec![Cutoff::Finite(0.5), Cutoff::Infinite],
            k: vec![0, 1, 2],
            p: vec![2.0],
            sigma: vec![0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySettings {
    /// Dilation factors for the scaling study.
    pub scales: Vec<f64>,
    /// Corpus id dilated by the scaling study; defaults to the first
    /// function whose family supports dilation.
    pub function: Option<String>,
    /// Seeded sample points per function for the pointwise study.
    pub points: usize,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            scales: vec![0.5, 1.0, 2.0],
            function: None,
            points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSettings,
    #[serde(default = "default_corpus")]
    pub corpus: Vec<CorpusSpec>,
    #[serde(default)]
    pub matrix: TestMatrix,
    #[serde(default = "default_stride")]
    pub center_stride: usize,
    #[serde(default = "default_radius_count")]
    pub radius_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Worker threads; all cores when absent.
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub norms: NormsSettings,
    #[serde(default)]
    pub study: StudySettings,
}

fn default_stride() -> usize {
    1
}

fn default_radius_count() -> usize {
    EvalSettings::default().radius_count
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Default corpus and matrix on the given grid.
    pub fn with_grid(dim: usize, n: usize) -> Self {
        Self {
            grid: GridSettings {
                dim,
                n,
                half_width: 4.0,
                m: 0.5,
            },
            corpus: default_corpus(),
            matrix: TestMatrix::default(),
            center_stride: default_stride(),
            radius_count: default_radius_count(),
            seed: 0,
            output_dir: default_output(),
            parallelism: None,
            norms: NormsSettings::default(),
            study: StudySettings::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // dump paths are relative to the configuration file
        let base = path.parent().unwrap_or(Path::new(""));
        for spec in &mut cfg.corpus {
            if let Family::GridDump { path } = &mut spec.family {
                if Path::new(path.as_str()).is_relative() {
                    *path = base.join(&*path).to_string_lossy().into_owned();
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn domain(&self) -> Result<Domain> {
        self.grid.domain()
    }

    pub fn settings(&self) -> EvalSettings {
        EvalSettings {
            radius_count: self.radius_count,
            center_stride: self.center_stride,
        }
    }

    /// Checks everything that can be checked without sampling the corpus.
    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        if self.center_stride == 0 {
            return Err(Error::Config("center_stride must be at least 1".into()));
        }
        if self.radius_count == 0 {
            return Err(Error::Config("radius_count must be at least 1".into()));
        }
        if self.parallelism == Some(0) {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &self.corpus {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Config(format!("duplicate corpus id '{}'", s.id)));
            }
        }
        if let Some(f) = &self.study.function {
            if !ids.contains(f.as_str()) {
                return Err(Error::Config(format!(
                    "study.function '{f}' is not in the corpus"
                )));
            }
        }
        if self
            .study
            .scales
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(Error::Config("study.scales must be positive".into()));
        }
        if self.norms.q.iter().any(|q| !(q.is_finite() && *q >= 1.0)) {
            return Err(Error::Config("norms.q must be at least 1".into()));
        }
        if self.norms.sigma.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
            return Err(Error::Config("norms.sigma must lie in (0, 1)".into()));
        }
        if self.norms.p.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(Error::Config("norms.p must be at least 1".into()));
        }
        Ok(())
    }

    /// Command-line overrides, re-validated.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        parallelism: Option<usize>,
        resolution: Option<usize>,
        output_dir: Option<PathBuf>,
    ) -> Result<()> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(p) = parallelism {
            self.parallelism = Some(p);
        }
        if let Some(n) = resolution {
            self.grid.n = n;
        }
        if let Some(o) = output_dir {
            self.output_dir = o;
        }
        self.validate()
    }
}

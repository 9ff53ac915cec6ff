use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::basis::Family;
use crate::error::{Error, Result};
use crate::geometry::{Beta, CellType, FluxPoint, Partition};
use crate::system::Scheme;

use super::exact::CircleBenchmark;

/// Which study to run at every level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Interp,
    Solve,
    Both,
}

/// Settings of a convergence study on the circle benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub mesh: CellType,
    pub family: Family,
    pub partition: Partition,
    pub flux: FluxPoint,
    pub beta: Beta,
    pub levels: usize,
    /// Cells per side on the coarsest level; level `k` uses `n0 · 2^k`.
    pub n0: usize,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub r0: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            mesh: CellType::Rectangular,
            family: Family::RotatedQ1,
            partition: Partition::Curve,
            flux: FluxPoint::CurveMidpoint,
            beta: Beta::new(1.0, 1e4),
            levels: 4,
            n0: 20,
            mode: Mode::Interp,
            out: None,
            r0: CircleBenchmark::DEFAULT_R0,
        }
    }
}

/// Keys accepted in configuration files (the long flag names without dashes).
pub const CONFIG_KEYS: [&str; 12] = [
    "mesh",
    "family",
    "partition",
    "flux",
    "beta-minus",
    "beta-plus",
    "levels",
    "n0",
    "mode",
    "out",
    "curve",
    "r0",
];

impl StudyConfig {
    pub fn scheme(&self) -> Scheme {
        Scheme {
            family: self.family,
            partition: self.partition,
            flux: self.flux,
            beta: self.beta,
        }
    }

    pub fn benchmark(&self) -> CircleBenchmark {
        CircleBenchmark::new(self.r0, self.beta)
    }

    /// Cells per side on every level.
    pub fn level_sizes(&self) -> Vec<usize> {
        (0..self.levels).map(|k| self.n0 << k).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.family.cell_type() != self.mesh {
            return Err(Error::Config(format!(
                "family {} needs {} cells",
                self.family.name(),
                cell_name(self.family.cell_type())
            )));
        }
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if self.n0 < 2 {
            return Err(Error::Config("n0 must be at least 2".into()));
        }
        if !(self.beta.minus > 0.0 && self.beta.plus > 0.0)
            || !self.beta.minus.is_finite()
            || !self.beta.plus.is_finite()
        {
            return Err(Error::Config("coefficients must be positive".into()));
        }
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return Err(Error::Config(format!("r0 = {} must lie in (0, 1)", self.r0)));
        }
        Ok(())
    }

    /// Applies `key = value` settings on top of `self`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        let mut beta = (self.beta.minus, self.beta.plus);
        for (key, value) in settings {
            let value = value.as_str();
            match key.as_str() {
                "mesh" => self.mesh = parse_cell(value)?,
                "family" => self.family = value.parse()?,
                "partition" => self.partition = parse_partition(value)?,
                "flux" => self.flux = parse_flux(value)?,
                "beta-minus" => beta.0 = parse_number(key, value)?,
                "beta-plus" => beta.1 = parse_number(key, value)?,
                "levels" => self.levels = parse_number(key, value)?,
                "n0" => self.n0 = parse_number(key, value)?,
                "mode" => self.mode = value.parse()?,
                "out" => self.out = Some(PathBuf::from(value)),
                "curve" => {
                    if value != "circle" {
                        return Err(Error::Config(format!("unsupported curve '{value}'")));
                    }
                }
                "r0" => self.r0 = parse_number(key, value)?,
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            }
        }
        if !(beta.0 > 0.0 && beta.1 > 0.0) {
            return Err(Error::Config("coefficients must be positive".into()));
        }
        self.beta = Beta::new(beta.0, beta.1);
        Ok(())
    }
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value", number + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", number + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

pub fn parse_cell(value: &str) -> Result<CellType> {
    match value {
        "tri" => Ok(CellType::Triangular),
        "rect" => Ok(CellType::Rectangular),
        _ => Err(Error::Config(format!("mesh must be tri or rect, got '{value}'"))),
    }
}

pub fn cell_name(cell: CellType) -> &'static str {
    match cell {
        CellType::Triangular => "tri",
        CellType::Rectangular => "rect",
    }
}

pub fn parse_partition(value: &str) -> Result<Partition> {
    match value {
        "curve" => Ok(Partition::Curve),
        "line" => Ok(Partition::Line),
        _ => Err(Error::Config(format!("partition must be curve or line, got '{value}'"))),
    }
}

pub fn parse_flux(value: &str) -> Result<FluxPoint> {
    match value {
        "curve-mid" => Ok(FluxPoint::CurveMidpoint),
        "line-mid" => Ok(FluxPoint::LineMidpoint),
        _ => Err(Error::Config(format!("flux must be curve-mid or line-mid, got '{value}'"))),
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cr" => Ok(Family::CrouzeixRaviart),
            "rq1" => Ok(Family::RotatedQ1),
            _ => Err(Error::Config(format!("family must be cr or rq1, got '{s}'"))),
        }
    }
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::CrouzeixRaviart => "cr",
            Family::RotatedQ1 => "rq1",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interp" => Ok(Mode::Interp),
            "solve" => Ok(Mode::Solve),
            "both" => Ok(Mode::Both),
            _ => Err(Error::Config(format!("mode must be interp, solve or both, got '{s}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Interp => "interp",
            Mode::Solve => "solve",
            Mode::Both => "both",
        })
    }
}

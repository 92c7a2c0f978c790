//! JSON run configuration: schema, validation and resolution into
//! library types. Relative file paths resolve against the config's
//! directory.

use crate::CliError;
use mixtherm::numeric::interp::MonotoneCubic;
use mixtherm::thermo::CHAR_RTOL;
use mixtherm::types::FD_REL_STEP;
use mixtherm::{
    CorrelationModel, CorrelationSet, PairPotential, PotentialForm, PotentialSet, SpeciesSpec,
    Statistics,
};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: Vec<SpeciesCfg>,
    #[serde(default)]
    pub potentials: Vec<PotentialCfg>,
    /// "unity", "classical-boltzmann", or {"tabulated": "g.csv"}.
    #[serde(default)]
    pub correlation: Option<CorrelationCfg>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Single temperature (thermo).
    #[serde(default)]
    pub theta: Option<f64>,
    /// Explicit temperature list (ideal-tau, condensate-scan).
    #[serde(default)]
    pub thetas: Option<Vec<f64>>,
    /// θ axis (tau-field; usable instead of `thetas` elsewhere).
    #[serde(default)]
    pub theta_grid: Option<GridCfg>,
    /// ρ axis (tau-field).
    #[serde(default)]
    pub rho_grid: Option<GridCfg>,
    /// Total-density override; defaults to the sum of species densities.
    #[serde(default)]
    pub rho: Option<f64>,
    /// τ for the distribution-family checks (ns-check).
    #[serde(default)]
    pub ns: Option<NsCfg>,
    /// Kernel evaluations (gk).
    #[serde(default)]
    pub gk: Option<Vec<GkCfg>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesCfg {
    pub label: String,
    pub mass: f64,
    pub spin_degeneracy: u32,
    /// "fermi" or "bose".
    pub statistics: String,
    pub density: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    pub a: String,
    pub b: String,
    /// Inline closed form; mutually exclusive with `csv`.
    #[serde(default)]
    pub form: Option<FormCfg>,
    /// Two-column CSV (r, K) path; mutually exclusive with `form`.
    #[serde(default)]
    pub csv: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormCfg {
    Zero,
    Exponential { k0: f64, r0: f64 },
    Gaussian { k0: f64, r0: f64 },
    SquareStep { k0: f64, radius: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", untagged)]
pub enum CorrelationCfg {
    Named(String),
    Tabulated { tabulated: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative step of the finite-difference fallback for correlation
    /// partials (programmatic Custom models only).
    #[serde(default = "default_fd_step")]
    pub correlation_fd_step: f64,
    /// Relative tolerance of the characteristic ODE integration
    /// (tau-field).
    #[serde(default = "default_char_rtol")]
    pub characteristic_rtol: f64,
}

fn default_fd_step() -> f64 {
    FD_REL_STEP
}

fn default_char_rtol() -> f64 {
    CHAR_RTOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            correlation_fd_step: FD_REL_STEP,
            characteristic_rtol: CHAR_RTOL,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridCfg {
    pub fn linear(&self, path: &str) -> Result<Vec<f64>, CliError> {
        if self.n < 2 || !(self.lo > 0.0) || !(self.hi > self.lo) {
            return Err(CliError::config(
                path,
                "grid needs n ≥ 2 and 0 < lo < hi",
            ));
        }
        Ok((0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsCfg {
    pub tau: f64,
    /// 1 or 3.
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Multi-indices to check, as per-kind counts; every kind with a
    /// nonzero count is reduced in turn.
    pub cases: Vec<Vec<usize>>,
}

fn default_dim() -> usize {
    3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkCfg {
    pub k: u8,
    pub alpha: f64,
    /// "fermi" or "bose".
    pub statistics: String,
}

/// Config plus everything resolved into library types.
pub struct Resolved {
    pub config: RunConfig,
    pub species: Vec<SpeciesSpec>,
    pub label_index: HashMap<String, usize>,
    pub potentials: PotentialSet,
    pub correlations: CorrelationSet,
    pub base_dir: PathBuf,
}

pub fn parse_statistics(s: &str, path: &str) -> Result<Statistics, CliError> {
    match s {
        "fermi" => Ok(Statistics::Fermi),
        "bose" => Ok(Statistics::Bose),
        other => Err(CliError::config(
            path,
            format!("statistics must be \"fermi\" or \"bose\", got {other:?}"),
        )),
    }
}

fn read_two_column_csv(path: &Path, pointer: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(pointer, format!("cannot read {}: {e}", path.display()))
    })?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(CliError::config(
                pointer,
                format!("{}:{}: expected two columns", path.display(), lineno + 1),
            ));
        }
        // A non-numeric first row is accepted as a header.
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if lineno == 0 => continue,
            _ => {
                return Err(CliError::config(
                    pointer,
                    format!("{}:{}: non-numeric value", path.display(), lineno + 1),
                ))
            }
        }
    }
    if xs.len() < 2 {
        return Err(CliError::config(
            pointer,
            format!("{}: needs at least two data rows", path.display()),
        ));
    }
    Ok((xs, ys))
}

pub fn load(config_path: &Path) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::config("/", format!("cannot read {}: {e}", config_path.display()))
    })?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        // serde_json reports line/column; surface the classify-able path
        // when the error is a known-field issue.
        CliError::config(format!("/{}", locate(&e)), e.to_string())
    })?;
    let base_dir = config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));

    if config.species.is_empty() {
        return Err(CliError::config("/species", "at least one species required"));
    }
    let mut species = Vec::with_capacity(config.species.len());
    let mut label_index = HashMap::new();
    for (i, sc) in config.species.iter().enumerate() {
        let path = format!("/species/{i}");
        let stat = parse_statistics(&sc.statistics, &format!("{path}/statistics"))?;
        if label_index.insert(sc.label.clone(), i).is_some() {
            return Err(CliError::config(
                format!("{path}/label"),
                format!("duplicate species label {:?}", sc.label),
            ));
        }
        let sp = SpeciesSpec::new(sc.label.clone(), sc.mass, sc.spin_degeneracy, stat, sc.density)
            .map_err(|e| CliError::config(path, e.to_string()))?;
        species.push(sp);
    }

    let mut potentials = PotentialSet::new();
    for (i, pc) in config.potentials.iter().enumerate() {
        let path = format!("/potentials/{i}");
        let a = *label_index.get(&pc.a).ok_or_else(|| {
            CliError::config(format!("{path}/a"), format!("unknown species {:?}", pc.a))
        })?;
        let b = *label_index.get(&pc.b).ok_or_else(|| {
            CliError::config(format!("{path}/b"), format!("unknown species {:?}", pc.b))
        })?;
        let pot = match (&pc.form, &pc.csv) {
            (Some(form), None) => {
                let form = match *form {
                    FormCfg::Zero => PotentialForm::Zero,
                    FormCfg::Exponential { k0, r0 } => PotentialForm::Exponential { k0, r0 },
                    FormCfg::Gaussian { k0, r0 } => PotentialForm::Gaussian { k0, r0 },
                    FormCfg::SquareStep { k0, radius } => PotentialForm::SquareStep { k0, radius },
                };
                PairPotential::new(a, b, form)
            }
            (None, Some(csv)) => {
                let full = base_dir.join(csv);
                let (r, k) = read_two_column_csv(&full, &format!("{path}/csv"))?;
                PairPotential::from_table(a, b, r, k)
                    .map_err(|e| CliError::config(format!("{path}/csv"), e.to_string()))?
            }
            _ => {
                return Err(CliError::config(
                    path,
                    "exactly one of `form` or `csv` is required",
                ))
            }
        };
        potentials.insert(pot);
    }

    let correlations = match &config.correlation {
        None => CorrelationSet::uniform(CorrelationModel::Unity),
        Some(CorrelationCfg::Named(name)) => match name.as_str() {
            "unity" => CorrelationSet::uniform(CorrelationModel::Unity),
            "classical-boltzmann" => CorrelationSet::uniform(CorrelationModel::ClassicalBoltzmann),
            other => {
                return Err(CliError::config(
                    "/correlation",
                    format!(
                        "unknown model {other:?}; expected \"unity\", \
                         \"classical-boltzmann\" or {{\"tabulated\": path}}"
                    ),
                ))
            }
        },
        Some(CorrelationCfg::Tabulated { tabulated }) => {
            let full = base_dir.join(tabulated);
            let (r, g) = read_two_column_csv(&full, "/correlation/tabulated")?;
            let spline = MonotoneCubic::new(r, g)
                .map_err(|e| CliError::config("/correlation/tabulated", e.to_string()))?;
            CorrelationSet::uniform(CorrelationModel::TabulatedR { spline })
        }
    };

    let tol = &config.tolerances;
    if !(tol.correlation_fd_step > 0.0 && tol.correlation_fd_step < 0.1) {
        return Err(CliError::config(
            "/tolerances/correlation_fd_step",
            "must be in (0, 0.1)",
        ));
    }
    if !(tol.characteristic_rtol > 0.0 && tol.characteristic_rtol < 1e-2) {
        return Err(CliError::config(
            "/tolerances/characteristic_rtol",
            "must be in (0, 1e-2)",
        ));
    }

    Ok(Resolved {
        config,
        species,
        label_index,
        potentials,
        correlations,
        base_dir,
    })
}

/// Best-effort pointer fragment from a serde_json error message.
fn locate(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}

//! Flags, the optional TOML config file, and their merge into a validated
//! [`RunConfig`]. Flags win over the file, the file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fracbound::birman_schwinger::RuleKind;
use fracbound::validation::Category;
use fracbound::{FractionalIndex, Potential};
use serde::Deserialize;

use crate::output::Format;
use crate::CliError;

pub const DEFAULT_ALPHA: f64 = std::f64::consts::SQRT_2;
pub const DEFAULT_R: &str = "0:5:0.5";
pub const DEFAULT_POTENTIAL: &str = "gaussian:1:1";
pub const DEFAULT_HALF_WIDTH: f64 = 50.0;
pub const DEFAULT_NODES: usize = 401;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_ORACLE: &str = "400:16384";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Trapezoid,
    GaussLegendre,
}

impl From<Rule> for RuleKind {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Trapezoid => RuleKind::Trapezoid,
            Rule::GaussLegendre => RuleKind::GaussLegendre,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Fractional index in (1, 2]; `sweep` accepts a comma-separated list
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Kinetic coefficient K_alpha > 0
    #[arg(long = "K", global = true, allow_negative_numbers = true)]
    pub k_alpha: Option<f64>,
    /// Decay parameter kappa > 0
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Distance grid start:end:step
    #[arg(long, global = true)]
    pub r: Option<String>,
    /// Comma-separated couplings g in (0, 1]
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..=1, allow_negative_numbers = true)]
    pub g: Option<Vec<f64>>,
    /// Well as kind:V0:a[:s] (gaussian, sech2, lorentzian with decay s)
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Largest half-width of the kernel quadrature rule
    #[arg(long = "L", global = true, allow_negative_numbers = true)]
    pub half_width: Option<f64>,
    /// Kernel quadrature nodes
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Kernel quadrature rule
    #[arg(long, global = true, value_enum)]
    pub rule: Option<Rule>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Oracle quadrature tolerance, in (1e-13, 1e-4)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Validation categories: greens, series, weyl, kernel, ground-state
    #[arg(long, global = true, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Grid Hamiltonian cross-check for ground-state as L:N, or "none"
    #[arg(long, global = true)]
    pub oracle: Option<String>,
    /// TOML file with any of the keys above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PotentialConfig {
    Spec(String),
    Table {
        kind: String,
        #[serde(rename = "V0")]
        depth: f64,
        a: f64,
        s: Option<f64>,
    },
}

impl PotentialConfig {
    fn spec(self) -> String {
        match self {
            PotentialConfig::Spec(s) => s,
            PotentialConfig::Table { kind, depth, a, s: Some(s) } => format!("{kind}:{depth}:{a}:{s}"),
            PotentialConfig::Table { kind, depth, a, s: None } => format!("{kind}:{depth}:{a}"),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<OneOrMany>,
    #[serde(rename = "K")]
    k_alpha: Option<f64>,
    kappa: Option<f64>,
    r: Option<String>,
    g: Option<Vec<f64>>,
    potential: Option<PotentialConfig>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
    n: Option<usize>,
    rule: Option<Rule>,
    out: Option<PathBuf>,
    format: Option<Format>,
    tol: Option<f64>,
    only: Option<Vec<String>>,
    oracle: Option<String>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    pub half_width: f64,
    pub points: usize,
}

/// Every parameter after merging, checked against the library's preconditions.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alphas: Vec<FractionalIndex>,
    pub k_alpha: f64,
    pub kappa: f64,
    pub r: Vec<f64>,
    pub g: Option<Vec<f64>>,
    pub potential: Potential,
    pub half_width: f64,
    pub n: usize,
    pub rule: RuleKind,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: f64,
    pub only: Vec<Category>,
    pub oracle: Option<OracleGrid>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be positive and finite, got {x}")))
    }
}

/// Points of start:end:step, end included when it lies on the grid.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("--r '{spec}': {e}")))?;
    let [start, end, step] = parts[..] else {
        return Err(usage(format!("--r '{spec}': expected start:end:step")));
    };
    if !(start >= 0.0 && end >= start && step > 0.0 && end.is_finite()) {
        return Err(usage(format!("--r '{spec}': need 0 <= start <= end and step > 0")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(usage(format!("--r '{spec}': {count} points is too many")));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn parse_oracle(spec: &str) -> Result<Option<OracleGrid>, CliError> {
    if spec == "none" {
        return Ok(None);
    }
    let bad = || usage(format!("--oracle '{spec}': expected L:N with N a power of two >= 8, or none"));
    let (l, n) = spec.split_once(':').ok_or_else(bad)?;
    let half_width: f64 = l.trim().parse().map_err(|_| bad())?;
    let points: usize = n.trim().parse().map_err(|_| bad())?;
    if !(half_width > 0.0) || points < 8 || !points.is_power_of_two() {
        return Err(bad());
    }
    Ok(Some(OracleGrid { half_width, points }))
}

impl RunConfig {
    pub fn resolve(flags: Params) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let alphas = if !flags.alpha.is_empty() {
            flags.alpha
        } else {
            match file.alpha {
                Some(OneOrMany::One(a)) => vec![a],
                Some(OneOrMany::Many(v)) => v,
                None => vec![DEFAULT_ALPHA],
            }
        };
        if alphas.is_empty() {
            return Err(usage("empty alpha list"));
        }
        let alphas = alphas
            .into_iter()
            .map(|a| FractionalIndex::new(a).map_err(|e| usage(format!("--alpha: {e}"))))
            .collect::<Result<_, _>>()?;
        let g = flags.g.or(file.g);
        if let Some(gs) = &g {
            if let Some(bad) = gs.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
                return Err(usage(format!("--g values must lie in (0, 1], got {bad}")));
            }
        }
        let potential_spec = flags
            .potential
            .or(file.potential.map(PotentialConfig::spec))
            .unwrap_or_else(|| DEFAULT_POTENTIAL.into());
        let potential: Potential = potential_spec.parse().map_err(|e| usage(format!("--potential: {e}")))?;
        let n = flags.n.or(file.n).unwrap_or(DEFAULT_NODES);
        if n < 2 {
            return Err(usage(format!("--n must be at least 2, got {n}")));
        }
        let tol = flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 1e-13 && tol < 1e-4) {
            return Err(usage(format!("--tol must lie in (1e-13, 1e-4), got {tol}")));
        }
        let only = if flags.only.is_empty() { file.only.unwrap_or_default() } else { flags.only };
        let only = only
            .iter()
            .map(|s| s.parse::<Category>().map_err(|e| usage(format!("--only: {e}"))))
            .collect::<Result<_, _>>()?;
        let oracle = parse_oracle(flags.oracle.or(file.oracle).as_deref().unwrap_or(DEFAULT_ORACLE))?;
        Ok(Self {
            alphas,
            k_alpha: positive("K", flags.k_alpha.or(file.k_alpha).unwrap_or(1.0))?,
            kappa: positive("kappa", flags.kappa.or(file.kappa).unwrap_or(1.0))?,
            r: parse_range(flags.r.or(file.r).as_deref().unwrap_or(DEFAULT_R))?,
            g,
            potential,
            half_width: positive("L", flags.half_width.or(file.half_width).unwrap_or(DEFAULT_HALF_WIDTH))?,
            n,
            rule: flags.rule.or(file.rule).unwrap_or(Rule::Trapezoid).into(),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format),
            tol,
            only,
            oracle,
        })
    }

    /// The single α of every command but `sweep`.
    pub fn alpha(&self) -> Result<FractionalIndex, CliError> {
        match self.alphas[..] {
            [a] => Ok(a),
            _ => Err(usage("this command takes a single --alpha")),
        }
    }

    /// The g-list, which must be present and nonempty.
    pub fn couplings(&self) -> Result<&[f64], CliError> {
        match self.g.as_deref() {
            None => Err(usage("--g is required")),
            Some([]) => Err(usage("--g list is empty")),
            Some(gs) => Ok(gs),
        }
    }
}

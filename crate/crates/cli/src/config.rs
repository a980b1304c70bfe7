//! Sweep configuration: TOML ingestion, validation and defaults.
//!
//! ```toml
//! experiment = "le_time_lambda"
//!
//! [chain]
//! gamma = [1.0]            # list or scalar
//! lambda = [0.0, 2.0, 0.01] # [lo, hi, step] or scalar
//! n_sites = [100]          # list or scalar
//!
//! [central_spin]
//! mu = 0.1
//! nu = 2.0
//! g = 0.5
//! delta = 0.05             # takes precedence over mu/nu/g
//!
//! [grid]
//! time = [0.0, 20.0, 0.01]
//!
//! [berry]
//! quantity = "beta"        # beta | dbeta | f | df
//! thermodynamic = true
//! bracket = [0.5, 1.0]
//!
//! [oracle]
//! samples = 100
//! seed = 1
//!
//! [output]
//! path = "out.csv"
//! format = "csv"           # csv | json
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use toml::{Table, Value};
use xyecho::CentralSpinParams;

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_N: usize = 100;
pub const DEFAULT_MU: f64 = 0.1;
pub const DEFAULT_NU: f64 = 2.0;
pub const DEFAULT_G: f64 = 0.5;
pub const GAMMA_FAMILY: [f64; 6] = [0.0, 0.01, 0.05, 0.1, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    LeTimeLambda,
    LeTimeSizes,
    LeTimeGammas,
    BerrySurface,
    BerryXxSizes,
    DbetaScaling,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::LeTimeLambda,
        Experiment::LeTimeSizes,
        Experiment::LeTimeGammas,
        Experiment::BerrySurface,
        Experiment::BerryXxSizes,
        Experiment::DbetaScaling,
        Experiment::OracleCheck,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::LeTimeLambda => "le_time_lambda",
            Experiment::LeTimeSizes => "le_time_sizes",
            Experiment::LeTimeGammas => "le_time_gammas",
            Experiment::BerrySurface => "berry_surface",
            Experiment::BerryXxSizes => "berry_xx_sizes",
            Experiment::DbetaScaling => "dbeta_scaling",
            Experiment::OracleCheck => "oracle_check",
        }
    }

    pub fn is_echo(self) -> bool {
        matches!(
            self,
            Experiment::LeTimeLambda | Experiment::LeTimeSizes | Experiment::LeTimeGammas
        )
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Beta,
    Dbeta,
    F,
    Df,
}

impl Quantity {
    pub fn tag(self) -> &'static str {
        match self {
            Quantity::Beta => "beta",
            Quantity::Dbeta => "dbeta",
            Quantity::F => "f",
            Quantity::Df => "df",
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beta" => Ok(Quantity::Beta),
            "dbeta" => Ok(Quantity::Dbeta),
            "f" => Ok(Quantity::F),
            "df" => Ok(Quantity::Df),
            _ => Err(format!(
                "unknown quantity {s:?} (expected beta, dbeta, f or df)"
            )),
        }
    }
}

/// Inclusive arithmetic grid `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Grid { lo, hi, step }
    }

    pub fn point(v: f64) -> Self {
        Grid {
            lo: v,
            hi: v,
            step: 1.0,
        }
    }

    /// Points are `lo + i * step`; a trailing point within `step * 1e-9` of
    /// `hi` is included.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step * (1.0 + 1e-12) + 1e-9).floor();
        if !(count >= 0.0) {
            return Vec::new();
        }
        (0..=count as usize)
            .map(|i| self.lo + self.step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub gammas: Vec<f64>,
    pub lambda: Grid,
    pub n_sites: Vec<usize>,
    pub central_spin: CentralSpinParams,
    /// Direct g/e field shift; `None` derives it from the central spin.
    pub delta: Option<f64>,
    pub time: Grid,
    pub quantity: Quantity,
    pub thermodynamic: bool,
    pub bracket: (f64, f64),
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "invalid configuration ({} problem(s)):",
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("chain", &["gamma", "lambda", "n_sites"]),
    ("central_spin", &["mu", "nu", "g", "delta"]),
    ("grid", &["time"]),
    ("berry", &["quantity", "thermodynamic", "bracket"]),
    ("oracle", &["samples", "seed"]),
    ("output", &["path", "format"]),
];

struct Reader<'a> {
    root: &'a Table,
    errors: Vec<String>,
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl<'a> Reader<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.root.get(section)?.as_table()?.get(key)
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.get(section, key)?;
        match as_f64(v) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.errors
                    .push(format!("{section}.{key} must be a finite number"));
                None
            }
        }
    }

    fn float_list(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let v = self.get(section, key)?;
        let items: Vec<&Value> = match v {
            Value::Array(a) => a.iter().collect(),
            other => vec![other],
        };
        let parsed: Option<Vec<f64>> = items
            .iter()
            .map(|v| as_f64(v).filter(|x| x.is_finite()))
            .collect();
        match parsed {
            Some(xs) if !xs.is_empty() => Some(xs),
            Some(_) => {
                self.errors.push(format!("{section}.{key} is empty"));
                None
            }
            None => {
                self.errors.push(format!(
                    "{section}.{key} must be a number or a list of finite numbers"
                ));
                None
            }
        }
    }

    fn size_list(&mut self, section: &str, key: &str) -> Option<Vec<usize>> {
        let v = self.get(section, key)?;
        let items: Vec<&Value> = match v {
            Value::Array(a) => a.iter().collect(),
            other => vec![other],
        };
        let parsed: Option<Vec<usize>> = items
            .iter()
            .map(|v| v.as_integer().and_then(|i| usize::try_from(i).ok()))
            .collect();
        match parsed {
            Some(xs) => Some(xs),
            None => {
                self.errors.push(format!(
                    "{section}.{key} must be a non-negative integer or a list of them"
                ));
                None
            }
        }
    }

    fn grid(&mut self, section: &str, key: &str) -> Option<Grid> {
        let v = self.get(section, key)?;
        if let Some(x) = as_f64(v).filter(|x| x.is_finite()) {
            return Some(Grid::point(x));
        }
        let parts: Option<Vec<f64>> = v
            .as_array()
            .map(|a| {
                a.iter()
                    .map(|v| as_f64(v).filter(|x| x.is_finite()))
                    .collect()
            })
            .unwrap_or(None);
        match parts.as_deref() {
            Some(&[x]) => Some(Grid::point(x)),
            Some(&[lo, hi, step]) => {
                let mut ok = true;
                if !(step > 0.0) {
                    self.errors
                        .push(format!("{section}.{key}: step must be > 0 (got {step})"));
                    ok = false;
                }
                if hi < lo {
                    self.errors
                        .push(format!("{section}.{key}: empty grid (hi {hi} < lo {lo})"));
                    ok = false;
                }
                ok.then(|| Grid::new(lo, hi, step))
            }
            _ => {
                self.errors.push(format!(
                    "{section}.{key} must be a number or [lo, hi, step]"
                ));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.get(section, key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.errors
                    .push(format!("{section}.{key} must be a string"));
                None
            }
        }
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, section: &str, key: &str) -> Option<T> {
        let s = self.string(section, key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{section}.{key}: {e}"));
                None
            }
        }
    }

    fn integer(&mut self, section: &str, key: &str) -> Option<i64> {
        let v = self.get(section, key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i),
            _ => {
                self.errors
                    .push(format!("{section}.{key} must be a non-negative integer"));
                None
            }
        }
    }
}

fn unknown_keys(root: &Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in root {
        if key == "experiment" {
            continue;
        }
        match SECTIONS.iter().find(|(name, _)| name == key) {
            None => out.push(format!("unknown key {key:?}")),
            Some((name, allowed)) => match value.as_table() {
                None => out.push(format!("{name} must be a table")),
                Some(t) => {
                    for k in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
                        out.push(format!("unknown key \"{name}.{k}\""));
                    }
                }
            },
        }
    }
    out
}

struct Defaults {
    gammas: Vec<f64>,
    lambda: Grid,
    n_sites: Vec<usize>,
    time: Grid,
    thermodynamic: bool,
    quantity: Quantity,
}

fn defaults(experiment: Experiment) -> Defaults {
    let time = Grid::new(0.0, 20.0, 0.01);
    let base = Defaults {
        gammas: vec![1.0],
        lambda: Grid::new(0.0, 2.0, 0.01),
        n_sites: vec![DEFAULT_N],
        time,
        thermodynamic: false,
        quantity: Quantity::Beta,
    };
    match experiment {
        Experiment::LeTimeLambda | Experiment::OracleCheck => base,
        Experiment::LeTimeSizes => Defaults {
            lambda: Grid::point(1.0),
            n_sites: vec![50, 100, 200],
            ..base
        },
        Experiment::LeTimeGammas => Defaults {
            gammas: GAMMA_FAMILY.to_vec(),
            lambda: Grid::point(1.0),
            ..base
        },
        Experiment::BerrySurface => Defaults {
            gammas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            n_sites: Vec::new(),
            thermodynamic: true,
            ..base
        },
        Experiment::BerryXxSizes => Defaults {
            gammas: vec![0.0],
            lambda: Grid::new(0.0, 1.5, 0.001),
            n_sites: vec![10, 20, 50, 100],
            thermodynamic: true,
            ..base
        },
        Experiment::DbetaScaling => Defaults {
            lambda: Grid::new(0.5, 1.5, 0.005),
            n_sites: vec![51, 101, 251, 501, 1001],
            quantity: Quantity::Dbeta,
            ..base
        },
    }
}

/// Resolves a parsed document into a [`SweepConfig`], reporting every problem
/// at once.
pub fn validate_config(root: &Table) -> Result<SweepConfig, ConfigError> {
    let mut errors = unknown_keys(root);

    let experiment = match root.get("experiment") {
        None => Experiment::LeTimeLambda,
        Some(v) => match v.as_str().map(str::parse::<Experiment>) {
            Some(Ok(e)) => e,
            Some(Err(e)) => {
                errors.push(e);
                Experiment::LeTimeLambda
            }
            None => {
                errors.push("experiment must be a string".into());
                Experiment::LeTimeLambda
            }
        },
    };
    let d = defaults(experiment);
    let mut r = Reader {
        root,
        errors: Vec::new(),
    };
    let mut warnings = Vec::new();

    let gammas = r.float_list("chain", "gamma").unwrap_or(d.gammas);
    if let Some(&bad) = gammas.iter().find(|&&g| g < 0.0) {
        r.errors
            .push(format!("chain.gamma must be >= 0 (got {bad})"));
    }
    let lambda = r.grid("chain", "lambda").unwrap_or(d.lambda);
    let n_sites = r.size_list("chain", "n_sites").unwrap_or(d.n_sites);

    let mu = r.float("central_spin", "mu");
    let nu = r.float("central_spin", "nu");
    let g = r.float("central_spin", "g");
    let delta = r.float("central_spin", "delta");
    let central_spin = CentralSpinParams {
        mu: mu.unwrap_or(DEFAULT_MU),
        nu: nu.unwrap_or(DEFAULT_NU),
        g: g.unwrap_or(DEFAULT_G),
    };
    let spin_given = mu.is_some() || nu.is_some() || g.is_some();
    let delta = match (delta, experiment.is_echo()) {
        (Some(dv), _) => {
            if spin_given {
                warnings.push(format!(
                    "both delta and (mu, nu, g) given; using delta = {dv}"
                ));
            }
            Some(dv)
        }
        (None, true) if !spin_given => Some(DEFAULT_DELTA),
        (None, _) => None,
    };
    if delta.is_some() && experiment == Experiment::DbetaScaling {
        warnings.push(
            "dbeta_scaling derives delta from (mu, nu, g); the delta override is ignored".into(),
        );
    }
    if delta.is_none() && central_spin.mu == 0.0 && central_spin.nu == 0.0 {
        r.errors
            .push("central_spin: mu = nu = 0 leaves delta undefined".into());
    }

    let time = r.grid("grid", "time").unwrap_or(d.time);
    if time.lo < 0.0 {
        r.errors
            .push(format!("grid.time must start at t >= 0 (got {})", time.lo));
    }

    let quantity = r.parsed("berry", "quantity").unwrap_or(d.quantity);
    let thermodynamic = match r.get("berry", "thermodynamic") {
        None => d.thermodynamic,
        Some(v) => v.as_bool().unwrap_or_else(|| {
            r.errors
                .push("berry.thermodynamic must be a boolean".into());
            d.thermodynamic
        }),
    };
    let bracket = match r.float_list("berry", "bracket").as_deref() {
        None => (0.5, 1.0),
        Some(&[lo, hi]) if lo < hi => (lo, hi),
        Some(_) => {
            r.errors
                .push("berry.bracket must be [lo, hi] with lo < hi".into());
            (0.5, 1.0)
        }
    };

    let samples = r.integer("oracle", "samples").unwrap_or(100) as usize;
    let seed = r.integer("oracle", "seed").unwrap_or(1) as u64;
    if experiment == Experiment::OracleCheck && samples == 0 {
        r.errors.push("oracle.samples must be > 0".into());
    }

    let output = r.string("output", "path").map(PathBuf::from);
    let format = r.parsed("output", "format").unwrap_or(Format::Csv);

    if n_sites.is_empty()
        && !(thermodynamic
            && matches!(
                experiment,
                Experiment::BerrySurface | Experiment::BerryXxSizes
            ))
    {
        r.errors.push("chain.n_sites is empty".into());
    }
    for &n in &n_sites {
        if n < 2 {
            r.errors
                .push(format!("chain.n_sites entries must be >= 2 (got {n})"));
        } else if experiment.is_echo() && n % 2 == 1 {
            r.errors.push(format!("n_sites must be even (got {n})"));
        }
    }
    if experiment == Experiment::DbetaScaling {
        if n_sites.len() < 4 {
            r.errors.push(format!(
                "dbeta_scaling needs at least 4 sizes (got {})",
                n_sites.len()
            ));
        }
        if n_sites.windows(2).any(|w| w[0] >= w[1]) {
            r.errors
                .push("dbeta_scaling sizes must be strictly increasing".into());
        }
    }

    errors.append(&mut r.errors);
    if !errors.is_empty() {
        return Err(ConfigError { violations: errors });
    }
    Ok(SweepConfig {
        experiment,
        gammas,
        lambda,
        n_sites,
        central_spin,
        delta,
        time,
        quantity,
        thermodynamic,
        bracket,
        samples,
        seed,
        output,
        format,
        warnings,
    })
}

pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        violations: vec![format!("not a valid TOML document: {}", e.message())],
    })?;
    validate_config(&table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_surface_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.experiment, Experiment::LeTimeLambda);
        assert_eq!(c.n_sites, vec![100]);
        assert_eq!(c.gammas, vec![1.0]);
        assert_eq!(c.delta, Some(0.05));
        assert_eq!(c.time, Grid::new(0.0, 20.0, 0.01));
        assert_eq!(c.lambda.points().len(), 201);
        assert_eq!(c.time.points().len(), 2001);
        assert_eq!(c.format, Format::Csv);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn odd_n_rejected_for_echo() {
        let e = parse_config("[chain]\nn_sites = 101\n").unwrap_err();
        assert!(e
            .violations
            .iter()
            .any(|v| v.contains("n_sites must be even")));
        let ok = parse_config("experiment = \"berry_xx_sizes\"\n[chain]\nn_sites = [101]\n");
        assert!(ok.is_ok());
    }

    #[test]
    fn delta_wins_with_warning() {
        let c =
            parse_config("[central_spin]\ndelta = 0.02\nmu = 0.3\nnu = 1.0\ng = 0.2\n").unwrap();
        assert_eq!(c.delta, Some(0.02));
        assert_eq!(c.warnings.len(), 1);
        let c = parse_config("[central_spin]\nmu = 0.3\nnu = 1.0\ng = 0.2\n").unwrap();
        assert_eq!(c.delta, None);
    }

    #[test]
    fn all_violations_reported() {
        let text = "bogus = 1\n[chain]\nn_sites = [7, 9]\nlambda = [1.0, 0.0, 0.1]\nextra = 2\n[grid]\ntime = [0.0, 1.0, 0.0]\n";
        let e = parse_config(text).unwrap_err();
        let joined = e.violations.join("\n");
        assert!(joined.contains("\"bogus\""));
        assert!(joined.contains("chain.extra"));
        assert!(joined.contains("hi 0 < lo 1"));
        assert!(joined.contains("step must be > 0"));
        assert_eq!(
            e.violations
                .iter()
                .filter(|v| v.contains("must be even"))
                .count(),
            2
        );
    }

    #[test]
    fn grid_points_include_endpoint() {
        assert_eq!(Grid::new(0.0, 1.0, 0.1).points().len(), 11);
        assert_eq!(Grid::new(0.0, 50.0, 0.05).points().len(), 1001);
        assert_eq!(Grid::point(1.0).points(), vec![1.0]);
        assert_eq!(Grid::new(0.0, 0.95, 0.1).points().len(), 10);
    }

    #[test]
    fn experiment_defaults() {
        let c = parse_config("experiment = \"le_time_gammas\"").unwrap();
        assert_eq!(c.gammas, GAMMA_FAMILY.to_vec());
        assert_eq!(c.lambda.points(), vec![1.0]);
        let c = parse_config("experiment = \"dbeta_scaling\"").unwrap();
        assert_eq!(c.delta, None);
        assert_eq!(c.n_sites, vec![51, 101, 251, 501, 1001]);
        let c = parse_config("experiment = \"berry_surface\"").unwrap();
        assert!(c.n_sites.is_empty() && c.thermodynamic);
    }

    #[test]
    fn bad_types_and_values() {
        let e = parse_config(
            "experiment = \"nope\"\n[output]\nformat = \"xml\"\n[berry]\nquantity = 3\n",
        )
        .unwrap_err();
        assert_eq!(e.violations.len(), 3, "{e}");
        assert!(parse_config("not toml = = 1").is_err());
    }
}

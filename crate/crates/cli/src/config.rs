//! Run configuration: a flat `key = value` file merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Tensor,
    Connections,
    Sweep,
    Optimize,
    Validate,
    Models,
}

impl Command {
    pub const ALL: [Command; 6] = [Command::Tensor, Command::Connections, Command::Sweep, Command::Optimize, Command::Validate, Command::Models];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Tensor => "tensor",
            Command::Connections => "connections",
            Command::Sweep => "sweep",
            Command::Optimize => "optimize",
            Command::Validate => "validate",
            Command::Models => "models",
        }
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fs,
    Case1,
    Case2,
    Lr,
    Rl,
    Ll,
    Rr,
}

impl Kind {
    pub const ALL: [Kind; 7] = [Kind::Fs, Kind::Case1, Kind::Case2, Kind::Lr, Kind::Rl, Kind::Ll, Kind::Rr];

    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Fs => "fs",
            Kind::Case1 => "case1",
            Kind::Case2 => "case2",
            Kind::Lr => "lr",
            Kind::Rl => "rl",
            Kind::Ll => "ll",
            Kind::Rr => "rr",
        }
    }

    pub fn uses_alpha(&self) -> bool {
        matches!(self, Kind::Case1 | Kind::Case2)
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        Kind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown kind '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Deriv {
    /// Analytic jets when the model provides them, central differences otherwise.
    Auto,
    Analytic,
    Fd,
    Richardson,
}

impl Deriv {
    pub fn as_str(&self) -> &'static str {
        match self {
            Deriv::Auto => "auto",
            Deriv::Analytic => "analytic",
            Deriv::Fd => "fd",
            Deriv::Richardson => "richardson",
        }
    }
}

impl FromStr for Deriv {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "auto" => Ok(Deriv::Auto),
            "analytic" => Ok(Deriv::Analytic),
            "fd" => Ok(Deriv::Fd),
            "richardson" => Ok(Deriv::Richardson),
            other => Err(format!("unknown derivative mode '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cost {
    Hermitian,
    Biortho,
    Rr,
}

impl Cost {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cost::Hermitian => "hermitian",
            Cost::Biortho => "biortho",
            Cost::Rr => "rr",
        }
    }
}

impl FromStr for Cost {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "hermitian" => Ok(Cost::Hermitian),
            "biortho" => Ok(Cost::Biortho),
            "rr" => Ok(Cost::Rr),
            other => Err(format!("unknown cost '{other}'")),
        }
    }
}

/// One grid axis, `min:max:count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + h * i as f64 }).collect()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.min, self.max, self.count)
    }
}

/// Named operator for optimisation costs, e.g. `pauli_z` or `pt_two_level:0.6,1.0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorSpec {
    pub name: String,
    pub args: Vec<f64>,
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}:{}", self.name, join_floats(&self.args))
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), parse_floats(a)?),
            None => (s.trim(), Vec::new()),
        };
        let want = match name {
            "pauli_z" => 0,
            "pt_two_level" | "spin_field" => 2,
            other => return Err(format!("unknown operator '{other}' (known: pauli_z, pt_two_level:g,c, spin_field:t,p)")),
        };
        if args.len() != want {
            return Err(format!("operator '{name}' takes {want} arguments, got {}", args.len()));
        }
        Ok(OperatorSpec { name: name.to_string(), args })
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: String,
    pub params: Option<Vec<f64>>,
    pub grid: Option<Vec<Axis>>,
    pub alpha: Vec<f64>,
    pub kind: Vec<Kind>,
    pub deriv: Deriv,
    pub band: usize,
    pub tol_scale: f64,
    pub check: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cost: Cost,
    pub operator: Option<OperatorSpec>,
    pub eta: f64,
    pub eta_i: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

pub const KEYS: [&str; 18] = [
    "command", "model", "params", "grid", "alpha", "kind", "deriv", "band", "tol_scale", "check", "out", "format", "cost", "operator", "eta",
    "eta_i", "max_iters", "grad_tol",
];

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            model: "qubit".into(),
            params: None,
            grid: None,
            alpha: vec![0.0],
            kind: vec![Kind::Fs],
            deriv: Deriv::Auto,
            band: 0,
            tol_scale: 1.0,
            check: None,
            out: None,
            format: Format::Csv,
            cost: Cost::Hermitian,
            operator: None,
            eta: 0.1,
            eta_i: 0.1,
            max_iters: 200,
            grad_tol: 1e-10,
        }
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |e: String| CliError::Config(format!("{key}: {e}"));
        let v = value.trim();
        match key {
            "command" => self.command = v.parse().map_err(bad)?,
            "model" => self.model = v.to_string(),
            "params" => self.params = Some(parse_floats(v).map_err(bad)?),
            "grid" => self.grid = Some(parse_grid(v).map_err(bad)?),
            "alpha" => self.alpha = parse_floats(v).map_err(bad)?,
            "kind" => self.kind = parse_list(v).map_err(bad)?,
            "deriv" => self.deriv = v.parse().map_err(bad)?,
            "band" => self.band = parse_num(v).map_err(bad)?,
            "tol_scale" => self.tol_scale = parse_num(v).map_err(bad)?,
            "check" => self.check = Some(v.to_string()),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse().map_err(bad)?,
            "cost" => self.cost = v.parse().map_err(bad)?,
            "operator" => self.operator = Some(v.parse().map_err(bad)?),
            "eta" => self.eta = parse_num(v).map_err(bad)?,
            "eta_i" => self.eta_i = parse_num(v).map_err(bad)?,
            "max_iters" => self.max_iters = parse_num(v).map_err(bad)?,
            "grad_tol" => self.grad_tol = parse_num(v).map_err(bad)?,
            other => return Err(CliError::Config(format!("unknown key '{other}' (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Checks ranges that a parser cannot see.
    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if self.kind.is_empty() {
            return err("kind list is empty".into());
        }
        if self.alpha.is_empty() {
            return err("alpha list is empty".into());
        }
        if let Some(a) = self.alpha.iter().find(|a| !(a.abs() < 1.0)) {
            return err(format!("alpha = {a} is excluded, |alpha| must be < 1"));
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() || grid.iter().any(|a| a.count == 0 || !a.min.is_finite() || !a.max.is_finite()) {
                return err("grid axes need finite bounds and a positive count".into());
            }
        }
        if let Some(p) = &self.params {
            if p.iter().any(|x| !x.is_finite()) {
                return err("params must be finite".into());
            }
        }
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return err(format!("tol_scale = {} must be positive", self.tol_scale));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite() && self.eta_i >= 0.0 && self.eta_i.is_finite()) {
            return err("eta and eta_i must be finite and nonnegative".into());
        }
        if !(self.grad_tol >= 0.0) {
            return err("grad_tol must be nonnegative".into());
        }
        if self.command == Command::Sweep && self.grid.is_none() {
            return err("sweep needs a grid".into());
        }
        Ok(())
    }

    /// The configuration as `key = value` lines, readable by [`parse_config_text`].
    pub fn to_text(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("command", self.command.as_str().into());
        m.insert("model", self.model.clone());
        if let Some(p) = &self.params {
            m.insert("params", join_floats(p));
        }
        if let Some(g) = &self.grid {
            m.insert("grid", g.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","));
        }
        m.insert("alpha", join_floats(&self.alpha));
        m.insert("kind", self.kind.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","));
        m.insert("deriv", self.deriv.as_str().into());
        m.insert("band", self.band.to_string());
        m.insert("tol_scale", format!("{:?}", self.tol_scale));
        if let Some(c) = &self.check {
            m.insert("check", c.clone());
        }
        if let Some(o) = &self.out {
            m.insert("out", o.display().to_string());
        }
        m.insert("format", self.format.as_str().into());
        m.insert("cost", self.cost.as_str().into());
        if let Some(op) = &self.operator {
            m.insert("operator", op.to_string());
        }
        m.insert("eta", format!("{:?}", self.eta));
        m.insert("eta_i", format!("{:?}", self.eta_i));
        m.insert("max_iters", self.max_iters.to_string());
        m.insert("grad_tol", format!("{:?}", self.grad_tol));
        KEYS.iter().filter_map(|k| m.get(k).map(|v| format!("{k} = {v}\n"))).collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key '{k}' (known: {})", n + 1, KEYS.join(", "))));
        }
        if out.iter().any(|(seen, _): &(String, String)| seen == k) {
            return Err(CliError::Config(format!("line {}: duplicate key '{k}'", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Rebuilds a configuration from `key = value` text such as a `.meta` file.
#[cfg(test)]
pub fn from_text(text: &str) -> Result<RunConfig, CliError> {
    let pairs = parse_config_text(text)?;
    let command = pairs
        .iter()
        .find(|(k, _)| k == "command")
        .ok_or_else(|| CliError::Config("missing 'command'".into()))?
        .1
        .parse()
        .map_err(CliError::Config)?;
    let mut cfg = RunConfig::defaults(command);
    for (k, v) in &pairs {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse '{s}'"))
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_num).collect()
}

fn parse_list<T: FromStr<Err = String>>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse()).collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<Axis>, String> {
    s.split(',')
        .map(|ax| {
            let parts: Vec<&str> = ax.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("axis '{ax}' is not min:max:count"));
            }
            Ok(Axis { min: parse_num(parts[0])?, max: parse_num(parts[1])?, count: parse_num(parts[2])? })
        })
        .collect()
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::defaults(Command::Sweep);
        c.grid = Some(parse_grid("0:3.141592653589793:5,0.4:0.4:1").unwrap());
        c.alpha = vec![-0.3, 0.1];
        c.kind = vec![Kind::Case2, Kind::Lr];
        c.operator = Some("pt_two_level:0.6,1".parse().unwrap());
        c.out = Some("out.csv".into());
        assert_eq!(from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(parse_config_text("modle = qubit").is_err());
        assert!(parse_config_text("model = qubit\nmodel = gaussian").is_err());
        assert!(parse_config_text("model qubit").is_err());
        assert_eq!(parse_config_text("# comment\n\nmodel = qubit # trailing").unwrap(), vec![("model".into(), "qubit".into())]);
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis { min: 0.0, max: 1.0, count: 3 };
        assert_eq!(a.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Axis { min: 0.4, max: 9.0, count: 1 }.values(), vec![0.4]);
    }

    #[test]
    fn range_checks() {
        let mut c = RunConfig::defaults(Command::Tensor);
        c.alpha = vec![1.0];
        assert!(c.validate().is_err());
        let c = RunConfig::defaults(Command::Sweep);
        assert!(c.validate().is_err());
    }
}

//! Experiment configuration: command-line flags over a TOML file over
//! per-command defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use alphageom::duality_lab::{DEFAULT_GAP, DEFAULT_TOL};
use alphageom::metrics::MonotoneFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Duality,
    TransportDuality,
    Potential,
    UniquenessScan,
    Monotonicity,
    Flatness,
    ConvexityFailure,
    EntropyProjection,
    MetricTable,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Duality => "duality",
            CommandName::TransportDuality => "transport-duality",
            CommandName::Potential => "potential",
            CommandName::UniquenessScan => "uniqueness-scan",
            CommandName::Monotonicity => "monotonicity",
            CommandName::Flatness => "flatness",
            CommandName::ConvexityFailure => "convexity-failure",
            CommandName::EntropyProjection => "entropy-projection",
            CommandName::MetricTable => "metric-table",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceSel {
    States,
    Weights,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySel {
    /// Qubit and qutrit exponential families chosen by `--dim`.
    Documented,
    /// Fixed qubit points used to falsify wrong pairings.
    Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Dual,
    NotDual,
}

/// Settings that can come from the command line or a config file.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    /// Experiment to run; only read from config files.
    #[arg(skip)]
    pub command: Option<CommandName>,

    /// α values, comma separated, each in [−1, 1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub alpha: Option<Vec<f64>>,

    /// Metric functions: wyd, wyd:<p>, bkm, bures (or sld), rld. Plain `wyd`
    /// means p = (1+α)/2, and BKM at α = ±1.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub metric: Option<Vec<String>>,

    /// Matrix dimensions N, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub dim: Option<Vec<usize>>,

    #[arg(long, value_enum)]
    pub family: Option<FamilySel>,

    /// Manifold: states (M), weights (M̂) or both.
    #[arg(long, value_enum)]
    pub space: Option<SpaceSel>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Random samples or perturbed candidates, depending on the command.
    #[arg(long)]
    pub trials: Option<usize>,

    /// Steps for parallel transport along curves.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Displacement `t` in the relative-entropy Taylor check.
    #[arg(long)]
    pub step: Option<f64>,

    /// Largest value accepted as zero.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Smallest value accepted as clearly nonzero.
    #[arg(long)]
    pub gap: Option<f64>,

    /// Override the expected duality outcome of every case.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write the record here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

impl Overrides {
    fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            command: self.command.or(lower.command),
            alpha: self.alpha.or(lower.alpha),
            metric: self.metric.or(lower.metric),
            dim: self.dim.or(lower.dim),
            family: self.family.or(lower.family),
            space: self.space.or(lower.space),
            seed: self.seed.or(lower.seed),
            trials: self.trials.or(lower.trials),
            steps: self.steps.or(lower.steps),
            step: self.step.or(lower.step),
            tol: self.tol.or(lower.tol),
            gap: self.gap.or(lower.gap),
            expect: self.expect.or(lower.expect),
            format: self.format.or(lower.format),
            output: self.output.or(lower.output),
        }
    }
}

/// A configuration problem, naming the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct UsageError {
    pub field: String,
    pub message: String,
}

impl UsageError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        UsageError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for UsageError {}

pub fn read_config_file(path: &Path) -> Result<Overrides, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Overrides, UsageError> {
    toml::from_str(text).map_err(|e| UsageError::new("config", e.message().to_string()))
}

/// The fully resolved configuration of one run, echoed into its record.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: CommandName,
    pub alpha: Vec<f64>,
    pub metric: Vec<String>,
    pub dim: Vec<usize>,
    pub family: FamilySel,
    pub space: SpaceSel,
    pub seed: u64,
    pub trials: usize,
    pub steps: usize,
    pub step: f64,
    pub tol: f64,
    pub gap: f64,
    pub expect: Option<Expect>,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn defaults(command: CommandName) -> Overrides {
    let strings = |v: &[&str]| Some(v.iter().map(|s| s.to_string()).collect());
    let mut d = Overrides {
        command: Some(command),
        alpha: Some(vec![-0.5, 0.0, 0.5]),
        metric: strings(&["wyd"]),
        dim: Some(vec![2]),
        family: Some(FamilySel::Documented),
        space: Some(SpaceSel::Both),
        seed: Some(7),
        trials: Some(1),
        steps: Some(alphageom::connections::DEFAULT_TRANSPORT_STEPS),
        step: Some(1e-2),
        tol: Some(DEFAULT_TOL),
        gap: Some(DEFAULT_GAP),
        expect: None,
        format: Some(Format::Jsonl),
        output: None,
    };
    match command {
        CommandName::Duality | CommandName::Potential | CommandName::Flatness | CommandName::ConvexityFailure => {}
        CommandName::TransportDuality => {
            d.alpha = Some(vec![0.5]);
            d.tol = Some(1e-4);
            d.gap = Some(1e-3);
        }
        CommandName::UniquenessScan => {
            d.alpha = Some(vec![0.5]);
            d.dim = Some(vec![2, 3]);
            d.space = Some(SpaceSel::States);
            d.trials = Some(2);
        }
        CommandName::Monotonicity => {
            d.alpha = Some(vec![0.0]);
            d.metric = strings(&["wyd:0.2", "wyd:0.5", "wyd:0.8", "bkm", "bures", "rld"]);
            d.trials = Some(1000);
        }
        CommandName::EntropyProjection => {
            d.dim = Some(vec![3]);
            d.trials = Some(20);
        }
        CommandName::MetricTable => {
            d.alpha = Some(vec![-0.9, -0.5, 0.0, 0.5, 0.9]);
            d.metric = strings(&["wyd", "bkm", "bures", "rld"]);
            d.dim = Some(vec![2, 3, 4]);
            d.trials = Some(50);
        }
    }
    d
}

/// Parses a metric name at a given α.
pub fn metric_function(spec: &str, alpha: f64) -> Result<MonotoneFunction, UsageError> {
    let err = |e: alphageom::Error| UsageError::new("metric", format!("{spec}: {e}"));
    match spec.split_once(':') {
        Some((name, p)) if name.eq_ignore_ascii_case("wyd") => {
            let p: f64 = p
                .parse()
                .map_err(|_| UsageError::new("metric", format!("{spec}: `{p}` is not a number")))?;
            MonotoneFunction::wyd(p).map_err(err)
        }
        Some(_) => Err(UsageError::new("metric", format!("{spec}: only wyd takes a parameter"))),
        None if spec.eq_ignore_ascii_case("wyd") && alpha.abs() == 1.0 => Ok(MonotoneFunction::bkm()),
        None => MonotoneFunction::by_name(spec, Some(alpha)).map_err(err),
    }
}

impl ExperimentConfig {
    /// Layers `cli` over `file` over the defaults of the command and
    /// validates the result.
    pub fn resolve(command: Option<CommandName>, cli: Overrides, file: Overrides) -> Result<Self, UsageError> {
        let merged = cli.or(file);
        let command = command
            .or(merged.command)
            .ok_or_else(|| UsageError::new("command", "no command given on the command line or in the config"))?;
        let o = merged.or(defaults(command));
        let c = ExperimentConfig {
            command,
            alpha: o.alpha.unwrap(),
            metric: o.metric.unwrap(),
            dim: o.dim.unwrap(),
            family: o.family.unwrap(),
            space: o.space.unwrap(),
            seed: o.seed.unwrap(),
            trials: o.trials.unwrap(),
            steps: o.steps.unwrap(),
            step: o.step.unwrap(),
            tol: o.tol.unwrap(),
            gap: o.gap.unwrap(),
            expect: o.expect,
            format: o.format.unwrap(),
            output: o.output,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.alpha.is_empty() {
            return Err(UsageError::new("alpha", "at least one value is needed"));
        }
        for &a in &self.alpha {
            if !(-1.0..=1.0).contains(&a) {
                return Err(UsageError::new("alpha", format!("{a} is outside [-1, 1]")));
            }
        }
        if self.metric.is_empty() {
            return Err(UsageError::new("metric", "at least one metric is needed"));
        }
        for m in &self.metric {
            metric_function(m, 0.0)?;
        }
        if self.dim.is_empty() {
            return Err(UsageError::new("dim", "at least one dimension is needed"));
        }
        for &n in &self.dim {
            if !(1..=8).contains(&n) {
                return Err(UsageError::new("dim", format!("{n} is outside 1..=8")));
            }
        }
        let positive = [("step", self.step), ("tol", self.tol), ("gap", self.gap)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(UsageError::new(name, format!("{v} must be positive")));
            }
        }
        if self.tol >= self.gap {
            return Err(UsageError::new("gap", "must exceed tol"));
        }
        if self.trials == 0 {
            return Err(UsageError::new("trials", "must be positive"));
        }
        if self.steps < 2 {
            return Err(UsageError::new("steps", "must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_cli_then_file_then_defaults() {
        let file = parse_config("command = \"duality\"\nalpha = 0.25\nseed = 3\ntol = 1e-6\n").unwrap();
        let cli = Overrides {
            seed: Some(11),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(None, cli, file).unwrap();
        assert_eq!(c.command, CommandName::Duality);
        assert_eq!(c.alpha, vec![0.25]);
        assert_eq!(c.seed, 11);
        assert_eq!(c.tol, 1e-6);
        assert_eq!(c.gap, DEFAULT_GAP);
    }

    #[test]
    fn lists_in_config_files() {
        let o = parse_config("alpha = [-0.5, 0.5]\nmetric = [\"bkm\", \"wyd:0.3\"]\ndim = 3").unwrap();
        assert_eq!(o.alpha, Some(vec![-0.5, 0.5]));
        assert_eq!(o.metric.unwrap().len(), 2);
        assert_eq!(o.dim, Some(vec![3]));
    }

    #[test]
    fn bad_values_name_their_field() {
        let bad = |o: Overrides| ExperimentConfig::resolve(Some(CommandName::Duality), o, Overrides::default()).unwrap_err();
        assert_eq!(
            bad(Overrides {
                alpha: Some(vec![1.5]),
                ..Default::default()
            })
            .field,
            "alpha"
        );
        assert_eq!(
            bad(Overrides {
                tol: Some(-1.0),
                ..Default::default()
            })
            .field,
            "tol"
        );
        assert_eq!(
            bad(Overrides {
                metric: Some(vec!["fisher".into()]),
                ..Default::default()
            })
            .field,
            "metric"
        );
        assert_eq!(parse_config("colour = 3").unwrap_err().field, "config");
        assert_eq!(
            ExperimentConfig::resolve(None, Overrides::default(), Overrides::default())
                .unwrap_err()
                .field,
            "command"
        );
    }

    #[test]
    fn metric_names() {
        assert_eq!(metric_function("wyd", 1.0).unwrap().name(), "bkm");
        assert_eq!(metric_function("wyd", 0.5).unwrap().wyd_parameter(), Some(0.75));
        assert_eq!(metric_function("wyd:0.2", 0.5).unwrap().wyd_parameter(), Some(0.2));
        assert_eq!(metric_function("SLD", 0.0).unwrap().name(), "bures");
        assert!(metric_function("bkm:0.2", 0.0).is_err());
        assert!(metric_function("wyd:1.2", 0.0).is_err());
    }
}

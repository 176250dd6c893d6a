use std::fmt;
use std::path::Path;
use std::str::FromStr;

use riskrobust::distributions::DiscreteLaw;
use riskrobust::experiments::{Contamination, ProcessSpec};
use riskrobust::metrics::BaseMetric;
use riskrobust::{Distribution, RiskMeasure, WeightFunction, YoungFunction};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eval,
    Iqr,
    Metric,
    Consistency,
    Robustness,
    Skorohod,
    DemoNonDelta2,
    Ugc,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Eval,
        Command::Iqr,
        Command::Metric,
        Command::Consistency,
        Command::Robustness,
        Command::Skorohod,
        Command::DemoNonDelta2,
        Command::Ugc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Iqr => "iqr",
            Command::Metric => "metric",
            Command::Consistency => "consistency",
            Command::Robustness => "robustness",
            Command::Skorohod => "skorohod",
            Command::DemoNonDelta2 => "demo-nondelta2",
            Command::Ugc => "ugc",
        }
    }

    /// Keys the command needs and keys it may take, besides the common ones.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Command::Eval => (&["risk", "distribution"], &[]),
            Command::Iqr => (&["risk"], &[]),
            Command::Metric => (&["metric", "distribution", "other"], &["p", "psi", "base", "witness"]),
            Command::Consistency => (&["risk", "process", "n_grid"], &["replications"]),
            Command::Robustness => (
                &["risk", "distribution", "contamination", "theta_grid"],
                &["psi", "n", "replications"],
            ),
            Command::Skorohod => (&["sequence", "limit"], &["young", "tol"]),
            Command::DemoNonDelta2 => (&[], &["young", "n_max"]),
            Command::Ugc => (&["family", "n_grid"], &["psi", "replications", "delta"]),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

const COMMON_KEYS: [&str; 4] = ["command", "seed", "out", "format"];

const ALL_KEYS: [&str; 25] = [
    "command",
    "seed",
    "out",
    "format",
    "risk",
    "distribution",
    "other",
    "metric",
    "p",
    "psi",
    "base",
    "witness",
    "process",
    "contamination",
    "theta_grid",
    "n_grid",
    "n",
    "replications",
    "delta",
    "n_max",
    "family",
    "sequence",
    "limit",
    "young",
    "tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Prohorov,
    Levy,
    Wasserstein,
    Psi,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Prohorov => "prohorov",
            MetricKind::Levy => "levy",
            MetricKind::Wasserstein => "wasserstein",
            MetricKind::Psi => "psi",
        })
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "prohorov" => Ok(MetricKind::Prohorov),
            "levy" => Ok(MetricKind::Levy),
            "wasserstein" => Ok(MetricKind::Wasserstein),
            "psi" => Ok(MetricKind::Psi),
            other => Err(format!("unknown metric '{other}' (expected prohorov, levy, wasserstein or psi)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// A law given either as a spec string or as a path to a `.csv`/`.json`
/// file holding a discrete law. The original text is kept so that a config
/// serializes back to what was written.
#[derive(Debug, Clone, PartialEq)]
pub struct LawArg {
    pub source: String,
    pub law: Distribution,
}

impl FromStr for LawArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let law = if s.ends_with(".csv") || s.ends_with(".json") {
            let text = std::fs::read_to_string(Path::new(s)).map_err(|e| format!("cannot read '{s}': {e}"))?;
            let parsed = if s.ends_with(".csv") {
                DiscreteLaw::from_csv(&text)
            } else {
                DiscreteLaw::from_json(&text)
            };
            Distribution::Discrete(parsed.map_err(|e| format!("{s}: {e}"))?)
        } else {
            s.parse::<Distribution>().map_err(|e| e.to_string())?
        };
        Ok(LawArg {
            source: s.to_string(),
            law,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a config, not just the first.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn mentions(&self, needle: &str) -> bool {
        self.0.iter().any(|e| e.path.contains(needle) || e.message.contains(needle))
    }
}

/// Validated description of one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub risk: Option<RiskMeasure>,
    pub distribution: Option<LawArg>,
    pub other: Option<LawArg>,
    pub metric: Option<MetricKind>,
    pub p: Option<f64>,
    pub psi: Option<WeightFunction>,
    pub base: Option<BaseMetric>,
    pub witness: Option<String>,
    pub process: Option<ProcessSpec>,
    pub contamination: Option<Contamination>,
    pub theta_grid: Option<Vec<f64>>,
    pub n_grid: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub replications: Option<usize>,
    pub delta: Option<f64>,
    pub n_max: Option<usize>,
    pub family: Option<Vec<LawArg>>,
    pub sequence: Option<Vec<LawArg>>,
    pub limit: Option<LawArg>,
    pub young: Option<YoungFunction>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            risk: None,
            distribution: None,
            other: None,
            metric: None,
            p: None,
            psi: None,
            base: None,
            witness: None,
            process: None,
            contamination: None,
            theta_grid: None,
            n_grid: None,
            n: None,
            replications: None,
            delta: None,
            n_max: None,
            family: None,
            sequence: None,
            limit: None,
            young: None,
            tol: None,
            seed: None,
            out: None,
            format: None,
        }
    }

    /// Canonical JSON form; `parse_config` of its text gives back `self`.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command.name()));
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(key.into(), v);
            }
        };
        let text = |v: &dyn fmt::Display| json!(v.to_string());
        let laws = |v: &Vec<LawArg>| json!(v.iter().map(|l| l.source.clone()).collect::<Vec<_>>());
        put("risk", self.risk.as_ref().map(|v| text(v)));
        put("distribution", self.distribution.as_ref().map(|v| json!(v.source)));
        put("other", self.other.as_ref().map(|v| json!(v.source)));
        put("metric", self.metric.as_ref().map(|v| text(v)));
        put("p", self.p.map(|v| json!(v)));
        put("psi", self.psi.as_ref().map(|v| text(v)));
        put("base", self.base.as_ref().map(|v| text(v)));
        put("witness", self.witness.as_ref().map(|v| json!(v)));
        put("process", self.process.as_ref().map(|v| text(v)));
        put("contamination", self.contamination.as_ref().map(|v| text(v)));
        put("theta_grid", self.theta_grid.as_ref().map(|v| json!(v)));
        put("n_grid", self.n_grid.as_ref().map(|v| json!(v)));
        put("n", self.n.map(|v| json!(v)));
        put("replications", self.replications.map(|v| json!(v)));
        put("delta", self.delta.map(|v| json!(v)));
        put("n_max", self.n_max.map(|v| json!(v)));
        put("family", self.family.as_ref().map(laws));
        put("sequence", self.sequence.as_ref().map(laws));
        put("limit", self.limit.as_ref().map(|v| json!(v.source)));
        put("young", self.young.as_ref().map(|v| text(v)));
        put("tol", self.tol.map(|v| json!(v)));
        put("seed", self.seed.map(|v| json!(v)));
        put("out", self.out.as_ref().map(|v| json!(v)));
        put("format", self.format.as_ref().map(|v| text(v)));
        Value::Object(m)
    }
}

/// Field reader that records every failure with its key path.
struct Reader<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn fail(&mut self, path: String, message: impl Into<String>) {
        self.errors.push(ConfigError {
            path,
            message: message.into(),
        });
    }

    fn spec<T, E>(&mut self, key: &str) -> Option<T>
    where
        T: FromStr<Err = E>,
        E: fmt::Display,
    {
        let v = self.obj.get(key)?;
        let path = format!("$.{key}");
        match v.as_str() {
            Some(s) => match s.parse::<T>() {
                Ok(t) => Some(t),
                Err(e) => {
                    self.fail(path, e.to_string());
                    None
                }
            },
            None => {
                self.fail(path, "expected a string");
                None
            }
        }
    }

    fn spec_list<T, E>(&mut self, key: &str) -> Option<Vec<T>>
    where
        T: FromStr<Err = E>,
        E: fmt::Display,
    {
        let v = self.obj.get(key)?;
        let Some(items) = v.as_array() else {
            self.fail(format!("$.{key}"), "expected an array of strings");
            return None;
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            let path = format!("$.{key}[{i}]");
            match item.as_str().map(str::parse::<T>) {
                Some(Ok(t)) => out.push(t),
                Some(Err(e)) => {
                    ok = false;
                    self.fail(path, e.to_string());
                }
                None => {
                    ok = false;
                    self.fail(path, "expected a string");
                }
            }
        }
        if out.is_empty() && ok {
            self.fail(format!("$.{key}"), "must not be empty");
            return None;
        }
        ok.then_some(out)
    }

    fn number_at(&mut self, path: String, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(path, "expected a finite number");
                None
            }
        }
    }

    fn count_at(&mut self, path: String, v: &Value) -> Option<usize> {
        match v.as_u64() {
            Some(x) if x > 0 => Some(x as usize),
            _ => {
                self.fail(path, "expected a positive integer");
                None
            }
        }
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let v = self.obj.get(key)?;
        self.number_at(format!("$.{key}"), v)
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let x = self.number(key)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail(format!("$.{key}"), format!("must be positive, got {x}"));
            None
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        let v = self.obj.get(key)?;
        self.count_at(format!("$.{key}"), v)
    }

    fn list<T>(&mut self, key: &str, item: fn(&mut Self, String, &Value) -> Option<T>) -> Option<Vec<T>> {
        let v = self.obj.get(key)?;
        let Some(items) = v.as_array() else {
            self.fail(format!("$.{key}"), "expected an array");
            return None;
        };
        if items.is_empty() {
            self.fail(format!("$.{key}"), "must not be empty");
            return None;
        }
        let parsed: Vec<Option<T>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| item(self, format!("$.{key}[{i}]"), x))
            .collect();
        parsed.into_iter().collect()
    }

    fn string(&mut self, key: &str) -> Option<String> {
        let v = self.obj.get(key)?;
        match v.as_str() {
            Some(s) if !s.is_empty() => Some(s.to_string()),
            _ => {
                self.fail(format!("$.{key}"), "expected a nonempty string");
                None
            }
        }
    }

    fn seed(&mut self) -> Option<u64> {
        let v = self.obj.get("seed")?;
        match v.as_u64() {
            Some(s) => Some(s),
            None => {
                self.fail("$.seed".into(), "expected a nonnegative integer");
                None
            }
        }
    }
}

/// Parse and validate a JSON config, reporting all errors at once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            path: "$".into(),
            message: format!("malformed JSON: {e}"),
        }])
    })?;
    parse_config_value(&value)
}

pub fn parse_config_value(value: &Value) -> Result<ExperimentConfig, ConfigErrors> {
    let Some(obj) = value.as_object() else {
        return Err(ConfigErrors(vec![ConfigError {
            path: "$".into(),
            message: "expected a JSON object".into(),
        }]));
    };
    let mut r = Reader {
        obj,
        errors: Vec::new(),
    };

    let command = match obj.get("command") {
        None => {
            r.fail("$.command".into(), "missing required key");
            None
        }
        Some(_) => r.spec::<Command, _>("command"),
    };

    for key in obj.keys() {
        if !ALL_KEYS.contains(&key.as_str()) {
            r.fail(format!("$.{key}"), "unknown key");
        }
    }
    if let Some(cmd) = command {
        let (required, optional) = cmd.keys();
        for key in obj.keys() {
            let k = key.as_str();
            if ALL_KEYS.contains(&k) && !COMMON_KEYS.contains(&k) && !required.contains(&k) && !optional.contains(&k) {
                r.fail(format!("$.{key}"), format!("not used by command '{cmd}'"));
            }
        }
        for key in required {
            if !obj.contains_key(*key) {
                r.fail(format!("$.{key}"), format!("missing required key for command '{cmd}'"));
            }
        }
    }

    let mut cfg = ExperimentConfig::new(command.unwrap_or(Command::Eval));
    cfg.risk = r.spec("risk");
    cfg.distribution = r.spec("distribution");
    cfg.other = r.spec("other");
    cfg.metric = r.spec("metric");
    cfg.p = r.number("p");
    if let Some(p) = cfg.p {
        if p < 1.0 {
            r.fail("$.p".into(), format!("Wasserstein order must be at least 1, got {p}"));
        }
    }
    cfg.psi = r.spec("psi");
    cfg.base = r.spec("base");
    cfg.witness = r.string("witness");
    cfg.process = r.spec("process");
    cfg.contamination = r.spec("contamination");
    cfg.theta_grid = r.list("theta_grid", Reader::number_at);
    cfg.n_grid = r.list("n_grid", Reader::count_at);
    cfg.n = r.count("n");
    cfg.replications = r.count("replications");
    cfg.delta = r.positive("delta");
    cfg.n_max = r.count("n_max");
    cfg.family = r.spec_list("family");
    cfg.sequence = r.spec_list("sequence");
    cfg.limit = r.spec("limit");
    cfg.young = r.spec("young");
    cfg.tol = r.positive("tol");
    cfg.seed = r.seed();
    cfg.out = r.string("out");
    cfg.format = r.spec("format");

    if cfg.witness.is_some() && cfg.metric.is_some_and(|m| m != MetricKind::Prohorov) {
        r.fail("$.witness".into(), "a coupling witness exists only for the prohorov metric");
    }
    let min_reps = riskrobust::experiments::MIN_REPLICATIONS;
    if let (Command::Robustness, Some(m)) = (cfg.command, cfg.replications) {
        if m < min_reps {
            r.fail("$.replications".into(), format!("needs at least {min_reps} replications, got {m}"));
        }
    }

    if r.errors.is_empty() && command.is_some() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(r.errors))
    }
}

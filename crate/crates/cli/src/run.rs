use riskrobust::experiments::{
    consistency_run, non_delta2_demo, robustness_run, skorohod_coupling, ugc_probe, Cell, ContaminationFamily,
    ExperimentReport,
};
use riskrobust::metrics::{discretize_for_metric, levy, prohorov, psi_metric_with, wasserstein, BaseMetric};
use riskrobust::robustness::iqr_closed_form;
use riskrobust::{risk_functional, Distribution, Error, WeightFunction, YoungFunction};
use serde_json::{json, Map, Value};

use crate::config::{Command, ExperimentConfig, Format, LawArg, MetricKind};

pub const DEFAULT_CONSISTENCY_REPS: usize = 20;
pub const DEFAULT_ROBUSTNESS_N: usize = 10_000;
pub const DEFAULT_ROBUSTNESS_REPS: usize = 500;
pub const DEFAULT_UGC_REPS: usize = 200;
pub const DEFAULT_UGC_DELTA: f64 = 0.2;
pub const DEFAULT_SKOROHOD_TOL: f64 = 1e-2;
pub const DEFAULT_DEMO_N_MAX: usize = 8;

/// Result body of a command.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// A single record, printed as a JSON object by default.
    Record(Map<String, Value>),
    /// A table, printed as CSV by default.
    Table(ExperimentReport),
}

impl Outcome {
    pub fn default_format(&self) -> Format {
        match self {
            Outcome::Record(_) => Format::Json,
            Outcome::Table(_) => Format::Csv,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Outcome::Record(m), Format::Json) => {
                serde_json::to_string_pretty(&Value::Object(m.clone())).expect("JSON values serialize") + "\n"
            }
            (Outcome::Record(m), Format::Csv) => {
                let keys: Vec<&str> = m.keys().map(String::as_str).collect();
                let mut report = ExperimentReport::new("record", &keys);
                report.push_row(m.values().map(json_cell).collect());
                report.to_csv()
            }
            (Outcome::Table(r), Format::Csv) => r.to_csv(),
            (Outcome::Table(r), Format::Json) => {
                serde_json::to_string_pretty(&r.to_json()).expect("JSON values serialize") + "\n"
            }
        }
    }
}

fn json_cell(v: &Value) -> Cell {
    match v {
        Value::Number(n) if n.is_u64() => Cell::Int(n.as_u64().unwrap()),
        Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

/// Output of [`run`]: the main body plus an optional coupling witness CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub witness: Option<String>,
}

fn require<'a, T>(v: &'a Option<T>) -> &'a T {
    v.as_ref().expect("validated config carries every required key")
}

fn laws_of(args: &[LawArg]) -> Vec<Distribution> {
    args.iter().map(|a| a.law.clone()).collect()
}

fn default_psi(cfg: &ExperimentConfig) -> WeightFunction {
    cfg.psi.unwrap_or(WeightFunction::AbsPower { p: 1.0 })
}

/// Execute a validated config. Library errors are returned unchanged so the
/// caller can map divergence to its exit status.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    let seed = cfg.seed.unwrap_or(0);
    let mut witness = None;
    let outcome = match cfg.command {
        Command::Eval => {
            let rho = require(&cfg.risk);
            let d = require(&cfg.distribution);
            let value = risk_functional(rho, &d.law)?;
            let mut m = Map::new();
            m.insert("risk".into(), json!(rho.to_string()));
            m.insert("distribution".into(), json!(d.source));
            m.insert("value".into(), json!(value));
            Outcome::Record(m)
        }
        Command::Iqr => {
            let rho = require(&cfg.risk);
            let mut m = match iqr_closed_form(rho)?.to_json() {
                Value::Object(m) => m,
                _ => unreachable!("profiles serialize to objects"),
            };
            m.insert("risk".into(), json!(rho.to_string()));
            Outcome::Record(m)
        }
        Command::Metric => {
            let kind = *require(&cfg.metric);
            let mu = &require(&cfg.distribution).law;
            let nu = &require(&cfg.other).law;
            let value = match kind {
                MetricKind::Prohorov => {
                    let r = prohorov(&discretize_for_metric(mu)?, &discretize_for_metric(nu)?);
                    if cfg.witness.is_some() {
                        witness = Some(r.witness.to_csv());
                    }
                    r.value
                }
                MetricKind::Levy => levy(&discretize_for_metric(mu)?, &discretize_for_metric(nu)?),
                MetricKind::Wasserstein => wasserstein(mu, nu, cfg.p.unwrap_or(1.0))?,
                MetricKind::Psi => {
                    psi_metric_with(mu, nu, &default_psi(cfg), cfg.base.unwrap_or(BaseMetric::Prohorov))?
                }
            };
            let mut m = Map::new();
            m.insert("metric".into(), json!(kind.to_string()));
            m.insert("value".into(), json!(value));
            Outcome::Record(m)
        }
        Command::Consistency => Outcome::Table(consistency_run(
            require(&cfg.risk),
            require(&cfg.process),
            require(&cfg.n_grid),
            cfg.replications.unwrap_or(DEFAULT_CONSISTENCY_REPS),
            seed,
        )?),
        Command::Robustness => {
            let family = ContaminationFamily::new(require(&cfg.distribution).law.clone(), *require(&cfg.contamination));
            Outcome::Table(robustness_run(
                require(&cfg.risk),
                &family,
                &default_psi(cfg),
                require(&cfg.theta_grid),
                cfg.n.unwrap_or(DEFAULT_ROBUSTNESS_N),
                cfg.replications.unwrap_or(DEFAULT_ROBUSTNESS_REPS),
                seed,
            )?)
        }
        Command::Skorohod => Outcome::Table(skorohod_table(cfg)?),
        Command::DemoNonDelta2 => Outcome::Table(non_delta2_demo(
            &cfg.young.unwrap_or(YoungFunction::Exponential),
            cfg.n_max.unwrap_or(DEFAULT_DEMO_N_MAX),
            seed,
        )?),
        Command::Ugc => Outcome::Table(ugc_probe(
            &laws_of(require(&cfg.family)),
            &default_psi(cfg),
            require(&cfg.n_grid),
            cfg.replications.unwrap_or(DEFAULT_UGC_REPS),
            cfg.delta.unwrap_or(DEFAULT_UGC_DELTA),
            seed,
        )?),
    };
    Ok(RunOutput { outcome, witness })
}

fn skorohod_table(cfg: &ExperimentConfig) -> Result<ExperimentReport, Error> {
    let young = cfg.young.unwrap_or(YoungFunction::Power { p: 2.0 });
    let tol = cfg.tol.unwrap_or(DEFAULT_SKOROHOD_TOL);
    let limit = &require(&cfg.limit).law;
    let laws = require(&cfg.sequence)
        .iter()
        .map(|a| discretize_for_metric(&a.law))
        .collect::<Result<Vec<_>, Error>>()?;
    let norms = skorohod_coupling(&laws, limit, &young)?;
    let converged = riskrobust::metrics::psi_weak_converged(&laws, limit, &WeightFunction::Young(young), tol)?;
    let mut report = ExperimentReport::new("skorohod", &["index", "norm"]);
    for (i, v) in norms.iter().enumerate() {
        report.push_row(vec![(i + 1).into(), (*v).into()]);
    }
    let tail = (norms.len() / 4).max(1);
    let vanishes = norms[norms.len() - tail..].iter().all(|v| *v < tol);
    report.set_meta("young", young.to_string());
    report.set_meta("tol", tol);
    report.set_meta("norms_vanish", vanishes);
    report.set_meta("psi_weak_converged", converged);
    Ok(report)
}

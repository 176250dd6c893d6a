use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{parse_config, parse_config_value, ConfigErrors, ExperimentConfig, Format};
use crate::run::{run, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "riskrobust", version, about = "Risk functionals, robustness indices and Monte Carlo experiments")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result to this file; tables also get a `.meta.json` sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the result on stdout even when `--out` is given.
    #[arg(long, global = true)]
    stdout: bool,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Evaluate a risk functional on a law.
    Eval {
        #[arg(long)]
        risk: String,
        /// Spec string such as `normal:m=0,s=1`, or a `.csv`/`.json` file.
        #[arg(long = "dist")]
        dist: String,
    },
    /// Index of qualitative robustness of a risk measure.
    Iqr {
        #[arg(long)]
        risk: String,
    },
    /// Distance between two laws.
    Metric {
        /// prohorov, levy, wasserstein or psi
        kind: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
        /// Wasserstein order.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        psi: Option<String>,
        /// Weak-topology part of the psi metric (prohorov or levy).
        #[arg(long)]
        base: Option<String>,
        /// Write the Prohorov coupling certificate as CSV.
        #[arg(long)]
        witness: Option<String>,
    },
    /// Plug-in estimation error against the stationary law.
    Consistency {
        #[arg(long)]
        risk: String,
        #[arg(long)]
        process: String,
        #[arg(long = "n-grid", value_delimiter = ',', required = true)]
        n_grid: Vec<u64>,
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Estimator-law distances along a contamination path.
    Robustness {
        #[arg(long)]
        risk: String,
        #[arg(long = "base-law")]
        base_law: String,
        #[arg(long)]
        contamination: String,
        #[arg(long = "theta-grid", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        theta_grid: Vec<f64>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Orlicz norms of comonotone couplings to a limit law.
    Skorohod {
        /// One law of the sequence; repeat in order.
        #[arg(long = "law", required = true)]
        laws: Vec<String>,
        #[arg(long)]
        limit: String,
        #[arg(long)]
        young: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Truncation construction for a Young function without Δ₂.
    #[command(name = "demo-nondelta2")]
    DemoNonDelta2 {
        #[arg(long)]
        young: Option<String>,
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Uniform Glivenko–Cantelli probe over a finite family.
    Ugc {
        /// One family member; repeat for more.
        #[arg(long = "law", required = true)]
        laws: Vec<String>,
        #[arg(long = "n-grid", value_delimiter = ',', required = true)]
        n_grid: Vec<u64>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Run a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn insert<V: Into<Value>>(m: &mut Map<String, Value>, key: &str, v: Option<V>) {
    if let Some(v) = v {
        m.insert(key.into(), v.into());
    }
}

fn command_map(cmd: Cmd) -> Result<Map<String, Value>, Cmd> {
    let mut m = Map::new();
    let name = match cmd {
        Cmd::Eval { risk, dist } => {
            insert(&mut m, "risk", Some(risk));
            insert(&mut m, "distribution", Some(dist));
            "eval"
        }
        Cmd::Iqr { risk } => {
            insert(&mut m, "risk", Some(risk));
            "iqr"
        }
        Cmd::Metric {
            kind,
            mu,
            nu,
            p,
            psi,
            base,
            witness,
        } => {
            insert(&mut m, "metric", Some(kind));
            insert(&mut m, "distribution", Some(mu));
            insert(&mut m, "other", Some(nu));
            insert(&mut m, "p", p);
            insert(&mut m, "psi", psi);
            insert(&mut m, "base", base);
            insert(&mut m, "witness", witness);
            "metric"
        }
        Cmd::Consistency {
            risk,
            process,
            n_grid,
            reps,
        } => {
            insert(&mut m, "risk", Some(risk));
            insert(&mut m, "process", Some(process));
            insert(&mut m, "n_grid", Some(json!(n_grid)));
            insert(&mut m, "replications", reps);
            "consistency"
        }
        Cmd::Robustness {
            risk,
            base_law,
            contamination,
            theta_grid,
            psi,
            n,
            reps,
        } => {
            insert(&mut m, "risk", Some(risk));
            insert(&mut m, "distribution", Some(base_law));
            insert(&mut m, "contamination", Some(contamination));
            insert(&mut m, "theta_grid", Some(json!(theta_grid)));
            insert(&mut m, "psi", psi);
            insert(&mut m, "n", n);
            insert(&mut m, "replications", reps);
            "robustness"
        }
        Cmd::Skorohod { laws, limit, young, tol } => {
            insert(&mut m, "sequence", Some(json!(laws)));
            insert(&mut m, "limit", Some(limit));
            insert(&mut m, "young", young);
            insert(&mut m, "tol", tol);
            "skorohod"
        }
        Cmd::DemoNonDelta2 { young, n_max } => {
            insert(&mut m, "young", young);
            insert(&mut m, "n_max", n_max);
            "demo-nondelta2"
        }
        Cmd::Ugc {
            laws,
            n_grid,
            psi,
            reps,
            delta,
        } => {
            insert(&mut m, "family", Some(json!(laws)));
            insert(&mut m, "n_grid", Some(json!(n_grid)));
            insert(&mut m, "psi", psi);
            insert(&mut m, "replications", reps);
            insert(&mut m, "delta", delta);
            "ugc"
        }
        run @ Cmd::Run { .. } => return Err(run),
    };
    m.insert("command".into(), json!(name));
    Ok(m)
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write '{}': {e}", path.display()))
}

/// Global flags override the corresponding config keys.
fn build_config(cli: Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match command_map(cli.command) {
        Ok(map) => parse_config_value(&Value::Object(map)).map_err(|e: ConfigErrors| e.to_string())?,
        Err(Cmd::Run { config }) => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read config '{}': {e}", config.display()))?;
            parse_config(&text).map_err(|e| e.to_string())?
        }
        Err(_) => unreachable!("only `run` is left unmapped"),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(out) = cli.out {
        cfg.out = Some(out.to_string_lossy().into_owned());
    }
    if let Some(f) = cli.format {
        cfg.format = Some(f.parse().expect("clap restricts the value"));
    }
    Ok(cfg)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let to_stdout = cli.stdout;
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let output = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_DOMAIN;
        }
    };
    let format = cfg.format.unwrap_or_else(|| output.outcome.default_format());
    let body = output.outcome.render(format);
    let mut written = Vec::new();
    if let Some(out) = &cfg.out {
        let path = Path::new(out);
        if let Err(msg) = write_file(path, &body) {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        written.push(path.to_path_buf());
        if let (Outcome::Table(report), Format::Csv) = (&output.outcome, format) {
            let side = sidecar_path(path);
            let text = serde_json::to_string_pretty(&report.sidecar()).expect("JSON values serialize") + "\n";
            if let Err(msg) = write_file(&side, &text) {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_USAGE;
            }
            written.push(side);
        }
    }
    if let (Some(csv), Some(path)) = (&output.witness, &cfg.witness) {
        if let Err(msg) = write_file(Path::new(path), csv) {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        written.push(PathBuf::from(path));
    }
    if to_stdout || cfg.out.is_none() {
        let _ = write!(stdout, "{body}");
    }
    for path in written {
        let _ = writeln!(stderr, "wrote {}", path.display());
    }
    EXIT_OK
}

//! Command-line front end. Every command produces a table (or a JSON
//! report) on stdout or in `--output`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edge::{numeric_edge_information, qfi_phi_z_closed_form, qfi_tpt_limit, ssh_edge_qfi};
use crate::error::Error;
use crate::estimation::default_step;
use crate::many_body::{
    chern_tpt_sum, qfi_obc_projector, qfi_pbc_sum, ssh_continuum_limit, ssh_tpt_closed_form, GAP_FLOOR,
};
use crate::measure::{estimator_stats, SimConfig};
use crate::models::ModelFamily;
use crate::scaling::{exponent_scan, scan_table, Quantity};
use crate::table::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EdgeQfi,
    ManybodyQfi,
    ExponentScan,
    Estimate,
    ClosedForms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PbcSum,
    ProjectorObc,
    ClosedForm,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::PbcSum => "pbc-sum",
            Method::ProjectorObc => "projector-obc",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// Fully resolved run description. Unset options fall back to per-command
/// defaults at execution time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub lambdas: Vec<f64>,
    pub sizes: Vec<usize>,
    pub method: Option<Method>,
    pub quantity: Option<String>,
    pub samples: Option<u64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub interval: Option<(f64, f64)>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::EdgeQfi,
            model: None,
            params: BTreeMap::new(),
            lambdas: Vec::new(),
            sizes: Vec::new(),
            method: None,
            quantity: None,
            samples: None,
            reps: None,
            seed: None,
            interval: None,
            output: None,
            format: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    fn family(&self, default: &str) -> Result<ModelFamily, CliError> {
        Ok(ModelFamily::from_id(self.model.as_deref().unwrap_or(default), &self.params)?)
    }

    fn lambdas_or(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let out = if self.lambdas.is_empty() { default.to_vec() } else { self.lambdas.clone() };
        if out.is_empty() {
            return Err(CliError::Config("no lambda values given".into()));
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("lambda values must be finite".into()));
        }
        Ok(out)
    }

    fn sizes_or(&self, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let out = if self.sizes.is_empty() { default.to_vec() } else { self.sizes.clone() };
        if out.is_empty() {
            return Err(CliError::Config("no sizes given".into()));
        }
        Ok(out)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Estimate => Format::Json,
            _ => Format::Csv,
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::InvalidParams(_)
            | Error::InvalidSize(_)
            | Error::OddL(_)
            | Error::InvalidZ(_)
            | Error::InvalidR(_)
            | Error::DimensionMismatch(_) => CliError::Config(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "topoqfi", version, about = "Quantum Fisher information of topological lattice models")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// QFI and position CFI of the edge state, per (λ, L).
    EdgeQfi(Flags),
    /// Many-body ground-state QFI, per (λ, L).
    ManybodyQfi(Flags),
    /// Fitted exponent b of F ≈ a·L^b + c, per λ.
    ExponentScan(Flags),
    /// Monte-Carlo maximum-likelihood study of λ from position counts.
    Estimate(Flags),
    /// Closed-form values for the given λ and L.
    ClosedForms(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<f64>,
    /// lo:hi:n, inclusive of both ends.
    #[arg(long, allow_hyphen_values = true)]
    lambda_grid: Option<String>,
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, allow_hyphen_values = true)]
    kx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t2: Option<f64>,
    /// Any other model parameter as key=value (j2, alpha, lambda_c, ...).
    #[arg(long = "param", allow_hyphen_values = true)]
    params: Vec<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// lo:hi search interval for the estimator.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the resolved configuration as canonical JSON and exit.
    #[arg(long)]
    print_config: bool,
}

pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("malformed lambda grid '{s}', expected lo:hi:n"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && hi < lo) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let m = (n - 1) as f64;
    Ok((0..n).map(|i| ((m - i as f64) * lo + i as f64 * hi) / m).collect())
}

fn parse_interval(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("malformed interval '{s}', expected lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn resolve(command: Command, flags: Flags) -> Result<(RunConfig, bool), CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.command = command;
    let mut lambdas = flags.lambda;
    if let Some(grid) = &flags.lambda_grid {
        lambdas.extend(parse_lambda_grid(grid)?);
    }
    if !lambdas.is_empty() {
        cfg.lambdas = lambdas;
    }
    if !flags.sizes.is_empty() {
        cfg.sizes = flags.sizes;
    }
    for (key, value) in [("kx", flags.kx), ("t1", flags.t1), ("t2", flags.t2)] {
        if let Some(v) = value {
            cfg.params.insert(key.into(), v);
        }
    }
    for kv in &flags.params {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("--param '{kv}' is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("--param '{kv}' has no numeric value")))?;
        cfg.params.insert(k.trim().into(), v);
    }
    if let Some(s) = &flags.interval {
        cfg.interval = Some(parse_interval(s)?);
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if flags.$field.is_some() { cfg.$field = flags.$field; } )* };
    }
    take!(model, samples, reps, seed, method, quantity, format, output, threads);
    Ok((cfg, flags.print_config))
}

/// Rendered output plus whether every row failed numerically.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub all_failed: bool,
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&table.to_json()).expect("table serializes") + "\n",
    }
}

fn rendered(table: Table, format: Format, failed: usize) -> Rendered {
    let all_failed = !table.rows.is_empty() && failed == table.rows.len();
    Rendered { text: render(&table, format), all_failed }
}

fn grid(lambdas: &[f64], sizes: &[usize]) -> Vec<(f64, usize)> {
    lambdas.iter().flat_map(|&x| sizes.iter().map(move |&l| (x, l))).collect()
}

fn err_text(e: &Error) -> String {
    format!("error: {e}")
}

fn cmd_edge_qfi(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let family = cfg.family("ssh")?;
    if !matches!(family, ModelFamily::Ssh { .. } | ModelFamily::ChernWire { .. }) {
        return Err(CliError::Config(format!("edge-qfi supports ssh and chern-wire, not {}", family.id())));
    }
    let lambdas = cfg.lambdas_or(&[])?;
    let sizes = cfg.sizes_or(&[32])?;
    let rows: Vec<_> = grid(&lambdas, &sizes)
        .into_par_iter()
        .map(|(lambda, l)| {
            let closed = match family {
                ModelFamily::Ssh { j2 } if j2 == 1.0 && lambda.abs() < 1.0 => ssh_edge_qfi(lambda, l).ok(),
                _ => None,
            };
            (lambda, l, closed, numeric_edge_information(&family, lambda, l, default_step(lambda)))
        })
        .collect();
    let mut table = Table::new(&["lambda", "L", "F_closed_form", "F_numeric", "cfi_position", "flags"]);
    let mut failed = 0;
    for (lambda, l, closed, numeric) in rows {
        let (f, c, flag) = match numeric {
            Ok(info) => (Some(info.qfi), Some(info.cfi_position), info.kind.as_str().to_string()),
            Err(e) => {
                failed += 1;
                (None, None, err_text(&e))
            }
        };
        table.push(vec![lambda.into(), l.into(), closed.into(), f.into(), c.into(), flag.into()]);
    }
    Ok(rendered(table, cfg.format(), failed))
}

fn manybody_value(family: &ModelFamily, method: Method, lambda: f64, l: usize) -> Result<f64, Error> {
    match method {
        Method::PbcSum => Ok(qfi_pbc_sum(family, lambda, l, GAP_FLOOR)?.total),
        Method::ProjectorObc => qfi_obc_projector(family, lambda, l, default_step(lambda)),
        Method::ClosedForm => {
            let critical = family.critical_lambda().unwrap_or(f64::NAN);
            if (lambda - critical).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!("closed form holds only at lambda = {critical}")));
            }
            match *family {
                ModelFamily::Ssh { j2 } => Ok(j2 * j2 * ssh_tpt_closed_form(l)?),
                ModelFamily::ChernBloch { t1, t2 } => Ok(4.0 * t2 * t2 * chern_tpt_sum(l, t1, t2)?),
                _ => Err(Error::InvalidConfig(format!("no closed form for {}", family.id()))),
            }
        }
    }
}

fn cmd_manybody_qfi(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let family = cfg.family("ssh")?;
    let method = cfg.method.unwrap_or(Method::PbcSum);
    let supported = match method {
        Method::PbcSum => matches!(family, ModelFamily::Ssh { .. } | ModelFamily::ChernBloch { .. } | ModelFamily::BandInversion { .. }),
        Method::ProjectorObc | Method::ClosedForm => matches!(family, ModelFamily::Ssh { .. } | ModelFamily::ChernBloch { .. }),
    };
    if !supported {
        return Err(CliError::Config(format!("method {} is not available for {}", method.as_str(), family.id())));
    }
    let lambdas = cfg.lambdas_or(&[])?;
    let sizes = cfg.sizes_or(&[32])?;
    let rows: Vec<_> = grid(&lambdas, &sizes)
        .into_par_iter()
        .map(|(lambda, l)| (lambda, l, manybody_value(&family, method, lambda, l)))
        .collect();
    let mut table = Table::new(&["lambda", "L", "F", "method", "flags"]);
    let mut failed = 0;
    for (lambda, l, value) in rows {
        let (f, flag) = match value {
            Ok(v) => (Some(v), String::new()),
            Err(e) => {
                failed += 1;
                (None, err_text(&e))
            }
        };
        table.push(vec![lambda.into(), l.into(), f.into(), method.as_str().into(), flag.into()]);
    }
    Ok(rendered(table, cfg.format(), failed))
}

fn cmd_exponent_scan(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let family = cfg.family("ssh")?;
    let quantity = Quantity::parse(cfg.quantity.as_deref().unwrap_or("edge"))?;
    let lambdas = cfg.lambdas_or(&[])?;
    let sizes = cfg.sizes_or(&[])?;
    let rows = exponent_scan(&family, quantity, &lambdas, &sizes)?;
    let failed = rows.iter().filter(|r| r.fit.is_none()).count();
    Ok(rendered(scan_table(&rows), cfg.format(), failed))
}

fn cmd_estimate(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let family = cfg.family("ssh")?;
    let lambdas = cfg.lambdas_or(&[0.5])?;
    let sizes = cfg.sizes_or(&[32])?;
    if lambdas.len() != 1 || sizes.len() != 1 {
        return Err(CliError::Config("estimate takes a single lambda and a single size".into()));
    }
    let lambda_true = lambdas[0];
    let default_interval = match family {
        ModelFamily::Ssh { .. } => (0.0, 0.95),
        _ => (lambda_true - 0.1, lambda_true + 0.1),
    };
    let sim = SimConfig {
        samples: cfg.samples.unwrap_or(10_000),
        reps: cfg.reps.unwrap_or(200),
        seed: cfg.seed.unwrap_or(0),
        lambda_true,
        interval: cfg.interval.unwrap_or(default_interval),
        l: sizes[0],
        family,
    };
    let report = estimator_stats(&sim)?;
    let all_failed = report.run_failures == sim.reps;
    let text = match cfg.format() {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => {
            let mut t = Table::new(&["lambda_hat_mean", "sample_variance", "predicted_crb", "ratio", "run_failures"]);
            t.push(vec![
                report.lambda_hat_mean.into(),
                report.sample_variance.into(),
                report.predicted_crb.into(),
                report.ratio.into(),
                report.run_failures.into(),
            ]);
            t.to_csv()
        }
    };
    Ok(Rendered { text, all_failed })
}

fn cmd_closed_forms(cfg: &RunConfig) -> Result<Rendered, CliError> {
    if cfg.lambdas.is_empty() && cfg.sizes.is_empty() {
        return Err(CliError::Config("closed-forms needs --lambda and/or --sizes".into()));
    }
    let t1 = cfg.params.get("t1").copied().unwrap_or(1.0);
    let t2 = cfg.params.get("t2").copied().unwrap_or(1.0);
    let mut table = Table::new(&["quantity", "lambda", "L", "value", "flags"]);
    let mut failed = 0;
    let mut push = |name: &str, lambda: Option<f64>, l: Option<usize>, v: Result<f64, Error>| {
        let (value, flag) = match v {
            Ok(v) => (Some(v), String::new()),
            Err(e) => {
                failed += 1;
                (None, err_text(&e))
            }
        };
        table.push(vec![name.into(), lambda.into(), l.into(), value.into(), flag.into()]);
    };
    // The edge formula is evaluated at r = λ, ∂r = 1, which is the SSH edge QFI.
    for (lambda, l) in grid(&cfg.lambdas, &cfg.sizes) {
        push("edge_phi_z", Some(lambda), Some(l), qfi_phi_z_closed_form(lambda, 1.0, l));
    }
    for &l in &cfg.sizes {
        push("edge_tpt_limit", None, Some(l), Ok(qfi_tpt_limit(1.0, 0.0, l)));
        push("ssh_ring_critical", None, Some(l), ssh_tpt_closed_form(l));
        push("chern_critical_sum", None, Some(l), chern_tpt_sum(l, t1, t2));
    }
    for &lambda in &cfg.lambdas {
        push("ssh_continuum_per_site", Some(lambda), None, ssh_continuum_limit(lambda));
    }
    Ok(rendered(table, cfg.format(), failed))
}

/// Runs a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let run = || match cfg.command {
        Command::EdgeQfi => cmd_edge_qfi(cfg),
        Command::ManybodyQfi => cmd_manybody_qfi(cfg),
        Command::ExponentScan => cmd_exponent_scan(cfg),
        Command::Estimate => cmd_estimate(cfg),
        Command::ClosedForms => cmd_closed_forms(cfg),
    };
    match cfg.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Parses arguments, runs, writes output, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (command, flags) = match cli.command {
        CliCommand::EdgeQfi(f) => (Command::EdgeQfi, f),
        CliCommand::ManybodyQfi(f) => (Command::ManybodyQfi, f),
        CliCommand::ExponentScan(f) => (Command::ExponentScan, f),
        CliCommand::Estimate(f) => (Command::Estimate, f),
        CliCommand::ClosedForms(f) => (Command::ClosedForms, f),
    };
    let result = resolve(command, flags).and_then(|(cfg, print_only)| {
        if print_only {
            return Ok((cfg.to_canonical_json(), false, None));
        }
        let out = execute(&cfg)?;
        Ok((out.text, out.all_failed, cfg.output.clone()))
    });
    match result {
        Ok((text, all_failed, output)) => {
            let written = match output {
                Some(path) => std::fs::write(&path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "configuration error: {msg}");
                return EXIT_CONFIG;
            }
            if all_failed {
                let _ = writeln!(stderr, "every row failed");
                EXIT_NUMERIC
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("topoqfi").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn lambda_grid_parsing() {
        assert_eq!(parse_lambda_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_lambda_grid("-4.5:-3.5:1").unwrap(), vec![-4.5]);
        for bad in ["0:1", "a:1:2", "0:1:0", "1:0:3", "0:1:2:3"] {
            assert!(parse_lambda_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = RunConfig { command: Command::ExponentScan, model: Some("chern-wire".into()), ..Default::default() };
        cfg.params.insert("kx".into(), std::f64::consts::FRAC_PI_2);
        cfg.lambdas = vec![-3.999, 0.1];
        cfg.sizes = vec![64, 128];
        cfg.interval = Some((0.0, 0.9));
        cfg.method = Some(Method::ProjectorObc);
        let text = cfg.to_canonical_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_canonical_json(), text);
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn edge_qfi_ssh_columns_agree() {
        let (code, out, _) = run_args(&["edge-qfi", "--lambda", "0.5", "--sizes", "32"]);
        assert_eq!(code, 0);
        let line = out.lines().nth(1).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        let v: Vec<f64> = cols[2..5].iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[0] - v[1]).abs() < 1e-8 * v[0] && (v[0] - v[2]).abs() < 1e-8 * v[0], "{line}");
    }

    #[test]
    fn config_errors_exit_two() {
        assert_eq!(run_args(&["edge-qfi", "--sizes", "32"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["edge-qfi", "--model", "chern-bloch", "--lambda", "1"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["manybody-qfi", "--model", "band-inversion", "--method", "closed-form", "--lambda", "0"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["exponent-scan", "--lambda-grid", "0:1"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["estimate", "--lambda", "0.99"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["edge-qfi", "--lambda", "0.5", "--kx", "1"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["nonsense"]).0, EXIT_CONFIG);
    }

    #[test]
    fn all_rows_failing_exit_three() {
        let (code, out, _) = run_args(&["manybody-qfi", "--method", "closed-form", "--lambda", "0.5", "--sizes", "6"]);
        assert_eq!(code, EXIT_NUMERIC);
        assert!(out.contains("error"));
        let (code, out, _) = run_args(&["manybody-qfi", "--method", "closed-form", "--lambda", "1", "--sizes", "6"]);
        assert_eq!(code, 0);
        let f: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert!((f - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn chern_closed_form_matches_pbc_sum() {
        let value = |method: &str| -> f64 {
            let (code, out, _) =
                run_args(&["manybody-qfi", "--model", "chern-bloch", "--method", method, "--lambda", "-4", "--sizes", "16"]);
            assert_eq!(code, 0, "{out}");
            out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap()
        };
        let (a, b) = (value("closed-form"), value("pbc-sum"));
        assert!((a / b - 1.0).abs() < 1e-6, "{a} {b}");
    }
}

//! Command-line front end.
//!
//! Flags override values read from `--config` (a `key = value` file). Output
//! goes to `--out` (written through a temporary file and renamed) or stdout.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::acceptance;
use crate::density::{default_grid, density_on_grid, limit_grid, linspace, DensityGrid, ScaledDensity};
use crate::ensembles::{growth_parameters, recurrence_coefficients, CustomRecurrence, EnsembleSpec, GrowthParams};
use crate::error::{Error, Result};
use crate::limits::{limit_moment, LimitFamily};
use crate::montecarlo::{eigenvalue_rows, empirical_scaled_cdf, ensemble_dn, ks_distance, sample_batch, SampleSummary};
use crate::opcore::{moment_reports, MomentReport};
use crate::perturb::{gap_rows, GapRow, PerturbationSpec};

const MODULE: &str = "cli";

#[derive(Debug, Parser)]
#[command(name = "level-density", version, about = "Level densities of unitary ensembles by the moment method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Recurrence coefficients α_n, β_n for n = 0..=max(n)
    Recurrence,
    /// Scaled moments M_n^(k) next to their limits
    Moments,
    /// Limit moments M^(k); with --grid also the limit density
    Limit,
    /// Scaled density σ_n on a grid
    Density,
    /// Perturbed moments and gaps for p²ϖ
    Perturb,
    /// Monte Carlo eigenvalues and KS distance to σ_n
    Sample,
    /// Run the acceptance suite
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Args)]
struct Opts {
    /// hermite | laguerre | jacobi | legendre | custom
    #[arg(long, global = true)]
    ensemble: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Comma list of n
    #[arg(long, global = true)]
    n: Option<String>,
    /// Comma list of k
    #[arg(long, global = true)]
    k: Option<String>,
    /// lo:hi:count
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Coefficients of p, constant term first
    #[arg(long, global = true, allow_hyphen_values = true)]
    perturb: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Key-value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// n,alpha_n,beta_n rows for --ensemble custom
    #[arg(long, global = true)]
    custom_csv: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    zeta: Option<f64>,
    #[arg(long, global = true)]
    t: Option<f64>,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub ensemble: EnsembleSpec,
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub grid: Option<(f64, f64, usize)>,
    pub perturbation: Option<PerturbationSpec>,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = match resolve(cli.command, cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("level-density: {e}");
            return e.exit_code();
        }
    };
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("level-density: {e}");
            e.exit_code()
        }
    }
}

fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::usage(MODULE, format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::usage(MODULE, format!("bad {what} value {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::usage(MODULE, format!("{what} list is empty")));
    }
    Ok(values)
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::usage(MODULE, format!("grid must be lo:hi:count, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && count >= 2) {
        return Err(bad());
    }
    Ok((lo, hi, count))
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::usage(MODULE, format!("bad value for {key}: {value:?}")))
}

fn resolve(command: Command, opts: Opts) -> Result<ExperimentConfig> {
    let file = match &opts.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    let get = |key: &str| file.get(key).map(String::as_str);
    let num = |flag: Option<f64>, key: &str| -> Result<Option<f64>> {
        match (flag, get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(v)) => parse_number(key, v).map(Some),
            (None, None) => Ok(None),
        }
    };
    let family = opts.ensemble.clone().or_else(|| get("ensemble").or(get("family")).map(str::to_string));
    let a = num(opts.a, "a")?.unwrap_or(0.0);
    let b = num(opts.b, "b")?.unwrap_or(0.0);
    let ensemble = match family.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("hermite") | Some("gue") => EnsembleSpec::Hermite,
        Some("laguerre") | Some("laue") => EnsembleSpec::Laguerre { a },
        Some("jacobi") | Some("jue") => EnsembleSpec::Jacobi { a, b },
        Some("legendre") | Some("leue") => EnsembleSpec::legendre(),
        Some("custom") => {
            let path = opts
                .custom_csv
                .clone()
                .or_else(|| get("custom_csv").map(PathBuf::from))
                .ok_or_else(|| Error::usage(MODULE, "--ensemble custom needs --custom-csv"))?;
            let need = |flag, key| {
                num(flag, key)?.ok_or_else(|| Error::usage(MODULE, format!("--ensemble custom needs --{key}")))
            };
            let growth = GrowthParams::new(need(opts.xi, "xi")?, need(opts.zeta, "zeta")?, need(opts.t, "t")?)?;
            let file = fs::File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            EnsembleSpec::Custom(CustomRecurrence::from_csv(file, growth)?)
        }
        Some(other) => return Err(Error::usage(MODULE, format!("unknown ensemble {other:?}"))),
    };
    ensemble.validate()?;
    let list = |flag: &Option<String>, key: &str, default: &[usize]| -> Result<Vec<usize>> {
        match flag.as_deref().or(get(key)) {
            Some(text) => parse_list(text, key),
            None => Ok(default.to_vec()),
        }
    };
    let (default_n, default_k): (&[usize], &[usize]) = match command {
        Command::Perturb => (&[100, 200, 400, 800], &[1, 2, 3, 4]),
        Command::Recurrence => (&[10], &[2]),
        _ => (&[100], &[1, 2, 3, 4, 5, 6, 7, 8]),
    };
    let ns = list(&opts.n, "n", default_n)?;
    let ks = list(&opts.k, "k", default_k)?;
    if ns.contains(&0) && command != Command::Recurrence {
        return Err(Error::usage(MODULE, "n values must be positive"));
    }
    let grid = opts.grid.as_deref().or(get("grid")).map(parse_grid).transpose()?;
    let perturbation = opts.perturb.as_deref().or(get("perturb")).map(PerturbationSpec::parse).transpose()?;
    let samples = match (opts.samples, get("samples")) {
        (Some(s), _) => s,
        (None, Some(v)) => parse_number("samples", v)?,
        (None, None) => 200,
    };
    let seed = match (opts.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => parse_number("seed", v)?,
        (None, None) => 0,
    };
    let out = opts.out.or_else(|| get("out").map(PathBuf::from));
    let format = match (opts.format, get("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => Format::from_str(v, true).map_err(|_| Error::usage(MODULE, format!("bad format {v:?}")))?,
        (None, None) => Format::Csv,
    };
    Ok(ExperimentConfig { command, ensemble, ns, ks, grid, perturbation, samples, seed, out, format })
}

/// Decimal rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn json_text(value: &impl serde::Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::usage(MODULE, format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn emit(config: &ExperimentConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn single_n(config: &ExperimentConfig) -> Result<usize> {
    match config.ns[..] {
        [n] => Ok(n),
        _ => Err(Error::usage(MODULE, "this command takes a single --n")),
    }
}

fn execute(config: &ExperimentConfig) -> Result<i32> {
    match config.command {
        Command::Recurrence => recurrence(config)?,
        Command::Moments => moments(config)?,
        Command::Limit => limit(config)?,
        Command::Density => density(config)?,
        Command::Perturb => perturb(config)?,
        Command::Sample => sample(config)?,
        Command::Report => return report(config),
    }
    Ok(0)
}

fn recurrence(config: &ExperimentConfig) -> Result<()> {
    let n_max = config.ns.iter().copied().max().unwrap_or(0);
    let table = recurrence_coefficients(&config.ensemble, n_max)?;
    let rows = (0..=n_max).map(|n| (n, table.alpha()[n], table.beta()[n]));
    let text = match config.format {
        Format::Csv => csv_table(
            &["n", "alpha_n", "beta_n"],
            rows.map(|(n, a, b)| vec![n.to_string(), fmt_f64(a), fmt_f64(b)]),
        )?,
        Format::Json => json_text(&rows.map(|(n, a, b)| json!({"n": n, "alpha_n": a, "beta_n": b})).collect::<Vec<_>>())?,
    };
    emit(config, &text)
}

pub(crate) fn moment_row(r: &MomentReport) -> Vec<String> {
    vec![r.ensemble.clone(), r.n.to_string(), r.k.to_string(), fmt_f64(r.d_n), fmt_f64(r.m_n_k), fmt_f64(r.m_limit), fmt_f64(r.gap)]
}

fn moments(config: &ExperimentConfig) -> Result<()> {
    let rows = moment_reports(&config.ensemble, &config.ns, &config.ks)?;
    let text = match config.format {
        Format::Csv => csv_table(&MomentReport::CSV_HEADER, rows.iter().map(moment_row))?,
        Format::Json => json_text(&rows)?,
    };
    emit(config, &text)
}

fn grid_json(grid: &DensityGrid) -> serde_json::Value {
    json!({
        "spec": grid.label,
        "kind": if grid.n.is_some() { "scaled_finite_n" } else { "limit" },
        "n": grid.n,
        "D_n": grid.d_n,
        "mass": grid.mass,
        "truncation_deficit": grid.truncation_deficit,
        "x": grid.x,
        "y": grid.y,
    })
}

fn limit(config: &ExperimentConfig) -> Result<()> {
    let params = growth_parameters(&config.ensemble)?;
    let rows = config
        .ks
        .iter()
        .map(|&k| Ok((k, limit_moment(&params, k)?)))
        .collect::<Result<Vec<(usize, f64)>>>()?;
    let grid = match config.grid {
        Some((lo, hi, count)) => {
            let family = LimitFamily::for_spec(&config.ensemble)
                .ok_or_else(|| Error::capability(MODULE, "limit densities exist only for the classical presets"))?;
            Some(limit_grid(family, &linspace(lo, hi, count))?)
        }
        None => None,
    };
    let name = config.ensemble.name();
    match config.format {
        Format::Csv => {
            let text = csv_table(
                &["ensemble", "k", "M_limit"],
                rows.iter().map(|&(k, m)| vec![name.to_string(), k.to_string(), fmt_f64(m)]),
            )?;
            match (&grid, &config.out) {
                (Some(g), Some(path)) => {
                    write_atomic(&sibling(path, ".density.csv"), &g.to_csv())?;
                    emit(config, &text)
                }
                (Some(g), None) => emit(config, &format!("{text}\n{}", g.to_csv())),
                (None, _) => emit(config, &text),
            }
        }
        Format::Json => {
            let moments: Vec<_> = rows.iter().map(|&(k, m)| json!({"ensemble": name, "k": k, "M_limit": m})).collect();
            let value = json!({"moments": moments, "density": grid.as_ref().map(grid_json)});
            emit(config, &json_text(&value)?)
        }
    }
}

fn density(config: &ExperimentConfig) -> Result<()> {
    let n = single_n(config)?;
    let scaled = ScaledDensity::new(&config.ensemble, n)?;
    let points = match config.grid {
        Some((lo, hi, count)) => linspace(lo, hi, count),
        None => default_grid(&config.ensemble, n, 401)?,
    };
    let grid = density_on_grid(&scaled, &points)?;
    let text = match config.format {
        Format::Csv => grid.to_csv(),
        Format::Json => json_text(&grid_json(&grid))?,
    };
    emit(config, &text)
}

pub(crate) fn gap_row(r: &GapRow) -> Vec<String> {
    vec![r.ensemble.clone(), r.p.clone(), r.n.to_string(), r.k.to_string(), fmt_f64(r.m_n_k), fmt_f64(r.m_hat_n_k), fmt_f64(r.gap)]
}

fn perturb(config: &ExperimentConfig) -> Result<()> {
    let p = config.perturbation.as_ref().ok_or_else(|| Error::usage(MODULE, "perturb needs --perturb c0,c1,..."))?;
    let rows = gap_rows(&config.ensemble, p, &config.ns, &config.ks)?;
    let text = match config.format {
        Format::Csv => csv_table(&GapRow::CSV_HEADER, rows.iter().map(gap_row))?,
        Format::Json => json_text(&rows)?,
    };
    emit(config, &text)
}

fn sample(config: &ExperimentConfig) -> Result<()> {
    let n = single_n(config)?;
    if config.samples == 0 {
        return Err(Error::usage(MODULE, "--samples must be positive"));
    }
    let samples = sample_batch(&config.ensemble, n, config.samples, config.seed)?;
    let d_n = ensemble_dn(&config.ensemble, n)?;
    let empirical = empirical_scaled_cdf(&samples, d_n)?;
    let table = ScaledDensity::new(&config.ensemble, n)?.cdf_table()?;
    let summary = SampleSummary {
        n,
        samples: config.samples,
        d_n,
        ks_distance: ks_distance(&empirical, |y| table.eval(y)),
    };
    match config.format {
        Format::Json => emit(config, &json_text(&summary)?),
        Format::Csv => {
            let rows = eigenvalue_rows(&samples);
            let text = csv_table(
                &["sample_id", "index", "lambda"],
                rows.iter().map(|r| vec![r.sample_id.to_string(), r.index.to_string(), fmt_f64(r.lambda)]),
            )?;
            emit(config, &text)?;
            match &config.out {
                Some(path) => write_atomic(&sibling(path, ".summary.json"), &json_text(&summary)?),
                None => {
                    eprint!("{}", json_text(&summary)?);
                    Ok(())
                }
            }
        }
    }
}

fn report(config: &ExperimentConfig) -> Result<i32> {
    let report = acceptance::run_all();
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    emit(config, &json_text(&report)?)?;
    Ok(if report.all_passed() { 0 } else { 1 })
}

//! `wronsk` command-line front end.
//!
//! Exit codes: 0 on success (including empty results), 1 on numerical
//! failure, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wronsk::export::{
    format_float, write_bound_states, write_critical_couplings, write_scan_table,
    write_wavefunction, ExportError, Metadata,
};
use wronsk::solver::{
    critical_couplings, energy_window, exact_poschl_teller, find_bound_states, scan_coordinate,
    scan_coupling, scan_energy, wavefunction, Mixture, Refiner, SolverError, SolverOptions, XEval,
};
use wronsk::{builtin, parse_potential, Params, Potential, PotentialError};

#[derive(Debug, Parser)]
#[command(
    name = "wronsk",
    version,
    about = "Bound states of 1D potential wells by Wronskian matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find all bound states.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: EnergyWindow,
    },
    /// Tabulate the quantization conditions.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: EnergyWindow,
        /// What to vary.
        #[arg(long, value_enum, default_value_t = ScanMode::Energy)]
        mode: ScanMode,
        /// Coupling range (coupling mode) or coordinate range (x mode).
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        /// Energy for x mode.
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Parameter varied in coupling mode.
        #[arg(long, default_value = "v0")]
        coupling: String,
    },
    /// Couplings at which new bound states appear at threshold.
    Critical {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_range, default_value = "0.2:10", allow_hyphen_values = true)]
        range: (f64, f64),
        /// Parameter to vary; with `--expr` the family is `v0 * expr`.
        #[arg(long, default_value = "v0")]
        coupling: String,
    },
    /// Sample the (unnormalized) wavefunction.
    Wavefunction {
        #[command(flatten)]
        common: Common,
        /// Solve first and take state N.
        #[arg(long, conflicts_with = "energy")]
        state: Option<usize>,
        /// Use this energy directly.
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Coefficients A,B of A*C + B*S (default: parity of the state).
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        mixture: Option<(f64, f64)>,
    },
    /// Closed-form Poschl-Teller energies.
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        v0: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanMode {
    Energy,
    Coupling,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct PotentialSpec {
    /// poschl_teller, gaussian or square_well.
    #[arg(long, conflicts_with = "expr")]
    builtin: Option<String>,
    /// Built-in parameter `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param, requires = "builtin", allow_hyphen_values = true)]
    params: Vec<(String, f64)>,
    /// Potential as an expression in `x`.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
}

#[derive(Debug, Args)]
struct Numerics {
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Matching distance, or `auto`.
    #[arg(long = "x-eval", default_value = "auto", value_parser = parse_x_eval)]
    x_eval: XEval,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "n-scan", default_value_t = 400)]
    n_scan: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Refine roots with Brent's method instead of bisection.
    #[arg(long)]
    brent: bool,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit the `#` metadata block.
    #[arg(long = "no-header")]
    no_header: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    potential: PotentialSpec,
    #[command(flatten)]
    numerics: Numerics,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct EnergyWindow {
    #[arg(long, allow_hyphen_values = true)]
    emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    emax: Option<f64>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("`{a}` is not a number"))?;
    let hi: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("`{b}` is not a number"))?;
    if !(lo < hi) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got `{s}`"))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| format!("`{a}` is not a number"))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| format!("`{b}` is not a number"))?;
    Ok((a, b))
}

fn parse_x_eval(s: &str) -> Result<XEval, String> {
    if s == "auto" {
        return Ok(XEval::Auto);
    }
    s.parse()
        .map(XEval::Fixed)
        .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidInput(_) | SolverError::DegenerateMixture => {
                Failure::Usage(e.to_string())
            }
            SolverError::Potential(p) => p.into(),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<PotentialError> for Failure {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Tail { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ExportError> for Failure {
    fn from(e: ExportError) -> Self {
        Failure::Numerical(format!("output: {e}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("output: {e}"))
    }
}

impl PotentialSpec {
    fn params(&self) -> Params {
        self.params.iter().cloned().collect()
    }

    fn build(&self) -> Result<Potential, Failure> {
        match (&self.builtin, &self.expr) {
            (Some(name), None) => Ok(builtin(name, &self.params())?),
            (None, Some(src)) => Ok(parse_potential(src)?),
            _ => Err(Failure::Usage(
                "give exactly one of --builtin or --expr".into(),
            )),
        }
    }

    /// Potential family over the named coupling.
    fn family(&self, coupling: &str) -> Result<Box<wronsk::solver::Family<'_>>, Failure> {
        match (&self.builtin, &self.expr) {
            (Some(name), None) => {
                let name = name.clone();
                let base = self.params();
                let coupling = coupling.to_string();
                Ok(Box::new(move |v| {
                    let mut params = base.clone();
                    params.insert(coupling.clone(), v);
                    builtin(&name, &params)
                }))
            }
            (None, Some(_)) => {
                let shape = self.build()?;
                Ok(Box::new(move |v| Ok(shape.scaled(v))))
            }
            _ => Err(Failure::Usage(
                "give exactly one of --builtin or --expr".into(),
            )),
        }
    }

    fn describe(&self) -> String {
        match (&self.builtin, &self.expr) {
            (Some(name), _) => {
                let params: Vec<String> = self
                    .params
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                format!("{name}({})", params.join(", "))
            }
            (_, Some(src)) => src.clone(),
            _ => String::new(),
        }
    }
}

impl Numerics {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            h: self.h,
            x_eval: self.x_eval,
            tol: self.tol,
            n_scan: self.n_scan,
            jobs: self.jobs.max(1),
            refiner: if self.brent {
                Refiner::Brent
            } else {
                Refiner::Bisection
            },
            ..Default::default()
        }
    }

    fn metadata(&self, meta: Metadata) -> Metadata {
        let x_eval = match self.x_eval {
            XEval::Auto => "auto".to_string(),
            XEval::Fixed(x) => x.to_string(),
        };
        meta.with("h", self.h)
            .with("x_eval", x_eval)
            .with("tol", format!("{:e}", self.tol))
            .with("n_scan", self.n_scan)
    }
}

impl Output {
    /// Renders `write` into the requested destination and format.
    fn emit(
        &self,
        meta: Metadata,
        write: impl FnOnce(&mut Vec<u8>, Option<&Metadata>) -> Result<(), ExportError>,
    ) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write(&mut buf, (!self.no_header).then_some(&meta))?;
        let text = String::from_utf8(buf).expect("writers emit UTF-8");
        let text = match self.format {
            Format::Csv => text,
            Format::Table => align(&text),
        };
        match &self.output {
            Some(path) => {
                let mut f = BufWriter::new(File::create(path)?);
                f.write_all(text.as_bytes())?;
                f.flush()?;
            }
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Space-aligned columns; comment lines pass through.
fn align(csv_text: &str) -> String {
    let rows: Vec<Option<Vec<&str>>> = csv_text
        .lines()
        .map(|l| (!l.starts_with('#')).then(|| l.split(',').collect()))
        .collect();
    let mut widths = Vec::new();
    for cells in rows.iter().flatten() {
        widths.resize(widths.len().max(cells.len()), 0);
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for (line, cells) in csv_text.lines().zip(&rows) {
        match cells {
            None => out.push_str(line),
            Some(cells) => {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                out.push_str(padded.join("  ").trim_end());
            }
        }
        out.push('\n');
    }
    out
}

fn base_metadata(command: &str, spec: &PotentialSpec, numerics: &Numerics) -> Metadata {
    numerics.metadata(
        Metadata::new()
            .with("command", command)
            .with("potential", spec.describe()),
    )
}

fn solve_options(numerics: &Numerics, window: &EnergyWindow) -> SolverOptions {
    SolverOptions {
        eps_floor: window.emin,
        eps_ceiling: window.emax,
        ..numerics.options()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { common, window } => {
            let p = common.potential.build()?;
            let opts = solve_options(&common.numerics, &window);
            let states = find_bound_states(&p, &opts)?;
            let meta = base_metadata("solve", &common.potential, &common.numerics)
                .with("states", states.len());
            common
                .out
                .emit(meta, |w, m| write_bound_states(w, &states, m))
        }
        Command::Scan {
            common,
            window,
            mode,
            range,
            energy,
            coupling,
        } => {
            let opts = solve_options(&common.numerics, &window);
            let mut meta = base_metadata("scan", &common.potential, &common.numerics);
            let table = match mode {
                ScanMode::Energy => {
                    let p = common.potential.build()?;
                    let (lo, hi) = energy_window(&p, &opts)?;
                    meta.push("mode", "energy");
                    meta.push(
                        "energy_range",
                        format!("{}:{}", format_float(lo), format_float(hi)),
                    );
                    scan_energy(&p, lo, hi, opts.n_scan, &opts)?
                }
                ScanMode::Coupling => {
                    let (lo, hi) = range.unwrap_or((0.2, 10.0));
                    let family = common.potential.family(&coupling)?;
                    meta.push("mode", "coupling");
                    meta.push("coupling", &coupling);
                    meta.push("range", format!("{lo}:{hi}"));
                    scan_coupling(&*family, lo, hi, opts.n_scan, &opts)?
                }
                ScanMode::X => {
                    let p = common.potential.build()?;
                    let energy =
                        energy.ok_or_else(|| Failure::Usage("x mode needs --energy".into()))?;
                    let (lo, hi) = range.unwrap_or((opts.x0, 5.0));
                    meta.push("mode", "x");
                    meta.push("energy", energy);
                    scan_coordinate(&p, energy, lo, hi, &opts)?
                }
            };
            common.out.emit(meta, |w, m| write_scan_table(w, &table, m))
        }
        Command::Critical {
            common,
            range,
            coupling,
        } => {
            let family = common.potential.family(&coupling)?;
            let opts = common.numerics.options();
            let found =
                critical_couplings(&*family, range.0, range.1, opts.n_scan, opts.tol, &opts)?;
            let meta = base_metadata("critical", &common.potential, &common.numerics)
                .with("coupling", &coupling)
                .with("range", format!("{}:{}", range.0, range.1));
            common
                .out
                .emit(meta, |w, m| write_critical_couplings(w, &found, m))
        }
        Command::Wavefunction {
            common,
            state,
            energy,
            mixture,
        } => {
            let p = common.potential.build()?;
            let opts = common.numerics.options();
            let (energy, parity) = match (state, energy) {
                (_, Some(e)) => (e, None),
                (n, None) => {
                    let n = n.unwrap_or(0);
                    let states = find_bound_states(&p, &opts)?;
                    let s = states.get(n).ok_or_else(|| {
                        Failure::Numerical(format!(
                            "state {n} requested but only {} bound states found",
                            states.len()
                        ))
                    })?;
                    (s.energy, Some(s.parity))
                }
            };
            let mixture = match (mixture, parity) {
                (Some((a2, b2)), _) => Mixture::Custom { a2, b2 },
                (None, Some(wronsk::solver::StateParity::Odd)) => Mixture::Odd,
                (None, Some(wronsk::solver::StateParity::None)) => {
                    return Err(Failure::Usage(
                        "states of asymmetric potentials need an explicit --mixture A,B".into(),
                    ))
                }
                _ => Mixture::Even,
            };
            let wf = wavefunction(&p, energy, mixture, &opts)?;
            let meta = base_metadata("wavefunction", &common.potential, &common.numerics)
                .with("energy", format_float(wf.energy))
                .with("mixture", format!("{},{}", wf.a2, wf.b2));
            common.out.emit(meta, |w, m| write_wavefunction(w, &wf, m))
        }
        Command::Oracle { v0, out } => {
            let levels = exact_poschl_teller(v0)?;
            let meta = Metadata::new()
                .with("command", "oracle")
                .with("potential", format!("poschl_teller(v0={v0})"));
            out.emit(meta, |w, m| {
                if let Some(m) = m {
                    for (k, v) in m.entries() {
                        writeln!(w, "# {k}: {v}")?;
                    }
                }
                writeln!(w, "n,energy")?;
                for (n, e) in levels.iter().enumerate() {
                    writeln!(w, "{n},{}", format_float(*e))?;
                }
                Ok(())
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(msg)) => {
            eprintln!("wronsk: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("wronsk: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_param("v0=6"), Ok(("v0".into(), 6.0)));
        assert!(parse_param("v0").is_err());
        assert_eq!(parse_range("-1.5:2"), Ok((-1.5, 2.0)));
        assert!(parse_range("2:1").is_err());
        assert_eq!(parse_pair("1,-0.5"), Ok((1.0, -0.5)));
        assert_eq!(parse_x_eval("auto"), Ok(XEval::Auto));
        assert_eq!(parse_x_eval("5"), Ok(XEval::Fixed(5.0)));
        assert!(parse_x_eval("far").is_err());
    }

    #[test]
    fn aligned_table() {
        let text = "# a: 1\nn,energy\n0,-4.5\n10,-2\n";
        assert_eq!(align(text), "# a: 1\n n  energy\n 0    -4.5\n10      -2\n");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

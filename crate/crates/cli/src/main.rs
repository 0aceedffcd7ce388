//! `icnl`: run, sweep and check circuit files.

use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use icnl_core::dsl::{self, range_grid, Diagnostic, Document, Expr};
use icnl_core::experiments::{bell_source, default_superposition, frustrated_source, object_source, superposition_source};
use icnl_core::fock::{compare_first_order, OracleConfig};
use icnl_core::report::{OracleEntry, RunReport, SweepReport};
use icnl_core::vacuum_state;

#[derive(Parser)]
#[command(name = "icnl", version, about = "First-order simulator for induced-coherence circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit file and report its output state.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Report the conditional density on these paths (comma separated).
        #[arg(long, value_delimiter = ',')]
        density: Option<Vec<String>>,
        /// Cross-check against the truncated Fock-space simulation.
        #[arg(long)]
        oracle: bool,
        /// Coupling for the oracle.
        #[arg(long, default_value_t = 1e-2, requires = "oracle")]
        g: f64,
        /// Pump amplitude for the oracle.
        #[arg(long, default_value_t = 1.0, requires = "oracle")]
        alpha: f64,
        /// Allowed deviation in units of |g·alpha|².
        #[arg(long, default_value_t = 10.0, requires = "oracle")]
        bound: f64,
    },
    /// Run a file once per value of a parameter.
    Sweep {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Parameter to sweep; defaults to the file's `sweep` statement.
        #[arg(long)]
        param: Option<String>,
        #[arg(long, requires = "param")]
        from: Option<f64>,
        #[arg(long, requires = "param")]
        to: Option<f64>,
        #[arg(long, requires = "param")]
        steps: Option<usize>,
    },
    /// Parse and validate a file without running it.
    Check {
        file: PathBuf,
        #[arg(long = "set", value_name = "NAME=EXPR")]
        set: Vec<String>,
    },
    /// Print a file in canonical form.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
    /// Write the example circuit files.
    Examples {
        #[arg(default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Override a parameter; may be repeated.
    #[arg(long = "set", value_name = "NAME=EXPR")]
    set: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

enum Failure {
    /// Problems in the input file, already rendered.
    Diagnostics(String),
    Runtime(String),
}

impl From<icnl_core::Error> for Failure {
    fn from(e: icnl_core::Error) -> Failure {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Failure {
        Failure::Runtime(e.to_string())
    }
}

fn use_color() -> bool {
    match std::env::var("ICNL_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => io::stderr().is_terminal(),
    }
}

fn render_all(file: &Path, source: &str, diags: &[Diagnostic]) -> String {
    let color = use_color();
    let name = file.display().to_string();
    let mut out: Vec<String> = diags.iter().map(|d| d.render(&name, source, color)).collect();
    out.push(format!("{} error{}", diags.len(), if diags.len() == 1 { "" } else { "s" }));
    out.join("\n")
}

struct Loaded {
    path: PathBuf,
    source: String,
    doc: Document,
}

impl Loaded {
    fn read(path: &Path) -> Result<Loaded, Failure> {
        let source = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        let doc = dsl::parse_unchecked(&source).map_err(|ds| Failure::Diagnostics(render_all(path, &source, &ds)))?;
        Ok(Loaded { path: path.to_path_buf(), source, doc })
    }

    fn fail(&self, ds: &[Diagnostic]) -> Failure {
        Failure::Diagnostics(render_all(&self.path, &self.source, ds))
    }

    fn overrides(&self, set: &[String]) -> Result<Vec<(String, Expr)>, Failure> {
        let mut out = Vec::new();
        let mut bad = Vec::new();
        for s in set {
            match dsl::parse_override(s) {
                Ok(o) => out.push(o),
                Err(d) => bad.push(d),
            }
        }
        if bad.is_empty() {
            Ok(out)
        } else {
            Err(Failure::Diagnostics(render_all(Path::new("--set"), &set.join("\n"), &bad)))
        }
    }

    fn lower(&self, overrides: &[(String, Expr)]) -> Result<dsl::Lowered, Failure> {
        self.doc.lower(overrides).map_err(|ds| self.fail(&ds))
    }
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out.write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn csv_out<I, R>(header: Option<Vec<String>>, rows: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(file: &Path, common: &Common, density: Option<Vec<String>>, oracle: Option<(f64, f64, f64)>) -> Result<(), Failure> {
    let loaded = Loaded::read(file)?;
    let overrides = loaded.overrides(&common.set)?;
    let lowered = loaded.lower(&overrides)?;
    let program = &lowered.program;
    let execution = program.execute()?;
    let mut report = RunReport::from_execution(&execution, density.as_deref())?;

    if let Some((g, alpha, bound)) = oracle {
        if program.initial != vacuum_state(program.circuit.paths())? {
            return Err(icnl_core::Error::NonVacuumInitial.into());
        }
        let cfg = OracleConfig::new(Complex64::new(g, 0.0), Complex64::new(alpha, 0.0));
        let r = compare_first_order(&program.circuit, &cfg, bound)?;
        report.oracle = Some(OracleEntry::from(&r));
    }

    match common.format {
        Format::Json => emit(&report.to_json()),
        Format::Text => emit(&report.to_text()),
        Format::Csv => csv_out(Some(["quantity", "label", "re", "im"].map(String::from).to_vec()), report.csv_rows()),
    }
}

fn sweep(file: &Path, common: &Common, param: Option<String>, range: (Option<f64>, Option<f64>, Option<usize>)) -> Result<(), Failure> {
    let loaded = Loaded::read(file)?;
    let overrides = loaded.overrides(&common.set)?;
    let lowered = loaded.lower(&overrides)?;
    let (name, grid) = match (param, lowered.sweep) {
        (Some(name), declared) => {
            let grid = match range {
                (Some(a), Some(b), Some(n)) => range_grid(a, b, n),
                (None, None, None) => match declared {
                    Some((d, grid)) if d == name => grid,
                    _ => return Err(Failure::Runtime(format!("no grid for `{name}`: give --from, --to and --steps"))),
                },
                _ => return Err(Failure::Runtime("--from, --to and --steps go together".into())),
            };
            (name, grid)
        }
        (None, Some(declared)) => declared,
        (None, None) => return Err(Failure::Runtime("the file has no sweep statement; pass --param".into())),
    };
    if !lowered.params.iter().any(|(n, _)| *n == name) {
        return Err(Failure::Runtime(format!("unknown parameter `{name}`")));
    }
    let rows = loaded.doc.run_sweep(&name, &grid, &overrides)?;
    let report = SweepReport { param: name, rows };
    match common.format {
        Format::Json => emit(&report.to_json()),
        Format::Text => emit(&report.to_text()),
        Format::Csv => csv_out(Some(report.csv_header()), report.csv_rows()),
    }
}

fn check(file: &Path, set: &[String]) -> Result<(), Failure> {
    let loaded = Loaded::read(file)?;
    let overrides = loaded.overrides(set)?;
    let lowered = loaded.lower(&overrides)?;
    let c = &lowered.program.circuit;
    emit(&format!("{}: ok, {} paths, {} gates", file.display(), c.paths().len(), c.len()))
}

fn fmt(file: &Path, write: bool) -> Result<(), Failure> {
    let loaded = Loaded::read(file)?;
    let text = loaded.doc.to_source();
    if write {
        std::fs::write(file, text)?;
        Ok(())
    } else {
        emit(&text)
    }
}

fn examples(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("frustrated.icl", frustrated_source(std::f64::consts::PI)),
        ("bell.icl", bell_source()),
        ("object.icl", object_source(0.7, std::f64::consts::FRAC_PI_4, true)),
        ("superposition.icl", superposition_source(&default_superposition(), &[])?),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        emit(&path.display().to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, common, density, oracle, g, alpha, bound } => {
            run(&file, &common, density, oracle.then_some((g, alpha, bound)))
        }
        Command::Sweep { file, common, param, from, to, steps } => sweep(&file, &common, param, (from, to, steps)),
        Command::Check { file, set } => check(&file, &set),
        Command::Fmt { file, write } => fmt(&file, write),
        Command::Examples { dir } => examples(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostics(text)) => {
            eprintln!("{text}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! `vinesim` command-line front end. Every subcommand except `serve` talks to
//! the simulation service, either the one at `--server` or a private one
//! started in-process.

use std::fmt;
use std::fs;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vinesim_client::{Client, ClientError};
use vinesim_core::plot::{deflection_svg, run_svg};
use vinesim_core::protocol::RunRequest;
use vinesim_core::scenario::{golden_names, golden_source, RunRecord, Scenario, ScenarioError};

/// Exit statuses.
mod status {
    pub const ASSERTION_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const RUNTIME: u8 = 5;
    pub const IO: u8 = 6;
    pub const SERVICE: u8 = 7;
    pub const PORT_IN_USE: u8 = 8;
}

#[derive(Parser, Debug)]
#[command(name = "vinesim", version, about = "Quasi-static vine robot simulator")]
struct Cli {
    /// Service root URL; a private in-process service is used when omitted.
    #[arg(long, global = true)]
    server: Option<String>,
    /// Directory for run artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Reserved. The simulator is deterministic and ignores it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a scenario file or a built-in scenario by name.
    Run { scenario: String },
    /// Compare growth time against the layer-jamming surrogate.
    Bench,
    /// Fit the model to the embedded catalog and report load-deflection curves.
    Calibrate,
    /// List built-in scenarios.
    List,
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value_t = Ipv4Addr::LOCALHOST)]
        host: Ipv4Addr,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Parse { .. } => status::PARSE,
            ScenarioError::Validation(_) => status::VALIDATION,
            ScenarioError::Runtime(_) => status::RUNTIME,
            ScenarioError::Io(_) => status::IO,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let code = match e.kind() {
            "parse" => status::PARSE,
            "validation" | "not_found" => status::VALIDATION,
            "runtime" => status::RUNTIME,
            "io" => status::IO,
            _ => status::SERVICE,
        };
        Self::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(status::IO, format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn out_dir(cli: &Cli) -> Result<Option<&Path>, Failure> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

async fn connect(cli: &Cli) -> Result<Client, Failure> {
    if let Some(url) = &cli.server {
        return Ok(Client::new(url.clone()));
    }
    let addr = vinesim_service::spawn(SocketAddr::from((Ipv4Addr::LOCALHOST, 0)))
        .await
        .map_err(|e| Failure::new(status::SERVICE, format!("cannot start local service: {e}")))?;
    Ok(Client::new(format!("http://{addr}")))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

fn run_request(arg: &str) -> Result<RunRequest, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(RunRequest::Scenario(Box::new(Scenario::load(path)?)));
    }
    if golden_source(arg).is_some() {
        return Ok(RunRequest::Golden(arg.to_string()));
    }
    Err(Failure::new(
        status::IO,
        format!("{arg}: no such file or built-in scenario (see `vinesim list`)"),
    ))
}

fn summarize(r: &RunRecord) -> String {
    let mut s = String::new();
    if let Some(note) = &r.model_note {
        s += &format!("note: {note}\n");
    }
    if let Some(last) = r.final_sample() {
        s += &format!(
            "{}: {} steps, t = {:.2} s, length {:.3} m, phase {}\n",
            r.scenario,
            r.samples.len(),
            last.t,
            last.deployed_length,
            last.phase
        );
    }
    for a in &r.assertions {
        s += &format!(
            "  {} {}: {}\n",
            if a.passed { "ok  " } else { "FAIL" },
            a.description,
            a.detail
        );
    }
    s
}

async fn run(cli: &Cli, scenario: &str) -> Result<(), Failure> {
    let req = run_request(scenario)?;
    let client = connect(cli).await?;
    let record = client.run(&req).await?;
    if let Some(dir) = out_dir(cli)? {
        write(&dir.join(format!("{}.csv", record.scenario)), &record.to_csv())?;
        write(&dir.join(format!("{}.json", record.scenario)), &json(&record))?;
        write(&dir.join(format!("{}.svg", record.scenario)), &run_svg(&record))?;
    }
    match cli.format {
        Format::Text => print!("{}", summarize(&record)),
        Format::Csv => {
            print!("{}", record.to_csv());
            eprint!("{}", summarize(&record));
        }
        Format::Json => {
            print!("{}", json(&record));
            eprint!("{}", summarize(&record));
        }
    }
    if record.passed() {
        Ok(())
    } else {
        let failed = record.assertions.iter().filter(|a| !a.passed).count();
        Err(Failure::new(
            status::ASSERTION_FAILED,
            format!("{failed} assertion(s) failed"),
        ))
    }
}

async fn bench(cli: &Cli) -> Result<(), Failure> {
    let table = connect(cli).await?.bench().await?;
    let text = match cli.format {
        Format::Text => table.to_text(),
        Format::Csv => table.to_csv(),
        Format::Json => json(&table),
    };
    if let Some(dir) = out_dir(cli)? {
        write(&dir.join("bench.csv"), &table.to_csv())?;
    }
    print!("{text}");
    Ok(())
}

async fn calibrate(cli: &Cli) -> Result<(), Failure> {
    let report = connect(cli).await?.calibrate().await?;
    let mut csv = String::from("configuration,load_kg,deflection_m\n");
    for (name, curve) in &report.curves {
        for (m, d) in curve {
            csv += &format!("{name},{m:.3},{d:.6}\n");
        }
    }
    if let Some(dir) = out_dir(cli)? {
        write(&dir.join("calibration.json"), &json(&report))?;
        write(&dir.join("deflection.csv"), &csv)?;
        write(&dir.join("deflection.svg"), &deflection_svg(&report.curves))?;
    }
    match cli.format {
        Format::Json => print!("{}", json(&report)),
        Format::Csv => print!("{csv}"),
        Format::Text => {
            let m = &report.model;
            println!(
                "contact area {:.4e} m^2 (R² {:.4})",
                m.contact_area, m.contact.r_squared
            );
            for (kind, fit) in &m.fits {
                println!(
                    "{:<24} EI {:.4} N*m^2, trunk EI {:.4}, deflection {:.4} m (target {:.4})",
                    kind.label(),
                    fit.cantilever_ei(),
                    fit.trunk_ei,
                    fit.solved_deflection,
                    fit.target_deflection
                );
            }
            println!("stiffness ratio {:.2}", report.stiffness_ratio);
        }
    }
    Ok(())
}

async fn serve(host: Ipv4Addr, port: u16) -> Result<(), Failure> {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let addr = SocketAddr::from((host, port));
    let listener = vinesim_service::bind(addr).await.map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::AddrInUse {
            status::PORT_IN_USE
        } else {
            status::IO
        };
        Failure::new(code, format!("cannot bind {addr}: {e}"))
    })?;
    eprintln!(
        "listening on http://{}",
        listener
            .local_addr()
            .map_err(|e| Failure::new(status::IO, e.to_string()))?
    );
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    vinesim_service::serve(listener, shutdown)
        .await
        .map_err(|e| Failure::new(status::SERVICE, e.to_string()))
}

async fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Cmd::Run { scenario } => run(cli, scenario).await,
        Cmd::Bench => bench(cli).await,
        Cmd::Calibrate => calibrate(cli).await,
        Cmd::List => {
            for name in golden_names() {
                let s = Scenario::golden(name)?;
                println!("{name:<24} {}", s.description);
            }
            Ok(())
        }
        Cmd::Serve { port, host } => serve(*host, *port).await,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { status::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(status::RUNTIME);
        }
    };
    match rt.block_on(dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

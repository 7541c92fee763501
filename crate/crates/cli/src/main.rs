//! copula-crm: simulation studies, scenario grids, MTD curves and the trial
//! service from the command line.

mod grids;
mod output;
mod simulate;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use copula_crm_service::TrialService;

#[derive(Parser)]
#[command(name = "copula-crm", version, about = "Drug-combination dose finding with partial toxicity attribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated simulated trials and write operating characteristics
    Simulate(simulate::SimulateArgs),
    /// Tabulate DLT probabilities of the working model on a dose grid
    ScenarioTable(grids::TableArgs),
    /// Sample the MTD contour of given parameters
    MtdCurve(grids::CurveArgs),
    /// Serve the trial-conduct HTTP API
    Serve(ServeArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Directory holding the trial event logs
    #[arg(long, env = "COPULA_CRM_DATA_DIR", default_value = "trials")]
    data_dir: PathBuf,
}

/// An error with the process exit code it maps to: 2 for bad input, 1 for
/// failures while running.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    error: anyhow::Error,
}

pub fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

macro_rules! runtime_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure { code: 1, error: e.into() }
            }
        }
    )*};
}

runtime_error!(std::io::Error, serde_json::Error, copula_crm::Error, copula_crm_service::ServiceError);

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let service = Arc::new(TrialService::open(&args.data_dir)?);
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| anyhow::anyhow!("cannot bind {addr}: {e}"))?;
        println!("listening on http://{} (data in {})", listener.local_addr()?, args.data_dir.display());
        copula_crm_service::serve_on(listener, service).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::ScenarioTable(a) => grids::scenario_table(a),
        Command::MtdCurve(a) => grids::curve(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

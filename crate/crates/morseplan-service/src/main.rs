use std::process::ExitCode;

use clap::Parser;
use morseplan_service::archive::SurfaceArchive;
use morseplan_service::cli::{execute, load_config, Cli, Command};
use morseplan_service::http::{self, AppState};
use morseplan_service::ServiceError;

fn serve(cli: &Cli) -> Result<(), ServiceError> {
    let Command::Serve { archive, config } = &cli.command else {
        unreachable!()
    };
    let state = AppState::new();
    for p in archive {
        let d = state.load_archive(SurfaceArchive::read(p)?)?;
        eprintln!("loaded {} as plan {}", p.display(), d.plan_id);
    }
    for p in config {
        let d = state.register(load_config(p)?)?;
        eprintln!("registered {} as plan {}", p.display(), d.plan_id);
    }
    let addr = std::env::var(http::ADDR_ENV).unwrap_or_else(|_| http::DEFAULT_ADDR.to_string());
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = cli.threads {
        rt.worker_threads(n.max(1)).max_blocking_threads(n.max(1));
    }
    rt.enable_all().build()?.block_on(http::serve(state, &addr))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Serve { .. } => serve(&cli).map(|_| String::new()),
        _ => execute(&cli),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = e.body("cli");
            eprintln!("{}", serde_json::to_string_pretty(&body).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(if e.status() == 400 || e.status() == 404 { 2 } else { 1 })
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qbai_core::cli::{run_command, RunConfig};
use qbai_core::Error;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let result = run_command(&cfg).and_then(|out| {
        let bytes = out.render(&cfg)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().write_all(bytes.as_bytes())?,
        }
        Ok(out.exit_code)
    });

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Error::exit_code(&e) as u8)
        }
    }
}

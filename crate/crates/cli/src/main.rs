use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use chsh_cli::config::RunConfig;
use chsh_cli::{report, run, EXIT_FAILURE, EXIT_USAGE};

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return exit(code);
        }
    };
    if config.print_schema {
        print!("{}", report::schema_text());
        return exit(0);
    }
    if let Err(msg) = config.validate() {
        eprintln!("error: {msg}");
        return exit(EXIT_USAGE);
    }

    let output = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(EXIT_FAILURE);
        }
    };
    let written = if config.writes_stdout() {
        std::io::stdout().lock().write_all(output.text.as_bytes())
    } else {
        std::fs::write(&config.out, &output.text)
    };
    if let Err(e) = written {
        eprintln!("error: cannot write {}: {e}", config.out.display());
        return exit(EXIT_FAILURE);
    }
    for a in output.report["assertions"].as_array().into_iter().flatten() {
        if a["passed"].as_bool() != Some(true) {
            eprintln!("assertion failed: {}.{} ({})", a["experiment"], a["name"], a["detail"]);
        }
    }
    exit(output.exit_code())
}

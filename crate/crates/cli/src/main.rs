mod args;
mod commands;

use clap::Parser;
use serde_json::json;
use slitspec::exec::with_threads;

use args::Cli;

fn report_error(json: bool, kind: &str, message: &str, code: i32) {
    if json {
        eprintln!("{}", json!({"error": kind, "message": message, "exit_code": code}));
    } else {
        eprintln!("error: {message}");
    }
}

fn real_main() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let json = argv.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            if json {
                report_error(true, "usage", e.to_string().trim(), 2);
            } else {
                let _ = e.print();
            }
            return 2;
        }
    };
    let recorded = commands::recorded_args(&argv[1..]);
    let result = with_threads(cli.jobs, || {
        let mut out = commands::run(&cli, recorded)?;
        if let Some(prefix) = &cli.out {
            commands::write_outputs(prefix, &mut out)?;
        }
        Ok::<_, slitspec::Error>(out)
    });
    match result {
        Ok(out) => {
            for line in &out.lines {
                println!("{line}");
            }
            if out.pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let code = e.exit_code();
            report_error(json, e.kind(), &e.to_string(), code);
            code
        }
    }
}

fn main() {
    std::process::exit(real_main());
}

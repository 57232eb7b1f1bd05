use std::process::ExitCode;

use clap::Parser;
use nscontract::{init_logging, registry, run, Cli, Command};

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            for (name, params, about) in registry::SCENARIOS {
                println!("{name:<14} {params:<30} {about}");
            }
            0
        }
        Command::Run(args) => match (*args).into_config() {
            Ok(cfg) => run(&cfg),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    };
    ExitCode::from(code as u8)
}

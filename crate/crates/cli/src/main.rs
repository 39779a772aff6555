use clap::Parser;
use vix_cli::commands::threads_from_env;
use vix_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = threads_from_env().and_then(|n| run(&cli, args, n));
    match result {
        Ok(man) => {
            for o in &man.outputs {
                eprintln!("wrote {}", o.path.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

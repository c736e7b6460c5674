use clap::Parser;
use pdeobs::cli::{exit_status, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_status(&result, cli.strict));
}

//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use clap::Parser;
use edgeroute::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = edgeroute::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

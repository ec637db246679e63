use clap::Parser;
use riesz_annulus::cli::{run, Cli};
use riesz_annulus::Error;

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Domain(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let outcome = braidlie_cli::run_args(&args);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(outcome.exit_code);
}

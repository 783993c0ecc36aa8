use std::io::Write;

fn main() {
    if let Err(e) = channel_purity_cli::configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(channel_purity_cli::EXIT_USAGE);
    }
    let out = channel_purity_cli::run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.exit_code);
}

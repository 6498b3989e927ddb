use std::process::exit;

fn main() {
    exit(robust_mc::cli::run(std::env::args_os()));
}

//! Command-line entry point; all logic lives in [`hsurf::cli`].

fn main() {
    let code = hsurf::cli::run(std::env::args_os());
    std::process::exit(code);
}

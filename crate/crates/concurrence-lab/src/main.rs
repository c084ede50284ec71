fn main() { std::process::exit(concurrence_lab::cli::run(std::env::args_os())); }

fn main() {
    std::process::exit(sconvex_cli::run(std::env::args_os()));
}

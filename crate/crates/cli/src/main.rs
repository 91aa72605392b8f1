fn main() {
    std::process::exit(stable_em_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qndanneal_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(gnb_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(mixvol_cli::run(std::env::args_os()));
}

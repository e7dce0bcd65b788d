fn main() {
    std::process::exit(difftop::cli::run(std::env::args_os()));
}

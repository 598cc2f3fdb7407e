fn main() {
    std::process::exit(schwartz_lab::cli::run(std::env::args_os()));
}

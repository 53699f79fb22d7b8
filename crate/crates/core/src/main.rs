fn main() {
    std::process::exit(ptlplan::cli::run(std::env::args_os()));
}

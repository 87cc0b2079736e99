fn main() {
    std::process::exit(fk_cim::cli::run(std::env::args_os()));
}

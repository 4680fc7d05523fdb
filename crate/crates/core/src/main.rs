fn main() {
    std::process::exit(gkcs_raman::cli::run(std::env::args_os()));
}

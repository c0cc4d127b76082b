fn main() {
    std::process::exit(malevich_qstate::cli::run(std::env::args_os()));
}

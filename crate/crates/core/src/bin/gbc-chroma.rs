fn main() {
    std::process::exit(gbc_chroma::service::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(edge_spectra::cli::run(std::env::args_os()));
}

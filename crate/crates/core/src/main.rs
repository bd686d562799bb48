fn main() {
    std::process::exit(verlinde_lab::cli::run(std::env::args_os()));
}

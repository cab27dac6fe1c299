fn main() {
    std::process::exit(znd_core::cli::run(std::env::args_os()));
}

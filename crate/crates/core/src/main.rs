fn main() {
    std::process::exit(levygap::cli::run(std::env::args_os()));
}

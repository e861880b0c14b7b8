fn main() {
    std::process::exit(levyhit_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(secondgrade::cli::cli_main(std::env::args_os()));
}

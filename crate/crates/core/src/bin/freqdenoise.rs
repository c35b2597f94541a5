fn main() {
    std::process::exit(freqdenoise::cli::main_with_args(std::env::args_os()));
}

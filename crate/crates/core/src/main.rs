fn main() {
    std::process::exit(opinion_pulse::cli::run(std::env::args_os()));
}

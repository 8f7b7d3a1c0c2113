fn main() {
    std::process::exit(sensorcover::cli::run(std::env::args_os()));
}

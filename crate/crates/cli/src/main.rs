fn main() {
    std::process::exit(dht_cli::main_with_args(std::env::args_os()));
}

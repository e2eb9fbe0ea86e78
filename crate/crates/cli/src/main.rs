fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(fredkern_cli::run_command(&args));
}

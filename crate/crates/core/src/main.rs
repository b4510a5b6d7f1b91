fn main() {
    let mut stdout = std::io::stdout().lock();
    std::process::exit(extentlab::cli::main_with_args(std::env::args_os(), &mut stdout));
}

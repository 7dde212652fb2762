fn main() {
    std::process::exit(ratsect::cli::main(std::env::args_os()));
}

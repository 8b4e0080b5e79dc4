fn main() {
    std::process::exit(bifindex::main_with_args(std::env::args_os()));
}

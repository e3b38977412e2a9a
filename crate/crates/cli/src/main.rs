fn main() {
    std::process::exit(entlab::main_with_args(std::env::args_os()));
}

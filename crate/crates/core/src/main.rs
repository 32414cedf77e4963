fn main() {
    std::process::exit(lakemesh::cli::main_with_args(std::env::args_os()));
}

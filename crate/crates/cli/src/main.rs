fn main() {
    std::process::exit(conifold_forge::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(vge::run(std::env::args_os()));
}

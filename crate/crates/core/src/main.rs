fn main() {
    std::process::exit(ioncool::io::run(std::env::args_os()));
}

fn main() {
    std::process::exit(bruin::run(std::env::args().collect()));
}

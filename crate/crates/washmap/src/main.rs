fn main() {
    std::process::exit(washmap::run() as i32);
}

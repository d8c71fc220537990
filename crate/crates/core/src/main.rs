fn main() {
    std::process::exit(ransomtrace::cli::run(std::env::args_os()));
}

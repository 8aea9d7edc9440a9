fn main() {
    std::process::exit(schmidt_sphere::cli::run(std::env::args_os()));
}

fn main() {
    let (code, out) = nugrass_cli::run_suite(std::env::args_os());
    println!("{out}");
    std::process::exit(code);
}

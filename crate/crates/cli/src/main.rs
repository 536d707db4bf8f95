fn main() {
    let code = pdbisim::run_cli(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}

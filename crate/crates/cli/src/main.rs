fn main() {
    std::process::exit(treeperc_cli::run(std::env::args_os()));
}

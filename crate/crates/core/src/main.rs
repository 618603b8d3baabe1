fn main() {
    std::process::exit(osgood_lab::cli::run_from(std::env::args_os()));
}

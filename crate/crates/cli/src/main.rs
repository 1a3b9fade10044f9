fn main() {
    std::process::exit(wpt_sim::run(std::env::args_os()));
}

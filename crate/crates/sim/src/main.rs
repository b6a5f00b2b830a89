fn main() {
    std::process::exit(subgroup_ofdm_sim::cli::main_with_args(std::env::args_os()));
}

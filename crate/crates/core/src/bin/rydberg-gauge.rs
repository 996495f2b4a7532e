fn main() -> anyhow::Result<()> {
    rydberg_gauge::cli::main_with(std::env::args_os())
}

use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    // Record which long flags were given explicitly so the config file does
    // not override them.
    let explicit: Vec<String> = argv
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let args = bks::cli::CliArgs::parse();
    let (output, code) = bks::cli::execute(args, &explicit);
    if code == 0 || code == 3 {
        println!("{output}");
    } else {
        eprintln!("{output}");
    }
    std::process::exit(code);
}

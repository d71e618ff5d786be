use clap::Parser;

fn main() {
    let cli = psda_cli::Cli::parse();
    match psda_cli::run(cli) {
        Ok(summary) => println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes")),
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(e.exit_code());
        }
    }
}

use wden_cli::config::{parse_cli, Command, USAGE};
use wden_cli::experiments::{catalog, run_experiment};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_cli(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{USAGE}");
            std::process::exit(1);
        }
    };
    match cli.command {
        Command::List => {
            println!(
                "{:<18} {:<16} {:<28} description",
                "experiment", "anchor", "defaults"
            );
            for entry in catalog() {
                println!(
                    "{:<18} {:<16} {:<28} {}",
                    entry.name, entry.anchor, entry.defaults, entry.description
                );
            }
        }
        Command::Run(cfg) => match run_experiment(&cfg) {
            Ok(result) => {
                print!("{}", result.render_summary());
                println!(
                    "results written to {}",
                    cfg.out_dir.join("results.json").display()
                );
                if !result.pass {
                    std::process::exit(2);
                }
            }
            Err(e) => {
                eprintln!("numeric fault: {e}");
                std::process::exit(3);
            }
        },
    }
}

mod args;
mod commands;
mod report;

use std::io::{self, Write};

use clap::Parser;

fn main() -> anyhow::Result<()> {
    let cli = args::Cli::parse();
    let report = commands::run(&cli)?;
    let rendered = report.render(cli.output)?;
    match writeln!(io::stdout().lock(), "{rendered}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

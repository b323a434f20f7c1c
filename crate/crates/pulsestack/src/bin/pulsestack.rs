// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

fn main() {
    // clap exits 2 on usage errors, 0 on --help/--version.
    let cli = pulsestack::cli::Cli::parse();
    if let Err(message) = pulsestack::cli::run(cli) {
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}

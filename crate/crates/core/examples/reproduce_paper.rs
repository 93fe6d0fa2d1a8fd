//! Both experiment scenarios end to end, printed as a comparison table.
//! Pass `--ideal` for the lossless run.

use qawg::scenario::{reproduce_paper, ReproduceOptions};

fn main() {
    let opts = ReproduceOptions {
        ideal: std::env::args().any(|a| a == "--ideal"),
        ..ReproduceOptions::default()
    };
    match reproduce_paper(&opts) {
        Ok((rows, table)) => {
            print!("{table}");
            println!("{} rows, all within tolerance", rows.len());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

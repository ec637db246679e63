//! Figure-ready datasets through the library API: the b = 1.3 density with
//! its adjusted potential curve, and the steady-state family snapshots.
//! Writes the same CSVs as `riesz-annulus figures` into ./out.
//!
//!     cargo run --release --example figure_data

use clap::Parser;
use riesz_annulus::cli::{run, Cli};

fn main() -> riesz_annulus::Result<()> {
    for which in ["fig1", "fig2"] {
        let cli = Cli::parse_from(["riesz-annulus", "figures", "--which", which, "--out", "out"]);
        let code = run(cli)?;
        assert_eq!(code, 0);
        println!("wrote out/{which}.csv");
    }
    println!("markers: out/fig1_markers.json; manifest: out/manifest.json");
    Ok(())
}

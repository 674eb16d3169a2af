//! Configuration-driven runner for the `dce` binary: scenario files, the four
//! commands and their CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::path::{Path, PathBuf};

pub use commands::{run, CommandOutput};
pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use table::{Cell, Table};

/// `out.csv` -> `out_crossings.csv`, next to the main file.
pub fn crossings_path(main: &Path) -> PathBuf {
    let stem = main.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    main.with_file_name(format!("{stem}_crossings.csv"))
}

/// Writes the main table to `out` (stdout when `None`) and the crossing summary beside it.
pub fn write_output(output: &CommandOutput, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, output.main.render())?;
            if let Some(c) = &output.crossings {
                std::fs::write(crossings_path(path), c.render())?;
            }
        }
        None => print!("{}", output.main.render()),
    }
    Ok(())
}

//! Subcommand implementations. Each writes its outputs and a manifest into
//! the output directory.

pub mod crossval;
pub mod fit;
pub mod report;
pub mod scan;
pub mod simulate;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::manifest::Manifest;

pub fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Create `dir/name`, run `f` on a buffered writer, and record the output.
pub fn write_output<F, E>(dir: &Path, name: &str, manifest: &mut Manifest, f: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), E>,
    CliError: From<E>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(CliError::io(&path))?;
    manifest.outputs.push(name.to_string());
    Ok(path)
}

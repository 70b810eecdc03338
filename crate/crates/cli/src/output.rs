use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

use crate::args::Format;

/// Writes a single output document to `out` or stdout.
pub fn emit<F>(format: Format, out: Option<&Path>, json: Value, csv: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &json)?;
            writeln!(sink)?;
        }
        Format::Csv => csv(&mut sink)?,
    }
    sink.flush().context("cannot write output")?;
    Ok(())
}

/// CSV with a header row followed by `rows`.
pub fn write_table(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r)?;
    }
    wtr.flush()?;
    Ok(())
}

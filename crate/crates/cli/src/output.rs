//! CSV and plot-data emission.
//!
//! CSV files are UTF-8 with LF line endings and a header row. Reals are
//! written in their shortest form that parses back to the same `f64`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use stable_em::ErrorTable;

use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Write `records` under `header`. Each record serializes to one row.
pub fn emit_csv<R, I>(path: &Path, header: &[&str], records: I) -> Result<(), CliError>
where
    R: Serialize,
    I: IntoIterator<Item = R>,
{
    if header.is_empty() {
        return Err(CliError::Config(format!(
            "{}: a CSV schema needs at least one column",
            path.display()
        )));
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Label used in per-alpha file names, e.g. `1.8`.
pub fn alpha_label(alpha: f64) -> String {
    format!("{alpha}")
}

/// Whitespace-separated columns `delta error stderr reference` for gnuplot.
///
/// `reference` is `C delta^(q/alpha)` anchored at the smallest step.
pub fn write_loglog(path: &Path, table: &ErrorTable) -> Result<(), CliError> {
    let order = table.q / table.alpha;
    let anchor = table
        .deltas
        .first()
        .zip(table.errors.first())
        .map(|(d, e)| e / d.powf(order))
        .unwrap_or(f64::NAN);
    let mut text = format!(
        "# alpha = {}  q = {}  m = {}\n# delta error stderr reference(order {order})\n",
        table.alpha, table.q, table.m_trajectories
    );
    for ((d, e), s) in table.deltas.iter().zip(&table.errors).zip(&table.standard_errors) {
        text.push_str(&format!("{d:e} {e:e} {s:e} {:e}\n", anchor * d.powf(order)));
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_gnuplot_script(path: &Path, data_file: &str, alpha: f64) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let text = format!(
        "set logscale xy\n\
         set xlabel 'step size'\n\
         set ylabel 'strong error'\n\
         set key left top\n\
         set title 'alpha = {alpha}'\n\
         plot '{data_file}' using 1:2 with linespoints title 'error', \\\n     \
         '' using 1:4 with lines dashtype 2 title 'reference slope'\n"
    );
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

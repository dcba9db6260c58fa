use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cpinf_core::Error;
use serde_json::json;

/// Everything that ends a run early. Usage, I/O and parse problems exit
/// with 2, domain errors with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: io::Error },
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Domain(e) => match e {
                Error::DimensionMismatch { .. } => "dimension_mismatch",
                Error::MassMismatch => "mass_mismatch",
                Error::InvalidSystem(_) => "invalid_system",
                Error::NotInDn { .. } => "not_in_dn",
                Error::Collision { .. } => "collision",
                Error::NonFinite(_) => "non_finite",
                Error::NotRotation { .. } => "not_rotation",
                Error::DegenerateGram { .. } => "degenerate_gram",
                Error::ZeroMultiplier => "zero_multiplier",
                Error::NotHomogeneous { .. } => "not_homogeneous",
                Error::InvalidPartition(_) => "invalid_partition",
                Error::InconclusiveClusters(_) => "inconclusive_clusters",
                Error::NoRelativeEquilibrium { .. } => "no_relative_equilibrium",
                Error::InvalidArgument(_) => "invalid_argument",
                Error::Precondition(_) => "precondition",
                Error::Parse(_) => "parse",
            },
        }
    }

    fn detail(&self) -> String {
        match self {
            CliError::Usage(s) => s.clone(),
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
            CliError::Domain(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Domain(Error::Parse(_)) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

pub fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": e.kind(), "detail": e.detail() }));
    ExitCode::from(e.exit_code())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_all(out: &mut dyn Write, path: &Path, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn print_json(value: &serde_json::Value) {
    // a closed pipe downstream is not our failure
    let _ = writeln!(io::stdout(), "{}", serde_json::to_string_pretty(value).expect("values serialise"));
}

/// Fixed 17-significant-digit scientific notation for CSV and tables.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec()) + "\n";
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
        out.push('\n');
    }
    out
}

pub fn print_text(text: &str) {
    let _ = io::stdout().write_all(text.as_bytes());
}

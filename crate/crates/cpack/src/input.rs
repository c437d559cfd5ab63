//! Resolving input arguments: a path, `-` for stdin, or a bundled fixture
//! name (with or without its extension).

use std::io::Read;
use std::path::Path;

use compact_packing::{fixtures, Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Packing,
    Codes,
    Triangulation,
}

impl Kind {
    fn extension(self) -> &'static str {
        match self {
            Kind::Packing | Kind::Triangulation => ".json",
            Kind::Codes => ".codes",
        }
    }

    fn fixture(self, name: &str) -> Result<String> {
        match self {
            Kind::Packing => fixtures::packing_text(name),
            Kind::Codes => fixtures::codes_text(name),
            Kind::Triangulation => fixtures::triangulation_text(name),
        }
    }
}

/// Read the document named by `arg`.
pub fn read(kind: Kind, arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{arg}: {e}")));
    }
    let name = arg.strip_suffix(kind.extension()).unwrap_or(arg);
    let name = Path::new(name).file_name().and_then(|n| n.to_str()).unwrap_or(name);
    kind.fixture(name)
        .map_err(|e| Error::Io(format!("{arg} is neither a readable file nor a fixture ({e})")))
}

/// Parse a comma-separated list of positive reals.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad number '{t}': {e}")))
        })
        .collect()
}

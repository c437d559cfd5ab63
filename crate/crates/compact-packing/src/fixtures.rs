//! Bundled fixtures: packings, code sets and triangulations.
//!
//! The files under `fixtures/` are compiled into the crate. Setting the
//! environment variable named by [`FIXTURES_DIR_ENV`] to a directory with
//! the same layout (`packings/NAME.json`, `codes/NAME.codes`,
//! `triangulations/NAME.json`) makes lookups read from disk instead.

use std::path::PathBuf;

use crate::codes::{parse_codes, CodeSet};
use crate::error::{Error, Result};
use crate::packing::SpherePacking;
use crate::spherical::LabeledSphericalTriangulation;

/// Environment variable overriding the bundled fixture directory.
pub const FIXTURES_DIR_ENV: &str = "CPACK_FIXTURES";

macro_rules! bundle {
    ($dir:literal, $ext:literal, [$($name:literal),* $(,)?]) => {
        &[$(($name, include_str!(concat!("../fixtures/", $dir, "/", $name, $ext)))),*]
    };
}

/// Bundled packings by name.
pub const PACKINGS: &[(&str, &str)] = bundle!(
    "packings",
    ".json",
    [
        "hexagonal",
        "square",
        "five-size",
        "octahedral-corona",
        "two-size-0.101021",
        "two-size-0.154701",
        "two-size-0.280776",
        "two-size-0.349198",
        "two-size-0.386106",
        "two-size-0.533296",
        "two-size-0.545151",
        "two-size-0.637556",
    ]
);

/// Bundled code sets by name.
pub const CODE_SETS: &[(&str, &str)] =
    bundle!("codes", ".codes", ["fig4", "fig4-fundamental", "fig4-mutated", "square"]);

/// Bundled triangulations by name.
pub const TRIANGULATIONS: &[(&str, &str)] = bundle!("triangulations", ".json", ["octahedron"]);

/// The bundled compact two-size disc packings, by increasing radius ratio.
/// The square packing carries the ratio `√2 − 1`.
pub const TWO_SIZE_PACKINGS: &[&str] = &[
    "two-size-0.101021",
    "two-size-0.154701",
    "two-size-0.280776",
    "two-size-0.349198",
    "two-size-0.386106",
    "square",
    "two-size-0.533296",
    "two-size-0.545151",
    "two-size-0.637556",
];

fn lookup(kind: &str, ext: &str, table: &[(&str, &str)], name: &str) -> Result<String> {
    if let Ok(dir) = std::env::var(FIXTURES_DIR_ENV) {
        let path: PathBuf = [dir.as_str(), kind, &format!("{name}{ext}")].iter().collect();
        return std::fs::read_to_string(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())));
    }
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| {
            let known: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
            Error::Domain(format!("unknown {kind} fixture '{name}' (known: {})", known.join(", ")))
        })
}

pub fn packing_text(name: &str) -> Result<String> {
    lookup("packings", ".json", PACKINGS, name)
}

pub fn load_packing(name: &str) -> Result<SpherePacking> {
    SpherePacking::from_json(&packing_text(name)?)
}

pub fn codes_text(name: &str) -> Result<String> {
    lookup("codes", ".codes", CODE_SETS, name)
}

pub fn load_codes(name: &str) -> Result<CodeSet> {
    parse_codes(&codes_text(name)?)
}

pub fn triangulation_text(name: &str) -> Result<String> {
    lookup("triangulations", ".json", TRIANGULATIONS, name)
}

pub fn load_triangulation(name: &str) -> Result<LabeledSphericalTriangulation> {
    LabeledSphericalTriangulation::from_json(&triangulation_text(name)?)
}

/// All bundled compact two-size packings.
pub fn two_size_packings() -> Result<Vec<SpherePacking>> {
    TWO_SIZE_PACKINGS.iter().map(|n| load_packing(n)).collect()
}

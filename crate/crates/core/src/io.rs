//! JSON state files and atomic output.
//!
//! Complex numbers are `[re, im]` pairs. A bipartite state or a density matrix
//! is an array of rows; a tripartite state is nested `[2][2][n]`. Ragged rows,
//! wrong outer sizes and non-pair scalars are rejected.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::states::{BipartitePureState, DensityMatrix, PovmPair, PureState, TripartitePureState};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;
pub type JsonTensor = Vec<Vec<Vec<JsonComplex>>>;

fn to_c64(z: &JsonComplex) -> C64 {
    c64(z[0], z[1])
}

fn from_c64(z: C64) -> JsonComplex {
    [z.re, z.im]
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::Parse(
            "matrix must have at least one row and column".into(),
        ));
    }
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return Err(Error::Parse(format!(
            "ragged matrix: row of length {} where {c} expected",
            bad.len()
        )));
    }
    let entries: Vec<C64> = rows.iter().flatten().map(to_c64).collect();
    ComplexMatrix::from_row_slice(r, c, &entries)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(from_c64).collect())
        .collect()
}

pub fn tripartite_from_json(t: &JsonTensor) -> Result<TripartitePureState> {
    if t.len() != 2 || t.iter().any(|row| row.len() != 2) {
        return Err(Error::Parse(
            "tripartite state must be nested [2][2][n]".into(),
        ));
    }
    let n = t[0][0].len();
    if n == 0 || t.iter().flatten().any(|fiber| fiber.len() != n) {
        return Err(Error::Parse(format!(
            "tripartite state must be nested [2][2][n] with a common n >= 1 (first fiber has {n})"
        )));
    }
    let flat: Vec<C64> = t.iter().flatten().flatten().map(to_c64).collect();
    TripartitePureState::from_flat(flat, n)
}

pub fn tripartite_to_json(s: &TripartitePureState) -> JsonTensor {
    (0..2)
        .map(|i| {
            (0..2)
                .map(|j| (0..s.n()).map(|k| from_c64(s.amplitude(i, j, k))).collect())
                .collect()
        })
        .collect()
}

pub fn parse_bipartite(text: &str) -> Result<BipartitePureState> {
    BipartitePureState::from_matrix(matrix_from_json(&parse(text)?)?)
}

pub fn parse_tripartite(text: &str) -> Result<TripartitePureState> {
    tripartite_from_json(&parse(text)?)
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix_from_json(&parse(text)?)?)
}

/// Bipartite or tripartite, decided by nesting depth.
pub fn parse_pure_state(text: &str) -> Result<PureState> {
    let value: serde_json::Value = parse(text)?;
    let depth = {
        let mut d = 0;
        let mut v = &value;
        while let Some(first) = v.as_array().and_then(|a| a.first()) {
            d += 1;
            v = first;
        }
        d
    };
    match depth {
        3 => Ok(PureState::Bipartite(parse_bipartite(text)?)),
        4 => Ok(PureState::Tripartite(parse_tripartite(text)?)),
        _ => Err(Error::Parse(format!(
            "cannot tell the state kind from nesting depth {depth}"
        ))),
    }
}

pub fn pure_state_to_json(s: &PureState) -> serde_json::Value {
    match s {
        PureState::Bipartite(b) => serde_json::json!(matrix_to_json(b.psi())),
        PureState::Tripartite(t) => serde_json::json!(tripartite_to_json(t)),
    }
}

pub fn povm_to_json(p: &PovmPair) -> serde_json::Value {
    serde_json::json!({
        "a1": matrix_to_json(p.a1()),
        "a2": matrix_to_json(p.a2()),
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Writes through a temp file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

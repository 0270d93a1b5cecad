//! Matrix Market export/import and JSON run specs.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryKind, SpaceSpec};
use crate::error::{Error, Result};

/// `{"p": .., "n": .., "kind": .., "r": ..}`; `r` defaults to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub p: usize,
    pub n: usize,
    pub kind: BoundaryKind,
    #[serde(default)]
    pub r: usize,
}

impl SpecFile {
    pub fn space(&self) -> Result<SpaceSpec> {
        SpaceSpec::new(self.p, self.n, self.kind)
    }
}

pub fn parse_spec_json(text: &str) -> Result<SpecFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_spec_json(path: &Path) -> Result<SpecFile> {
    parse_spec_json(&std::fs::read_to_string(path)?)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Dense array format; only the lower triangle is written when `a` is
/// exactly symmetric.
pub fn write_matrix_market<W: Write>(mut w: W, a: &DMatrix<f64>) -> Result<()> {
    let (nr, nc) = a.shape();
    let symmetric = nr == nc && *a == a.transpose();
    let tag = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix array real {tag}")?;
    writeln!(w, "{nr} {nc}")?;
    for j in 0..nc {
        let start = if symmetric { j } else { 0 };
        for i in start..nr {
            writeln!(w, "{}", fmt_f64(a[(i, j)]))?;
        }
    }
    Ok(())
}

/// Reads dense `array` and sparse `coordinate` real files, general or symmetric.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[3] != "real" {
        return Err(Error::Parse(format!("unsupported header '{header}'")));
    }
    let coordinate = match fields[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(Error::Parse(format!("unsupported format '{other}'"))),
    };
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };
    let mut body = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('%') {
            body.push(t.to_string());
        }
    }
    let mut it = body.into_iter();
    let size = it.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size.split_whitespace().map(parse_num).collect::<Result<_>>()?;
    let (nr, nc) = match dims.as_slice() {
        [nr, nc] if !coordinate => (*nr, *nc),
        [nr, nc, _] if coordinate => (*nr, *nc),
        _ => return Err(Error::Parse(format!("bad size line '{size}'"))),
    };
    let mut a = DMatrix::zeros(nr, nc);
    if coordinate {
        for entry in it {
            let f: Vec<&str> = entry.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad entry '{entry}'")));
            }
            let (i, j): (usize, usize) = (parse_num(f[0])?, parse_num(f[1])?);
            if i == 0 || j == 0 || i > nr || j > nc {
                return Err(Error::Parse(format!("entry ({i}, {j}) out of range")));
            }
            let v = parse_num(f[2])?;
            a[(i - 1, j - 1)] = v;
            if symmetric {
                a[(j - 1, i - 1)] = v;
            }
        }
    } else {
        let mut vals = it.map(|s| parse_num::<f64>(&s));
        for j in 0..nc {
            let start = if symmetric { j } else { 0 };
            for i in start..nr {
                let v = vals.next().ok_or_else(|| Error::Parse("too few entries".into()))??;
                a[(i, j)] = v;
                if symmetric {
                    a[(j, i)] = v;
                }
            }
        }
        if vals.next().is_some() {
            return Err(Error::Parse("too many entries".into()));
        }
    }
    Ok(a)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

//! Field export and import: legacy ASCII VTK, CSV, and `key = value` manifests.
//!
//! Every real is printed with 17 significant digits, so files round-trip exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::grid::{BoundaryData, Grid, QField, VoxelDomain};
use crate::mhd::MHDState;
use crate::quaternion::Quaternion;
use crate::Error;

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str, line: usize) -> Result<f64, Error> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {line}: {e} in {s:?}")))
}

fn parse_usize(s: &str, line: usize) -> Result<usize, Error> {
    s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("line {line}: {e} in {s:?}")))
}

/// `cell,s,v1,v2,v3` with one row per cell in storage order.
pub fn field_csv(u: &QField) -> String {
    let mut out = String::from("cell,s,v1,v2,v3\n");
    for (c, q) in u.values.iter().enumerate() {
        let _ = writeln!(out, "{c},{},{},{},{}", fmt_real(q.s), fmt_real(q.v1), fmt_real(q.v2), fmt_real(q.v3));
    }
    out
}

fn parse_rows(text: &str, header: &str, expected: usize) -> Result<Vec<Quaternion>, Error> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        other => return Err(Error::Parse(format!("expected header {header:?}, found {:?}", other.map(|x| x.1)))),
    }
    let mut values = Vec::with_capacity(expected);
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!("line {}: expected 5 columns", ln + 1)));
        }
        let idx = parse_usize(parts[0], ln + 1)?;
        if idx != values.len() {
            return Err(Error::Parse(format!("line {}: index {idx} out of order", ln + 1)));
        }
        let q = Quaternion::new(
            parse_real(parts[1], ln + 1)?,
            parse_real(parts[2], ln + 1)?,
            parse_real(parts[3], ln + 1)?,
            parse_real(parts[4], ln + 1)?,
        );
        values.push(q);
    }
    if values.len() != expected {
        return Err(Error::Parse(format!("expected {expected} rows, found {}", values.len())));
    }
    Ok(values)
}

pub fn parse_field_csv(text: &str, grid: Grid) -> Result<QField, Error> {
    Ok(QField { grid, values: parse_rows(text, "cell,s,v1,v2,v3", grid.len())? })
}

pub fn read_field_csv(path: &Path, grid: Grid) -> Result<QField, Error> {
    parse_field_csv(&fs::read_to_string(path)?, grid)
}

/// `face,s,v1,v2,v3` with faces in the domain's face order.
pub fn boundary_csv(h: &BoundaryData) -> String {
    let mut out = String::from("face,s,v1,v2,v3\n");
    for (f, q) in h.values.iter().enumerate() {
        let _ = writeln!(out, "{f},{},{},{},{}", fmt_real(q.s), fmt_real(q.v1), fmt_real(q.v2), fmt_real(q.v3));
    }
    out
}

pub fn read_boundary_csv(path: &Path, domain: &VoxelDomain) -> Result<BoundaryData, Error> {
    let text = fs::read_to_string(path)?;
    BoundaryData::new(domain, parse_rows(&text, "face,s,v1,v2,v3", domain.boundary_faces.len())?)
}

/// Legacy ASCII structured-points file with one 4-component point array per field,
/// points at the cell centres.
pub fn vtk_string(title: &str, fields: &[(&str, &QField)]) -> Result<String, Error> {
    let Some((_, first)) = fields.first() else {
        return Err(Error::Precondition("no fields to export".into()));
    };
    let g = first.grid;
    for (_, f) in fields {
        if f.grid != g {
            return Err(Error::DomainMismatch);
        }
    }
    let c0 = g.center(0);
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", g.n[0], g.n[1], g.n[2]);
    let _ = writeln!(out, "ORIGIN {} {} {}", fmt_real(c0[0]), fmt_real(c0[1]), fmt_real(c0[2]));
    let _ = writeln!(out, "SPACING {} {} {}", fmt_real(g.h), fmt_real(g.h), fmt_real(g.h));
    let _ = writeln!(out, "POINT_DATA {}", g.len());
    for (name, f) in fields {
        let _ = writeln!(out, "SCALARS {name} double 4");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for q in &f.values {
            let _ = writeln!(out, "{} {} {} {}", fmt_real(q.s), fmt_real(q.v1), fmt_real(q.v2), fmt_real(q.v3));
        }
    }
    Ok(out)
}

/// Parses a file written by [`vtk_string`]. The grid origin is recovered from the first
/// cell centre.
pub fn parse_vtk(text: &str) -> Result<(Grid, Vec<(String, QField)>), Error> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")));
    let (_, l) = next("version")?;
    if !l.starts_with("# vtk DataFile") {
        return Err(Error::Parse("not a legacy VTK file".into()));
    }
    next("title")?;
    let (_, l) = next("ASCII")?;
    if l.trim() != "ASCII" {
        return Err(Error::Parse("only ASCII VTK is supported".into()));
    }
    let (_, l) = next("DATASET")?;
    if l.trim() != "DATASET STRUCTURED_POINTS" {
        return Err(Error::Parse(format!("unsupported dataset {l:?}")));
    }
    let mut triple = |key: &str| -> Result<(usize, Vec<String>), Error> {
        let (ln, l) = next(key)?;
        let parts: Vec<String> = l.split_whitespace().map(str::to_string).collect();
        if parts.len() != 4 || parts[0] != key {
            return Err(Error::Parse(format!("line {}: expected {key}", ln + 1)));
        }
        Ok((ln + 1, parts[1..].to_vec()))
    };
    let (ln, d) = triple("DIMENSIONS")?;
    let n = [parse_usize(&d[0], ln)?, parse_usize(&d[1], ln)?, parse_usize(&d[2], ln)?];
    let (ln, o) = triple("ORIGIN")?;
    let c0 = [parse_real(&o[0], ln)?, parse_real(&o[1], ln)?, parse_real(&o[2], ln)?];
    let (ln, s) = triple("SPACING")?;
    let h = parse_real(&s[0], ln)?;
    let grid = Grid { origin: [c0[0] - 0.5 * h, c0[1] - 0.5 * h, c0[2] - 0.5 * h], n, h };
    let (ln, l) = next("POINT_DATA")?;
    let count = l.strip_prefix("POINT_DATA").map(|x| parse_usize(x, ln + 1)).transpose()?;
    if count != Some(grid.len()) {
        return Err(Error::Parse(format!("line {}: POINT_DATA does not match DIMENSIONS", ln + 1)));
    }
    let mut fields = Vec::new();
    while let Ok((ln, l)) = next("SCALARS") {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "SCALARS" || parts[3] != "4" {
            return Err(Error::Parse(format!("line {}: expected a 4-component SCALARS block", ln + 1)));
        }
        let name = parts[1].to_string();
        next("LOOKUP_TABLE")?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let (ln, l) = next("values")?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 values", ln + 1)));
            }
            values.push(Quaternion::new(parse_real(v[0], ln + 1)?, parse_real(v[1], ln + 1)?, parse_real(v[2], ln + 1)?, parse_real(v[3], ln + 1)?));
        }
        fields.push((name, QField { grid, values }));
    }
    Ok((grid, fields))
}

pub fn read_vtk(path: &Path) -> Result<(Grid, Vec<(String, QField)>), Error> {
    parse_vtk(&fs::read_to_string(path)?)
}

/// `key = value` lines in key order.
pub fn manifest_string(entries: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!("line {}: expected key = value", ln + 1)));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    parse_manifest(&fs::read_to_string(path)?)
}

/// Grid description entries shared by every manifest.
pub fn grid_entries(g: &Grid) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("grid.n".into(), format!("{} {} {}", g.n[0], g.n[1], g.n[2]));
    m.insert("grid.origin".into(), format!("{} {} {}", fmt_real(g.origin[0]), fmt_real(g.origin[1]), fmt_real(g.origin[2])));
    m.insert("grid.h".into(), fmt_real(g.h));
    m
}

/// Writes `state.vtk`, `u.csv`, `B.csv`, `p.csv` and `state.manifest` into `dir`.
pub fn write_state(dir: &Path, state: &MHDState, extra: &BTreeMap<String, String>) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let g = state.u.grid;
    fs::write(dir.join("state.vtk"), vtk_string("qmhd state", &[("u", &state.u), ("B", &state.b), ("p", &state.p)])?)?;
    fs::write(dir.join("u.csv"), field_csv(&state.u))?;
    fs::write(dir.join("B.csv"), field_csv(&state.b))?;
    fs::write(dir.join("p.csv"), field_csv(&state.p))?;
    let mut m = grid_entries(&g);
    m.insert("files".into(), "state.vtk u.csv B.csv p.csv".into());
    m.insert("format.precision".into(), "17".into());
    for (k, v) in extra {
        m.insert(k.clone(), v.clone());
    }
    fs::write(dir.join("state.manifest"), manifest_string(&m))?;
    Ok(())
}

/// Reads a state written by [`write_state`] back from its CSV files.
pub fn read_state(dir: &Path) -> Result<(MHDState, BTreeMap<String, String>), Error> {
    let m = read_manifest(&dir.join("state.manifest"))?;
    let get = |k: &str| m.get(k).ok_or_else(|| Error::Parse(format!("manifest lacks {k}")));
    let n: Vec<usize> = get("grid.n")?.split_whitespace().map(|x| parse_usize(x, 0)).collect::<Result<_, _>>()?;
    let o: Vec<f64> = get("grid.origin")?.split_whitespace().map(|x| parse_real(x, 0)).collect::<Result<_, _>>()?;
    if n.len() != 3 || o.len() != 3 {
        return Err(Error::Parse("grid.n and grid.origin need three entries".into()));
    }
    let grid = Grid { origin: [o[0], o[1], o[2]], n: [n[0], n[1], n[2]], h: parse_real(get("grid.h")?, 0)? };
    let state = MHDState {
        u: read_field_csv(&dir.join("u.csv"), grid)?,
        b: read_field_csv(&dir.join("B.csv"), grid)?,
        p: read_field_csv(&dir.join("p.csv"), grid)?,
    };
    Ok((state, m))
}

/// Appends rows to a CSV file, flushing after each one.
pub struct CsvLog {
    file: fs::File,
}

impl CsvLog {
    pub fn create(path: &Path, header: &str) -> Result<Self, Error> {
        let mut file = fs::File::create(path)?;
        writeln!(file, "{header}")?;
        file.flush()?;
        Ok(CsvLog { file })
    }

    pub fn row(&mut self, row: &str) -> Result<(), Error> {
        writeln!(self.file, "{row}")?;
        self.file.flush()?;
        Ok(())
    }
}

/// Reads a CSV into header and string rows.
pub fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), Error> {
    let f = fs::File::open(path)?;
    let mut lines = BufReader::new(f).lines();
    let header = match lines.next() {
        Some(h) => h?.split(',').map(str::to_string).collect(),
        None => return Err(Error::Parse("empty CSV".into())),
    };
    let mut rows = Vec::new();
    for l in lines {
        let l = l?;
        if !l.trim().is_empty() {
            rows.push(l.split(',').map(str::to_string).collect());
        }
    }
    Ok((header, rows))
}

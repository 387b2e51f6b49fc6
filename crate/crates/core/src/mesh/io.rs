//! OBJ / OFF (ASCII, positions only) and the native JSON format.
//!
//! The JSON writer relies on shortest round-trip float printing, so a
//! save/load cycle reproduces every coordinate bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Point, TriMesh};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
    Json,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "obj" => Ok(MeshFormat::Obj),
            Some(e) if e == "off" => Ok(MeshFormat::Off),
            Some(e) if e == "json" => Ok(MeshFormat::Json),
            _ => Err(Error::invalid(format!("unknown mesh format for {}", path.display()))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

pub fn load(path: &Path) -> Result<TriMesh> {
    let text = fs::read_to_string(path)?;
    match MeshFormat::from_path(path)? {
        MeshFormat::Obj => read_obj(&text),
        MeshFormat::Off => read_off(&text),
        MeshFormat::Json => read_json(&text),
    }
}

pub fn save(mesh: &TriMesh, path: &Path) -> Result<()> {
    let text = match MeshFormat::from_path(path)? {
        MeshFormat::Obj => write_obj(mesh),
        MeshFormat::Off => write_off(mesh),
        MeshFormat::Json => write_json(mesh),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json(mesh: &TriMesh) -> String {
    let doc = JsonMesh {
        vertices: mesh.vertices().iter().map(|p| [p.x, p.y, p.z]).collect(),
        faces: mesh.faces().to_vec(),
    };
    serde_json::to_string(&doc).expect("mesh serialization cannot fail")
}

pub fn read_json(text: &str) -> Result<TriMesh> {
    let doc: JsonMesh = serde_json::from_str(text)?;
    let v = doc.vertices.iter().map(|p| Point::new(p[0], p[1], p[2])).collect();
    check_indices(doc.vertices.len(), &doc.faces)?;
    Ok(TriMesh::from_raw(v, doc.faces))
}

pub fn write_obj(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn read_obj(text: &str) -> Result<TriMesh> {
    let mut v = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.take(3).map(parse_f64).collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("line {}: vertex needs three coordinates", ln + 1)));
                }
                v.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        let i: i64 = head
                            .parse()
                            .map_err(|_| Error::Parse(format!("line {}: bad face index {tok:?}", ln + 1)))?;
                        // negative indices count from the end
                        let i = if i < 0 { v.len() as i64 + i } else { i - 1 };
                        usize::try_from(i).map_err(|_| Error::Parse(format!("line {}: bad face index", ln + 1)))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse(format!("line {}: only triangles are supported", ln + 1)));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    check_indices(v.len(), &faces)?;
    Ok(TriMesh::from_raw(v, faces))
}

pub fn write_off(mesh: &TriMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.n_vertices(), mesh.n_faces());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

pub fn read_off(text: &str) -> Result<TriMesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    match tokens.next() {
        Some("OFF") => {}
        _ => return Err(Error::Parse("missing OFF header".into())),
    }
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad {what}")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;
    let mut raw = Vec::with_capacity(nv * 3);
    for _ in 0..nv * 3 {
        let t = next_usize_or_float(&mut tokens)?;
        raw.push(t);
    }
    let v: Vec<Point> = raw.chunks(3).map(|c| Point::new(c[0], c[1], c[2])).collect();
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = next_usize_or_float(&mut tokens)? as usize;
        if k != 3 {
            return Err(Error::Parse("only triangles are supported".into()));
        }
        let a = next_usize_or_float(&mut tokens)? as usize;
        let b = next_usize_or_float(&mut tokens)? as usize;
        let c = next_usize_or_float(&mut tokens)? as usize;
        faces.push([a, b, c]);
    }
    check_indices(v.len(), &faces)?;
    Ok(TriMesh::from_raw(v, faces))
}

fn next_usize_or_float<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<f64> {
    parse_f64(tokens.next().ok_or_else(|| Error::Parse("unexpected end of OFF data".into()))?)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn check_indices(nv: usize, faces: &[[usize; 3]]) -> Result<()> {
    if let Some((i, _)) = faces.iter().enumerate().find(|(_, f)| f.iter().any(|&k| k >= nv)) {
        return Err(Error::Parse(format!("face {i} references a missing vertex")));
    }
    Ok(())
}

//! Wavefront OBJ subset: `v`, `vt`, `vn`, and `f` with `v`, `v/vt`,
//! `v//vn`, and `v/vt/vn` corners. Negative (relative) indices are
//! supported and polygons are fan-triangulated. Every other statement,
//! including `mtllib`/`usemtl`, is skipped and counted.

use std::collections::HashMap;
use std::path::Path;

use crate::math::{Real, Vec2, Vec3};

use super::{GeometryError, Mesh};

/// A parsed OBJ file.
#[derive(Clone, Debug)]
pub struct ObjMesh<T> {
    pub mesh: Mesh<T>,
    /// Statements that were recognized as outside the supported subset.
    pub skipped_statements: usize,
    /// Number of `f` statements.
    pub faces: usize,
}

pub fn load_obj<T: Real>(path: impl AsRef<Path>) -> Result<ObjMesh<T>, GeometryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_obj(&text)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Corner {
    v: usize,
    vt: Option<usize>,
    vn: Option<usize>,
}

pub fn parse_obj<T: Real>(text: &str) -> Result<ObjMesh<T>, GeometryError> {
    let mut v: Vec<Vec3<T>> = Vec::new();
    let mut vt: Vec<Vec2<T>> = Vec::new();
    let mut vn: Vec<Vec3<T>> = Vec::new();
    // (corners, line) per face
    let mut faces: Vec<(Vec<Corner>, usize)> = Vec::new();
    let mut skipped = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let keyword = parts.next().unwrap_or("");
        match keyword {
            "v" => v.push(parse_vec3(parts, line)?),
            "vn" => vn.push(parse_vec3(parts, line)?),
            "vt" => {
                let vals = parse_floats::<T>(parts, line)?;
                if vals.len() < 2 {
                    return Err(obj_err(line, "vt needs at least 2 components"));
                }
                vt.push(Vec2::new(vals[0], vals[1]));
            }
            "f" => {
                let mut corners = Vec::new();
                for token in parts {
                    corners.push(parse_corner(token, line, v.len(), vt.len(), vn.len())?);
                }
                if corners.len() < 3 {
                    return Err(obj_err(line, "face needs at least 3 vertices"));
                }
                faces.push((corners, line));
            }
            _ => skipped += 1,
        }
    }

    let all_uv = faces.iter().all(|(c, _)| c.iter().all(|c| c.vt.is_some()));
    let all_normals = faces.iter().all(|(c, _)| c.iter().all(|c| c.vn.is_some()));

    let mut remap: HashMap<Corner, u32> = HashMap::new();
    let mut positions = Vec::new();
    let mut uvs = Vec::new();
    let mut normals = Vec::new();
    let mut indices = Vec::new();
    for (corners, _) in &faces {
        let mut ids = Vec::with_capacity(corners.len());
        for c in corners {
            let key = Corner {
                v: c.v,
                vt: if all_uv { c.vt } else { None },
                vn: if all_normals { c.vn } else { None },
            };
            let id = *remap.entry(key).or_insert_with(|| {
                positions.push(v[key.v]);
                if let Some(t) = key.vt {
                    uvs.push(vt[t]);
                }
                if let Some(n) = key.vn {
                    normals.push(vn[n]);
                }
                (positions.len() - 1) as u32
            });
            ids.push(id);
        }
        for k in 1..ids.len() - 1 {
            indices.push([ids[0], ids[k], ids[k + 1]]);
        }
    }

    let normals = if all_normals && !faces.is_empty() { Some(normals) } else { None };
    let uvs = if all_uv && !faces.is_empty() { Some(uvs) } else { None };
    let face_count = faces.len();
    let mesh = Mesh::from_arrays(positions, indices, normals, uvs)?;
    Ok(ObjMesh {
        mesh,
        skipped_statements: skipped,
        faces: face_count,
    })
}

fn obj_err(line: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Obj {
        line,
        message: message.into(),
    }
}

fn parse_floats<'a, T: Real>(parts: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<T>, GeometryError> {
    parts
        .map(|p| {
            p.parse::<f64>()
                .map(T::lit)
                .map_err(|_| obj_err(line, format!("invalid number '{p}'")))
        })
        .collect()
}

fn parse_vec3<'a, T: Real>(parts: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec3<T>, GeometryError> {
    let vals = parse_floats::<T>(parts, line)?;
    if vals.len() < 3 {
        return Err(obj_err(line, "expected 3 components"));
    }
    Ok(Vec3::new(vals[0], vals[1], vals[2]))
}

/// Resolves a 1-based or negative OBJ index against `count` elements.
fn resolve(raw: &str, count: usize, what: &str, line: usize) -> Result<usize, GeometryError> {
    let idx: i64 = raw
        .parse()
        .map_err(|_| obj_err(line, format!("invalid {what} index '{raw}'")))?;
    let resolved = if idx > 0 { idx - 1 } else { count as i64 + idx };
    if idx == 0 || resolved < 0 || resolved >= count as i64 {
        return Err(obj_err(
            line,
            format!("{what} index {idx} out of range ({count} defined)"),
        ));
    }
    Ok(resolved as usize)
}

fn parse_corner(token: &str, line: usize, nv: usize, nvt: usize, nvn: usize) -> Result<Corner, GeometryError> {
    let mut fields = token.split('/');
    let v = resolve(fields.next().unwrap_or(""), nv, "vertex", line)?;
    let vt = match fields.next() {
        Some("") | None => None,
        Some(s) => Some(resolve(s, nvt, "texture coordinate", line)?),
    };
    let vn = match fields.next() {
        Some("") | None => None,
        Some(s) => Some(resolve(s, nvn, "normal", line)?),
    };
    Ok(Corner { v, vt, vn })
}

//! ASCII OFF and OBJ reading and writing.
//!
//! Coordinates are emitted with 17 significant digits so that
//! `parse(write(mesh))` reproduces every vertex bit for bit.

use std::path::Path;

use crate::mesh::{Mesh, MeshError};

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

fn decode_ascii(bytes: &[u8]) -> Result<&str, MeshError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        parse_err(line, "input is not ASCII text")
    })
}

/// Lines paired with 1-based line numbers, comments and blanks skipped.
fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Parses an ASCII OFF file: `OFF` header, `n f e` counts line, `n` vertex
/// lines of three reals, `f` face lines of the form `3 i j k`.
pub fn parse_off(bytes: &[u8]) -> Result<Mesh, MeshError> {
    let text = decode_ascii(bytes)?;
    let total_lines = text.lines().count();
    let mut lines = meaningful_lines(text);

    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected OFF header"))?;
    if header != "OFF" {
        return Err(parse_err(line, format!("expected OFF header, found `{header}`")));
    }

    let (line, counts) = lines
        .next()
        .ok_or_else(|| parse_err(total_lines + 1, "input ended before the counts line"))?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() != 3 {
        return Err(parse_err(line, "counts line must hold exactly `n f e`"));
    }
    let n_vertices: usize = counts[0]
        .parse()
        .map_err(|_| parse_err(line, format!("invalid vertex count `{}`", counts[0])))?;
    let n_faces: usize = counts[1]
        .parse()
        .map_err(|_| parse_err(line, format!("invalid face count `{}`", counts[1])))?;

    let mut vertices = Vec::with_capacity(n_vertices);
    for k in 0..n_vertices {
        let (line, text) = lines.next().ok_or_else(|| {
            parse_err(
                total_lines + 1,
                format!("input ended at vertex {k} of {n_vertices}"),
            )
        })?;
        vertices.push(parse_vertex_line(line, text)?);
    }

    let mut faces = Vec::with_capacity(n_faces);
    for k in 0..n_faces {
        let (line, text) = lines.next().ok_or_else(|| {
            parse_err(
                total_lines + 1,
                format!("input ended at face {k} of {n_faces}"),
            )
        })?;
        let mut tokens = text.split_whitespace();
        let count: usize = tokens
            .next()
            .unwrap()
            .parse()
            .map_err(|_| parse_err(line, "face line must start with a vertex count"))?;
        if count != 3 {
            return Err(parse_err(line, format!("non-triangular face with {count} vertices")));
        }
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            let tok = tokens
                .next()
                .ok_or_else(|| parse_err(line, "face line is missing vertex indices"))?;
            let idx: usize = tok
                .parse()
                .map_err(|_| parse_err(line, format!("invalid vertex index `{tok}`")))?;
            if idx >= n_vertices {
                return Err(parse_err(
                    line,
                    format!("vertex index {idx} out of range, mesh has {n_vertices} vertices"),
                ));
            }
            *slot = idx;
        }
        faces.push(tri);
    }

    Mesh::new(vertices, faces)
}

fn parse_vertex_line(line: usize, text: &str) -> Result<[f64; 3], MeshError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 3 {
        return Err(parse_err(
            line,
            format!("vertex line must hold exactly 3 coordinates, found {}", tokens.len()),
        ));
    }
    let mut v = [0.0f64; 3];
    for (slot, tok) in v.iter_mut().zip(&tokens) {
        *slot = tok
            .parse()
            .map_err(|_| parse_err(line, format!("invalid coordinate `{tok}`")))?;
    }
    Ok(v)
}

/// Parses an ASCII OBJ file, honouring `v` and `f` records.
///
/// Face indices are 1-based and may carry `/`-suffixed texture/normal
/// attributes, which are ignored. Negative (relative) indices are rejected.
/// All other record types are skipped.
pub fn parse_obj(bytes: &[u8]) -> Result<Mesh, MeshError> {
    let text = decode_ascii(bytes)?;
    let mut vertices = Vec::new();
    // (line, 0-based triple), validated once the vertex count is final
    let mut faces: Vec<(usize, [usize; 3])> = Vec::new();

    for (line, text) in meaningful_lines(text) {
        let mut tokens = text.split_whitespace();
        match tokens.next().unwrap() {
            "v" => {
                let rest: Vec<&str> = tokens.collect();
                if rest.len() < 3 || rest.len() > 4 {
                    return Err(parse_err(
                        line,
                        format!("`v` record must hold 3 coordinates, found {}", rest.len()),
                    ));
                }
                let mut v = [0.0f64; 3];
                for (slot, tok) in v.iter_mut().zip(&rest) {
                    *slot = tok
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid coordinate `{tok}`")))?;
                }
                vertices.push(v);
            }
            "f" => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!("non-triangular face with {} vertices", refs.len()),
                    ));
                }
                let mut tri = [0usize; 3];
                for (slot, tok) in tri.iter_mut().zip(&refs) {
                    let index_part = tok.split('/').next().unwrap();
                    let idx: i64 = index_part
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid vertex reference `{tok}`")))?;
                    if idx < 0 {
                        return Err(parse_err(line, format!("negative vertex reference `{tok}`")));
                    }
                    if idx == 0 {
                        return Err(parse_err(line, "vertex references are 1-based, found 0"));
                    }
                    *slot = (idx - 1) as usize;
                }
                faces.push((line, tri));
            }
            _ => {}
        }
    }

    let n = vertices.len();
    for &(line, tri) in &faces {
        for idx in tri {
            if idx >= n {
                return Err(parse_err(
                    line,
                    format!("vertex index {} out of range, mesh has {n} vertices", idx + 1),
                ));
            }
        }
    }
    Mesh::new(vertices, faces.into_iter().map(|(_, t)| t).collect())
}

fn push_coords(out: &mut String, v: &[f64; 3]) {
    use std::fmt::Write;
    writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]).unwrap();
}

/// Serializes a mesh as ASCII OFF. The edge count field is written as 0,
/// which readers ignore by convention.
pub fn write_off(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.n_vertices(), mesh.n_faces()));
    for v in mesh.vertices() {
        push_coords(&mut out, v);
    }
    for f in mesh.faces() {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    out
}

/// Serializes a mesh as ASCII OBJ with 1-based face indices.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        out.push_str("v ");
        push_coords(&mut out, v);
    }
    for f in mesh.faces() {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}

/// Loads a mesh from a `.off` or `.obj` file, chosen by extension.
pub fn read_mesh_file(path: &Path) -> Result<Mesh, MeshError> {
    let bytes = std::fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("obj") => parse_obj(&bytes),
        _ => parse_off(&bytes),
    }
}

/// Writes a mesh to a `.off` or `.obj` file, chosen by extension.
pub fn write_mesh_file(path: &Path, mesh: &Mesh) -> Result<(), MeshError> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("obj") => write_obj(mesh),
        _ => write_off(mesh),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_off_file() {
        let src = b"OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = parse_off(src).unwrap();
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(m.faces(), &[[0, 1, 2]]);
        assert_eq!(m.vertices()[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn truncated_off_names_the_line() {
        let src = b"OFF\n4 0 0\n0 0 0\n1 0 0\n0 1 0\n";
        let err = parse_off(src).unwrap_err();
        match err {
            MeshError::Parse { line, msg } => {
                assert_eq!(line, 6);
                assert!(msg.contains("vertex 3 of 4"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn off_quad_face_rejected() {
        let src = b"OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = parse_off(src).unwrap_err();
        assert!(err.to_string().contains("non-triangular"), "{err}");
        assert!(err.to_string().contains("line 7"), "{err}");
    }

    #[test]
    fn off_index_out_of_range_names_line() {
        let src = b"OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";
        let err = parse_off(src).unwrap_err();
        assert!(err.to_string().contains("line 6"), "{err}");
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn off_bad_header_rejected() {
        let err = parse_off(b"OFZ\n0 0 0\n").unwrap_err();
        assert!(err.to_string().contains("OFF header"), "{err}");
    }

    #[test]
    fn minimal_obj_file() {
        let m = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn obj_attribute_suffixes_ignored() {
        let m = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2/2 3//3\n").unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn obj_quad_rejected() {
        let err = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n").unwrap_err();
        assert!(err.to_string().contains("non-triangular"), "{err}");
    }

    #[test]
    fn obj_negative_index_rejected() {
        let err = parse_obj(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf -1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn empty_face_list_round_trips() {
        let m = Mesh::new(vec![[1.0, 2.0, 3.0]], vec![]).unwrap();
        let off = write_off(&m);
        assert!(off.contains("1 0 0"));
        assert_eq!(parse_off(off.as_bytes()).unwrap(), m);
    }

    #[test]
    fn icosphere_round_trips_exactly() {
        let m = crate::icosphere::icosphere(2);
        assert_eq!(parse_off(write_off(&m).as_bytes()).unwrap(), m);
        assert_eq!(parse_obj(write_obj(&m).as_bytes()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn random_mesh_round_trip_is_exact(
            coords in proptest::collection::vec(-1e6f64..1e6, 3..300),
        ) {
            let n = coords.len() / 3;
            let vertices: Vec<[f64; 3]> =
                (0..n).map(|i| [coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]]).collect();
            let faces: Vec<[usize; 3]> = if n >= 3 {
                (0..n - 2).map(|i| [i, i + 1, i + 2]).collect()
            } else {
                vec![]
            };
            let m = Mesh::new(vertices, faces).unwrap();
            let off = parse_off(write_off(&m).as_bytes()).unwrap();
            prop_assert_eq!(&off, &m);
            let obj = parse_obj(write_obj(&m).as_bytes()).unwrap();
            prop_assert_eq!(&obj, &m);
        }
    }
}

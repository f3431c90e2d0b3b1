//! Mesh and boundary-curve files.
//!
//! Meshes travel in a line-based text format: a `hpmesh 1` header, one
//! `v x y z` line per vertex with 17 significant digits (enough to get
//! every f64 back bit for bit), one `f i j k` line per triangle with
//! zero-based indices, and an optional `b i1 i2 ...` line for the boundary
//! loop. Readers reject lines with any other tag.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::domain::AmbientDomain;
use crate::error::{Error, Result};
use crate::mesh::TriangulatedDisk;
use crate::meshing::mesh_spherical_region;
use crate::region::BoundaryCurve;

pub fn write_hpmesh(mesh: &TriangulatedDisk) -> String {
    let mut out = String::new();
    out.push_str("hpmesh 1\n");
    for p in &mesh.vertices {
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    if !mesh.boundary_loop.is_empty() {
        out.push('b');
        for &v in &mesh.boundary_loop {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_hpmesh_file(path: &Path, mesh: &TriangulatedDisk) -> Result<()> {
    fs::write(path, write_hpmesh(mesh))?;
    Ok(())
}

pub fn read_hpmesh(text: &str) -> Result<TriangulatedDisk> {
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut boundary_loop: Vec<usize> = Vec::new();
    let mut seen_header = false;
    let mut seen_boundary = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut fields = raw.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        if !seen_header {
            if tag != "hpmesh" {
                return Err(parse_err(line, format!("expected hpmesh header, got {tag:?}")));
            }
            match fields.next() {
                Some("1") => {}
                other => {
                    return Err(parse_err(
                        line,
                        format!("unsupported format version {other:?}"),
                    ))
                }
            }
            if fields.next().is_some() {
                return Err(parse_err(line, "trailing fields after header".into()));
            }
            seen_header = true;
            continue;
        }
        match tag {
            "v" => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    *c = fields
                        .next()
                        .ok_or_else(|| parse_err(line, "vertex needs 3 coordinates".into()))?
                        .parse()
                        .map_err(|e| parse_err(line, format!("bad coordinate: {e}")))?;
                }
                if fields.next().is_some() {
                    return Err(parse_err(line, "vertex has more than 3 coordinates".into()));
                }
                vertices.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            "f" => {
                let mut tri = [0usize; 3];
                for i in &mut tri {
                    *i = fields
                        .next()
                        .ok_or_else(|| parse_err(line, "triangle needs 3 indices".into()))?
                        .parse()
                        .map_err(|e| parse_err(line, format!("bad index: {e}")))?;
                }
                if fields.next().is_some() {
                    return Err(parse_err(line, "triangle has more than 3 indices".into()));
                }
                triangles.push(tri);
            }
            "b" => {
                if seen_boundary {
                    return Err(parse_err(line, "second boundary line".into()));
                }
                for field in fields {
                    boundary_loop.push(
                        field
                            .parse()
                            .map_err(|e| parse_err(line, format!("bad index: {e}")))?,
                    );
                }
                seen_boundary = true;
            }
            other => {
                return Err(parse_err(line, format!("unknown line tag {other:?}")));
            }
        }
    }
    if !seen_header {
        return Err(parse_err(0, "missing hpmesh header".into()));
    }
    let n = vertices.len();
    for (t, tri) in triangles.iter().enumerate() {
        if tri.iter().any(|&i| i >= n) {
            return Err(Error::InvalidMesh(format!(
                "triangle {t} references a vertex past the last of {n}"
            )));
        }
    }
    if boundary_loop.iter().any(|&i| i >= n) {
        return Err(Error::InvalidMesh(
            "boundary loop references a vertex past the end".into(),
        ));
    }
    Ok(TriangulatedDisk::new(vertices, triangles, boundary_loop))
}

pub fn read_hpmesh_file(path: &Path) -> Result<TriangulatedDisk> {
    read_hpmesh(&fs::read_to_string(path)?)
}

/// On-disk form of a boundary curve: the closed sample polygon on the unit
/// sphere plus, for each side, a sphere point that the curve separates from
/// that side's spanning region. The defaults suit latitude-style curves
/// where the minus side is the southern one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub samples: Vec<[f64; 3]>,
    #[serde(default = "north")]
    pub view_minus: [f64; 3],
    #[serde(default = "south")]
    pub view_plus: [f64; 3],
}

fn north() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn south() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

pub fn read_curve_json(text: &str) -> Result<BoundaryCurve> {
    let file: CurveFile = serde_json::from_str(text)?;
    if file.samples.len() < 3 {
        return Err(Error::Invalid(format!(
            "curve needs at least 3 samples, got {}",
            file.samples.len()
        )));
    }
    let samples: Vec<Point3<f64>> = file
        .samples
        .iter()
        .map(|&[x, y, z]| Point3::new(x, y, z))
        .collect();
    for (k, p) in samples.iter().enumerate() {
        if (p.coords.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "curve sample {k} is off the unit sphere by {:.3e}",
                (p.coords.norm() - 1.0).abs()
            )));
        }
    }
    let l = samples.len();
    let reversed: Vec<Point3<f64>> = (0..l).map(|j| samples[(l - j) % l]).collect();
    let view = |v: [f64; 3]| Point3::new(v[0], v[1], v[2]);
    let rounds = 3;
    let cap_minus = mesh_spherical_region(&samples, view(file.view_minus), rounds)?;
    let cap_plus = mesh_spherical_region(&reversed, view(file.view_plus), rounds)?;
    let curve = BoundaryCurve {
        samples,
        cap_minus,
        cap_plus,
        domain: AmbientDomain::unit_ball(),
    };
    curve.validate()?;
    Ok(curve)
}

pub fn read_curve_file(path: &Path) -> Result<BoundaryCurve> {
    read_curve_json(&fs::read_to_string(path)?)
}

//! JSON mesh exchange.
//!
//! Schema: `{"dim": 2|3, "vertices": [[f64; dim], ...], "cells":
//! [[usize; 3], ...], "tags": {...}, "orientation": "up"|"closed"|"ccw"}`.
//! Vertex coordinates round-trip bit-exactly (shortest-representation float
//! formatting on write, exact parse on read). Normals and areas are derived
//! quantities and are recomputed on read; validation failures (degenerate
//! cells, orientation violations) are reported with the offending index.

use super::{BoundaryTag, CrackMesh, GeometryError, Mesh2D, MeshKind};
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct RawMesh {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<[usize; 3]>,
    #[serde(default)]
    tags: serde_json::Map<String, serde_json::Value>,
    orientation: String,
}

/// Writes a crack surface mesh as JSON.
pub fn write_mesh_json(mesh: &CrackMesh, out: &mut dyn std::io::Write) -> Result<(), GeometryError> {
    let raw = RawMesh {
        dim: 3,
        vertices: mesh.vertices().iter().map(|v| vec![v.x, v.y, v.z]).collect(),
        cells: mesh.triangles().to_vec(),
        tags: serde_json::Map::new(),
        orientation: match mesh.kind() {
            MeshKind::OpenUp => "up".into(),
            MeshKind::Closed => "closed".into(),
        },
    };
    serde_json::to_writer(out, &raw)?;
    Ok(())
}

/// Reads a crack surface mesh from JSON, revalidating all invariants.
pub fn read_mesh_json(input: &mut dyn std::io::Read) -> Result<CrackMesh, GeometryError> {
    let raw: RawMesh = serde_json::from_reader(input)?;
    if raw.dim != 3 {
        return Err(GeometryError::Invalid(format!("expected dim 3, got {}", raw.dim)));
    }
    let kind = match raw.orientation.as_str() {
        "up" => MeshKind::OpenUp,
        "closed" => MeshKind::Closed,
        other => return Err(GeometryError::Invalid(format!("unknown orientation '{other}'"))),
    };
    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for (i, v) in raw.vertices.iter().enumerate() {
        if v.len() != 3 {
            return Err(GeometryError::Invalid(format!("vertex {i} has {} coordinates", v.len())));
        }
        vertices.push(Vector3::new(v[0], v[1], v[2]));
    }
    // reject degenerate cells before the unchecked constructor panics
    for (index, tri) in raw.cells.iter().enumerate() {
        for &v in tri {
            if v >= vertices.len() {
                return Err(GeometryError::IndexOutOfBounds { index, vertex: v, len: vertices.len() });
            }
        }
        let cross = (vertices[tri[1]] - vertices[tri[0]]).cross(&(vertices[tri[2]] - vertices[tri[0]]));
        if cross.norm() == 0.0 {
            return Err(GeometryError::DegenerateTriangle { index, area: 0.0 });
        }
    }
    let max_z = vertices.iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max);
    if max_z >= 0.0 {
        return Err(GeometryError::Standoff {
            index: vertices.iter().position(|v| v.z == max_z).unwrap_or(0),
            z: max_z,
            standoff: 0.0,
        });
    }
    CrackMesh::new(vertices, raw.cells, kind, -max_z)
}

/// Writes a planar eigen mesh as JSON.
pub fn write_mesh2d_json(mesh: &Mesh2D, out: &mut dyn std::io::Write) -> Result<(), GeometryError> {
    let mut tags = serde_json::Map::new();
    let sym: Vec<[usize; 2]> = mesh
        .boundary_edges()
        .iter()
        .filter(|(_, t)| *t == BoundaryTag::SymmetryLine)
        .map(|(e, _)| *e)
        .collect();
    let free: Vec<[usize; 2]> = mesh
        .boundary_edges()
        .iter()
        .filter(|(_, t)| *t == BoundaryTag::Free)
        .map(|(e, _)| *e)
        .collect();
    tags.insert("symmetry_edges".into(), serde_json::to_value(sym)?);
    tags.insert("free_edges".into(), serde_json::to_value(free)?);
    tags.insert("weighted".into(), serde_json::Value::Bool(mesh.weighted()));
    let raw = RawMesh {
        dim: 2,
        vertices: mesh.nodes().iter().map(|p| vec![p.x, p.y]).collect(),
        cells: mesh.triangles().to_vec(),
        tags,
        orientation: "ccw".into(),
    };
    serde_json::to_writer(out, &raw)?;
    Ok(())
}

/// Reads a planar eigen mesh from JSON, revalidating all invariants.
pub fn read_mesh2d_json(input: &mut dyn std::io::Read) -> Result<Mesh2D, GeometryError> {
    let raw: RawMesh = serde_json::from_reader(input)?;
    if raw.dim != 2 {
        return Err(GeometryError::Invalid(format!("expected dim 2, got {}", raw.dim)));
    }
    let mut nodes = Vec::with_capacity(raw.vertices.len());
    for (i, v) in raw.vertices.iter().enumerate() {
        if v.len() != 2 {
            return Err(GeometryError::Invalid(format!("node {i} has {} coordinates", v.len())));
        }
        nodes.push(Vector2::new(v[0], v[1]));
    }
    let get_edges = |key: &str| -> Result<Vec<[usize; 2]>, GeometryError> {
        match raw.tags.get(key) {
            Some(v) => Ok(serde_json::from_value(v.clone())?),
            None => Ok(Vec::new()),
        }
    };
    let mut boundary: Vec<([usize; 2], BoundaryTag)> = Vec::new();
    for e in get_edges("symmetry_edges")? {
        boundary.push((e, BoundaryTag::SymmetryLine));
    }
    for e in get_edges("free_edges")? {
        boundary.push((e, BoundaryTag::Free));
    }
    let weighted = raw
        .tags
        .get("weighted")
        .and_then(|v| v.as_bool())
        .unwrap_or(false);
    Mesh2D::new(nodes, raw.cells, boundary, weighted)
}

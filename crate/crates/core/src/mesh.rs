//! Reference triangulation of the half-channel `[0, L] × [0, R₀]`.
//!
//! Coordinates are `(z, r)` in cm: `z` runs along the vessel axis and `r`
//! is the distance from the symmetry axis. Only the upper half of the
//! vessel section is meshed; the line `r = 0` is a symmetry boundary.

use std::io::{self, Write};

use thiserror::Error;

/// 2D point or vector `(z, r)`.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Proximal section, `z = 0`.
    Inflow,
    /// Distal section, `z = L`.
    Outflow,
    /// Vessel wall, `r = R₀`.
    Wall,
    /// Symmetry axis, `r = 0`.
    Axis,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [Self::Inflow, Self::Outflow, Self::Wall, Self::Axis];

    fn bit(self) -> u8 {
        match self {
            Self::Inflow => 1,
            Self::Outflow => 2,
            Self::Wall => 4,
            Self::Axis => 8,
        }
    }
}

/// A boundary segment. `nodes` is ordered counter-clockwise around the
/// domain, so the outward normal is the tangent rotated clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("channel dimensions must be positive (length {length}, radius {radius})")]
    NonPositiveDimension { length: f64, radius: f64 },
    #[error("cell counts must be at least 1 (nz {nz}, nr {nr})")]
    TooFewCells { nz: usize, nr: usize },
}

#[derive(Debug, Clone)]
pub struct ReferenceMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    wall_nodes: Vec<usize>,
    /// For each wall segment `(wall_nodes[k], wall_nodes[k+1])`, the triangle owning it.
    wall_edge_triangles: Vec<usize>,
    node_tags: Vec<u8>,
    length: f64,
    radius: f64,
    nz: usize,
    nr: usize,
}

impl ReferenceMesh {
    /// Structured right-triangle mesh with `nz × nr` rectangles, each split
    /// along its rising diagonal.
    ///
    /// Node `(i, j)` sits at `(i·L/nz, j·R₀/nr)` and has index `i·(nr+1) + j`.
    pub fn channel(length: f64, radius: f64, nz: usize, nr: usize) -> Result<Self, MeshError> {
        if !(length > 0.0 && radius > 0.0) || !length.is_finite() || !radius.is_finite() {
            return Err(MeshError::NonPositiveDimension { length, radius });
        }
        if nz < 1 || nr < 1 {
            return Err(MeshError::TooFewCells { nz, nr });
        }
        let id = |i: usize, j: usize| i * (nr + 1) + j;

        let mut nodes = Vec::with_capacity((nz + 1) * (nr + 1));
        for i in 0..=nz {
            for j in 0..=nr {
                // Pin the far ends exactly so the boundary coordinates are exact.
                let z = if i == nz {
                    length
                } else {
                    i as f64 * length / nz as f64
                };
                let r = if j == nr {
                    radius
                } else {
                    j as f64 * radius / nr as f64
                };
                nodes.push([z, r]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * nz * nr);
        for i in 0..nz {
            for j in 0..nr {
                let (n00, n10, n01, n11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                triangles.push([n00, n10, n11]);
                triangles.push([n00, n11, n01]);
            }
        }

        let mut boundary_edges = Vec::with_capacity(2 * (nz + nr));
        for i in 0..nz {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i, 0), id(i + 1, 0)],
                tag: BoundaryTag::Axis,
            });
        }
        for j in 0..nr {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(nz, j), id(nz, j + 1)],
                tag: BoundaryTag::Outflow,
            });
        }
        for i in (0..nz).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i + 1, nr), id(i, nr)],
                tag: BoundaryTag::Wall,
            });
        }
        for j in (0..nr).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(0, j + 1), id(0, j)],
                tag: BoundaryTag::Inflow,
            });
        }

        let mut node_tags = vec![0u8; nodes.len()];
        for e in &boundary_edges {
            for &n in &e.nodes {
                node_tags[n] |= e.tag.bit();
            }
        }

        let wall_nodes: Vec<usize> = (0..=nz).map(|i| id(i, nr)).collect();
        // Upper triangle of the top rectangle in column i holds the wall segment.
        let wall_edge_triangles = (0..nz).map(|i| 2 * (i * nr + nr - 1) + 1).collect();

        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
            wall_nodes,
            wall_edge_triangles,
            node_tags,
            length,
            radius,
            nz,
            nr,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Wall nodes ordered by increasing `z`, from `z = 0` to `z = L`.
    pub fn wall_nodes(&self) -> &[usize] {
        &self.wall_nodes
    }

    /// Triangle containing the wall segment between wall nodes `k` and `k + 1`.
    pub fn wall_edge_triangle(&self, k: usize) -> usize {
        self.wall_edge_triangles[k]
    }

    /// Reference `z` coordinates of the wall grid.
    pub fn wall_coordinates(&self) -> Vec<f64> {
        self.wall_nodes.iter().map(|&n| self.nodes[n][0]).collect()
    }

    pub fn has_tag(&self, node: usize, tag: BoundaryTag) -> bool {
        self.node_tags[node] & tag.bit() != 0
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.node_tags[node] != 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.nz, self.nr)
    }
}

pub fn build_channel_mesh(
    length: f64,
    radius: f64,
    nz: usize,
    nr: usize,
) -> Result<ReferenceMesh, MeshError> {
    ReferenceMesh::channel(length, radius, nz, nr)
}

/// Signed area of a triangle; positive for counter-clockwise vertices.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Smallest signed triangle area over the mesh with nodes placed at `coords`.
///
/// A positive value certifies that the map from the reference mesh preserves
/// orientation on every element.
pub fn min_signed_area(mesh: &ReferenceMesh, coords: &[Point]) -> f64 {
    assert_eq!(coords.len(), mesh.num_nodes(), "one coordinate per node");
    mesh.triangles()
        .iter()
        .map(|t| signed_area(coords[t[0]], coords[t[1]], coords[t[2]]))
        .fold(f64::INFINITY, f64::min)
}

pub enum PointField<'a> {
    Scalar(&'a str, &'a [f64]),
    Vector(&'a str, &'a [Point]),
}

/// Writes the mesh at `coords` as a legacy ASCII VTK unstructured grid of
/// linear triangles (cell type 5), with optional nodal fields.
pub fn write_vtk<W: Write>(
    out: &mut W,
    title: &str,
    mesh: &ReferenceMesh,
    coords: &[Point],
    fields: &[PointField<'_>],
) -> io::Result<()> {
    let n = mesh.num_nodes();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for p in coords {
        writeln!(out, "{:.10e} {:.10e} 0", p[0], p[1])?;
    }
    let nt = mesh.triangles().len();
    writeln!(out, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    if !fields.is_empty() {
        writeln!(out, "POINT_DATA {n}")?;
    }
    for field in fields {
        match field {
            PointField::Scalar(name, values) => {
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in values.iter() {
                    writeln!(out, "{v:.10e}")?;
                }
            }
            PointField::Vector(name, values) => {
                writeln!(out, "VECTORS {name} double")?;
                for v in values.iter() {
                    writeln!(out, "{:.10e} {:.10e} 0", v[0], v[1])?;
                }
            }
        }
    }
    Ok(())
}

//! Conforming triangulations with newest vertex bisection.
//!
//! Local conventions used throughout the crate:
//!
//! * triangle vertices are stored counterclockwise;
//! * local edge `i` of a triangle is the edge opposite its local vertex `i`,
//!   running from `v[(i + 1) % 3]` to `v[(i + 2) % 3]`;
//! * the refinement edge is stored as a local edge index, so the vertex
//!   opposite to it is the "newest vertex" of the triangle;
//! * a mesh edge stores its endpoints sorted by global index, its adjacent
//!   elements sorted by element index, and the unit normal pointing out of
//!   the first adjacent element.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex<T> {
    pub x: T,
    pub y: T,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub v: [usize; 3],
    /// Local index (0, 1 or 2) of the refinement edge.
    pub refinement_edge: u8,
}

impl Triangle {
    /// Global endpoints of local edge `i`.
    #[inline]
    pub fn edge_vertices(&self, i: usize) -> [usize; 2] {
        [self.v[(i + 1) % 3], self.v[(i + 2) % 3]]
    }

    /// Local position of global vertex `p`, if it belongs to the triangle.
    #[inline]
    pub fn local_index(&self, p: usize) -> Option<usize> {
        self.v.iter().position(|&q| q == p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    /// Endpoints, lower global index first.
    pub v: [usize; 2],
    /// Adjacent elements, lower element index first. Boundary edges have one.
    pub elems: [usize; 2],
    /// Local edge index inside each adjacent element.
    pub local: [u8; 2],
    /// Unit normal pointing out of `elems[0]`.
    pub normal: [T; 2],
    /// Edge length `h_e`.
    pub length: T,
    boundary: bool,
}

impl<T: Real> Edge<T> {
    #[inline]
    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    /// Adjacent elements (one for boundary edges, two otherwise).
    #[inline]
    pub fn elements(&self) -> &[usize] {
        if self.boundary {
            &self.elems[..1]
        } else {
            &self.elems[..]
        }
    }
}

/// Conforming 2D triangulation together with its derived connectivity.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    vertices: Vec<Vertex<T>>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge<T>>,
    tri_edges: Vec<[usize; 3]>,
    vertex_patches: Vec<Vec<usize>>,
    areas: Vec<T>,
    diameters: Vec<T>,
}

/// Result of [`Mesh::bisect`].
#[derive(Debug, Clone)]
pub struct Refinement<T> {
    pub mesh: Mesh<T>,
    /// For each element of the old mesh, the element ids in the new mesh
    /// that cover it (a single id if the element was untouched).
    pub children: Vec<Vec<usize>>,
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area<T: Real>(p: [T; 2], q: [T; 2], r: [T; 2]) -> T {
    ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])) * T::lit(0.5)
}

fn dist2<T: Real>(p: [T; 2], q: [T; 2]) -> T {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    dx * dx + dy * dy
}

/// Longest local edge; ties broken by the smallest global index of the opposite vertex.
fn longest_edge<T: Real>(coords: &[[T; 2]], v: [usize; 3]) -> u8 {
    let len2 = |i: usize| dist2(coords[v[(i + 1) % 3]], coords[v[(i + 2) % 3]]);
    let tie_tol = T::lit(1e-12);
    let mut best = 0usize;
    for i in 1..3 {
        let (li, lb) = (len2(i), len2(best));
        if li > lb * (T::one() + tie_tol) || ((li - lb).abs() <= lb * tie_tol && v[i] < v[best]) {
            best = i;
        }
    }
    best as u8
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from coordinates and triangles, assigning the longest edge
    /// of each triangle as its refinement edge.
    pub fn build(vertices: &[[T; 2]], triangles: &[[usize; 3]]) -> Result<Self> {
        check_indices(vertices.len(), triangles)?;
        let refinement: Vec<u8> = triangles
            .iter()
            .map(|&t| longest_edge(vertices, t))
            .collect();
        Self::from_parts(vertices, triangles, &refinement)
    }

    /// Builds a mesh with explicitly supplied refinement edges.
    pub fn from_parts(
        vertices: &[[T; 2]],
        triangles: &[[usize; 3]],
        refinement_edges: &[u8],
    ) -> Result<Self> {
        let mesh = Self::assemble(vertices, triangles, refinement_edges)?;
        mesh.check_hanging_vertices()?;
        Ok(mesh)
    }

    fn assemble(
        coords: &[[T; 2]],
        triangles: &[[usize; 3]],
        refinement_edges: &[u8],
    ) -> Result<Self> {
        check_indices(coords.len(), triangles)?;
        if refinement_edges.len() != triangles.len() {
            return Err(Error::DimensionMismatch {
                expected: triangles.len(),
                got: refinement_edges.len(),
            });
        }
        if triangles.is_empty() {
            return Err(Error::InvalidParameter("mesh has no triangles".into()));
        }

        let mut tris = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut diameters = Vec::with_capacity(triangles.len());
        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(triangles.len());
        for (k, (&t, &r)) in triangles.iter().zip(refinement_edges).enumerate() {
            if r > 2 {
                return Err(Error::InvalidIndex(format!(
                    "refinement edge {r} of triangle {k}"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateElement {
                    element: k,
                    area: 0.0,
                });
            }
            let mut key = t;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DuplicateTriangle { first, second: k });
            }
            seen.insert(key, k);

            let [a, b, c] = t.map(|i| coords[i]);
            let area = signed_area(a, b, c);
            let h2 = dist2(a, b).max(dist2(b, c)).max(dist2(c, a));
            if area.abs() <= T::epsilon() * h2 || !area.is_finite() {
                return Err(Error::DegenerateElement {
                    element: k,
                    area: area.to_f64_lossy(),
                });
            }
            let tri = if area < T::zero() {
                // swapping local vertices 1 and 2 swaps the labels of local edges 1 and 2
                let r = match r {
                    1 => 2,
                    2 => 1,
                    other => other,
                };
                Triangle {
                    v: [t[0], t[2], t[1]],
                    refinement_edge: r,
                }
            } else {
                Triangle {
                    v: t,
                    refinement_edge: r,
                }
            };
            tris.push(tri);
            areas.push(area.abs());
            diameters.push(h2.sqrt());
        }

        let mut edge_map: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge<T>> = Vec::with_capacity(triangles.len() * 2);
        let mut tri_edges = vec![[0usize; 3]; tris.len()];
        for (k, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                let [a, b] = tri.edge_vertices(i);
                let key = sorted_pair(a, b);
                match edge_map.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if !edge.boundary {
                            return Err(Error::NonConforming(format!(
                                "edge ({}, {}) shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        edge.elems[1] = k;
                        edge.local[1] = i as u8;
                        edge.boundary = false;
                        tri_edges[k][i] = e;
                    }
                    None => {
                        let p = coords[key.0];
                        let q = coords[key.1];
                        let length = dist2(p, q).sqrt();
                        let mut normal = [(q[1] - p[1]) / length, -(q[0] - p[0]) / length];
                        let opp = coords[tri.v[i]];
                        let outward = normal[0] * (p[0] - opp[0]) + normal[1] * (p[1] - opp[1]);
                        if outward < T::zero() {
                            normal = [-normal[0], -normal[1]];
                        }
                        edge_map.insert(key, edges.len());
                        tri_edges[k][i] = edges.len();
                        edges.push(Edge {
                            v: [key.0, key.1],
                            elems: [k, usize::MAX],
                            local: [i as u8, u8::MAX],
                            normal,
                            length,
                            boundary: true,
                        });
                    }
                }
            }
        }

        let mut vertices: Vec<Vertex<T>> = coords
            .iter()
            .map(|c| Vertex {
                x: c[0],
                y: c[1],
                on_boundary: false,
            })
            .collect();
        for e in edges.iter().filter(|e| e.boundary) {
            vertices[e.v[0]].on_boundary = true;
            vertices[e.v[1]].on_boundary = true;
        }
        let mut vertex_patches = vec![Vec::new(); vertices.len()];
        for (k, tri) in tris.iter().enumerate() {
            for &p in &tri.v {
                vertex_patches[p].push(k);
            }
        }
        if let Some(p) = vertex_patches.iter().position(|patch| patch.is_empty()) {
            return Err(Error::NonConforming(format!(
                "vertex {p} is not used by any triangle"
            )));
        }

        Ok(Mesh {
            vertices,
            triangles: tris,
            edges,
            tri_edges,
            vertex_patches,
            areas,
            diameters,
        })
    }

    /// A hanging vertex lies in the relative interior of an edge that has only
    /// one neighbour. Only vertices on such edges are candidates.
    fn check_hanging_vertices(&self) -> Result<()> {
        let boundary_edges: Vec<&Edge<T>> = self.edges.iter().filter(|e| e.boundary).collect();
        let candidates: Vec<usize> = (0..self.vertices.len())
            .filter(|&p| self.vertices[p].on_boundary)
            .collect();
        for e in &boundary_edges {
            let a = self.coords(e.v[0]);
            let b = self.coords(e.v[1]);
            let len2 = dist2(a, b);
            let (xmin, xmax) = (a[0].min(b[0]), a[0].max(b[0]));
            let (ymin, ymax) = (a[1].min(b[1]), a[1].max(b[1]));
            for &p in &candidates {
                if p == e.v[0] || p == e.v[1] {
                    continue;
                }
                let c = self.coords(p);
                if c[0] < xmin || c[0] > xmax || c[1] < ymin || c[1] > ymax {
                    continue;
                }
                let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                if cross.abs() > T::lit(1e-10) * len2 {
                    continue;
                }
                let s = ((c[0] - a[0]) * (b[0] - a[0]) + (c[1] - a[1]) * (b[1] - a[1])) / len2;
                if s > T::zero() && s < T::one() {
                    return Err(Error::NonConforming(format!(
                        "hanging vertex {p} on edge ({}, {})",
                        e.v[0], e.v[1]
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    #[inline]
    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    #[inline]
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    #[inline]
    pub fn coords(&self, p: usize) -> [T; 2] {
        let v = &self.vertices[p];
        [v.x, v.y]
    }

    /// Coordinates of the three vertices of element `t`.
    #[inline]
    pub fn triangle_coords(&self, t: usize) -> [[T; 2]; 3] {
        self.triangles[t].v.map(|p| self.coords(p))
    }

    /// Mesh edge ids of the local edges of element `t`.
    #[inline]
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// `|T|`
    #[inline]
    pub fn area(&self, t: usize) -> T {
        self.areas[t]
    }

    /// `h_T`, the diameter (longest edge) of element `t`.
    #[inline]
    pub fn diameter(&self, t: usize) -> T {
        self.diameters[t]
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn diameters(&self) -> &[T] {
        &self.diameters
    }

    /// Elements sharing vertex `p`.
    #[inline]
    pub fn vertex_patch(&self, p: usize) -> &[usize] {
        &self.vertex_patches[p]
    }

    /// `ω_e`: the elements adjacent to edge `e`.
    #[inline]
    pub fn edge_patch(&self, e: usize) -> &[usize] {
        self.edges[e].elements()
    }

    pub fn max_patch_size(&self) -> usize {
        self.vertex_patches.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    pub fn h_min(&self) -> T {
        self.diameters.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn h_max(&self) -> T {
        self.diameters.iter().copied().fold(T::zero(), T::max)
    }

    /// Physical point with barycentric coordinates `bary` in element `t`.
    pub fn point(&self, t: usize, bary: [T; 3]) -> [T; 2] {
        let c = self.triangle_coords(t);
        [
            bary[0] * c[0][0] + bary[1] * c[1][0] + bary[2] * c[2][0],
            bary[0] * c[0][1] + bary[1] * c[1][1] + bary[2] * c[2][1],
        ]
    }

    pub fn centroid(&self, t: usize) -> [T; 2] {
        let third = T::one() / T::lit(3.0);
        self.point(t, [third; 3])
    }

    /// Smallest interior angle (radians) over all elements.
    pub fn min_angle(&self) -> T {
        (0..self.num_triangles())
            .map(|t| {
                let c = self.triangle_coords(t);
                (0..3)
                    .map(|i| {
                        let p = c[i];
                        let q = c[(i + 1) % 3];
                        let r = c[(i + 2) % 3];
                        let u = [q[0] - p[0], q[1] - p[1]];
                        let w = [r[0] - p[0], r[1] - p[1]];
                        let cross = u[0] * w[1] - u[1] * w[0];
                        let dot = u[0] * w[0] + u[1] * w[1];
                        cross.abs().atan2(dot)
                    })
                    .fold(T::infinity(), T::min)
            })
            .fold(T::infinity(), T::min)
    }

    /// Every interior edge has two neighbours, every boundary edge one, and no
    /// vertex hangs on a boundary edge.
    pub fn check_conformity(&self) -> Result<()> {
        for (k, e) in self.edges.iter().enumerate() {
            let n = if e.boundary { 1 } else { 2 };
            if e.elements().len() != n {
                return Err(Error::NonConforming(format!("edge {k}")));
            }
        }
        self.check_hanging_vertices()
    }

    /// Newest vertex bisection of every marked element plus the closure
    /// needed to keep the mesh conforming.
    ///
    /// Edges are marked first: the refinement edge of each marked element,
    /// then, repeatedly, the refinement edge of any element owning a marked
    /// edge. Each element is then bisected recursively through its marked
    /// edges, so each edge is split at most once and both sides agree.
    pub fn bisect(&self, marked: &[usize]) -> Result<Refinement<T>> {
        if let Some(&bad) = marked.iter().find(|&&t| t >= self.num_triangles()) {
            return Err(Error::InvalidIndex(format!("marked element {bad}")));
        }
        let mut marked_edges = vec![false; self.edges.len()];
        let mut stack: Vec<usize> = marked
            .iter()
            .map(|&t| self.tri_edges[t][self.triangles[t].refinement_edge as usize])
            .collect();
        while let Some(e) = stack.pop() {
            if marked_edges[e] {
                continue;
            }
            marked_edges[e] = true;
            for &t in self.edges[e].elements() {
                let re = self.tri_edges[t][self.triangles[t].refinement_edge as usize];
                if !marked_edges[re] {
                    stack.push(re);
                }
            }
        }

        let mut coords: Vec<[T; 2]> = (0..self.num_vertices()).map(|p| self.coords(p)).collect();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, e) in self.edges.iter().enumerate() {
            if marked_edges[k] {
                let [a, b] = e.v;
                let (pa, pb) = (coords[a], coords[b]);
                midpoint.insert((a, b), coords.len());
                coords.push([(pa[0] + pb[0]) * T::lit(0.5), (pa[1] + pb[1]) * T::lit(0.5)]);
            }
        }
        let marked_keys: HashSet<(usize, usize)> = midpoint.keys().copied().collect();

        let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(self.num_triangles() * 2);
        let mut refinement: Vec<u8> = Vec::with_capacity(self.num_triangles() * 2);
        let mut children = Vec::with_capacity(self.num_triangles());
        let mut work: Vec<Triangle> = Vec::new();
        for tri in &self.triangles {
            let start = triangles.len();
            work.push(*tri);
            while let Some(t) = work.pop() {
                let r = t.refinement_edge as usize;
                let [a, b] = t.edge_vertices(r);
                let key = sorted_pair(a, b);
                if !marked_keys.contains(&key) {
                    triangles.push(t.v);
                    refinement.push(t.refinement_edge);
                    continue;
                }
                let m = midpoint[&key];
                let apex = t.v[r];
                // children (apex, a, m) and (apex, m, b); m is the newest vertex at local 2 and 1
                let second = Triangle {
                    v: [apex, m, b],
                    refinement_edge: 1,
                };
                let first = Triangle {
                    v: [apex, a, m],
                    refinement_edge: 2,
                };
                work.push(second);
                work.push(first);
            }
            children.push((start..triangles.len()).collect());
        }

        let mesh = Self::assemble(&coords, &triangles, &refinement)?;
        Ok(Refinement { mesh, children })
    }

    /// Refines every element once.
    pub fn bisect_all(&self) -> Result<Mesh<T>> {
        let all: Vec<usize> = (0..self.num_triangles()).collect();
        Ok(self.bisect(&all)?.mesh)
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v.x.to_f64_lossy(), v.y.to_f64_lossy()])
                .collect(),
            triangles: self.triangles.iter().map(|t| t.v).collect(),
            refinement_edges: self.triangles.iter().map(|t| t.refinement_edge).collect(),
        }
    }

    pub fn from_json(json: &MeshJson) -> Result<Self> {
        let coords: Vec<[T; 2]> = json
            .vertices
            .iter()
            .map(|&[x, y]| {
                match (T::from_f64(x), T::from_f64(y)) {
                    (Some(x), Some(y)) => Ok([x, y]),
                    _ => Err(Error::InvalidParameter(format!("coordinate ({x}, {y})"))),
                }
            })
            .collect::<Result<_>>()?;
        Self::from_parts(&coords, &json.triangles, &json.refinement_edges)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_json()).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let json: MeshJson = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&json)
    }
}

fn check_indices(n: usize, triangles: &[[usize; 3]]) -> Result<()> {
    for (k, t) in triangles.iter().enumerate() {
        if let Some(&p) = t.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidIndex(format!(
                "triangle {k} references vertex {p}, mesh has {n} vertices"
            )));
        }
    }
    Ok(())
}

/// On-disk mesh layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub refinement_edges: Vec<u8>,
}

/// Criss-cross grid: every kept square cell is split into four triangles
/// through its centre. `keep` receives the cell centre.
pub fn criss_cross<T: Real>(
    origin: [T; 2],
    cells: [usize; 2],
    cell_size: T,
    keep: impl Fn(T, T) -> bool,
) -> Result<Mesh<T>> {
    let [nx, ny] = cells;
    let mut coords: Vec<[T; 2]> = Vec::new();
    let mut corner: HashMap<(usize, usize), usize> = HashMap::new();
    let mut corner_id = |i: usize, j: usize, coords: &mut Vec<[T; 2]>| -> usize {
        *corner.entry((i, j)).or_insert_with(|| {
            coords.push([
                origin[0] + T::from_usize_lossy(i) * cell_size,
                origin[1] + T::from_usize_lossy(j) * cell_size,
            ]);
            coords.len() - 1
        })
    };
    let half = T::lit(0.5);
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let cx = origin[0] + (T::from_usize_lossy(i) + half) * cell_size;
            let cy = origin[1] + (T::from_usize_lossy(j) + half) * cell_size;
            if !keep(cx, cy) {
                continue;
            }
            let sw = corner_id(i, j, &mut coords);
            let se = corner_id(i + 1, j, &mut coords);
            let ne = corner_id(i + 1, j + 1, &mut coords);
            let nw = corner_id(i, j + 1, &mut coords);
            let c = coords.len();
            coords.push([cx, cy]);
            triangles.push([c, sw, se]);
            triangles.push([c, se, ne]);
            triangles.push([c, ne, nw]);
            triangles.push([c, nw, sw]);
        }
    }
    Mesh::build(&coords, &triangles)
}

/// Coarse meshes of the three benchmark domains.
pub fn initial_domain<T: Real>(example_id: u32) -> Result<Mesh<T>> {
    match example_id {
        // (-1.5, 1.5)^2
        1 => criss_cross([T::lit(-1.5), T::lit(-1.5)], [4, 4], T::lit(0.75), |_, _| true),
        // (-2, 2)^2 without [0, 2) x (-2, 0]
        2 => criss_cross([T::lit(-2.0), T::lit(-2.0)], [8, 8], T::lit(0.5), |x, y| {
            !(x > T::zero() && y < T::zero())
        }),
        // (-2, 2) x (-1, 1)
        3 => criss_cross([T::lit(-2.0), T::lit(-1.0)], [8, 4], T::lit(0.5), |_, _| true),
        other => Err(Error::UnknownExample(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh<f64> {
        Mesh::build(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            &[[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_connectivity() {
        let m = unit_square();
        assert_eq!(m.edges().len(), 5);
        assert_eq!(m.edges().iter().filter(|e| !e.is_boundary()).count(), 1);
        assert_eq!(m.vertices().iter().filter(|v| v.on_boundary).count(), 4);
        for t in 0..2 {
            assert_eq!(m.area(t), 0.5);
            assert!((m.diameter(t) - 2f64.sqrt()).abs() < 1e-15);
        }
        // the shared diagonal is the refinement edge of both
        let diag = m.edges().iter().position(|e| !e.is_boundary()).unwrap();
        for t in 0..2 {
            let r = m.triangles()[t].refinement_edge as usize;
            assert_eq!(m.triangle_edges(t)[r], diag);
        }
    }

    #[test]
    fn interior_normal_points_out_of_first_element() {
        let m = unit_square();
        let e = m.edges().iter().find(|e| !e.is_boundary()).unwrap();
        assert_eq!(e.elems, [0, 1]);
        // element 0 lies below the diagonal y = x
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.normal[0] + s).abs() < 1e-15 && (e.normal[1] - s).abs() < 1e-15);
    }

    #[test]
    fn hanging_vertex_rejected() {
        // triangle (0,0),(2,0),(0,2) next to two triangles sharing the midpoint (1,1)
        let coords = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0], [1.0, 1.0]];
        let tris = [[0, 1, 2], [1, 3, 4], [4, 3, 2]];
        let err = Mesh::build(&coords, &tris).unwrap_err();
        assert!(err.to_string().contains("non-conforming"), "{err}");
    }

    #[test]
    fn degenerate_and_duplicate_rejected() {
        let coords = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Mesh::build(&coords, &[[0, 1, 2]]),
            Err(Error::DegenerateElement { .. })
        ));
        assert!(matches!(
            Mesh::build(&coords, &[[0, 1, 3], [1, 3, 0]]),
            Err(Error::DuplicateTriangle { .. })
        ));
        assert!(matches!(
            Mesh::build(&coords, &[[0, 1, 7]]),
            Err(Error::InvalidIndex(_))
        ));
    }

    #[test]
    fn orientation_normalized() {
        let m = Mesh::build(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 2, 1]]).unwrap();
        let c = m.triangle_coords(0);
        assert!(signed_area(c[0], c[1], c[2]) > 0.0);
        // refinement edge still the hypotenuse, i.e. opposite vertex 0
        let t = m.triangles()[0];
        assert_eq!(t.v[t.refinement_edge as usize], 0);
    }

    #[test]
    fn bisect_both_triangles() {
        let m = unit_square();
        let r = m.bisect(&[0, 1]).unwrap();
        assert_eq!(r.mesh.num_triangles(), 4);
        assert_eq!(r.mesh.num_vertices(), 5);
        r.mesh.check_conformity().unwrap();
        assert_eq!(r.children[0].len(), 2);
        assert_eq!(r.children[1].len(), 2);
        assert!((r.mesh.h_min() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closure_bisects_neighbour() {
        let m = unit_square();
        let r = m.bisect(&[0]).unwrap();
        assert_eq!(r.mesh.num_triangles(), 4);
        r.mesh.check_conformity().unwrap();
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = unit_square();
        let r = m.bisect(&[]).unwrap();
        assert_eq!(r.mesh.triangles(), m.triangles());
        assert_eq!(r.mesh.vertices(), m.vertices());
    }

    #[test]
    fn h_min_values() {
        assert!((unit_square().h_min() - 2f64.sqrt()).abs() < 1e-15);
        let single = Mesh::build(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 1, 2]]).unwrap();
        assert!((single.h_min() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn benchmark_domains() {
        let m1 = initial_domain::<f64>(1).unwrap();
        assert_eq!(m1.num_triangles(), 64);
        assert!((m1.total_area() - 9.0).abs() < 1e-12);
        let m2 = initial_domain::<f64>(2).unwrap();
        assert!((m2.total_area() - 12.0).abs() < 1e-12);
        // no element in the removed quadrant
        for t in 0..m2.num_triangles() {
            let c = m2.centroid(t);
            assert!(!(c[0] > 0.0 && c[1] < 0.0));
        }
        m2.check_conformity().unwrap();
        let m3 = initial_domain::<f64>(3).unwrap();
        assert!((m3.total_area() - 8.0).abs() < 1e-12);
        assert!(matches!(initial_domain::<f64>(4), Err(Error::UnknownExample(4))));
    }

    #[test]
    fn criss_cross_refinement_edges_are_compatible() {
        // the refinement edge of every coarse triangle is a cell side, shared
        // with the neighbouring cell's triangle whose refinement edge it is too
        let m = initial_domain::<f64>(1).unwrap();
        for t in 0..m.num_triangles() {
            let e = m.triangle_edges(t)[m.triangles()[t].refinement_edge as usize];
            for &n in m.edge_patch(e) {
                assert_eq!(m.triangle_edges(n)[m.triangles()[n].refinement_edge as usize], e);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = initial_domain::<f64>(2).unwrap().bisect(&[0, 5, 17]).unwrap().mesh;
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back: MeshJson = serde_json::from_str(&text).unwrap();
        let m2 = Mesh::<f64>::from_json(&back).unwrap();
        for (a, b) in m.vertices().iter().zip(m2.vertices()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        assert_eq!(m.triangles(), m2.triangles());
    }
}

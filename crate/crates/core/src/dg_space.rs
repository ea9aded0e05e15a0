//! Piecewise linear discontinuous functions and their traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Refinement};
use crate::scalar::Real;

/// Element-local P1 function: three nodal values per triangle stored
/// element-major (`values[3 * t + i]` is the value at local vertex `i` of `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct DgFunction<T> {
    values: Vec<T>,
}

/// Continuous P1 function vanishing on the boundary, one value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformingFunction<T> {
    values: Vec<T>,
}

/// Gradients of the three barycentric basis functions of a triangle.
pub fn p1_gradients<T: Real>(c: [[T; 2]; 3]) -> [[T; 2]; 3] {
    let two_area =
        (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    let mut g = [[T::zero(); 2]; 3];
    for i in 0..3 {
        let a = c[(i + 1) % 3];
        let b = c[(i + 2) % 3];
        g[i] = [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area];
    }
    g
}

/// Barycentric coordinates of `p` in the triangle `c`; exact at the vertices.
fn barycentric<T: Real>(c: [[T; 2]; 3], p: [T; 2]) -> [T; 3] {
    if let Some(j) = c.iter().position(|&q| q == p) {
        let mut b = [T::zero(); 3];
        b[j] = T::one();
        return b;
    }
    let cross = |a: [T; 2], b: [T; 2]| a[0] * b[1] - a[1] * b[0];
    let e1 = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
    let e2 = [c[2][0] - c[0][0], c[2][1] - c[0][1]];
    let d = [p[0] - c[0][0], p[1] - c[0][1]];
    let det = cross(e1, e2);
    let l1 = cross(d, e2) / det;
    let l2 = cross(e1, d) / det;
    [T::one() - l1 - l2, l1, l2]
}

impl<T: Real> DgFunction<T> {
    pub fn zeros(mesh: &Mesh<T>) -> Self {
        DgFunction {
            values: vec![T::zero(); 3 * mesh.num_triangles()],
        }
    }

    pub fn from_values(mesh: &Mesh<T>, values: Vec<T>) -> Result<Self> {
        let expected = 3 * mesh.num_triangles();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(DgFunction { values })
    }

    /// Nodal interpolation of `g`, element by element.
    pub fn interpolate(mesh: &Mesh<T>, g: impl Fn(T, T) -> T) -> Self {
        let nodal: Vec<T> = mesh.vertices().iter().map(|v| g(v.x, v.y)).collect();
        let values = mesh
            .triangles()
            .iter()
            .flat_map(|t| t.v.map(|p| nodal[p]))
            .collect();
        DgFunction { values }
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// The three nodal values on element `t`.
    #[inline]
    pub fn local(&self, t: usize) -> [T; 3] {
        [self.values[3 * t], self.values[3 * t + 1], self.values[3 * t + 2]]
    }

    pub fn num_elements(&self) -> usize {
        self.values.len() / 3
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Value at a barycentric point of element `t`.
    pub fn eval(&self, t: usize, bary: [T; 3]) -> Result<T> {
        let tol = T::lit(1e3) * T::epsilon();
        let sum = bary[0] + bary[1] + bary[2];
        if bary.iter().any(|&b| b < -tol || !b.is_finite()) || (sum - T::one()).abs() > tol {
            return Err(Error::InvalidBarycentric(bary.map(Real::to_f64_lossy)));
        }
        Ok(self.eval_unchecked(t, bary))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, t: usize, bary: [T; 3]) -> T {
        let v = self.local(t);
        bary[0] * v[0] + bary[1] * v[1] + bary[2] * v[2]
    }

    /// Constant gradient on element `t`.
    pub fn gradient(&self, mesh: &Mesh<T>, t: usize) -> [T; 2] {
        let g = p1_gradients(mesh.triangle_coords(t));
        let v = self.local(t);
        [
            v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0],
            v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1],
        ]
    }

    /// Transfer to a refined mesh: every child takes the values of its
    /// parent's linear function at its own vertices.
    pub fn prolongate(&self, old: &Mesh<T>, refinement: &Refinement<T>) -> Self {
        let new = &refinement.mesh;
        let mut values = vec![T::zero(); 3 * new.num_triangles()];
        for (parent, kids) in refinement.children.iter().enumerate() {
            let c = old.triangle_coords(parent);
            for &k in kids {
                for (i, &p) in new.triangles()[k].v.iter().enumerate() {
                    values[3 * k + i] = self.eval_unchecked(parent, barycentric(c, new.coords(p)));
                }
            }
        }
        DgFunction { values }
    }

    /// Trace from element `t` at parameter `s` along edge `e` (from its lower
    /// to its higher vertex index).
    pub fn trace(&self, mesh: &Mesh<T>, t: usize, e: usize, s: T) -> T {
        let edge = &mesh.edges()[e];
        let tri = &mesh.triangles()[t];
        let v = self.local(t);
        let ia = tri.local_index(edge.v[0]).expect("edge vertex in element");
        let ib = tri.local_index(edge.v[1]).expect("edge vertex in element");
        (T::one() - s) * v[ia] + s * v[ib]
    }

    /// Scalar jump `v|_{T+} - v|_{T-}` with `T+ = elems[0]`; on boundary edges the trace.
    pub fn jump(&self, mesh: &Mesh<T>, e: usize, s: T) -> T {
        let edge = &mesh.edges()[e];
        let plus = self.trace(mesh, edge.elems[0], e, s);
        if edge.is_boundary() {
            plus
        } else {
            plus - self.trace(mesh, edge.elems[1], e, s)
        }
    }

    /// Average of the two traces; on boundary edges the trace.
    pub fn mean(&self, mesh: &Mesh<T>, e: usize, s: T) -> T {
        let edge = &mesh.edges()[e];
        let plus = self.trace(mesh, edge.elems[0], e, s);
        if edge.is_boundary() {
            plus
        } else {
            (plus + self.trace(mesh, edge.elems[1], e, s)) * T::lit(0.5)
        }
    }

    /// `(∇v|_{T+} - ∇v|_{T-}) · n` on an interior edge.
    pub fn jump_normal_gradient(&self, mesh: &Mesh<T>, e: usize) -> Result<T> {
        let edge = &mesh.edges()[e];
        if edge.is_boundary() {
            return Err(Error::BoundaryEdge(e));
        }
        let gp = self.gradient(mesh, edge.elems[0]);
        let gm = self.gradient(mesh, edge.elems[1]);
        Ok((gp[0] - gm[0]) * edge.normal[0] + (gp[1] - gm[1]) * edge.normal[1])
    }

    /// `E_h`: minimum of the element values at each interior vertex, zero on the boundary.
    pub fn average_to_conforming(&self, mesh: &Mesh<T>) -> ConformingFunction<T> {
        let values = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(p, vert)| {
                if vert.on_boundary {
                    return T::zero();
                }
                mesh.vertex_patch(p)
                    .iter()
                    .map(|&t| {
                        let i = mesh.triangles()[t].local_index(p).expect("patch element");
                        self.values[3 * t + i]
                    })
                    .fold(T::infinity(), T::min)
            })
            .collect();
        ConformingFunction { values }
    }

    pub fn to_json(&self) -> DgJson {
        DgJson {
            dg_values: self.values.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    pub fn from_json(mesh: &Mesh<T>, json: &DgJson) -> Result<Self> {
        let values = json
            .dg_values
            .iter()
            .map(|&x| T::from_f64(x).ok_or_else(|| Error::InvalidParameter(format!("value {x}"))))
            .collect::<Result<Vec<T>>>()?;
        Self::from_values(mesh, values)
    }
}

impl<T: Real> ConformingFunction<T> {
    /// Vertex values; boundary entries are forced to zero.
    pub fn new(mesh: &Mesh<T>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_vertices(),
                got: values.len(),
            });
        }
        for (v, vert) in values.iter_mut().zip(mesh.vertices()) {
            if vert.on_boundary {
                *v = T::zero();
            }
        }
        Ok(ConformingFunction { values })
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Embedding into the discontinuous space.
    pub fn to_dg(&self, mesh: &Mesh<T>) -> DgFunction<T> {
        DgFunction {
            values: mesh
                .triangles()
                .iter()
                .flat_map(|t| t.v.map(|p| self.values[p]))
                .collect(),
        }
    }
}

/// Serialized nodal values, element-major and local-vertex-minor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgJson {
    pub dg_values: Vec<f64>,
}

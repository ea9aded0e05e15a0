//! SIPG stiffness matrix, load vector and lumped vertex-quadrature mass.
//!
//! Degrees of freedom are element-vertex pairs, `3 * t + i`. Edge terms are
//! summed over every mesh edge; on boundary edges the mean is the trace and
//! the jump is the trace times the outward normal, which enforces the
//! Dirichlet condition weakly.

use crate::dg_space::p1_gradients;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{gauss_segment, QuadratureRule};
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

/// Penalty used by every benchmark.
pub const DEFAULT_PENALTY: f64 = 25.0;

/// The algebraic data of the discrete obstacle problem on one mesh.
#[derive(Debug, Clone)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub load: Vec<T>,
    /// Diagonal of the lumped inner product, `|T| / 3` per DOF.
    pub lumped_mass: Vec<T>,
    pub gamma: T,
}

impl<T: Real> SparseSystem<T> {
    /// Assembles the operator, the volume load of `f` and, when given, the
    /// weak Dirichlet contribution of the boundary data `g`.
    pub fn assemble(
        mesh: &Mesh<T>,
        gamma: T,
        f: &dyn Fn(T, T) -> T,
        g: Option<&dyn Fn(T, T) -> T>,
    ) -> Result<Self> {
        let matrix = assemble_stiffness(mesh, gamma)?;
        let mut load = assemble_load(mesh, f);
        if let Some(g) = g {
            for (l, b) in load.iter_mut().zip(assemble_boundary_load(mesh, gamma, g)) {
                *l = *l + b;
            }
        }
        Ok(SparseSystem {
            matrix,
            load,
            lumped_mass: lumped_mass_diag(mesh),
            gamma,
        })
    }

    /// Small algebraic systems, mostly for tests of the solver.
    pub fn from_parts(
        matrix: CsrMatrix<T>,
        load: Vec<T>,
        lumped_mass: Vec<T>,
    ) -> Result<Self> {
        let n = matrix.dim();
        for len in [load.len(), lumped_mass.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if lumped_mass.iter().any(|&m| m <= T::zero()) {
            return Err(Error::InvalidParameter("lumped mass must be positive".into()));
        }
        Ok(SparseSystem {
            matrix,
            load,
            lumped_mass,
            gamma: T::zero(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `max(1, ‖F‖_∞)`, the reference magnitude for solver tolerances.
    pub fn scale(&self) -> T {
        self.load.iter().fold(T::one(), |m, v| m.max(v.abs()))
    }
}

/// Pushes the upper triangle of a local block mirrored into both halves, so
/// `(I, J)` and `(J, I)` see identical contribution sequences.
fn push_symmetric<T: Real>(
    trip: &mut Vec<(usize, usize, T)>,
    dofs: &[usize],
    entry: impl Fn(usize, usize) -> T,
) {
    for a in 0..dofs.len() {
        for b in a..dofs.len() {
            let v = entry(a, b);
            trip.push((dofs[a], dofs[b], v));
            if a != b {
                trip.push((dofs[b], dofs[a], v));
            }
        }
    }
}

/// Trace data of one DOF on one edge: endpoint values of its signed jump
/// contribution and its normal mean-gradient weight.
struct EdgeDof<T> {
    dof: usize,
    jump_a: T,
    jump_b: T,
    mean_grad: T,
}

fn edge_dofs<T: Real>(mesh: &Mesh<T>, e: usize) -> Vec<EdgeDof<T>> {
    let edge = &mesh.edges()[e];
    let n = edge.normal;
    let weight = if edge.is_boundary() {
        T::one()
    } else {
        T::lit(0.5)
    };
    let mut out = Vec::with_capacity(6);
    for (side, &t) in edge.elements().iter().enumerate() {
        let sign = if side == 0 { T::one() } else { -T::one() };
        let tri = &mesh.triangles()[t];
        let grads = p1_gradients(mesh.triangle_coords(t));
        for i in 0..3 {
            let p = tri.v[i];
            let at = |q: usize| if p == q { sign } else { T::zero() };
            out.push(EdgeDof {
                dof: 3 * t + i,
                jump_a: at(edge.v[0]),
                jump_b: at(edge.v[1]),
                mean_grad: weight * (grads[i][0] * n[0] + grads[i][1] * n[1]),
            });
        }
    }
    out
}

/// `A_h = a_h + b_h` with penalty `gamma`.
pub fn assemble_stiffness<T: Real>(mesh: &Mesh<T>, gamma: T) -> Result<CsrMatrix<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("penalty {gamma} must be positive")));
    }
    let n = 3 * mesh.num_triangles();
    let mut trip = Vec::with_capacity(9 * mesh.num_triangles() + 36 * mesh.edges().len());

    for t in 0..mesh.num_triangles() {
        let g = p1_gradients(mesh.triangle_coords(t));
        let area = mesh.area(t);
        let dofs = [3 * t, 3 * t + 1, 3 * t + 2];
        push_symmetric(&mut trip, &dofs, |a, b| {
            area * (g[a][0] * g[b][0] + g[a][1] * g[b][1])
        });
    }

    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    for e in 0..mesh.edges().len() {
        let len = mesh.edges()[e].length;
        let penalty = gamma / len;
        let ed = edge_dofs(mesh, e);
        let dofs: Vec<usize> = ed.iter().map(|d| d.dof).collect();
        let jump_integral: Vec<T> = ed.iter().map(|d| len * half * (d.jump_a + d.jump_b)).collect();
        push_symmetric(&mut trip, &dofs, |a, b| {
            let (da, db) = (&ed[a], &ed[b]);
            let consistency = -(da.mean_grad * jump_integral[b] + db.mean_grad * jump_integral[a]);
            let mass = len
                * sixth
                * (two * da.jump_a * db.jump_a
                    + da.jump_a * db.jump_b
                    + da.jump_b * db.jump_a
                    + two * da.jump_b * db.jump_b);
            consistency + penalty * mass
        });
    }
    Ok(CsrMatrix::from_triplets(n, trip))
}

/// `F_i = ∫_T f φ_i` with the degree-4 rule.
pub fn assemble_load<T: Real>(mesh: &Mesh<T>, f: &dyn Fn(T, T) -> T) -> Vec<T> {
    let rule = QuadratureRule::<T>::triangle_degree4();
    let mut load = vec![T::zero(); 3 * mesh.num_triangles()];
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.point(t, *bary);
            let fx = f(x[0], x[1]) * w * area;
            for i in 0..3 {
                load[3 * t + i] = load[3 * t + i] + fx * bary[i];
            }
        }
    }
    load
}

/// Weak Dirichlet data: `Σ_{e ⊂ ∂Ω} ∫_e (γ/h_e g φ_i − g ∇φ_i·n)`.
pub fn assemble_boundary_load<T: Real>(
    mesh: &Mesh<T>,
    gamma: T,
    g: &dyn Fn(T, T) -> T,
) -> Vec<T> {
    let rule = gauss_segment::<T>();
    let mut load = vec![T::zero(); 3 * mesh.num_triangles()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let a = mesh.coords(edge.v[0]);
        let b = mesh.coords(edge.v[1]);
        let len = edge.length;
        // ∫_e g, ∫_e g (1 - s), ∫_e g s
        let (mut g0, mut ga, mut gb) = (T::zero(), T::zero(), T::zero());
        for &(s, w) in &rule {
            let x = a[0] + s * (b[0] - a[0]);
            let y = a[1] + s * (b[1] - a[1]);
            let gv = g(x, y) * w * len;
            g0 = g0 + gv;
            ga = ga + gv * (T::one() - s);
            gb = gb + gv * s;
        }
        for d in edge_dofs(mesh, e) {
            let trace = d.jump_a * ga + d.jump_b * gb;
            load[d.dof] = load[d.dof] + gamma / len * trace - d.mean_grad * g0;
        }
    }
    load
}

/// Diagonal of `⟨·,·⟩_h`: `|T| / 3` for every DOF of `T`.
pub fn lumped_mass_diag<T: Real>(mesh: &Mesh<T>) -> Vec<T> {
    let three = T::lit(3.0);
    mesh.areas()
        .iter()
        .flat_map(|&a| [a / three; 3])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg_space::{ConformingFunction, DgFunction};
    use crate::mesh::{criss_cross, initial_domain};

    fn unit_square() -> Mesh<f64> {
        Mesh::build(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            &[[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn constant_energy_is_boundary_penalty() {
        let m = unit_square();
        let gamma = 25.0;
        let a = assemble_stiffness(&m, gamma).unwrap();
        let c = 1.7;
        let v = vec![c; 6];
        let energy = a.bilinear(&v, &v);
        assert!((energy - 4.0 * gamma * c * c).abs() < 1e-12 * energy);
    }

    #[test]
    fn conforming_hat_has_dirichlet_energy() {
        let m = criss_cross([0.0, 0.0], [1, 1], 1.0, |_, _| true).unwrap();
        let centre = (0..m.num_vertices()).find(|&p| !m.vertices()[p].on_boundary).unwrap();
        let mut vals = vec![0.0; m.num_vertices()];
        vals[centre] = 1.0;
        let hat = ConformingFunction::new(&m, vals).unwrap().to_dg(&m);
        let a = assemble_stiffness(&m, 25.0).unwrap();
        // four right triangles with legs 1/√2: |∇φ|² = 4 on each, area 1/4
        let exact = 4.0f64;
        let energy = a.bilinear(hat.values(), hat.values());
        assert!((energy - exact).abs() < 1e-12 * exact, "{energy}");
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        let m = initial_domain::<f64>(2).unwrap().bisect(&[3, 40, 41, 100]).unwrap().mesh;
        let a = assemble_stiffness(&m, 25.0).unwrap();
        assert!(a.is_symmetric_exact());
        assert_eq!(a.max_asymmetry(), 0.0);
        assert!(assemble_stiffness(&m, 0.0).is_err());
    }

    #[test]
    fn load_examples() {
        let m = Mesh::build(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 1, 2]]).unwrap();
        assert!(assemble_load(&m, &|_, _| 0.0).iter().all(|&v| v == 0.0));
        let ones = assemble_load(&m, &|_, _| 1.0);
        assert!((ones.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let ex1 = assemble_load(&m, &|_, _| -2.0);
        for v in ex1 {
            assert!((v + 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lumped_mass_values() {
        let m = unit_square();
        let d = lumped_mass_diag(&m);
        assert!(d.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-16));
        let fine = m.bisect(&[0]).unwrap().mesh;
        let d = lumped_mass_diag(&fine);
        assert!(d.iter().all(|&v| (v - 0.25 / 3.0).abs() < 1e-16));
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_load_matches_operator_on_discrete_data() {
        // for g in V_h restricted to the boundary, the boundary load equals the
        // edge part of A_h(g, ·) on boundary edges; check on g = const, where the
        // volume and interior-edge parts of A_h vanish
        let m = initial_domain::<f64>(3).unwrap();
        let gamma = 25.0;
        let a = assemble_stiffness(&m, gamma).unwrap();
        let c = 0.75;
        let g = DgFunction::interpolate(&m, |_, _| c);
        let ag = a.mul_vec(g.values());
        let b = assemble_boundary_load(&m, gamma, &|_, _| c);
        for (x, y) in ag.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }
}

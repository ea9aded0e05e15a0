//! Pointwise a posteriori estimator.
//!
//! Sup-norms are sampled: element quantities on the order-4 barycentric
//! lattice, edge quantities at five equispaced points. For P1 data the
//! samples include the extremal points, so the jump terms are exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::dg_space::DgFunction;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::barycentric_lattice;
use crate::scalar::{max_nonneg, Real};

/// Lattice order used for element sup-norms.
pub const LATTICE_ORDER: usize = 4;
/// Number of sample points per edge, endpoints included.
pub const EDGE_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    /// `u_h = χ_h` at all three vertices.
    Contact,
    /// `u_h > χ_h` at all three vertices.
    NonContact,
    /// Neither: the element straddles the discrete free boundary.
    FreeBoundary,
}

impl ElementClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementClass::Contact => "contact",
            ElementClass::NonContact => "noncontact",
            ElementClass::FreeBoundary => "free",
        }
    }
}

/// Classification tolerance `1e-10 · max(1, ‖χ_h‖_∞)`.
pub fn contact_tolerance<T: Real>(chi_h: &DgFunction<T>) -> T {
    T::lit(1e-10) * T::one().max(chi_h.max_abs())
}

/// A vertex is in contact when `u − χ ≤ eps_c`.
pub fn classify_elements<T: Real>(
    u: &DgFunction<T>,
    chi_h: &DgFunction<T>,
    eps_c: T,
) -> Vec<ElementClass> {
    (0..u.num_elements())
        .map(|t| {
            let (uu, cc) = (u.local(t), chi_h.local(t));
            let touching = (0..3).filter(|&i| uu[i] - cc[i] <= eps_c).count();
            match touching {
                3 => ElementClass::Contact,
                0 => ElementClass::NonContact,
                _ => ElementClass::FreeBoundary,
            }
        })
        .collect()
}

/// Element residual, multiplier gradient and data oscillation of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementTerms<T> {
    pub eta1: T,
    pub eta4: T,
    pub osc: T,
}

/// `η₁(T)`, `η₄(T)` and `Osc(f, T)`.
pub fn eta_element_terms<T: Real>(
    mesh: &Mesh<T>,
    t: usize,
    sigma: &DgFunction<T>,
    f: &dyn Fn(T, T) -> T,
    class: ElementClass,
    lattice: &[[T; 3]],
) -> ElementTerms<T> {
    let h2 = mesh.diameter(t) * mesh.diameter(t);
    let mut res = T::zero();
    let (mut fmin, mut fmax) = (T::infinity(), T::neg_infinity());
    for &b in lattice {
        let [x, y] = mesh.point(t, b);
        let fv = f(x, y);
        res = res.max((fv - sigma.eval_unchecked(t, b)).abs());
        fmin = fmin.min(fv);
        fmax = fmax.max(fv);
    }
    let eta4 = match class {
        ElementClass::NonContact => T::zero(),
        _ => {
            let g = sigma.gradient(mesh, t);
            h2 * g[0].hypot(g[1]) * mesh.area(t).sqrt()
        }
    };
    ElementTerms {
        eta1: h2 * res,
        eta4,
        osc: h2 * (fmax - fmin) * T::lit(0.5),
    }
}

/// `(η₂(e), η₃(e))`. On boundary edges the jump is `u_h − g`, with `g = 0`
/// when no boundary data is given.
pub fn eta_edge_terms<T: Real>(
    mesh: &Mesh<T>,
    e: usize,
    u: &DgFunction<T>,
    g: Option<&dyn Fn(T, T) -> T>,
) -> (T, T) {
    let edge = &mesh.edges()[e];
    let eta2 = if edge.is_boundary() {
        T::zero()
    } else {
        edge.length * u.jump_normal_gradient(mesh, e).expect("interior edge").abs()
    };
    let a = mesh.coords(edge.v[0]);
    let b = mesh.coords(edge.v[1]);
    let last = T::from_usize_lossy(EDGE_SAMPLES - 1);
    let eta3 = max_nonneg((0..EDGE_SAMPLES).map(|k| {
        let s = T::from_usize_lossy(k) / last;
        let mut j = u.jump(mesh, e, s);
        if edge.is_boundary() {
            if let Some(g) = g {
                let x = a[0] + s * (b[0] - a[0]);
                let y = a[1] + s * (b[1] - a[1]);
                j = j - g(x, y);
            }
        }
        j.abs()
    }));
    (eta2, eta3)
}

/// `(η₅(T), η₆(T))` against the exact obstacle.
pub fn eta_obstacle_terms<T: Real>(
    mesh: &Mesh<T>,
    t: usize,
    u: &DgFunction<T>,
    sigma: &DgFunction<T>,
    chi: &dyn Fn(T, T) -> T,
    lattice: &[[T; 3]],
) -> (T, T) {
    let mut eta5 = T::zero();
    let mut eta6 = T::zero();
    for &b in lattice {
        let [x, y] = mesh.point(t, b);
        let gap = u.eval_unchecked(t, b) - chi(x, y);
        eta5 = eta5.max((-gap).positive_part());
        if sigma.eval_unchecked(t, b) < T::zero() {
            eta6 = eta6.max(gap.positive_part());
        }
    }
    (eta5, eta6)
}

/// `|ln h_min| (η₁ + η₂ + η₃ + η₄) + η₅ + η₆`.
pub fn total_eta<T: Real>(log_factor: T, eta: [T; 6]) -> T {
    log_factor * (eta[0] + eta[1] + eta[2] + eta[3]) + eta[4] + eta[5]
}

#[derive(Debug, Clone)]
pub struct EstimatorBreakdown<T> {
    pub classes: Vec<ElementClass>,
    pub eta1_elem: Vec<T>,
    pub eta4_elem: Vec<T>,
    pub osc_elem: Vec<T>,
    pub eta5_elem: Vec<T>,
    pub eta6_elem: Vec<T>,
    pub eta2_edge: Vec<T>,
    pub eta3_edge: Vec<T>,
    /// Global `η₁ … η₆`, each the maximum of its local values.
    pub eta: [T; 6],
    pub osc: T,
    /// `|ln h_min|`
    pub log_factor: T,
    pub eta_total: T,
    /// Marking indicator per element.
    pub indicators: Vec<T>,
}

/// Everything the estimator reads.
pub struct EstimatorInput<'a, T> {
    pub mesh: &'a Mesh<T>,
    pub u: &'a DgFunction<T>,
    pub sigma: &'a DgFunction<T>,
    /// Nodal interpolant of the obstacle, used for the classification.
    pub chi_h: &'a DgFunction<T>,
    pub f: &'a dyn Fn(T, T) -> T,
    pub chi: &'a dyn Fn(T, T) -> T,
    /// Dirichlet data, if not homogeneous.
    pub g: Option<&'a dyn Fn(T, T) -> T>,
}

pub fn estimate<T: Real>(input: &EstimatorInput<'_, T>) -> EstimatorBreakdown<T> {
    let mesh = input.mesh;
    let nt = mesh.num_triangles();
    let lattice = barycentric_lattice::<T>(LATTICE_ORDER);
    let classes = classify_elements(input.u, input.chi_h, contact_tolerance(input.chi_h));

    let mut eta1_elem = Vec::with_capacity(nt);
    let mut eta4_elem = Vec::with_capacity(nt);
    let mut osc_elem = Vec::with_capacity(nt);
    let mut eta5_elem = Vec::with_capacity(nt);
    let mut eta6_elem = Vec::with_capacity(nt);
    for t in 0..nt {
        let el = eta_element_terms(mesh, t, input.sigma, input.f, classes[t], &lattice);
        let (e5, e6) = eta_obstacle_terms(mesh, t, input.u, input.sigma, input.chi, &lattice);
        eta1_elem.push(el.eta1);
        eta4_elem.push(el.eta4);
        osc_elem.push(el.osc);
        eta5_elem.push(e5);
        eta6_elem.push(e6);
    }
    let (eta2_edge, eta3_edge): (Vec<T>, Vec<T>) = (0..mesh.edges().len())
        .map(|e| eta_edge_terms(mesh, e, input.u, input.g))
        .unzip();

    let gmax = |v: &[T]| max_nonneg(v.iter().copied());
    let eta = [
        gmax(&eta1_elem),
        gmax(&eta2_edge),
        gmax(&eta3_edge),
        gmax(&eta4_elem),
        gmax(&eta5_elem),
        gmax(&eta6_elem),
    ];
    let log_factor = mesh.h_min().ln().abs();
    let indicators = (0..nt)
        .map(|t| {
            let edges = mesh.triangle_edges(t);
            let e2 = max_nonneg(edges.iter().map(|&e| eta2_edge[e]));
            let e3 = max_nonneg(edges.iter().map(|&e| eta3_edge[e]));
            total_eta(
                log_factor,
                [eta1_elem[t], e2, e3, eta4_elem[t], eta5_elem[t], eta6_elem[t]],
            )
        })
        .collect();

    EstimatorBreakdown {
        osc: gmax(&osc_elem),
        eta_total: total_eta(log_factor, eta),
        classes,
        eta1_elem,
        eta4_elem,
        osc_elem,
        eta5_elem,
        eta6_elem,
        eta2_edge,
        eta3_edge,
        eta,
        log_factor,
        indicators,
    }
}

impl<T: Real> EstimatorBreakdown<T> {
    /// Number of elements per class, in the order contact, non-contact, free boundary.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for cl in &self.classes {
            c[match cl {
                ElementClass::Contact => 0,
                ElementClass::NonContact => 1,
                ElementClass::FreeBoundary => 2,
            }] += 1;
        }
        c
    }

    /// `max_T η₄(T) / (η₁(T) + Osc(f, T))` over elements with `η₄(T) > 0`.
    /// Infinite if some such element has a vanishing denominator.
    pub fn multiplier_gradient_ratio(&self) -> T {
        let mut worst = T::zero();
        for t in 0..self.classes.len() {
            let num = self.eta4_elem[t];
            if num > T::zero() {
                let den = self.eta1_elem[t] + self.osc_elem[t];
                worst = worst.max(if den > T::zero() {
                    num / den
                } else {
                    T::infinity()
                });
            }
        }
        worst
    }

    /// Per-element CSV: `element_id,class,eta1,eta4,osc,eta5,eta6,indicator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("element_id,class,eta1,eta4,osc,eta5,eta6,indicator\n");
        for t in 0..self.classes.len() {
            let _ = write!(out, "{t},{}", self.classes[t].as_str());
            for v in [
                self.eta1_elem[t],
                self.eta4_elem[t],
                self.osc_elem[t],
                self.eta5_elem[t],
                self.eta6_elem[t],
                self.indicators[t],
            ] {
                let _ = write!(out, ",{:.16e}", v.to_f64_lossy());
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

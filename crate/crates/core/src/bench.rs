//! Benchmark problems, error measurement, rate fits and output writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adapt::RunRecord;
use crate::dg_space::DgFunction;
use crate::error::{Error, Result};
use crate::estimator::{ElementClass, LATTICE_ORDER};
use crate::mesh::{initial_domain, Mesh, MeshJson};
use crate::quadrature::barycentric_lattice;
use crate::scalar::Real;

pub type Field<T> = Box<dyn Fn(T, T) -> T + Send + Sync>;

/// Data of one benchmark problem.
pub struct ExampleSpec<T> {
    pub id: u32,
    pub f: Field<T>,
    pub chi: Field<T>,
    pub exact_u: Option<Field<T>>,
    /// Dirichlet data imposed weakly; `None` means homogeneous.
    pub boundary: Option<Field<T>>,
}

impl<T: Real> ExampleSpec<T> {
    pub fn initial_mesh(&self) -> Result<Mesh<T>> {
        initial_domain(self.id)
    }

    /// Largest value of `χ − g` over the vertices of boundary edges and their
    /// midpoints; nonpositive when the obstacle is compatible with the data.
    pub fn boundary_compatibility(&self, mesh: &Mesh<T>) -> T {
        let half = T::lit(0.5);
        let mut worst = T::neg_infinity();
        for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
            let a = mesh.coords(e.v[0]);
            let b = mesh.coords(e.v[1]);
            for p in [a, b, [(a[0] + b[0]) * half, (a[1] + b[1]) * half]] {
                let g = self.boundary.as_ref().map_or(T::zero(), |g| g(p[0], p[1]));
                worst = worst.max((self.chi)(p[0], p[1]) - g);
            }
        }
        worst
    }
}

/// Angle in `[0, 2π)` measured counterclockwise from the positive x-axis.
fn polar_angle<T: Real>(x: T, y: T) -> T {
    let th = y.atan2(x);
    if th < T::zero() {
        th + T::TAU()
    } else {
        th
    }
}

/// Cutoff `γ₁` of the L-shape solution and its first two radial derivatives.
fn cutoff<T: Real>(r: T) -> (T, T, T) {
    let rt = T::lit(2.0) * (r - T::lit(0.25));
    if rt < T::zero() {
        (T::one(), T::zero(), T::zero())
    } else if rt < T::one() {
        let l = T::lit;
        let (r2, r3) = (rt * rt, rt * rt * rt);
        let r4 = r2 * r2;
        let g = l(-6.0) * r4 * rt + l(15.0) * r4 - l(10.0) * r3 + T::one();
        let dg = l(2.0) * (l(-30.0) * r4 + l(60.0) * r3 - l(30.0) * r2);
        let ddg = l(4.0) * (l(-120.0) * r3 + l(180.0) * r2 - l(60.0) * rt);
        (g, dg, ddg)
    } else {
        (T::zero(), T::zero(), T::zero())
    }
}

fn example1_u<T: Real>(x: T, y: T) -> T {
    let r = x.hypot(y);
    if r >= T::one() {
        r * r * T::lit(0.5) - r.ln() - T::lit(0.5)
    } else {
        T::zero()
    }
}

fn example2_u<T: Real>(x: T, y: T) -> T {
    let r = x.hypot(y);
    let (g, _, _) = cutoff(r);
    if g == T::zero() {
        return T::zero();
    }
    let s = (T::lit(2.0 / 3.0) * polar_angle(x, y)).sin();
    r.powf(T::lit(2.0 / 3.0)) * s * g
}

fn example2_f<T: Real>(x: T, y: T) -> T {
    let r = x.hypot(y);
    let (_, dg, ddg) = cutoff(r);
    let g2 = if r > T::lit(1.25) { T::one() } else { T::zero() };
    // the derivative terms vanish identically near the corner, where r⁻¹ᐟ³ blows up
    if dg == T::zero() && ddg == T::zero() {
        return -g2;
    }
    let s = (T::lit(2.0 / 3.0) * polar_angle(x, y)).sin();
    -r.powf(T::lit(2.0 / 3.0)) * s * (dg / r + ddg)
        - T::lit(4.0 / 3.0) * r.powf(T::lit(-1.0 / 3.0)) * s * dg
        - g2
}

fn example3_chi<T: Real>(x: T, y: T) -> T {
    let q = x * x - T::one();
    T::lit(10.0) - T::lit(6.0) * q * q - T::lit(20.0) * y * y
}

/// Examples 1–3. `load` is the constant right-hand side of Example 3 and is
/// ignored otherwise.
pub fn example_spec<T: Real>(id: u32, load: f64) -> Result<ExampleSpec<T>> {
    match id {
        1 => Ok(ExampleSpec {
            id,
            f: Box::new(|_, _| T::lit(-2.0)),
            chi: Box::new(|_, _| T::zero()),
            exact_u: Some(Box::new(example1_u)),
            boundary: Some(Box::new(example1_u)),
        }),
        2 => Ok(ExampleSpec {
            id,
            f: Box::new(example2_f),
            chi: Box::new(|_, _| T::zero()),
            exact_u: Some(Box::new(example2_u)),
            boundary: None,
        }),
        3 => {
            if !load.is_finite() {
                return Err(Error::InvalidParameter(format!("load {load}")));
            }
            let f = T::lit(load);
            Ok(ExampleSpec {
                id,
                f: Box::new(move |_, _| f),
                chi: Box::new(example3_chi),
                exact_u: None,
                boundary: None,
            })
        }
        other => Err(Error::UnknownExample(other)),
    }
}

/// `max |u − u_h|` over the order-4 lattice of every element.
pub fn linf_error<T: Real>(mesh: &Mesh<T>, u_h: &DgFunction<T>, exact: &dyn Fn(T, T) -> T) -> T {
    let lattice = barycentric_lattice::<T>(LATTICE_ORDER);
    let mut worst = T::zero();
    for t in 0..mesh.num_triangles() {
        for &b in &lattice {
            let [x, y] = mesh.point(t, b);
            worst = worst.max((exact(x, y) - u_h.eval_unchecked(t, b)).abs());
        }
    }
    worst
}

/// Least-squares line `log q = slope · log dofs + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits the last `k ≥ 4` pairs `(x, q)` in log-log coordinates.
pub fn fit_power_law(data: &[(f64, f64)], k: usize) -> Result<RateFit> {
    if k < 4 || data.len() < k {
        return Err(Error::InsufficientData {
            needed: k.max(4),
            got: data.len(),
        });
    }
    let tail = &data[data.len() - k..];
    if let Some(&(x, q)) = tail.iter().find(|&&(x, q)| !(x > 0.0 && q > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "log-log fit needs positive data, got ({x}, {q})"
        )));
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(x, q)| (x.ln(), q.ln())).collect();
    let n = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        points: k,
    })
}

/// History columns that can be fitted against the DOF count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    EtaTotal,
    LinfError,
}

pub fn fit_rate(records: &[RunRecord], quantity: Quantity, k: usize) -> Result<RateFit> {
    let data: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            let q = match quantity {
                Quantity::EtaTotal => r.eta_total,
                Quantity::LinfError => r.linf_error.unwrap_or(f64::NAN),
            };
            (r.dofs as f64, q)
        })
        .collect();
    fit_power_law(&data, k)
}

pub const CSV_HEADER: &str =
    "level,dofs,h_min,eta1,eta2,eta3,eta4,eta5,eta6,eta_total,linf_error,efficiency_index,pdas_iters";

fn push_num(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let _ = write!(out, "{v:.16e}");
    }
}

/// Convergence history; unknown errors are left empty.
pub fn history_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{}", r.level, r.dofs);
        push_num(&mut out, Some(r.h_min));
        for e in r.eta {
            push_num(&mut out, Some(e));
        }
        push_num(&mut out, Some(r.eta_total));
        push_num(&mut out, r.linf_error);
        push_num(&mut out, r.efficiency_index);
        let _ = writeln!(out, ",{}", r.pdas_iterations);
    }
    out
}

pub fn emit_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, history_csv(records)).map_err(|e| Error::io(path, e))
}

const CONTACT_FILL: &str = "#f5d000";
const FREE_FILL: &str = "#d9534f";

/// Mesh drawing: contact elements yellow, free-boundary elements red,
/// non-contact elements unfilled.
pub fn mesh_svg<T: Real>(mesh: &Mesh<T>, classes: &[ElementClass]) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in mesh.vertices() {
        let (x, y) = (v.x.to_f64_lossy(), v.y.to_f64_lossy());
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let width = 800.0;
    let scale = width / (x1 - x0).max(1e-300);
    let height = ((y1 - y0) * scale).ceil();
    let stroke = 0.5;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="-2 -2 {vw} {vh}">"#,
        w = width + 4.0,
        h = height + 4.0,
        vw = width + 4.0,
        vh = height + 4.0,
    );
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let fill = match classes.get(t) {
            Some(ElementClass::Contact) => CONTACT_FILL,
            Some(ElementClass::FreeBoundary) => FREE_FILL,
            _ => "none",
        };
        out.push_str(r#"<polygon points=""#);
        for (k, &p) in tri.v.iter().enumerate() {
            let [x, y] = mesh.coords(p);
            let px = (x.to_f64_lossy() - x0) * scale;
            let py = (y1 - y.to_f64_lossy()) * scale;
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{px:.3},{py:.3}");
        }
        let _ = writeln!(out, r#"" fill="{fill}" stroke="black" stroke-width="{stroke}"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg<T: Real>(
    mesh: &Mesh<T>,
    classes: &[ElementClass],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh_svg(mesh, classes)).map_err(|e| Error::io(path, e))
}

/// Mesh together with the nodal values of `u_h` and `σ_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub level: usize,
    #[serde(flatten)]
    pub mesh: MeshJson,
    pub u_h: Vec<f64>,
    pub sigma_h: Vec<f64>,
}

impl SolutionJson {
    pub fn new<T: Real>(level: usize, mesh: &Mesh<T>, u: &DgFunction<T>, sigma: &DgFunction<T>) -> Self {
        SolutionJson {
            level,
            mesh: mesh.to_json(),
            u_h: u.to_json().dg_values,
            sigma_h: sigma.to_json().dg_values,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_values() {
        let e1 = example_spec::<f64>(1, 0.0).unwrap();
        let u = e1.exact_u.as_ref().unwrap();
        assert_eq!(u(0.0, 0.0), 0.0);
        assert!((u(1.5, 0.0) - (1.125 - 1.5f64.ln() - 0.5)).abs() < 1e-15);
        let e3 = example_spec::<f64>(3, -15.0).unwrap();
        assert_eq!((e3.chi)(0.0, 0.0), 4.0);
        for (x, y) in [(2.0, 1.0), (-2.0, 1.0), (2.0, -1.0), (-2.0, -1.0)] {
            assert_eq!((e3.chi)(x, y), -64.0);
        }
        assert_eq!((e3.f)(0.3, 0.1), -15.0);
        assert!(matches!(example_spec::<f64>(4, 0.0), Err(Error::UnknownExample(4))));
    }

    #[test]
    fn obstacles_compatible_with_boundary_data() {
        for (id, load) in [(1, 0.0), (2, 0.0), (3, 0.0)] {
            let spec = example_spec::<f64>(id, load).unwrap();
            let mesh = spec.initial_mesh().unwrap();
            assert!(spec.boundary_compatibility(&mesh) <= 0.0, "example {id}");
        }
    }

    #[test]
    fn lshape_solution_support() {
        let spec = example_spec::<f64>(2, 0.0).unwrap();
        let u = spec.exact_u.as_ref().unwrap();
        for k in 0..200 {
            let th = 1.5 * std::f64::consts::PI * k as f64 / 199.0;
            for r in [0.75, 0.9, 1.3, 2.0] {
                assert_eq!(u(r * th.cos(), r * th.sin()), 0.0);
            }
            // nonnegative above the obstacle χ = 0
            assert!(u(0.3 * th.cos(), 0.3 * th.sin()) >= -1e-15);
        }
        // vanishes on both reentrant edges
        assert!(u(0.3, 0.0).abs() < 1e-15);
        assert!(u(0.0, -0.3).abs() < 1e-15);
        // f is finite at the corner and equals −γ₂ away from the cutoff band
        assert_eq!((spec.f)(0.0, 0.0), 0.0);
        assert_eq!((spec.f)(-1.5, 0.0), -1.0);
    }

    #[test]
    fn lshape_load_matches_finite_differences() {
        let spec = example_spec::<f64>(2, 0.0).unwrap();
        let u = spec.exact_u.as_ref().unwrap();
        let h = 1e-4;
        for &(x, y) in &[(0.4, 0.2), (-0.5, 0.3), (-0.3, -0.45), (0.1, 0.55), (-0.6, -0.2)] {
            let lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h);
            let f = (spec.f)(x, y);
            assert!((f + lap).abs() < 1e-5, "({x}, {y}): f = {f}, -Δu = {}", -lap);
        }
    }

    #[test]
    fn linf_error_cases() {
        let mesh = initial_domain::<f64>(1).unwrap();
        let affine = |x: f64, y: f64| 2.0 * x - 0.5 * y + 1.0;
        let uh = DgFunction::interpolate(&mesh, affine);
        assert!(linf_error(&mesh, &uh, &affine) < 1e-14);
        let mut spike = DgFunction::zeros(&mesh);
        spike.values_mut()[7] = 0.3;
        assert_eq!(linf_error(&mesh, &spike, &|_, _| 0.0), 0.3);
    }

    #[test]
    fn power_law_fits() {
        let dofs: Vec<f64> = (0..8).map(|k| 100.0 * 1.7f64.powi(k)).collect();
        let fit = |g: &dyn Fn(f64) -> f64| {
            let data: Vec<(f64, f64)> = dofs.iter().map(|&n| (n, g(n))).collect();
            fit_power_law(&data, 6).unwrap().slope
        };
        assert!((fit(&|n| 3.0 / n) + 1.0).abs() < 1e-12);
        assert!(fit(&|_| 2.5).abs() < 1e-12);
        assert!((fit(&|n| 1.0 / n.sqrt()) + 0.5).abs() < 1e-12);
        assert!(matches!(
            fit_power_law(&[(1.0, 1.0); 3], 4),
            Err(Error::InsufficientData { .. })
        ));
        assert!(fit_power_law(&[(1.0, 1.0); 5], 3).is_err());
    }

    #[test]
    fn writers() {
        assert_eq!(history_csv(&[]), format!("{CSV_HEADER}\n"));
        let mesh = Mesh::build(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            &[[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let svg = mesh_svg(&mesh, &[ElementClass::NonContact; 2]);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches(r#"fill="none""#).count(), 2);
        let svg = mesh_svg(&mesh, &[ElementClass::Contact, ElementClass::FreeBoundary]);
        assert!(svg.contains(CONTACT_FILL) && svg.contains(FREE_FILL));
    }
}

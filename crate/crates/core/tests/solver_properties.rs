use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sipg_obstacle::adapt::KktSummary;
use sipg_obstacle::assembly::SparseSystem;
use sipg_obstacle::bench::example_spec;
use sipg_obstacle::dg_space::DgFunction;
use sipg_obstacle::estimator::contact_tolerance;
use sipg_obstacle::mesh::{initial_domain, Mesh};
use sipg_obstacle::solver::{
    compute_sigma, solve_linear, solve_obstacle, LinearBackend, ObstacleSolution, PdasOptions,
};
use sipg_obstacle::CsrMatrix;

fn refined(id: u32, rounds: usize) -> Mesh<f64> {
    let mut m = initial_domain::<f64>(id).unwrap();
    for _ in 0..rounds {
        m = m.bisect_all().unwrap();
    }
    m
}

fn benchmark_solve(id: u32, load: f64, rounds: usize) -> (Mesh<f64>, SparseSystem<f64>, Vec<f64>, ObstacleSolution<f64>) {
    let spec = example_spec::<f64>(id, load).unwrap();
    let mesh = refined(id, rounds);
    let g = spec.boundary.as_deref().map(|g| g as &dyn Fn(f64, f64) -> f64);
    let sys = SparseSystem::assemble(&mesh, 25.0, &*spec.f, g).unwrap();
    let chi = DgFunction::interpolate(&mesh, &*spec.chi).into_values();
    let (sol, rep) = solve_obstacle(&sys, &chi, &PdasOptions::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.pdas_iterations <= 50);
    let last = rep.active_sizes.len() - 1;
    assert_eq!(rep.active_sizes[last], sol.num_active());
    (mesh, sys, chi, sol)
}

#[test]
fn complementarity_on_the_benchmarks() {
    for (id, load) in [(1, 0.0), (2, 0.0), (3, 0.0), (3, -15.0)] {
        let (mesh, sys, chi, sol) = benchmark_solve(id, load, 2);
        let chi_h = DgFunction::from_values(&mesh, chi.clone()).unwrap();
        let kkt = KktSummary::compute(&sol.u, &sol.sigma, &chi, sys.scale(), contact_tolerance(&chi_h));
        assert!(kkt.holds(1e-10), "example {id}: {kkt:?}");
        assert!(kkt.min_gap >= -1e-12 * kkt.scale);
        for i in 0..chi.len() {
            assert_eq!(sol.active[i], sol.sigma[i] != 0.0, "dof {i}");
            if sol.active[i] {
                assert_eq!(sol.u[i], chi[i]);
            }
        }
    }
}

#[test]
fn variational_inequality_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (id, load) in [(1, 0.0), (3, -15.0)] {
        let (_, sys, chi, sol) = benchmark_solve(id, load, 1);
        let au = sys.matrix.mul_vec(&sol.u);
        for _ in 0..100 {
            // v ∈ K_h: nodal values at or above the obstacle
            let v: Vec<f64> = chi
                .iter()
                .zip(&sol.u)
                .map(|(&c, &u)| {
                    if rng.random::<bool>() {
                        c + rng.random::<f64>()
                    } else {
                        u.max(c) + 0.1 * rng.random::<f64>()
                    }
                })
                .collect();
            let lhs: f64 = (0..v.len()).map(|i| (au[i] - sys.load[i]) * (sol.u[i] - v[i])).sum();
            assert!(lhs <= 1e-8 * sys.scale(), "example {id}: {lhs}");
        }
    }
}

#[test]
fn multiplier_identity_and_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (_, sys, _, sol) = benchmark_solve(3, -15.0, 2);
    let sigma = compute_sigma(&sys, &sol.u);
    let max_sigma = sigma.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    for (a, b) in sigma.iter().zip(&sol.sigma) {
        assert!((a - b).abs() <= 1e-12 * sys.scale().max(max_sigma), "{a} vs {b}");
    }
    // ⟨σ_h, v⟩_h = (F − A u) · v for arbitrary u, v
    let u: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = compute_sigma(&sys, &u);
    let r: Vec<f64> = sys.matrix.mul_vec(&u).iter().zip(&sys.load).map(|(a, f)| f - a).collect();
    for _ in 0..10 {
        let v: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lumped: f64 = (0..v.len()).map(|i| sys.lumped_mass[i] * s[i] * v[i]).sum();
        let direct: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
        let size: f64 = r.iter().zip(&v).map(|(a, b)| (a * b).abs()).sum();
        assert!((lumped - direct).abs() <= 1e-12 * size);
    }
}

#[test]
fn conjugate_gradient_backend_agrees() {
    let spec = example_spec::<f64>(3, 0.0).unwrap();
    let mesh = refined(3, 1);
    let sys = SparseSystem::assemble(&mesh, 25.0, &*spec.f, None).unwrap();
    let chi = DgFunction::interpolate(&mesh, &*spec.chi).into_values();
    let (direct, _) = solve_obstacle(&sys, &chi, &PdasOptions::default()).unwrap();
    let opts = PdasOptions {
        backend: LinearBackend::ConjugateGradient,
        ..Default::default()
    };
    let (cg, rep) = solve_obstacle(&sys, &chi, &opts).unwrap();
    assert!(rep.converged);
    assert!(rep.linear.iter().all(|s| s.relative_residual <= 1e-12));
    assert_eq!(direct.active, cg.active);
    for (a, b) in direct.u.iter().zip(&cg.u) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn random_spd_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..5 {
        let n = 50;
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        // BᵀB + I
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let a = CsrMatrix::from_dense(&a);
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve_linear(&a, &rhs, 1e-12).unwrap().x;
        let ax = a.mul_vec(&x);
        let res: f64 = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / bn <= 1e-12, "{}", res / bn);
    }
}

#[test]
fn dimension_errors() {
    let sys = SparseSystem::from_parts(CsrMatrix::<f64>::identity(2), vec![0.0; 2], vec![1.0; 2]).unwrap();
    assert!(solve_obstacle(&sys, &[0.0], &PdasOptions::default()).is_err());
    assert!(solve_obstacle(&sys, &[f64::NAN, 0.0], &PdasOptions::default()).is_err());
    assert!(SparseSystem::from_parts(CsrMatrix::<f64>::identity(2), vec![0.0; 2], vec![1.0, 0.0]).is_err());
}

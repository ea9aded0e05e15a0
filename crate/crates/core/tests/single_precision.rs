use sipg_obstacle::adapt::{adaptive_loop, AdaptConfig};
use sipg_obstacle::solver::{solve_obstacle, LinearBackend, PdasOptions};
use sipg_obstacle::{DgFunction32, Mesh32, SparseSystem32};

#[test]
fn adaptive_run_in_f32() {
    for (id, load) in [(1, 0.0), (3, -15.0)] {
        let config = AdaptConfig::<f32> {
            max_levels: 4,
            ..AdaptConfig::for_example(id, load)
        };
        let out = adaptive_loop(&config, |_| Ok(())).unwrap();
        assert!(out.failure.is_none(), "{:?}", out.failure);
        assert_eq!(out.records.len(), 4);
        let first = &out.records[0];
        let last = &out.records[3];
        assert!(last.eta_total < first.eta_total);
        assert!(last.kkt.holds(1e-6));
        if let (Some(e0), Some(e3)) = (first.linf_error, last.linf_error) {
            assert!(e3 < e0);
        }
    }
}

#[test]
fn both_backends_in_f32() {
    let mesh = Mesh32::build(
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        &[[4, 0, 1], [4, 1, 2], [4, 2, 3], [4, 3, 0]],
    )
    .unwrap()
    .bisect_all()
    .unwrap()
    .bisect_all()
    .unwrap();
    let sys = SparseSystem32::assemble(&mesh, 25.0, &|_, _| -8.0, None).unwrap();
    let chi = DgFunction32::interpolate(&mesh, |x, y| -0.05 - (x - 0.5).powi(2) - (y - 0.5).powi(2));
    let mut solutions = Vec::new();
    for backend in [LinearBackend::Cholesky, LinearBackend::ConjugateGradient] {
        let opts = PdasOptions {
            backend,
            ..Default::default()
        };
        let (sol, rep) = solve_obstacle(&sys, chi.values(), &opts).unwrap();
        assert!(rep.converged);
        assert!(sol.num_active() > 0);
        solutions.push(sol);
    }
    for (a, b) in solutions[0].u.iter().zip(&solutions[1].u) {
        assert!((a - b).abs() < 1e-4);
    }
}

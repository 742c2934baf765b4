//! Randomized invariants of the Gaussian calculus and the flow.

use approx::relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qdiff::corpus::{orthogonal_symplectic, random_symplectic, random_unitary, rng, StateSampler};
use qdiff::functionals::{dirichlet_form, entropy, fisher_j, hs_overlap, purity, relative_entropy};
use qdiff::gaussian::symplectic_residual;
use qdiff::semigroup::evolve_gaussian;
use qdiff::verify::{verify_isoperimetric, verify_logsob, verify_nash};
use qdiff::{GaussianState, RunConfig};

fn sampler(mean_scale: f64) -> StateSampler {
    StateSampler {
        nu_min: 0.55,
        nu_max: 5.0,
        squeeze: 0.8,
        mean_scale,
    }
}

fn state(seed: u64, n: usize, mean_scale: f64) -> GaussianState {
    sampler(mean_scale).sample(n, &mut rng(seed))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    relative_eq!(a, b, max_relative = tol, epsilon = tol)
}

fn transform(st: &GaussianState, s: &DMatrix<f64>) -> GaussianState {
    let cov = s * st.cov() * s.transpose();
    GaussianState::new(s * st.mean(), (&cov + cov.transpose()) * 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn williamson_reconstructs(seed in any::<u64>(), n in 1usize..=3) {
        let st = state(seed, n, 1.0);
        let w = st.williamson().unwrap();
        let scale = st.cov().amax();
        prop_assert!((w.reconstruct() - st.cov()).amax() < 1e-9 * scale);
        prop_assert!(symplectic_residual(&w.s) < 1e-8 * w.s.amax().powi(2));
        let det: f64 = w.nu.iter().map(|v| v * v).product();
        prop_assert!(close(st.cov().determinant(), det, 1e-8));
        prop_assert!(w.nu.windows(2).all(|p| p[0] >= p[1]));
        prop_assert!(w.nu.iter().all(|&v| v >= 0.5 - 1e-9));
    }

    #[test]
    fn displacement_leaves_functionals(seed in any::<u64>(), n in 1usize..=3, z in prop::collection::vec(-5.0f64..5.0, 6)) {
        let st = state(seed, n, 0.0);
        let moved = st.displace(&z[..2 * n]).unwrap();
        prop_assert!(close(entropy(&st).unwrap(), entropy(&moved).unwrap(), 1e-12));
        prop_assert!(close(purity(&st).unwrap(), purity(&moved).unwrap(), 1e-12));
        prop_assert!(close(dirichlet_form(&st).unwrap(), dirichlet_form(&moved).unwrap(), 1e-12));
        prop_assert!(close(fisher_j(&st).unwrap(), fisher_j(&moved).unwrap(), 1e-12));
    }

    #[test]
    fn symplectic_invariance(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed ^ 0x5eed);
        let st = state(seed, n, 1.0);
        let s = random_symplectic(n, 0.6, &mut r);
        let moved = transform(&st, &s);
        prop_assert!(close(entropy(&st).unwrap(), entropy(&moved).unwrap(), 1e-8));
        prop_assert!(close(purity(&st).unwrap(), purity(&moved).unwrap(), 1e-8));
        let o = orthogonal_symplectic(&random_unitary(n, &mut r));
        let rotated = transform(&st, &o);
        prop_assert!(close(fisher_j(&st).unwrap(), fisher_j(&rotated).unwrap(), 1e-8));
        prop_assert!(close(dirichlet_form(&st).unwrap(), dirichlet_form(&rotated).unwrap(), 1e-8));
    }

    #[test]
    fn flow_is_a_semigroup(seed in any::<u64>(), n in 1usize..=3, t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
        let st = state(seed, n, 1.0);
        let two = evolve_gaussian(&evolve_gaussian(&st, t1).unwrap(), t2).unwrap();
        let one = evolve_gaussian(&st, t1 + t2).unwrap();
        prop_assert!((two.cov() - one.cov()).amax() < 1e-12 * one.cov().amax());
        prop_assert_eq!(two.mean(), st.mean());
    }

    #[test]
    fn flow_is_monotone(seed in any::<u64>(), n in 1usize..=3, t in 0.0f64..50.0, dt in 1e-3f64..10.0) {
        let a = evolve_gaussian(&state(seed, n, 0.0), t).unwrap();
        let b = evolve_gaussian(&a, dt).unwrap();
        prop_assert!(entropy(&b).unwrap() > entropy(&a).unwrap());
        prop_assert!(purity(&b).unwrap() < purity(&a).unwrap());
        prop_assert!(dirichlet_form(&b).unwrap() < dirichlet_form(&a).unwrap());
        prop_assert!(fisher_j(&b).unwrap() < fisher_j(&a).unwrap());
    }

    #[test]
    fn overlap_and_relative_entropy(seed in any::<u64>(), n in 1usize..=3) {
        let a = state(seed, n, 1.0);
        let b = state(seed.wrapping_add(1), n, 1.0);
        let ab = hs_overlap(&a, &b).unwrap();
        prop_assert!(close(ab, hs_overlap(&b, &a).unwrap(), 1e-12));
        prop_assert!(ab > 0.0);
        prop_assert!(ab <= (purity(&a).unwrap() * purity(&b).unwrap()).sqrt() * (1.0 + 1e-12));
        prop_assert!(close(hs_overlap(&a, &a).unwrap(), purity(&a).unwrap(), 1e-10));
        prop_assert!(relative_entropy(&a, &b).unwrap() >= -1e-10);
        prop_assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-8);
    }

    #[test]
    fn tensor_products(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=2) {
        let a = state(seed, n, 1.0);
        let b = state(seed.wrapping_mul(31).wrapping_add(7), m, 1.0);
        let ab = a.tensor(&b);
        prop_assert!(close(entropy(&ab).unwrap(), entropy(&a).unwrap() + entropy(&b).unwrap(), 1e-9));
        prop_assert!(close(purity(&ab).unwrap(), purity(&a).unwrap() * purity(&b).unwrap(), 1e-9));
        prop_assert!(close(fisher_j(&ab).unwrap(), fisher_j(&a).unwrap() + fisher_j(&b).unwrap(), 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inequalities_hold_on_random_states(seed in any::<u64>(), n in 1usize..=3) {
        let cfg = RunConfig::default();
        let st = state(seed, n, 1.0);
        let centered = state(seed, n, 0.0);
        prop_assert!(verify_nash(&[st], &[], &cfg).unwrap().passed());
        prop_assert!(verify_logsob(std::slice::from_ref(&centered), &cfg).unwrap().passed());
        prop_assert!(verify_isoperimetric(&[centered], &cfg).unwrap().passed());
    }
}

#[test]
fn williamson_on_a_thousand_states() {
    let mut r = rng(1000);
    let s = StateSampler {
        nu_min: 0.5,
        ..Default::default()
    };
    for k in 0..1000 {
        let st = s.sample(1 + k % 3, &mut r);
        let w = st.williamson().unwrap();
        assert!(
            (w.reconstruct() - st.cov()).amax() < 1e-9 * st.cov().amax().max(1.0),
            "state {k}"
        );
        let z: Vec<f64> = (0..st.dim()).map(|i| i as f64 - 1.5).collect();
        let moved = st
            .displace(&z)
            .unwrap()
            .conjugate_by_exp_irj(k % st.dim(), 0.7)
            .unwrap();
        assert_eq!(moved.williamson().unwrap().nu, w.nu);
    }
}

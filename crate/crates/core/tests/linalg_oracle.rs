//! Dense linear algebra checked against nalgebra.

use ata_core::linalg::{expm_hermitian, spectral_norm, CMat, HermitianEigen};
use ata_core::planner::{commutator_scale, Hamiltonian, InitialState, SystemSpec};
use ata_core::C;
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

fn to_na(m: &CMat<f64>) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn hermitian(entries: &[(f64, f64)], n: usize) -> CMat<f64> {
    CMat::from_fn(n, n, |i, j| {
        let (a, b) = entries[i * n + j];
        C::new(a, b)
    })
    .hermitize()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match(e in entries(5)) {
        let a = hermitian(&e, 5);
        let ours = HermitianEigen::new(&a);
        let mut theirs: Vec<f64> = to_na(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ours.values.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
        // Columns are orthonormal eigenvectors.
        let v = &ours.vectors;
        let resid = &a.matmul(v) - &v.matmul(&CMat::from_real_diag(&ours.values));
        prop_assert!(resid.max_abs() <= 1e-10);
        prop_assert!((&v.adjoint().matmul(v) - &CMat::identity(5)).max_abs() <= 1e-12);
    }

    #[test]
    fn exponential_matches_nalgebra(e in entries(4), t in -3.0f64..3.0) {
        let h = hermitian(&e, 4);
        let ours = expm_hermitian(&h, t);
        let theirs = (to_na(&h) * Complex::new(0.0, -t)).exp();
        let diff = DMatrix::from_fn(4, 4, |i, j| ours[(i, j)] - theirs[(i, j)]);
        prop_assert!(diff.iter().all(|z| z.norm() <= 1e-9));
    }

    #[test]
    fn commutator_norm_matches_singular_values(h in entries(4), s in entries(4)) {
        let hm = hermitian(&h, 4);
        let sm = hermitian(&s, 4);
        let sm = sm.scale_real(1.0 / spectral_norm(&sm));
        let spec = SystemSpec {
            dim: 4,
            hamiltonian: Hamiltonian::Constant(hm.clone()),
            couplings: vec![sm.clone()],
            gamma: 0.1,
            initial_state: InitialState::Pure(vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]),
            observables: vec![],
        };
        let c = commutator_scale(&spec);
        let comm = to_na(&hm) * to_na(&sm) - to_na(&sm) * to_na(&hm);
        let sv = comm.singular_values().max();
        prop_assert!((c.sdot[0] - sv).abs() <= 1e-10 * sv.max(1.0), "{} vs {sv}", c.sdot[0]);
    }
}

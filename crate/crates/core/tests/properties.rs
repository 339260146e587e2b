use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use dynmap::channel::{choi, is_cp, is_tp, projector_depolarizing, DensityMatrix};
use dynmap::diagnostics::depolarizing_capacity;
use dynmap::family::projector_family;
use dynmap::generator::{gksl_superop, pauli_gksl, pauli_rates};
use dynmap::matcore::{herm_eig, inv, kron, ComplexMatrix};
use dynmap::mixture::{g_sin2, MixtureDecomposition};

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_map(move |v| ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(a in (2usize..6).prop_flat_map(matrix)) {
        let h = a.hermitian_part();
        let eig = herm_eig(&h).unwrap();
        prop_assert!(eig.reconstruct().try_sub(&h).unwrap().frobenius_norm() <= 1e-10 * (1.0 + h.frobenius_norm()));
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let trace: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((trace - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn vectorization_identity(a in matrix(3), x in matrix(3), b in matrix(3)) {
        let lhs = (&(&a * &x) * &b).vec();
        let rhs = kron(&b.transpose(), &a).matvec(&x.vec()).unwrap();
        let err: f64 = lhs.iter().zip(&rhs).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn inverse_multiplies_back(a in matrix(4)) {
        // Diagonal shift keeps the matrix well conditioned.
        let m = a.try_add(&ComplexMatrix::identity(4).scale_real(5.0)).unwrap();
        let prod = &m * &inv(&m).unwrap();
        prop_assert!(prod.try_sub(&ComplexMatrix::identity(4)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn mixture_reproduces_exponential(
        gamma in 0.2..3.0f64,
        p in 0.05..0.95f64,
        eps in 0.05..0.95f64,
        t in 0.0..12.0f64,
    ) {
        let dec = MixtureDecomposition::new(g_sin2(gamma, p, eps).unwrap());
        let e = (-gamma * t).exp();
        prop_assert!((dec.combined_mu(t) - e).abs() <= 1e-13);
        prop_assert!((p * dec.f1(t) + (1.0 - p) * dec.f2(t) - gamma * e).abs() <= 1e-12 * gamma.max(1.0));
        prop_assert!((0.0..=1.0).contains(&dec.mu1(t)) && (0.0..=1.0).contains(&dec.mu2(t)));
    }

    #[test]
    fn projector_families_are_cptp_for_unit_interval(mu in 0.0..1.0f64, d in 2usize..4) {
        let fam = projector_family(Arc::new(move |t: f64| if t == 0.0 { 1.0 } else { mu }), projector_depolarizing(d)).unwrap();
        let m = fam.map_at(1.0);
        prop_assert!(is_tp(&m, 1e-12));
        prop_assert!(is_cp(&m, 1e-10).unwrap().is_cp);
        let c = choi(&m);
        prop_assert!((c.matrix().trace().re - d as f64).abs() < 1e-12);
    }

    #[test]
    fn capacity_is_bounded_and_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64, d in 2usize..8) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let clo = depolarizing_capacity(lo, d).unwrap();
        let chi = depolarizing_capacity(hi, d).unwrap();
        prop_assert!(clo >= 0.0 && chi <= (d as f64).ln());
        prop_assert!(clo <= chi);
    }

    #[test]
    fn pauli_rates_round_trip(g1 in -2.0..2.0f64, g2 in -2.0..2.0f64, g3 in -2.0..2.0f64) {
        let l = gksl_superop(&pauli_gksl([g1, g2, g3]), 0.0).unwrap();
        let r = pauli_rates(&l).unwrap();
        prop_assert!((r.gamma1 - g1).abs() < 1e-12 && (r.gamma2 - g2).abs() < 1e-12 && (r.gamma3 - g3).abs() < 1e-12);
        prop_assert!(r.residual < 1e-12);
    }

    #[test]
    fn random_states_are_valid(seed in any::<u64>(), d in 2usize..5) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(d, &mut rng);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(herm_eig(rho.matrix()).unwrap().min() >= -1e-12);
    }
}

use proptest::prelude::*;

use macrosize::entanglement::{schmidt_weights, split};
use macrosize::io::{format_number, round_sig};
use macrosize::mapping::{approx_absorb, exact_propagate, JointState};
use macrosize::measures::*;
use macrosize::scaling::fit_exponent;
use macrosize::symcore::linalg::{unitary_from_generator, CMatrix, CVector};
use macrosize::symcore::{c64, collective_matrix, BasisTag, CollectiveObservable, DensityOp, DickeBasis, PhotonicState, SymState};

fn amps(dim: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| c64(re, im))))
        .prop_filter("non-null", |v| v.norm() > 1e-3)
}

/// Pure state on `|M,k>`, `k <= K`, with `M` large against `K`.
fn sn_state() -> impl Strategy<Value = SymState> {
    (200usize..3000, 1usize..10).prop_flat_map(|(m, k)| {
        amps(k + 1).prop_map(move |v| SymState::normalized(DickeBasis::new(m, k).unwrap(), v).unwrap())
    })
}

fn mixed(basis: DickeBasis, rank: usize) -> impl Strategy<Value = DensityOp> {
    prop::collection::vec((amps(basis.dim()), 0.1f64..1.0), rank).prop_map(move |parts| {
        let mut acc = CMatrix::zeros(basis.dim(), basis.dim());
        for (v, w) in parts {
            let v = v.normalize();
            acc += &v * v.adjoint() * c64(w, 0.0);
        }
        DensityOp::normalized(BasisTag::DickeSector { spins: basis.spins(), cutoff: basis.cutoff() }, acc).unwrap()
    })
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-null", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            [x / n, y / n, z / n]
        })
}

fn rotate(phi: &SymState, u: &CMatrix) -> SymState {
    SymState::normalized(*phi.basis(), u * phi.amps()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variance_and_expectation_caps(phi in sn_state()) {
        let (m, n) = (phi.spins() as f64, phi.mean_excitation());
        let v = max_variance_collective(&phi).0;
        prop_assert!(v <= 4.0 * m * (n + 0.5) * (1.0 + 1e-9));
        let s = phi.mean_spin();
        prop_assert!((s[0] * s[0] + s[1] * s[1]).sqrt() <= 2.0 * (m * n).sqrt() * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn wigner_spin_band(phi in sn_state()) {
        let ne = n_eff(&phi).unwrap().value;
        let i = wigner_i_spin(&phi).unwrap().value;
        prop_assert!(ne / 4.0 < i && i <= ne / 2.0 * (1.0 + 1e-12), "n_eff {ne}, I {i}");
    }

    #[test]
    fn n_eff_is_at_least_one(phi in sn_state()) {
        prop_assert!(n_eff(&phi).unwrap().value >= 1.0 - 1e-9);
    }

    #[test]
    fn mixed_bounds(
        rho in (500usize..2000, 2usize..8, 2usize..4)
            .prop_flat_map(|(m, k, r)| mixed(DickeBasis::new(m, k).unwrap(), r))
    ) {
        let i = wigner_i_spin_mixed(&rho).unwrap().value;
        let ne = n_eff_mixed(&rho).unwrap().value;
        let q = index_q(&rho).unwrap().value;
        prop_assert!(i <= 0.5 * ne * (1.0 + 1e-9), "I {i}, n_eff {ne}");
        prop_assert!(i <= q * (1.0 + 1e-9), "I {i}, q {q}");
    }

    #[test]
    fn collective_rotations_leave_measures_unchanged(
        (a, b, n, theta) in (3usize..8).prop_flat_map(|m| {
            let basis = DickeBasis::full(m).unwrap();
            (
                amps(basis.dim()).prop_map(move |v| SymState::normalized(basis, v).unwrap()),
                amps(basis.dim()).prop_map(move |v| SymState::normalized(basis, v).unwrap()),
                axis(),
                0.0f64..6.3,
            )
        })
    ) {
        let basis = *a.basis();
        let u = unitary_from_generator(&collective_matrix(&basis, CollectiveObservable::Direction(n)), theta).unwrap();
        let pair = SpinPair::new(a.clone(), b.clone()).unwrap();
        let moved = SpinPair::new(rotate(&a, &u), rotate(&b, &u)).unwrap();
        prop_assert!(close(n_eff(&a).unwrap().value, n_eff(&moved.psi0).unwrap().value, 1e-8));
        prop_assert!(close(m_squared(&pair).unwrap().value, m_squared(&moved).unwrap().value, 1e-8));
        prop_assert!(close(relative_fisher(&pair).unwrap().value, relative_fisher(&moved).unwrap().value, 1e-8));
        let uz = unitary_from_generator(&collective_matrix(&basis, CollectiveObservable::Z), theta).unwrap();
        prop_assert!(close(wigner_i_spin(&a).unwrap().value, wigner_i_spin(&rotate(&a, &uz)).unwrap().value, 1e-8));
    }

    #[test]
    fn absorption_keeps_excitation_statistics(v in (2usize..12).prop_flat_map(|k| amps(k + 1)), m in 100usize..2000) {
        let cutoff = v.len() - 1;
        let psi = PhotonicState::normalized(1, cutoff, v, 2.0).unwrap();
        let phi = approx_absorb(&psi, m).unwrap();
        prop_assert!((phi.amps().norm() - 1.0).abs() < 1e-12);
        for (k, (c, d)) in psi.amps().iter().zip(phi.amps().iter()).enumerate() {
            prop_assert!((c.norm_sqr() - d.norm_sqr()).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn exact_evolution_is_unitary(v in (1usize..6).prop_flat_map(|k| amps(k + 1)), m in 10usize..80, g in 0.0f64..3.2) {
        let cutoff = v.len() - 1;
        let psi = PhotonicState::normalized(1, cutoff, v, 2.0).unwrap();
        let joint = JointState::with_ground_spins(&psi, m, cutoff).unwrap();
        let out = exact_propagate(&joint, g).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn split_round_trip(phi in sn_state(), frac in 0.1f64..0.9) {
        let m_a = ((phi.spins() as f64 * frac) as usize).max(1);
        let s = split(&phi, m_a).unwrap();
        let back = s.merge(phi.basis().cutoff());
        prop_assert!((&back - phi.amps()).norm() < 1e-10);
        let w: f64 = schmidt_weights(&s).iter().sum();
        prop_assert!((w - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_ignores_overall_scale(
        exponent in -1.5f64..1.5,
        scale in 1e-3f64..1e3,
        jitter in prop::collection::vec(-0.05f64..0.05, 5),
    ) {
        let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .zip(&jitter)
            .map(|(&n, j)| (n, n.powf(exponent) * (1.0 + j)))
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, v)| (n, v * scale)).collect();
        let a = fit_exponent(&pts).unwrap();
        let b = fit_exponent(&scaled).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() < 1e-12);
        prop_assert!((a.ci95 - b.ci95).abs() < 1e-9);
        prop_assert!((a.exponent - exponent).abs() < 0.1);
    }

    #[test]
    fn printed_numbers_parse_back(x in prop::num::f64::NORMAL) {
        let printed: f64 = format_number(x).parse().unwrap();
        prop_assert!((printed - round_sig(x)).abs() <= 1e-11 * x.abs());
    }
}

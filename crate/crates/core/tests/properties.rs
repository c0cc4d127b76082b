use malevich_qstate::numerics::{self, ComplexMatrix, C64};
use malevich_qstate::qubit::{self, ProbabilityTriple};
use malevich_qstate::qutrit::{self, QutritDensity};
use proptest::prelude::*;

/// Points of the Bloch ball written as probability triples.
fn quantum_triple() -> impl Strategy<Value = ProbabilityTriple> {
    (-0.5..=0.5f64, -0.5..=0.5f64, -0.5..=0.5f64, 0.0..=1.0f64).prop_map(|(x, y, z, r)| {
        let n = (x * x + y * y + z * z).sqrt().max(1e-12);
        let s = 0.5 * r.cbrt() / n;
        ProbabilityTriple::quantum(0.5 + x * s, 0.5 + y * s, 0.5 + z * s).unwrap()
    })
}

/// Density matrices `G G† / Tr(G G†)` from a bounded Ginibre-like factor.
fn qutrit_density() -> impl Strategy<Value = QutritDensity> {
    prop::collection::vec(-1.0..1.0f64, 18).prop_filter_map("degenerate factor", |v| {
        let g = ComplexMatrix::from_fn(3, |j, k| C64::new(v[2 * (3 * j + k)], v[2 * (3 * j + k) + 1]));
        let m = &g * &g.adjoint();
        let t = m.trace().re;
        (t > 1e-6).then(|| QutritDensity::new(m.scale(1.0 / t)).ok()).flatten()
    })
}

proptest! {
    #[test]
    fn qubit_round_trip(p in quantum_triple()) {
        let rho = qubit::qubit_from_probabilities(&p).unwrap();
        prop_assert!(rho.physical);
        let back = qubit::probabilities_from_qubit(&rho.matrix).unwrap();
        for (a, b) in p.as_array().into_iter().zip(back.as_array()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn qubit_area_range(p in quantum_triple()) {
        let s = qubit::area_sum(&p);
        prop_assert!((1.5 - 1e-12..=3.0 + 1e-12).contains(&s), "S = {}", s);
    }

    #[test]
    fn qutrit_rebuilt_from_a_b_d(r in qutrit_density()) {
        let c = qutrit::component_qubits(&r);
        let rebuilt = qutrit::qutrit_from_probabilities(&c.a, &c.b, &c.d).unwrap();
        prop_assert!(rebuilt.psd);
        prop_assert!(rebuilt.matrix.max_abs_diff(r.matrix()) <= 1e-14);
    }

    #[test]
    fn qutrit_area_and_entropy(r in qutrit_density()) {
        let c = qutrit::component_qubits(&r);
        let s = qutrit::qutrit_area_sum(&c);
        prop_assert!((4.5 - 1e-9..=8.157).contains(&s), "S = {}", s);
        let sl = qutrit::qutrit_linear_entropy(&c).unwrap();
        prop_assert!((sl - (1.0 - numerics::purity(r.matrix()))).abs() <= 1e-12);
    }
}

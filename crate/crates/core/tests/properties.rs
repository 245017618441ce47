//! Randomised invariants, 1000 cases each unless noted.

use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4};
use proptest::prelude::*;

use ghzsim_core::entanglement::{entropy_bits, three_tangle};
use ghzsim_core::history::{postselect_detectors, postselect_single_occupancy, HistoryEngine};
use ghzsim_core::ideal::detector_state;
use ghzsim_core::oracle::{apply_element, FockBasis, FockOracle, FockState};
use ghzsim_core::{Amplitude, BasisLabel, CircuitLayout, DetectorId, Element, Mode, PureState3, SparseState};

type C = Amplitude;

fn cases() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

fn amps<const N: usize>() -> impl Strategy<Value = [C; N]> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), N)
        .prop_map(|v| std::array::from_fn(|i| C::new(v[i].0, v[i].1)))
}

fn pure3() -> impl Strategy<Value = PureState3> {
    amps::<8>()
        .prop_filter("non-degenerate", |a| a.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|a| PureState3::normalized(a).unwrap())
}

fn qubit_state(photons: &'static [u8]) -> impl Strategy<Value = SparseState> {
    let n = photons.len();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(move |v| {
        let terms = v.iter().enumerate().map(|(k, (re, im))| {
            let modes: Vec<Mode> = (0..n).map(|j| if k >> (n - 1 - j) & 1 == 1 { Mode::B } else { Mode::A }).collect();
            (BasisLabel::qubits(photons, &modes).unwrap(), C::new(*re, *im))
        });
        SparseState::from_terms(photons, terms).unwrap()
    })
}

fn random_su2() -> impl Strategy<Value = Matrix2<C>> {
    (0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU, 0.0f64..1.0)
        .prop_map(|(a, b, g, x)| {
            let (c, s) = (x.sqrt(), (1.0 - x).sqrt());
            let e = |p: f64| C::from_polar(1.0, p);
            Matrix2::new(e(a) * c, -e(-b) * s, e(b) * s, e(-a) * c) * e(g)
        })
}

fn local(psi: &PureState3, u: [&Matrix2<C>; 3]) -> PureState3 {
    let a = psi.amplitudes();
    let mut out = [C::default(); 8];
    for (o, slot) in out.iter_mut().enumerate() {
        for i in 0..8 {
            let f = u[0][(o >> 2 & 1, i >> 2 & 1)] * u[1][(o >> 1 & 1, i >> 1 & 1)] * u[2][(o & 1, i & 1)];
            *slot += f * a[i];
        }
    }
    PureState3::new(out).unwrap()
}

/// Qubit positions within the 4x4 reduction that drops `qubit`.
fn others(qubit: usize) -> [usize; 2] {
    match qubit {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

fn bit(i: usize, q: usize) -> usize {
    i >> (2 - q) & 1
}

/// Two-qubit reduced state of the pair complementary to `qubit`.
fn reduce_pair(psi: &PureState3, qubit: usize) -> Matrix4<C> {
    let a = psi.amplitudes();
    let [p, q] = others(qubit);
    let mut rho = Matrix4::zeros();
    for i in 0..8 {
        for j in 0..8 {
            if bit(i, qubit) == bit(j, qubit) {
                rho[(2 * bit(i, p) + bit(i, q), 2 * bit(j, p) + bit(j, q))] += a[i] * a[j].conj();
            }
        }
    }
    rho
}

fn entropy4(rho: &Matrix4<C>) -> f64 {
    rho.symmetric_eigenvalues().iter().filter(|l| **l > 1e-15).map(|l| -l * l.log2()).sum()
}

fn concurrence(rho: &Matrix4<C>) -> f64 {
    let yy = Matrix4::from_fn(|i, j| if i + j == 3 { C::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0) } else { C::default() });
    let tilde = yy * rho.conjugate() * yy;
    let eig = rho.symmetric_eigen();
    let sqrt_rho = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C::new(l.max(0.0).sqrt(), 0.0)))
        * eig.eigenvectors.adjoint();
    let m = sqrt_rho * tilde * sqrt_rho;
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let mut l: Vec<f64> = h.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn beam_splitter_matrix_is_unitary(r in 0.0f64..=1.0) {
        let mut e = Element::beam_splitter("X", 1, 2, 1);
        e.r = r;
        e.t = (1.0 - r * r).sqrt();
        let m = e.matrix();
        let u = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
        let dev = (u.adjoint() * u - Matrix2::identity()).norm();
        prop_assert!(dev < 1e-12);
    }

    #[test]
    fn fock_evolution_preserves_norm(r in 0.0f64..=1.0, a in amps::<35>()) {
        // 4 modes, 4 photons: 35 states
        let basis = Arc::new(FockBasis::new(4, 4));
        let mut s = FockState::zero(basis.clone());
        s.amps.copy_from_slice(&a);
        let before = s.norm_sqr();
        let mut e = Element::beam_splitter("X", 2, 3, 1);
        e.r = r;
        e.t = (1.0 - r * r).sqrt();
        let s = apply_element(&s, &e).unwrap();
        let s = apply_element(&s, &Element::beam_splitter("Y", 1, 4, 1)).unwrap();
        let s = apply_element(&s, &Element::mirror("M", 3, 1)).unwrap();
        prop_assert!((s.norm_sqr() - before).abs() < 1e-12 * before.max(1.0));
    }

    #[test]
    fn detector_projectors_resolve_identity(psi in qubit_state(&[1, 2, 3, 4, 5])) {
        let total: f64 = DetectorId::PAIRS
            .iter()
            .map(|&(a, b)| psi.project_rank1(&[detector_state(a), detector_state(b)]).unwrap().norm_sqr())
            .sum();
        prop_assert!((total - psi.norm_sqr()).abs() < 1e-12 * psi.norm_sqr().max(1.0));
    }

    #[test]
    fn tensor_inner_product_factorises(
        a in qubit_state(&[1, 2]), c in qubit_state(&[1, 2]),
        b in qubit_state(&[3]), d in qubit_state(&[3]),
    ) {
        let lhs = a.tensor(&b).unwrap().inner_product(&c.tensor(&d).unwrap()).unwrap();
        let rhs = a.inner_product(&c).unwrap() * b.inner_product(&d).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent(psi in qubit_state(&[1, 3, 5])) {
        prop_assume!(psi.norm_sqr() > 1e-6);
        let (once, _) = psi.normalize().unwrap();
        let (twice, n) = once.normalize().unwrap();
        prop_assert!((n - 1.0).abs() < 1e-12);
        for (l, x) in once.terms() {
            prop_assert!((x - twice.amplitude(l)).norm() < 1e-14);
        }
    }

    #[test]
    fn marginal_entropy_matches_complement(psi in pure3()) {
        for (q, photon) in [1u8, 3, 5].into_iter().enumerate() {
            let s = entropy_bits(&psi.reduce(photon).unwrap()).unwrap();
            let s_pair = entropy4(&reduce_pair(&psi, q));
            prop_assert!((s - s_pair).abs() < 1e-8, "qubit {photon}: {s} vs {s_pair}");
        }
    }

    #[test]
    fn tangle_is_local_unitary_invariant(psi in pure3(), u1 in random_su2(), u3 in random_su2(), u5 in random_su2()) {
        let tau = three_tangle(&psi);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&tau));
        let moved = three_tangle(&local(&psi, [&u1, &u3, &u5]));
        prop_assert!((tau - moved).abs() < 1e-10);
    }

    #[test]
    fn tangle_matches_residual_of_concurrences(psi in pure3()) {
        let rho1 = psi.reduce(1).unwrap().m;
        let det = (rho1[0][0] * rho1[1][1] - rho1[0][1] * rho1[1][0]).re;
        // drop qubit 5 for the (1,3) pair, qubit 3 for (1,5)
        let c13 = concurrence(&reduce_pair(&psi, 2));
        let c15 = concurrence(&reduce_pair(&psi, 1));
        let residual = 4.0 * det - c13 * c13 - c15 * c15;
        prop_assert!((three_tangle(&psi) - residual).abs() < 1e-7, "{} vs {residual}", three_tangle(&psi));
    }

    #[test]
    fn oracle_evolution_is_unitary(channels in prop::collection::vec(1u8..=10, 5)) {
        let oracle = FockOracle::default();
        let mut occ = [0u8; 10];
        for c in channels {
            occ[c as usize - 1] += 1;
        }
        let mut s = FockState::occupation(oracle.basis().clone(), &occ).unwrap();
        for layer in 1..=oracle.layout().num_layers() {
            let elements: Vec<&Element> = oracle.layout().elements_in_layer(layer).collect();
            s = ghzsim_core::oracle::evolve_layer(&s, &elements).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

fn fidelity_at(engine: &HistoryEngine, delta: f64) -> [f64; 8] {
    let rows = engine.overlap_curves(&[delta]).unwrap();
    let mut out = [0.0; 8];
    for (k, r) in rows.iter().enumerate() {
        out[2 * k] = r.p_gen;
        out[2 * k + 1] = r.f_single_occupancy.unwrap();
    }
    out
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn curves_are_continuous_in_delta(delta in 0.0f64..0.499) {
        static ENGINE: std::sync::OnceLock<HistoryEngine> = std::sync::OnceLock::new();
        let engine = ENGINE.get_or_init(|| HistoryEngine::new(CircuitLayout::standard()));
        let h = 1e-7;
        let a = fidelity_at(engine, delta);
        let b = fidelity_at(engine, delta + h);
        for k in 0..8 {
            // polynomial in sqrt(delta); the steepest point is delta = 0
            prop_assert!((a[k] - b[k]).abs() < 1e-2, "{k}: {} vs {}", a[k], b[k]);
        }
    }

    #[test]
    fn sweep_is_independent_of_thread_count(grid in prop::collection::vec(0.0f64..=0.5, 1..4)) {
        static POOLS: std::sync::OnceLock<(HistoryEngine, rayon::ThreadPool, rayon::ThreadPool)> = std::sync::OnceLock::new();
        let (engine, one, four) = POOLS.get_or_init(|| {
            let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            (HistoryEngine::new(CircuitLayout::standard()), pool(1), pool(4))
        });
        let a = one.install(|| engine.overlap_curves(&grid)).unwrap();
        let b = four.install(|| engine.overlap_curves(&grid)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn single_occupancy_is_a_subsector(delta in 0.0f64..=0.5) {
        static ENGINE: std::sync::OnceLock<HistoryEngine> = std::sync::OnceLock::new();
        let engine = ENGINE.get_or_init(|| HistoryEngine::new(CircuitLayout::standard()));
        let gen = engine.general_outcome(delta).unwrap();
        let mut detected = 0.0;
        for pair in DetectorId::PAIRS {
            let ps = postselect_detectors(engine.layout(), &gen, pair);
            let single = postselect_single_occupancy(engine.layout(), &ps);
            prop_assert!(single.norm_sqr() <= ps.norm_sqr() + 1e-15);
            detected += ps.norm_sqr();
        }
        prop_assert!(detected <= gen.norm_sqr() + 1e-12);
    }
}

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use icnl_core::analysis::{conditional_density, pair_probability_coefficient};
use icnl_core::dsl::{format_source, parse};
use icnl_core::effective::{eff_apply_nl, eff_apply_unitary, unitary_to_effective, EffState};
use icnl_core::experiments::{
    build_frustrated, build_object_id_program, build_superposition, build_superposition_without, frustrated_source,
    object_source, superposition_output, SuperpositionMode, SuperpositionSpec,
};
use icnl_core::gates::{apply_beam_splitter, apply_object, apply_phase, apply_swap};
use icnl_core::linalg::{householder_completion, to_fixed, Mat4};
use icnl_core::{BsConvention, Circuit, Error, Gate, Ket, KetState, PerturbAmp, Qutrit};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter_map("zero vector", |v| {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| v.into_iter().map(|z| z / norm).collect())
    })
}

fn unitary<const N: usize>() -> impl Strategy<Value = nalgebra::SMatrix<Complex64, N, N>> {
    (unit_vector(N), prop::collection::vec(0.0..2.0 * PI, N)).prop_map(|(v, phases)| {
        let u = householder_completion(&v).unwrap();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(N, phases.into_iter().map(|p| Complex64::from_polar(1.0, p))));
        to_fixed::<N>(&(u * d)).unwrap()
    })
}

const PATHS: [&str; 5] = ["a", "b", "c", "d", "w"];
const OPTICAL: [&str; 4] = ["a", "b", "c", "d"];

fn two_paths() -> impl Strategy<Value = (&'static str, &'static str)> {
    (0..4usize, 1..4usize).prop_map(|(x, k)| (OPTICAL[x], OPTICAL[(x + k) % 4]))
}

fn gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        two_paths().prop_map(|(s, i)| Gate::nl(s, i)),
        two_paths().prop_map(|(a, b)| Gate::swap(a, b)),
        (0..4usize, -PI..PI).prop_map(|(p, phi)| Gate::phase(OPTICAL[p], phi)),
        (0..4usize).prop_map(|p| Gate::hwp(OPTICAL[p])),
        (0..4usize, unitary::<2>()).prop_map(|(p, u)| Gate::PolUnitary { path: OPTICAL[p].into(), u }),
        (two_paths(), unitary::<4>()).prop_map(|((a, b), u)| Gate::TwoPathUnitary { a: a.into(), b: b.into(), u }),
        two_paths().prop_map(|(a, b)| Gate::BeamSplitter { a: a.into(), b: b.into(), convention: BsConvention::Hadamard }),
        (0..4usize, 0.0..=1.0f64, -PI..PI).prop_map(|(p, t, gamma)| Gate::Object { path: OPTICAL[p].into(), loss: "w".into(), t, gamma }),
    ]
}

fn ket_label(n: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['0', 'H', 'V']), n).prop_map(|v| v.into_iter().collect())
}

/// A state with a vacuum term and a handful of random order-κ terms on `n` paths.
fn first_order_state(n: usize) -> impl Strategy<Value = KetState> {
    prop::collection::vec((ket_label(n), complex()), 1..6).prop_map(move |terms| {
        let paths: Vec<String> = (0..n).map(|k| format!("p{k}")).collect();
        let mut all = vec![(Ket::vacuum(n), PerturbAmp::ONE)];
        for (label, z) in terms {
            let ket: Ket = label.parse().unwrap();
            if !ket.is_vacuum() {
                all.push((ket, PerturbAmp::kappa(z)));
            }
        }
        KetState::from_terms(&paths, all).unwrap()
    })
}

fn occupied(ket: &Ket) -> usize {
    (0..ket.len()).filter(|&k| ket.get(k) != Qutrit::Vac).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn at_most_one_pair_after_every_gate(gates in prop::collection::vec(gate(), 1..10)) {
        let mut state = KetState::vacuum(&PATHS).unwrap();
        let vac = Ket::vacuum(PATHS.len());
        for g in &gates {
            state = match g.apply(&state) {
                Ok(s) => s,
                // two photons meeting at a beam splitter or a loss port leave the qutrit model
                Err(Error::DoublyOccupied { .. } | Error::OccupiedLossMode { .. }) => break,
                Err(e) => panic!("{e}"),
            };
            prop_assert_eq!(state.amplitude(&vac).c00, Complex64::new(1.0, 0.0));
            for (ket, amp) in state.terms() {
                if *ket != vac {
                    prop_assert_eq!(amp.c00, Complex64::new(0.0, 0.0), "{}", ket);
                }
                if amp.c10 != Complex64::new(0.0, 0.0) {
                    prop_assert_eq!(occupied(ket), 2, "{}", ket);
                }
            }
        }
    }

    #[test]
    fn passive_gates_undo_themselves(state in first_order_state(3), phi in -PI..PI) {
        let swap2 = apply_swap(&apply_swap(&state, "p0", "p2").unwrap(), "p0", "p2").unwrap();
        prop_assert_eq!(&swap2, &state);
        let hwp = Gate::hwp("p1");
        let hwp2 = hwp.apply(&hwp.apply(&state).unwrap()).unwrap();
        prop_assert!(hwp2.max_abs_diff(&state) < 1e-12);
        let back = apply_phase(&apply_phase(&state, "p1", phi).unwrap(), "p1", -phi).unwrap();
        prop_assert!(back.max_abs_diff(&state) < 1e-12);
        if let Ok(once) = apply_beam_splitter(&state, "p0", "p1") {
            let twice = apply_beam_splitter(&once, "p0", "p1").unwrap();
            prop_assert!(twice.max_abs_diff(&state) < 1e-12);
        }
    }

    #[test]
    fn object_keeps_photon_number(label in ket_label(2), z in complex(), t in 0.0..=1.0f64, gamma in -PI..PI) {
        let paths = ["i", "x", "w"];
        let ket: Ket = format!("{label}0").parse().unwrap();
        let n = ket.photon_count();
        let state = KetState::from_terms(&paths, [(ket, PerturbAmp::kappa(z))]).unwrap();
        let out = apply_object(&state, "i", "w", t, gamma).unwrap();
        for (k, _) in out.terms() {
            prop_assert_eq!(k.photon_count(), n);
        }
    }

    #[test]
    fn density_is_a_state_and_traces_compose(state in first_order_state(4)) {
        let Ok(full) = conditional_density(&state, &["p0", "p1", "p2", "p3"]) else { return Ok(()) };
        prop_assert!(full.validate().is_ok());
        let direct = conditional_density(&state, &["p2", "p0"]).unwrap();
        let composed = full.trace_to(&["p2", "p0"]).unwrap();
        prop_assert_eq!(&composed.basis, &direct.basis);
        prop_assert!((&composed.matrix - &direct.matrix).camax() < 1e-12);
        prop_assert!(direct.validate().is_ok());
    }

    #[test]
    fn fringe_halves_sum_to_four(phi in 0.0..2.0 * PI) {
        let a = pair_probability_coefficient(&build_frustrated(phi).unwrap().run_from_vacuum().unwrap());
        let b = pair_probability_coefficient(&build_frustrated(phi + PI).unwrap().run_from_vacuum().unwrap());
        prop_assert!((a + b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn emitted_files_reproduce_their_circuits(phi in -10.0..10.0f64, t in 0.0..=1.0f64, gamma in -PI..PI, bs in any::<bool>()) {
        let text = frustrated_source(phi);
        prop_assert_eq!(format_source(&text).unwrap(), text.clone());
        prop_assert_eq!(parse(&text).unwrap().lower(&[]).unwrap().program.circuit, build_frustrated(phi).unwrap());
        let text = object_source(t, gamma, bs);
        let once = format_source(&text).unwrap();
        prop_assert_eq!(format_source(&once).unwrap(), once);
        prop_assert_eq!(parse(&text).unwrap().lower(&[]).unwrap().program, build_object_id_program(t, gamma, bs).unwrap());
    }
}

fn pair_program() -> impl Strategy<Value = Vec<(usize, Option<Mat4>)>> {
    prop::collection::vec((0..2usize, prop::option::of(unitary::<4>())), 1..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pictures_agree(program in pair_program()) {
        let pairs = [("s1", "i1"), ("s2", "i2")];
        let mut circuit = Circuit::new(&["s1", "i1", "s2", "i2"]).unwrap();
        let mut eff = EffState::vacuum(&["s1", "s2"], &["i1", "i2"]).unwrap();
        for (p, u) in program {
            let (s, i) = pairs[p];
            match u {
                None => {
                    circuit.push(Gate::nl(s, i)).unwrap();
                    eff = eff_apply_nl(&eff, s, i).unwrap();
                }
                Some(u) => {
                    circuit.push(Gate::TwoPathUnitary { a: s.into(), b: i.into(), u }).unwrap();
                    eff = eff_apply_unitary(&eff, s, i, &u).unwrap();
                }
            }
        }
        let converted = unitary_to_effective(&circuit.run_from_vacuum().unwrap(), &["s1", "s2"], &["i1", "i2"]).unwrap();
        prop_assert_eq!(converted.max_abs_diff(&eff), 0.0);
    }

    #[test]
    fn superposer_commutes_with_other_blocks(u in unitary::<4>(), seed in prop::collection::vec(complex(), 8)) {
        let state = EffState::vacuum(&["s1", "s2"], &["i1", "i2"]).unwrap()
            .with_block("s1", "i1", [seed[0], seed[1], seed[2], seed[3]]).unwrap()
            .with_block("s2", "i2", [seed[4], seed[5], seed[6], seed[7]]).unwrap();
        let a = eff_apply_unitary(&eff_apply_nl(&state, "s1", "i1").unwrap(), "s2", "i2", &u).unwrap();
        let b = eff_apply_nl(&eff_apply_unitary(&state, "s2", "i2", &u).unwrap(), "s1", "i1").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pol_unitary_keeps_norm(u in unitary::<2>(), state in first_order_state(2)) {
        let g = Gate::PolUnitary { path: "p0".into(), u };
        let out = g.apply(&state).unwrap();
        let norm = |s: &KetState| s.terms().map(|(_, a)| a.c10.norm_sqr()).sum::<f64>();
        prop_assert!((norm(&out) - norm(&state)).abs() < 1e-12);
    }
}

fn spec() -> impl Strategy<Value = SuperpositionSpec> {
    (1..=5usize, any::<bool>()).prop_flat_map(|(n, marginal)| {
        let mode = if marginal { SuperpositionMode::SinglePhotonMarginal } else { SuperpositionMode::TwoPhoton };
        (prop::collection::vec(unit_vector(mode.dim()), n), prop::collection::vec(1..=3u32, n))
            .prop_map(move |(targets, weights)| SuperpositionSpec::uniform(targets, mode).with_weights(weights))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superposition_hits_every_target(spec in spec()) {
        let out = superposition_output(&build_superposition(&spec).unwrap().run_from_vacuum().unwrap(), spec.mode).unwrap();
        for (a, b) in out.iter().zip(spec.expected_sum(&[])) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
        for removed in 0..spec.targets.len() {
            let circuit = build_superposition_without(&spec, &[removed]).unwrap();
            let out = superposition_output(&circuit.run_from_vacuum().unwrap(), spec.mode).unwrap();
            for (a, b) in out.iter().zip(spec.expected_sum(&[removed])) {
                prop_assert!((a - b).norm() <= 1e-10);
            }
        }
    }
}

//! The canonical circuits and the modular superposition synthesizer.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::amp::{PerturbAmp, ONE, ZERO};
use crate::circuit::{Circuit, Probe, Program};
use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::gates::{BsConvention, Gate};
use crate::linalg::{householder_completion, to_fixed, UNITARY_TOL};
use crate::state::{Ket, KetState};

/// Two crystals on `(s1, i1)` and `(s2, i2)`, a phase on `i1`, and both
/// outputs of the first aligned with the second.
pub fn build_frustrated(phi: f64) -> Result<Circuit> {
    Circuit::new(&["s1", "i1", "s2", "i2"])?
        .with(Gate::nl("s1", "i1"))?
        .with(Gate::phase("i1", phi))?
        .with(Gate::swap("s1", "s2"))?
        .with(Gate::swap("i1", "i2"))?
        .with(Gate::nl("s2", "i2"))
}

/// The frustrated layout with half-wave plates on `s1` and `i1` instead of
/// the phase; the pair leaves in `|HH⟩ + |VV⟩` on `(s2, i2)`.
pub fn build_bell() -> Result<Circuit> {
    Circuit::new(&["s1", "i1", "s2", "i2"])?
        .with(Gate::nl("s1", "i1"))?
        .with(Gate::hwp("s1"))?
        .with(Gate::hwp("i1"))?
        .with(Gate::swap("s1", "s2"))?
        .with(Gate::swap("i1", "i2"))?
        .with(Gate::nl("s2", "i2"))
}

/// Object with transmittance `t` and phase `gamma` in the first idler,
/// which is then aligned with the second idler.
pub fn build_object_id(t: f64, gamma: f64) -> Result<Circuit> {
    Circuit::new(&["s1", "i1", "w", "s2", "i2"])?
        .with(Gate::nl("s1", "i1"))?
        .with(Gate::Object {
            path: "i1".into(),
            loss: "w".into(),
            t,
            gamma,
        })?
        .with(Gate::swap("i1", "i2"))?
        .with(Gate::nl("s2", "i2"))
}

/// [`build_object_id`] with its analysis: the signals' density matrix, and
/// optionally a beam splitter joining the signals followed by detection.
pub fn build_object_id_program(t: f64, gamma: f64, with_bs: bool) -> Result<Program> {
    let mut program = Program::from_vacuum(build_object_id(t, gamma)?)?;
    program.probe_here(Probe::Density {
        keep: vec!["s1".into(), "s2".into()],
    });
    if with_bs {
        program.circuit.push(Gate::BeamSplitter {
            a: "s1".into(),
            b: "s2".into(),
            convention: BsConvention::Hadamard,
        })?;
        program.probe_here(Probe::Measure {
            paths: vec!["s1".into(), "s2".into()],
        });
    }
    Ok(program)
}

/// Which path of the first single-pump crystal carries the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseOn {
    #[default]
    Idler,
    Signal,
}

pub const SINGLE_PUMP_PATHS: [&str; 6] = ["p1", "s1", "i1", "p2", "s2", "i2"];

/// `|H00⟩|000⟩ + |000⟩|H00⟩`: one pump photon shared by both crystals.
pub fn single_pump_initial() -> Result<KetState> {
    KetState::from_strs(&SINGLE_PUMP_PATHS, &[("H00000", PerturbAmp::ONE), ("000H00", PerturbAmp::ONE)])
}

/// Frustrated generation with a single-photon pump, as a program whose
/// initial state is [`single_pump_initial`].
pub fn build_frustrated_single_pump(phi: f64, on: PhaseOn) -> Result<Program> {
    let one = Complex64::new(1.0, 0.0);
    let phased = match on {
        PhaseOn::Idler => "i1",
        PhaseOn::Signal => "s1",
    };
    let nl1p = |p: &str, s: &str, i: &str| Gate::NlSinglePump {
        pump: p.into(),
        signal: s.into(),
        idler: i.into(),
        g: one,
    };
    let circuit = Circuit::new(&SINGLE_PUMP_PATHS)?
        .with(nl1p("p1", "s1", "i1"))?
        .with(Gate::phase(phased, phi))?
        .with(Gate::swap("s1", "s2"))?
        .with(Gate::swap("i1", "i2"))?
        .with(nl1p("p2", "s2", "i2"))?;
    Ok(Program {
        circuit,
        initial: single_pump_initial()?,
        probes: Vec::new(),
    })
}

/// Whether targets are pair states or single-photon states of the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SuperpositionMode {
    /// Targets over `{HH, HV, VH, VV}` of `(s, i)`.
    #[default]
    TwoPhoton,
    /// Targets over `{H, V}` of `s`; the idler is left in `H` and discarded.
    SinglePhotonMarginal,
}

impl SuperpositionMode {
    pub fn dim(self) -> usize {
        match self {
            SuperpositionMode::TwoPhoton => 4,
            SuperpositionMode::SinglePhotonMarginal => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionSpec {
    pub targets: Vec<Vec<Complex64>>,
    pub weights: Vec<u32>,
    pub mode: SuperpositionMode,
}

impl SuperpositionSpec {
    /// Unit weights.
    pub fn uniform(targets: Vec<Vec<Complex64>>, mode: SuperpositionMode) -> SuperpositionSpec {
        let weights = vec![1; targets.len()];
        SuperpositionSpec { targets, weights, mode }
    }

    pub fn with_weights(mut self, weights: Vec<u32>) -> SuperpositionSpec {
        self.weights = weights;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidSpec("at least one target is required".into()));
        }
        if self.weights.len() != self.targets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.targets.len(),
                found: self.weights.len(),
            });
        }
        if self.weights.contains(&0) {
            return Err(Error::InvalidSpec("weights must be at least 1".into()));
        }
        let dim = self.mode.dim();
        for t in &self.targets {
            if t.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.len(),
                });
            }
            let norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNITARY_TOL {
                return Err(Error::NonUnitNorm { norm });
            }
        }
        Ok(())
    }

    /// `Σ kᵢ|φᵢ⟩` over the targets not in `removed`.
    pub fn expected_sum(&self, removed: &[usize]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.mode.dim()];
        for (n, (t, &k)) in self.targets.iter().zip(&self.weights).enumerate() {
            if removed.contains(&n) {
                continue;
            }
            for (o, z) in out.iter_mut().zip(t) {
                *o += z * k as f64;
            }
        }
        out
    }
}

/// The image of `|HH⟩` each `U⁽ⁱ⁾` must produce: `φᵢ` pulled back through
/// the earlier unitaries.
pub fn pulled_targets(spec: &SuperpositionSpec) -> Result<Vec<Vec<Complex64>>> {
    Ok(solve(spec)?.into_iter().map(|(v, _)| v).collect())
}

/// `U⁽¹⁾…U⁽ⁱ⁾|HH⟩ = φᵢ` for every `i`, each factor completed by Householder reflection.
pub fn solve_unitaries(spec: &SuperpositionSpec) -> Result<Vec<DMatrix<Complex64>>> {
    Ok(solve(spec)?.into_iter().map(|(_, u)| u).collect())
}

fn solve(spec: &SuperpositionSpec) -> Result<Vec<(Vec<Complex64>, DMatrix<Complex64>)>> {
    spec.validate()?;
    let dim = spec.mode.dim();
    // running (U⁽¹⁾…U⁽ⁱ⁻¹⁾)†
    let mut undo = DMatrix::<Complex64>::identity(dim, dim);
    let mut out = Vec::with_capacity(spec.targets.len());
    for target in &spec.targets {
        let pulled = &undo * nalgebra::DVector::from_column_slice(target);
        let norm = pulled.norm();
        let pulled: Vec<Complex64> = pulled.iter().map(|z| z / norm).collect();
        let u = householder_completion(&pulled)?;
        undo = u.adjoint() * undo;
        out.push((pulled, u));
    }
    Ok(out)
}

fn unitary_gate(mode: SuperpositionMode, u: &DMatrix<Complex64>) -> Result<Gate> {
    Ok(match mode {
        SuperpositionMode::TwoPhoton => Gate::TwoPathUnitary {
            a: "s".into(),
            b: "i".into(),
            u: to_fixed::<4>(u)?,
        },
        SuperpositionMode::SinglePhotonMarginal => Gate::PolUnitary {
            path: "s".into(),
            u: to_fixed::<2>(u)?,
        },
    })
}

/// `NL^{k_N}, U⁽ᴺ⁾, …, NL^{k_1}, U⁽¹⁾` on one pair of paths `(s, i)`.
pub fn build_superposition(spec: &SuperpositionSpec) -> Result<Circuit> {
    build_superposition_without(spec, &[])
}

/// [`build_superposition`] with the crystals of the listed targets (0-based) left out.
pub fn build_superposition_without(spec: &SuperpositionSpec, removed: &[usize]) -> Result<Circuit> {
    let unitaries = solve_unitaries(spec)?;
    let mut circuit = Circuit::new(&["s", "i"])?;
    for n in (0..unitaries.len()).rev() {
        if !removed.contains(&n) {
            for _ in 0..spec.weights[n] {
                circuit.push(Gate::nl("s", "i"))?;
            }
        }
        circuit.push(unitary_gate(spec.mode, &unitaries[n])?)?;
    }
    Ok(circuit)
}

/// Order-`κ` output of a superposition circuit in the target basis, with
/// the creation factor `−i` divided out.
pub fn superposition_output(state: &KetState, mode: SuperpositionMode) -> Result<Vec<Complex64>> {
    let basis: &[&str] = match mode {
        SuperpositionMode::TwoPhoton => &["HH", "HV", "VH", "VV"],
        SuperpositionMode::SinglePhotonMarginal => &["HH", "VH"],
    };
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(basis.len());
    for k in basis {
        let ket: Ket = k.parse()?;
        out.push(state.amplitude(&ket).c10 * i);
    }
    let covered: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let total: f64 = state.terms().filter(|(k, _)| !k.is_vacuum()).map(|(_, a)| a.c10.norm_sqr()).sum();
    if (total - covered).abs() > 1e-12 * total.max(1.0) {
        return Err(Error::InvalidSpec("photons left the target subspace".into()));
    }
    Ok(out)
}

/// Convenience for tests and the CLI: the pure states `|HH⟩` and `|VV⟩`.
pub fn hh_vv_targets() -> Vec<Vec<Complex64>> {
    vec![vec![ONE, ZERO, ZERO, ZERO], vec![ZERO, ZERO, ZERO, ONE]]
}

fn num(v: f64) -> String {
    Expr::from_value(v).to_string()
}

/// Canonical circuit file for [`build_frustrated`], with a 64-point sweep of the phase.
pub fn frustrated_source(phi: f64) -> String {
    format!(
        "# Frustrated pair generation: the second crystal undoes the first when PHI = pi.
paths s1 i1 s2 i2
param PHI = {}

nl s1 i1
phase i1 PHI
align s1 s2
align i1 i2
nl s2 i2
sweep PHI from 0 to 2*pi steps 64
",
        num(phi)
    )
}

/// Canonical circuit file for [`build_bell`].
pub fn bell_source() -> String {
    "# Bell pair: half-wave plates turn the first pair into VV before alignment.
paths s1 i1 s2 i2

nl s1 i1
hwp s1
hwp i1
align s1 s2
align i1 i2
nl s2 i2
"
    .to_string()
}

/// Canonical circuit file for [`build_object_id_program`].
pub fn object_source(t: f64, gamma: f64, with_bs: bool) -> String {
    let mut s = format!(
        "# Object identification with undetected photons: the object sits in the first idler.
paths s1 i1 w s2 i2
param T = {}
param GAMMA = {}

nl s1 i1
object i1 w T GAMMA
align i1 i2
nl s2 i2
trace_keep s1 s2
",
        num(t),
        num(gamma)
    );
    if with_bs {
        s.push_str("bs s1 s2\nmeasure s1 s2\n");
    }
    s
}

/// Canonical circuit file for [`build_frustrated_single_pump`].
pub fn single_pump_source(phi: f64, on: PhaseOn) -> String {
    let phased = match on {
        PhaseOn::Idler => "i1",
        PhaseOn::Signal => "s1",
    };
    format!(
        "# Frustrated pair generation with one pump photon shared by both crystals.
paths p1 s1 i1 p2 s2 i2
param PHI = {}
init |H00000> + |000H00>

nl1p p1 s1 i1
phase {phased} PHI
align s1 s2
align i1 i2
nl1p p2 s2 i2
",
        num(phi)
    )
}

/// Canonical circuit file for [`build_superposition_without`].
pub fn superposition_source(spec: &SuperpositionSpec, removed: &[usize]) -> Result<String> {
    let pulled = pulled_targets(spec)?;
    let target = match spec.mode {
        SuperpositionMode::TwoPhoton => "s i",
        SuperpositionMode::SinglePhotonMarginal => "s",
    };
    let mut s = String::from("# Modular superposition: each crystal adds HH, each unitary moves it into place.\npaths s i\n\n");
    for n in (0..pulled.len()).rev() {
        if !removed.contains(&n) {
            for _ in 0..spec.weights[n] {
                s.push_str("nl s i\n");
            }
        }
        let entries: Vec<String> = pulled[n].iter().map(|z| format!("({}, {})", num(z.re), num(z.im))).collect();
        s.push_str(&format!("unitary {target} householder [{}]\n", entries.join(", ")));
    }
    if spec.mode == SuperpositionMode::SinglePhotonMarginal {
        s.push_str("trace_keep s\n");
    }
    Ok(s)
}

/// Default superposition of the golden corpus: a Bell pair plus `|HV⟩`.
pub fn default_superposition() -> SuperpositionSpec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    SuperpositionSpec::uniform(
        vec![
            vec![Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(h, 0.0)],
            vec![ZERO, ONE, ZERO, ZERO],
        ],
        SuperpositionMode::TwoPhoton,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{conditional_density, detector_probabilities, pair_probability_coefficient};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frustrated_fringe() {
        let dead = build_frustrated(PI).unwrap().run_from_vacuum().unwrap();
        assert_eq!(pair_probability_coefficient(&dead), 0.0);
        assert_eq!(dead, KetState::vacuum(&["s1", "i1", "s2", "i2"]).unwrap());
        let bright = build_frustrated(0.0).unwrap().run_from_vacuum().unwrap();
        assert_eq!(pair_probability_coefficient(&bright), 4.0);
        let half = build_frustrated(PI / 2.0).unwrap().run_from_vacuum().unwrap();
        assert!((pair_probability_coefficient(&half) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bell_sector() {
        let out = build_bell().unwrap().run_from_vacuum().unwrap();
        let minus_i = PerturbAmp::kappa(c(0.0, -1.0));
        assert_eq!(out.amp("00HH"), minus_i);
        assert_eq!(out.amp("00VV"), minus_i);
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn object_density_and_detectors() {
        for &(t, g) in &[(1.0, 0.0), (0.3, PI / 4.0), (0.0, PI / 2.0)] {
            let ex = build_object_id_program(t, g, true).unwrap().execute().unwrap();
            let rho = conditional_density(&ex.snapshots[0].1, &["s1", "s2"]).unwrap();
            let off = rho.entry("H0", "0H");
            assert!((off - c(t * g.cos(), t * g.sin()) / 2.0).norm() < 1e-12);
            let d = detector_probabilities(&ex.snapshots[1].1, &["s1", "s2"]).unwrap();
            assert!((d[0].1 - (1.0 + t * g.cos()) / 2.0).abs() < 1e-12);
            assert!((d[1].1 - (1.0 - t * g.cos()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_pump_frustration_returns_input() {
        for on in [PhaseOn::Idler, PhaseOn::Signal] {
            let p = build_frustrated_single_pump(PI, on).unwrap();
            assert_eq!(p.execute().unwrap().final_state, p.initial);
        }
        let bright = build_frustrated_single_pump(0.0, PhaseOn::Idler).unwrap().execute().unwrap();
        assert_eq!(bright.final_state.amp("0000HH"), PerturbAmp::kappa(c(0.0, -2.0)));
    }

    #[test]
    fn single_target_needs_no_rotation() {
        let spec = SuperpositionSpec::uniform(vec![vec![ONE, ZERO, ZERO, ZERO]], SuperpositionMode::TwoPhoton);
        assert_eq!(solve_unitaries(&spec).unwrap()[0], DMatrix::identity(4, 4));
    }

    #[test]
    fn hh_plus_vv_and_weights() {
        let spec = SuperpositionSpec::uniform(hh_vv_targets(), SuperpositionMode::TwoPhoton);
        let us = solve_unitaries(&spec).unwrap();
        assert_eq!(us[0], DMatrix::identity(4, 4));
        assert!((us[1][(3, 0)] - ONE).norm() < 1e-15);
        let out = superposition_output(&build_superposition(&spec).unwrap().run_from_vacuum().unwrap(), spec.mode).unwrap();
        assert!(out.iter().zip(&spec.expected_sum(&[])).all(|(a, b)| (a - b).norm() < 1e-12));

        let weighted = spec.clone().with_weights(vec![2, 1]);
        let out = superposition_output(&build_superposition(&weighted).unwrap().run_from_vacuum().unwrap(), spec.mode).unwrap();
        assert!((out[0] - c(2.0, 0.0)).norm() < 1e-12 && (out[3] - ONE).norm() < 1e-12);

        let out = superposition_output(&build_superposition_without(&spec, &[0]).unwrap().run_from_vacuum().unwrap(), spec.mode).unwrap();
        assert!(out[0].norm() < 1e-12 && (out[3] - ONE).norm() < 1e-12);
    }

    #[test]
    fn bell_plus_hv_by_circuit() {
        let h = FRAC_1_SQRT_2;
        let spec = SuperpositionSpec::uniform(
            vec![vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)], vec![ZERO, ONE, ZERO, ZERO]],
            SuperpositionMode::TwoPhoton,
        );
        let out = superposition_output(&build_superposition(&spec).unwrap().run_from_vacuum().unwrap(), spec.mode).unwrap();
        assert!(out.iter().zip(&spec.expected_sum(&[])).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn marginal_mode_uses_signal_unitaries() {
        let h = FRAC_1_SQRT_2;
        let spec = SuperpositionSpec::uniform(
            vec![vec![ONE, ZERO], vec![c(h, 0.0), c(0.0, h)]],
            SuperpositionMode::SinglePhotonMarginal,
        );
        let circuit = build_superposition(&spec).unwrap();
        assert!(circuit.ops().iter().all(|g| !matches!(g, Gate::TwoPathUnitary { .. })));
        let state = circuit.run_from_vacuum().unwrap();
        let out = superposition_output(&state, spec.mode).unwrap();
        assert!(out.iter().zip(&spec.expected_sum(&[])).all(|(a, b)| (a - b).norm() < 1e-12));
        let rho = conditional_density(&state, &["s"]).unwrap();
        rho.validate().unwrap();
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = SuperpositionSpec::uniform(vec![vec![c(2.0, 0.0), ZERO, ZERO, ZERO]], SuperpositionMode::TwoPhoton);
        assert!(matches!(solve_unitaries(&bad), Err(Error::NonUnitNorm { .. })));
        let empty = SuperpositionSpec::uniform(vec![], SuperpositionMode::TwoPhoton);
        assert!(solve_unitaries(&empty).is_err());
        let zero_weight = SuperpositionSpec::uniform(hh_vv_targets(), SuperpositionMode::TwoPhoton).with_weights(vec![0, 1]);
        assert!(solve_unitaries(&zero_weight).is_err());
    }
}

//! Gates acting on [`KetState`]s.
//!
//! Every function is pure: it takes a state by reference and returns a new
//! one. Amplitudes pick up `κ`/`κ̄` factors only from the pair-creation gates
//! ([`apply_nl`], [`apply_nl_single_photon_pump`], [`apply_g_alpha`] and the
//! controlled two-level gate used by the Gray-code synthesis).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp::{unit_phase, PerturbAmp, I, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{apply_fixed, check_unitary, Mat2, Mat4};
use crate::state::{Ket, KetState, Qutrit};

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Sign convention of the two-port beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BsConvention {
    /// Real Hadamard: `|X0⟩ → (|X0⟩+|0X⟩)/√2`, `|0X⟩ → (|X0⟩−|0X⟩)/√2`.
    #[default]
    Hadamard,
    /// `|X0⟩ → (|X0⟩+i|0X⟩)/√2`, `|0X⟩ → (i|X0⟩+|0X⟩)/√2`.
    Symmetric,
}

impl BsConvention {
    /// Mode matrix: column `k` is the image of a photon entering port `k`.
    pub fn matrix(self) -> Mat2 {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BsConvention::Hadamard => Mat2::new(h, h, h, -h),
            BsConvention::Symmetric => Mat2::new(h, I * h, I * h, h),
        }
    }
}

/// A two-level gate on the `{0, H}` symbols of one path.
///
/// `matrix[j][k]` is the amplitude of symbol `j` in the image of symbol `k`
/// (index 0 is vacuum, 1 is `H`). `V` is left untouched.
pub type TwoLevel = [[PerturbAmp; 2]; 2];

/// The `G_α` gate: `|0⟩ → |0⟩ − iκ|H⟩`, `|H⟩ → |H⟩ − iκ̄|0⟩`.
pub fn g_alpha_matrix() -> TwoLevel {
    [
        [PerturbAmp::ONE, PerturbAmp::kappa_bar(MINUS_I)],
        [PerturbAmp::kappa(MINUS_I), PerturbAmp::ONE],
    ]
}

/// One gate application with its target paths and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Coherently pumped crystal creating an H pair on `(signal, idler)`.
    Nl { signal: String, idler: String },
    /// Crystal pumped by a single photon on `pump`; `g` scales the formal `κ`.
    NlSinglePump {
        pump: String,
        signal: String,
        idler: String,
        g: Complex64,
    },
    /// Path alignment, a full two-qutrit swap.
    Swap { a: String, b: String },
    /// `e^{−iΦ}` on any photon in `path`.
    Phase { path: String, phi: f64 },
    /// Polarization unitary on one path.
    PolUnitary { path: String, u: Mat2 },
    /// Joint polarization unitary on `{HH, HV, VH, VV}` of two paths.
    TwoPathUnitary { a: String, b: String, u: Mat4 },
    BeamSplitter {
        a: String,
        b: String,
        convention: BsConvention,
    },
    /// Point-like object with transmittance `t` and phase `gamma`; losses go to `loss`.
    Object {
        path: String,
        loss: String,
        t: f64,
        gamma: f64,
    },
    /// Generalized CNOT: toggles `target` between `0` and `H` when `control` is `H`.
    GCnot { control: String, target: String },
    GAlpha { path: String },
    /// Toggles `target` between `0` and `H` when every control holds its symbol.
    ControlledNot {
        controls: Vec<(String, Qutrit)>,
        target: String,
    },
    /// Two-level gate on `target`, conditioned on every control holding its symbol.
    ControlledTwoLevel {
        controls: Vec<(String, Qutrit)>,
        target: String,
        matrix: TwoLevel,
    },
}

impl Gate {
    pub fn nl(signal: &str, idler: &str) -> Gate {
        Gate::Nl {
            signal: signal.into(),
            idler: idler.into(),
        }
    }

    pub fn swap(a: &str, b: &str) -> Gate {
        Gate::Swap {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn phase(path: &str, phi: f64) -> Gate {
        Gate::Phase {
            path: path.into(),
            phi,
        }
    }

    pub fn hwp(path: &str) -> Gate {
        Gate::PolUnitary {
            path: path.into(),
            u: crate::linalg::pauli_x(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Nl { .. } => "nl",
            Gate::NlSinglePump { .. } => "nl1p",
            Gate::Swap { .. } => "align",
            Gate::Phase { .. } => "phase",
            Gate::PolUnitary { .. } => "unitary1",
            Gate::TwoPathUnitary { .. } => "unitary2",
            Gate::BeamSplitter { .. } => "bs",
            Gate::Object { .. } => "object",
            Gate::GCnot { .. } => "gcnot",
            Gate::GAlpha { .. } => "g_alpha",
            Gate::ControlledNot { .. } => "cnot",
            Gate::ControlledTwoLevel { .. } => "two_level",
        }
    }

    /// Every path label the gate touches, controls included.
    pub fn targets(&self) -> Vec<&str> {
        match self {
            Gate::Nl { signal, idler } => vec![signal, idler],
            Gate::NlSinglePump {
                pump,
                signal,
                idler,
                ..
            } => vec![pump, signal, idler],
            Gate::Swap { a, b }
            | Gate::TwoPathUnitary { a, b, .. }
            | Gate::BeamSplitter { a, b, .. } => vec![a, b],
            Gate::Phase { path, .. } | Gate::PolUnitary { path, .. } | Gate::GAlpha { path } => {
                vec![path]
            }
            Gate::Object { path, loss, .. } => vec![path, loss],
            Gate::GCnot { control, target } => vec![control, target],
            Gate::ControlledNot { controls, target }
            | Gate::ControlledTwoLevel {
                controls, target, ..
            } => controls
                .iter()
                .map(|(c, _)| c.as_str())
                .chain(std::iter::once(target.as_str()))
                .collect(),
        }
    }

    /// Parameter checks that do not depend on a state.
    pub fn validate(&self) -> Result<()> {
        match self {
            Gate::PolUnitary { u, .. } => check_unitary(u),
            Gate::TwoPathUnitary { u, .. } => check_unitary(u),
            Gate::Object { t, .. } if !(0.0..=1.0).contains(t) => Err(Error::TransmittanceRange(*t)),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, state: &KetState) -> Result<KetState> {
        match self {
            Gate::Nl { signal, idler } => apply_nl(state, signal, idler),
            Gate::NlSinglePump {
                pump,
                signal,
                idler,
                g,
            } => apply_nl_single_photon_pump(state, pump, signal, idler, *g),
            Gate::Swap { a, b } => apply_swap(state, a, b),
            Gate::Phase { path, phi } => apply_phase(state, path, *phi),
            Gate::PolUnitary { path, u } => apply_pol_unitary(state, path, u),
            Gate::TwoPathUnitary { a, b, u } => apply_two_path_pol_unitary(state, a, b, u),
            Gate::BeamSplitter { a, b, convention } => apply_beam_splitter_with(state, a, b, *convention),
            Gate::Object {
                path,
                loss,
                t,
                gamma,
            } => apply_object(state, path, loss, *t, *gamma),
            Gate::GCnot { control, target } => apply_gcnot(state, control, target),
            Gate::GAlpha { path } => apply_g_alpha(state, path),
            Gate::ControlledNot { controls, target } => apply_controlled_not(state, controls, target),
            Gate::ControlledTwoLevel {
                controls,
                target,
                matrix,
            } => apply_controlled_two_level(state, controls, target, matrix),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (n, t) in self.targets().iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// Coherently pumped pair creation on `(s, i)`.
///
/// `|00⟩ → |00⟩ − iκ|HH⟩`, `|HH⟩ → |HH⟩ − iκ̄|00⟩`; the other seven
/// two-path symbols are fixed. Contributions of order two truncate.
pub fn apply_nl(state: &KetState, s: &str, i: &str) -> Result<KetState> {
    let [si, ii] = state.indices("nl", [s, i])?;
    let create = PerturbAmp::kappa(MINUS_I);
    let annihilate = PerturbAmp::kappa_bar(MINUS_I);
    state.map_terms(|ket, a, out| {
        out.push((ket.clone(), a));
        match (ket.get(si), ket.get(ii)) {
            (Qutrit::Vac, Qutrit::Vac) => {
                out.push((ket.with(si, Qutrit::H).with(ii, Qutrit::H), a * create));
            }
            (Qutrit::H, Qutrit::H) => {
                out.push((ket.with(si, Qutrit::Vac).with(ii, Qutrit::Vac), a * annihilate));
            }
            _ => {}
        }
        Ok(())
    })
}

/// Exchanges the symbols of two paths in every term.
pub fn apply_swap(state: &KetState, a: &str, b: &str) -> Result<KetState> {
    let [ai, bi] = state.indices("align", [a, b])?;
    state.map_terms(|ket, amp, out| {
        let mut k = ket.clone();
        k.0.swap(ai, bi);
        out.push((k, amp));
        Ok(())
    })
}

pub fn apply_pol_unitary(state: &KetState, p: &str, u: &Mat2) -> Result<KetState> {
    check_unitary(u)?;
    let [pi] = state.indices("unitary", [p])?;
    state.map_terms(|ket, a, out| {
        match ket.get(pi).polarization_index() {
            None => out.push((ket.clone(), a)),
            Some(k) => {
                for j in 0..2 {
                    let c = u[(j, k)];
                    if c != ZERO {
                        out.push((ket.with(pi, Qutrit::from_polarization_index(j)), a.scale(c)));
                    }
                }
            }
        }
        Ok(())
    })
}

/// Multiplies every term with a photon in `p` by `e^{−iΦ}`.
pub fn apply_phase(state: &KetState, p: &str, phi: f64) -> Result<KetState> {
    let [pi] = state.indices("phase", [p])?;
    let factor = unit_phase(-phi);
    state.map_terms(|ket, a, out| {
        if ket.get(pi).is_occupied() {
            out.push((ket.clone(), a.scale(factor)));
        } else {
            out.push((ket.clone(), a));
        }
        Ok(())
    })
}

pub fn apply_beam_splitter(state: &KetState, a: &str, b: &str) -> Result<KetState> {
    apply_beam_splitter_with(state, a, b, BsConvention::Hadamard)
}

pub fn apply_beam_splitter_with(state: &KetState, a: &str, b: &str, convention: BsConvention) -> Result<KetState> {
    let [ai, bi] = state.indices("bs", [a, b])?;
    let m = convention.matrix();
    state.map_terms(|ket, amp, out| {
        let (x, y) = (ket.get(ai), ket.get(bi));
        let (port, photon) = match (x.is_occupied(), y.is_occupied()) {
            (false, false) => {
                out.push((ket.clone(), amp));
                return Ok(());
            }
            (true, true) => return Err(Error::DoublyOccupied { ket: ket.to_string() }),
            (true, false) => (0, x),
            (false, true) => (1, y),
        };
        let base = ket.with(ai, Qutrit::Vac).with(bi, Qutrit::Vac);
        out.push((base.with(ai, photon), amp.scale(m[(0, port)])));
        out.push((base.with(bi, photon), amp.scale(m[(1, port)])));
        Ok(())
    })
}

/// Mode coupling of the object channel between `i` and the loss path `w`.
///
/// Column 0 is the image of a photon in `i`; column 1 completes the map to a
/// unitary and is what a photon already in `w` would see.
pub fn object_matrix(t: f64, gamma: f64) -> Mat2 {
    let r = Complex64::new((1.0 - t * t).max(0.0).sqrt(), 0.0);
    let tt = Complex64::new(t, 0.0);
    Mat2::new(tt * unit_phase(gamma), -r, r, tt * unit_phase(-gamma))
}

/// `|X0⟩_{iw} → T e^{iγ}|X0⟩ + √(1−T²)|0X⟩`; polarization is preserved.
///
/// A photon already in `w` follows the completing column,
/// `|0X⟩ → −√(1−T²)|X0⟩ + T e^{−iγ}|0X⟩`. Photons in both paths would need
/// two photons in one mode and are rejected.
pub fn apply_object(state: &KetState, i: &str, w: &str, t: f64, gamma: f64) -> Result<KetState> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TransmittanceRange(t));
    }
    let [ii, wi] = state.indices("object", [i, w])?;
    let m = object_matrix(t, gamma);
    state.map_terms(|ket, a, out| {
        let (port, photon) = match (ket.get(ii).is_occupied(), ket.get(wi).is_occupied()) {
            (false, false) => {
                out.push((ket.clone(), a));
                return Ok(());
            }
            (true, true) => {
                return Err(Error::OccupiedLossMode {
                    path: w.to_string(),
                    ket: ket.to_string(),
                })
            }
            (true, false) => (0, ket.get(ii)),
            (false, true) => (1, ket.get(wi)),
        };
        let base = ket.with(ii, Qutrit::Vac).with(wi, Qutrit::Vac);
        out.push((base.with(ii, photon), a.scale(m[(0, port)])));
        out.push((base.with(wi, photon), a.scale(m[(1, port)])));
        Ok(())
    })
}

/// Joint polarization unitary over `{HH, HV, VH, VV}` of `(a, b)`.
///
/// Terms with either path in vacuum are left alone. Terms sharing the same
/// symbols elsewhere are gathered into one 4-vector per amplitude order and
/// multiplied with [`apply_fixed`].
pub fn apply_two_path_pol_unitary(state: &KetState, a: &str, b: &str, u: &Mat4) -> Result<KetState> {
    check_unitary(u)?;
    let [ai, bi] = state.indices("unitary", [a, b])?;
    let mut groups: BTreeMap<Ket, [PerturbAmp; 4]> = BTreeMap::new();
    let mut passthrough = Vec::new();
    for (ket, amp) in state.terms() {
        match (ket.get(ai).polarization_index(), ket.get(bi).polarization_index()) {
            (Some(x), Some(y)) => {
                let rest = ket.with(ai, Qutrit::Vac).with(bi, Qutrit::Vac);
                groups.entry(rest).or_insert([PerturbAmp::ZERO; 4])[2 * x + y] = *amp;
            }
            _ => passthrough.push((ket.clone(), *amp)),
        }
    }
    for (rest, block) in groups {
        let c00 = apply_fixed(u, &block.map(|p| p.c00));
        let c10 = apply_fixed(u, &block.map(|p| p.c10));
        let c01 = apply_fixed(u, &block.map(|p| p.c01));
        for j in 0..4 {
            let ket = rest
                .with(ai, Qutrit::from_polarization_index(j / 2))
                .with(bi, Qutrit::from_polarization_index(j % 2));
            passthrough.push((ket, PerturbAmp::new(c00[j], c10[j], c01[j])));
        }
    }
    Ok(KetState::collect_unchecked(state.paths().to_vec(), passthrough))
}

fn toggle(q: Qutrit) -> Qutrit {
    match q {
        Qutrit::Vac => Qutrit::H,
        Qutrit::H => Qutrit::Vac,
        Qutrit::V => Qutrit::V,
    }
}

pub fn apply_gcnot(state: &KetState, control: &str, target: &str) -> Result<KetState> {
    let [ci, ti] = state.indices("gcnot", [control, target])?;
    state.map_terms(|ket, a, out| {
        if ket.get(ci) == Qutrit::H {
            out.push((ket.with(ti, toggle(ket.get(ti))), a));
        } else {
            out.push((ket.clone(), a));
        }
        Ok(())
    })
}

pub fn apply_g_alpha(state: &KetState, p: &str) -> Result<KetState> {
    apply_controlled_two_level(state, &[], p, &g_alpha_matrix())
}

fn resolve_controls(state: &KetState, controls: &[(String, Qutrit)], target: &str) -> Result<(Vec<(usize, Qutrit)>, usize)> {
    let ti = state.index_of(target)?;
    let mut resolved = Vec::with_capacity(controls.len());
    for (label, q) in controls {
        let ci = state.index_of(label)?;
        if ci == ti || resolved.iter().any(|(r, _)| *r == ci) {
            return Err(Error::RepeatedTarget {
                gate: "controlled",
                path: label.clone(),
            });
        }
        resolved.push((ci, *q));
    }
    Ok((resolved, ti))
}

pub fn apply_controlled_not(state: &KetState, controls: &[(String, Qutrit)], target: &str) -> Result<KetState> {
    let (controls, ti) = resolve_controls(state, controls, target)?;
    state.map_terms(|ket, a, out| {
        if controls.iter().all(|(c, q)| ket.get(*c) == *q) {
            out.push((ket.with(ti, toggle(ket.get(ti))), a));
        } else {
            out.push((ket.clone(), a));
        }
        Ok(())
    })
}

pub fn apply_controlled_two_level(
    state: &KetState,
    controls: &[(String, Qutrit)],
    target: &str,
    matrix: &TwoLevel,
) -> Result<KetState> {
    let (controls, ti) = resolve_controls(state, controls, target)?;
    state.map_terms(|ket, a, out| {
        let k = match ket.get(ti) {
            Qutrit::Vac => 0,
            Qutrit::H => 1,
            Qutrit::V => 2,
        };
        if k == 2 || !controls.iter().all(|(c, q)| ket.get(*c) == *q) {
            out.push((ket.clone(), a));
            return Ok(());
        }
        for (j, sym) in [Qutrit::Vac, Qutrit::H].into_iter().enumerate() {
            out.push((ket.with(ti, sym), a * matrix[j][k]));
        }
        Ok(())
    })
}

/// Pair creation from a single pump photon on `(p, s, i)`.
///
/// `|H00⟩ → |H00⟩ − ig|0HH⟩` and `|0HH⟩ → |0HH⟩ − ig*|H00⟩`, with `g`
/// multiplying the formal first-order symbol. Only the ten symbols with
/// pump in `{0, H}` and at most one pump photon or one pair are accepted.
pub fn apply_nl_single_photon_pump(state: &KetState, p: &str, s: &str, i: &str, g: Complex64) -> Result<KetState> {
    let [pi, si, ii] = state.indices("nl1p", [p, s, i])?;
    let create = PerturbAmp::kappa(MINUS_I * g);
    let annihilate = PerturbAmp::kappa_bar(MINUS_I * g.conj());
    state.map_terms(|ket, a, out| {
        let triple = (ket.get(pi), ket.get(si), ket.get(ii));
        match triple {
            (Qutrit::V, _, _) => return Err(Error::OutsideSinglePumpSubspace { ket: ket.to_string() }),
            (Qutrit::H, x, y) if x.is_occupied() || y.is_occupied() => {
                return Err(Error::OutsideSinglePumpSubspace { ket: ket.to_string() })
            }
            _ => {}
        }
        out.push((ket.clone(), a));
        match triple {
            (Qutrit::H, Qutrit::Vac, Qutrit::Vac) => {
                let partner = ket.with(pi, Qutrit::Vac).with(si, Qutrit::H).with(ii, Qutrit::H);
                out.push((partner, a * create));
            }
            (Qutrit::Vac, Qutrit::H, Qutrit::H) => {
                let partner = ket.with(pi, Qutrit::H).with(si, Qutrit::Vac).with(ii, Qutrit::Vac);
                out.push((partner, a * annihilate));
            }
            _ => {}
        }
        Ok(())
    })
}

/// The ten single-photon-pump basis symbols on `(pump, signal, idler)`.
pub fn single_pump_basis() -> Vec<Ket> {
    ["000", "H00", "0H0", "0V0", "00H", "00V", "0HH", "0HV", "0VH", "0VV"]
        .iter()
        .map(|s| s.parse().expect("valid literal"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amp::{ONE, ZERO};
    use crate::linalg::{hadamard, kron2, pauli_x, phase_gate};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(paths: &[&str], s: &str) -> KetState {
        KetState::from_strs(paths, &[(s, PerturbAmp::ONE)]).unwrap()
    }

    fn si() -> [&'static str; 2] {
        ["s", "i"]
    }

    #[test]
    fn nl_on_vacuum_creates_pair() {
        let out = apply_nl(&ket(&si(), "00"), "s", "i").unwrap();
        assert_eq!(out.amp("00"), PerturbAmp::ONE);
        assert_eq!(out.amp("HH"), PerturbAmp::kappa(MINUS_I));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn nl_fixes_the_other_seven_symbols() {
        for s in ["0H", "0V", "H0", "V0", "HV", "VH", "VV"] {
            let input = ket(&si(), s);
            assert_eq!(apply_nl(&input, "s", "i").unwrap(), input, "{s}");
        }
    }

    #[test]
    fn nl_on_hh_couples_back_to_vacuum() {
        let out = apply_nl(&ket(&si(), "HH"), "s", "i").unwrap();
        assert_eq!(out.amp("00"), PerturbAmp::kappa_bar(MINUS_I));
    }

    #[test]
    fn second_nl_adds_phased_pair_amplitudes() {
        let phase = unit_phase(-0.8);
        let input = KetState::from_strs(
            &si(),
            &[("00", PerturbAmp::ONE), ("HH", PerturbAmp::kappa(MINUS_I * phase))],
        )
        .unwrap();
        let out = apply_nl(&input, "s", "i").unwrap();
        assert_eq!(out.amp("HH"), PerturbAmp::kappa(MINUS_I * (ONE + phase)));
        assert_eq!(out.amp("00"), PerturbAmp::ONE);
    }

    #[test]
    fn nl_rejects_bad_targets() {
        let s = ket(&si(), "00");
        assert!(matches!(apply_nl(&s, "s", "s"), Err(Error::RepeatedTarget { .. })));
        assert!(matches!(apply_nl(&s, "s", "x"), Err(Error::UnknownPath(_))));
    }

    #[test]
    fn swap_moves_photons_and_is_an_involution() {
        let out = apply_swap(&ket(&["a", "b"], "H0"), "a", "b").unwrap();
        assert_eq!(out, ket(&["a", "b"], "0H"));
        let vac = ket(&["a", "b"], "00");
        assert_eq!(apply_swap(&vac, "a", "b").unwrap(), vac);
        let mixed = KetState::from_strs(
            &["a", "b", "c"],
            &[("HV0", PerturbAmp::ONE), ("0VH", PerturbAmp::kappa(c(0.3, 0.1)))],
        )
        .unwrap();
        let twice = apply_swap(&apply_swap(&mixed, "a", "c").unwrap(), "a", "c").unwrap();
        assert_eq!(twice, mixed);
    }

    #[test]
    fn half_wave_plate_flips_polarization() {
        let p = ["p"];
        assert_eq!(apply_pol_unitary(&ket(&p, "H"), "p", &pauli_x()).unwrap(), ket(&p, "V"));
        assert_eq!(apply_pol_unitary(&ket(&p, "0"), "p", &hadamard()).unwrap(), ket(&p, "0"));
        let out = apply_pol_unitary(&ket(&p, "V"), "p", &phase_gate(0.4)).unwrap();
        assert_eq!(out.amp("V"), PerturbAmp::constant(unit_phase(0.4)));
        let bad = Mat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(
            apply_pol_unitary(&ket(&p, "H"), "p", &bad),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn phase_shifter_convention() {
        let p = ["p"];
        let out = apply_phase(&ket(&p, "H"), "p", PI).unwrap();
        assert_eq!(out.amp("H"), PerturbAmp::constant(-ONE));
        assert_eq!(apply_phase(&ket(&p, "V"), "p", 0.0).unwrap(), ket(&p, "V"));
        assert_eq!(apply_phase(&ket(&p, "0"), "p", 1.0).unwrap(), ket(&p, "0"));
        let pair = KetState::from_strs(&si(), &[("HH", PerturbAmp::kappa(MINUS_I))]).unwrap();
        let out = apply_phase(&pair, "i", 0.9).unwrap();
        assert_eq!(out.amp("HH"), PerturbAmp::kappa(MINUS_I * unit_phase(-0.9)));
        let back = apply_phase(&out, "i", -0.9).unwrap();
        assert!(back.max_abs_diff(&pair) < 1e-15);
    }

    #[test]
    fn hadamard_beam_splitter() {
        let ab = ["a", "b"];
        let h = FRAC_1_SQRT_2;
        let out = apply_beam_splitter(&ket(&ab, "H0"), "a", "b").unwrap();
        assert_eq!(out.amp("H0"), PerturbAmp::constant(c(h, 0.0)));
        assert_eq!(out.amp("0H"), PerturbAmp::constant(c(h, 0.0)));
        let out = apply_beam_splitter(&ket(&ab, "0H"), "a", "b").unwrap();
        assert_eq!(out.amp("H0"), PerturbAmp::constant(c(h, 0.0)));
        assert_eq!(out.amp("0H"), PerturbAmp::constant(c(-h, 0.0)));
        let twice = apply_beam_splitter(&out, "a", "b").unwrap();
        assert!(twice.max_abs_diff(&ket(&ab, "0H")) < 1e-15);
        assert!(matches!(
            apply_beam_splitter(&ket(&ab, "HV"), "a", "b"),
            Err(Error::DoublyOccupied { .. })
        ));
    }

    #[test]
    fn symmetric_beam_splitter_uses_i_phase() {
        let out = apply_beam_splitter_with(&ket(&["a", "b"], "V0"), "a", "b", BsConvention::Symmetric).unwrap();
        assert_eq!(out.amp("0V"), PerturbAmp::constant(c(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn object_channel_limits() {
        let iw = ["i", "w"];
        let s = ket(&iw, "H0");
        assert_eq!(apply_object(&s, "i", "w", 1.0, 0.0).unwrap(), s);
        assert_eq!(apply_object(&s, "i", "w", 0.0, 0.3).unwrap(), ket(&iw, "0H"));
        assert!(matches!(
            apply_object(&s, "i", "w", 1.2, 0.0),
            Err(Error::TransmittanceRange(_))
        ));
        assert!(matches!(
            apply_object(&ket(&iw, "HV"), "i", "w", 0.5, 0.0),
            Err(Error::OccupiedLossMode { .. })
        ));
    }

    #[test]
    fn object_completion_acts_on_the_loss_photon() {
        let iw = ["i", "w"];
        let (t, g) = (0.6, 0.7);
        let out = apply_object(&ket(&iw, "0V"), "i", "w", t, g).unwrap();
        assert!((out.amp("V0").c00 - c(-0.8, 0.0)).norm() < 1e-15);
        assert!((out.amp("0V").c00 - Complex64::from_polar(t, -g)).norm() < 1e-15);
        // the completed channel is unitary: a superposition keeps its norm
        let both = KetState::from_strs(&iw, &[("H0", PerturbAmp::constant(c(0.6, 0.0))), ("0H", PerturbAmp::constant(c(0.0, 0.8)))]).unwrap();
        let out = apply_object(&both, "i", "w", t, g).unwrap();
        let norm: f64 = out.terms().map(|(_, a)| a.c00.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn object_after_pair_creation() {
        let paths = ["s1", "i1", "w"];
        let input = KetState::from_strs(&paths, &[("000", PerturbAmp::ONE), ("HH0", PerturbAmp::kappa(MINUS_I))]).unwrap();
        let (t, gamma) = (0.6, 0.25);
        let out = apply_object(&input, "i1", "w", t, gamma).unwrap();
        assert_eq!(out.amp("000"), PerturbAmp::ONE);
        let expect_hh = MINUS_I * c(t, 0.0) * unit_phase(gamma);
        assert!((out.amp("HH0").c10 - expect_hh).norm() < 1e-15);
        assert!((out.amp("H0H").c10 - MINUS_I * (1.0 - t * t).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn object_matrix_is_unitary() {
        for &(t, g) in &[(0.0, 0.0), (0.3, 1.0), (0.7, PI / 4.0), (1.0, PI)] {
            check_unitary(&object_matrix(t, g)).unwrap();
        }
    }

    #[test]
    fn two_path_unitary_acts_only_on_occupied_pairs() {
        let ab = ["a", "b"];
        let xx = kron2(&pauli_x(), &pauli_x());
        assert_eq!(apply_two_path_pol_unitary(&ket(&ab, "HH"), "a", "b", &xx).unwrap(), ket(&ab, "VV"));
        let h = kron2(&hadamard(), &hadamard());
        assert_eq!(apply_two_path_pol_unitary(&ket(&ab, "0H"), "a", "b", &h).unwrap(), ket(&ab, "0H"));
    }

    #[test]
    fn two_path_unitary_with_bell_column() {
        let r = FRAC_1_SQRT_2;
        let col = [c(r, 0.0), ZERO, ZERO, c(r, 0.0)];
        let u = crate::linalg::to_fixed::<4>(&crate::linalg::householder_completion(&col).unwrap()).unwrap();
        let out = apply_two_path_pol_unitary(&ket(&["a", "b"], "HH"), "a", "b", &u).unwrap();
        assert!((out.amp("HH").c00 - col[0]).norm() < 1e-15);
        assert!((out.amp("VV").c00 - col[3]).norm() < 1e-15);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn gcnot_truth_table() {
        let ab = ["c", "t"];
        assert_eq!(apply_gcnot(&ket(&ab, "H0"), "c", "t").unwrap(), ket(&ab, "HH"));
        assert_eq!(apply_gcnot(&ket(&ab, "HH"), "c", "t").unwrap(), ket(&ab, "H0"));
        assert_eq!(apply_gcnot(&ket(&ab, "0H"), "c", "t").unwrap(), ket(&ab, "0H"));
        assert_eq!(apply_gcnot(&ket(&ab, "HV"), "c", "t").unwrap(), ket(&ab, "HV"));
        assert_eq!(apply_gcnot(&ket(&ab, "VH"), "c", "t").unwrap(), ket(&ab, "VH"));
    }

    #[test]
    fn g_alpha_columns() {
        let p = ["p"];
        let out = apply_g_alpha(&ket(&p, "0"), "p").unwrap();
        assert_eq!(out.amp("0"), PerturbAmp::ONE);
        assert_eq!(out.amp("H"), PerturbAmp::kappa(MINUS_I));
        assert_eq!(apply_g_alpha(&ket(&p, "V"), "p").unwrap(), ket(&p, "V"));
        let first_order = KetState::from_strs(&p, &[("H", PerturbAmp::kappa(ONE))]).unwrap();
        assert_eq!(apply_g_alpha(&first_order, "p").unwrap(), first_order);
    }

    #[test]
    fn g_alpha_is_unitary_in_truncated_algebra() {
        // G†G = I: entries (G†G)_{jk} = Σ_m conj(G_mj) G_mk, with conj swapping κ ↔ κ̄.
        let g = g_alpha_matrix();
        let conj = |a: PerturbAmp| PerturbAmp::new(a.c00.conj(), a.c01.conj(), a.c10.conj());
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = PerturbAmp::ZERO;
                for row in &g {
                    acc += conj(row[j]) * row[k];
                }
                let expect = if j == k { PerturbAmp::ONE } else { PerturbAmp::ZERO };
                assert_eq!(acc, expect);
            }
        }
    }

    #[test]
    fn single_pump_gate() {
        let psi = ["p", "s", "i"];
        let g = c(0.5, 0.25);
        let out = apply_nl_single_photon_pump(&ket(&psi, "H00"), "p", "s", "i", g).unwrap();
        assert_eq!(out.amp("H00"), PerturbAmp::ONE);
        assert_eq!(out.amp("0HH"), PerturbAmp::kappa(MINUS_I * g));
        let out = apply_nl_single_photon_pump(&ket(&psi, "0HH"), "p", "s", "i", g).unwrap();
        assert_eq!(out.amp("H00"), PerturbAmp::kappa_bar(MINUS_I * g.conj()));
        let s = ket(&psi, "0HV");
        assert_eq!(apply_nl_single_photon_pump(&s, "p", "s", "i", g).unwrap(), s);
        for bad in ["V00", "HH0", "H0V"] {
            assert!(matches!(
                apply_nl_single_photon_pump(&ket(&psi, bad), "p", "s", "i", g),
                Err(Error::OutsideSinglePumpSubspace { .. })
            ));
        }
    }

    #[test]
    fn object_preserves_photon_number() {
        let paths = ["s", "i", "w"];
        let input = KetState::from_strs(&paths, &[("HV0", PerturbAmp::kappa(ONE)), ("000", PerturbAmp::ONE)]).unwrap();
        let out = apply_object(&input, "i", "w", 0.4, 1.3).unwrap();
        for (k, _) in out.terms() {
            assert!(k.photon_count() == 0 || k.photon_count() == 2);
        }
    }
}

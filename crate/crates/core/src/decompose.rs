//! Decompositions of the pair-creation gates into primitive qutrit gates.

use crate::error::{Error, Result};
use crate::gates::{g_alpha_matrix, Gate, TwoLevel};
use crate::circuit::Circuit;
use crate::amp::PerturbAmp;
use crate::state::{Ket, Qutrit};
use num_complex::Complex64;

/// `[g-CNOT(s→i), G_α(s), g-CNOT(s→i)]` on the register `[s, i]`.
///
/// Equals the coherently pumped crystal gate on `span{|00⟩, |HH⟩}` and on
/// every first-order input; on the other seven symbols it deviates from the
/// identity only at order `κ`/`κ̄`.
pub fn nl_decomposition(s: &str, i: &str) -> Result<Circuit> {
    let cnot = Gate::GCnot {
        control: s.into(),
        target: i.into(),
    };
    Circuit::new(&[s, i])?
        .with(cnot.clone())?
        .with(Gate::GAlpha { path: s.into() })?
        .with(cnot)
}

/// Gray-code synthesis of a two-level gate between basis kets `x` and `y`.
///
/// `m[j][k]` is the amplitude of basis `j` in the image of basis `k`, with
/// index 0 for `x` and 1 for `y`. Positions where `x` and `y` differ must
/// hold `0`/`H`. The returned gates walk `x` along a Gray code towards `y`
/// with multi-controlled g-NOTs, apply one controlled two-level gate on the
/// last differing path, then undo the walk. The composition equals the
/// two-level gate on the whole register.
pub fn two_level_gray_code(paths: &[String], x: &Ket, y: &Ket, m: TwoLevel) -> Result<Vec<Gate>> {
    let n = paths.len();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len().max(y.len()),
        });
    }
    let differing: Vec<usize> = (0..n).filter(|&k| x.get(k) != y.get(k)).collect();
    if differing.is_empty() {
        return Err(Error::InvalidSpec("two-level gate needs distinct kets".into()));
    }
    for &k in &differing {
        for q in [x.get(k), y.get(k)] {
            if q == Qutrit::V {
                return Err(Error::InvalidSpec(format!(
                    "path `{}` differs through a V photon; Gray-code steps toggle 0 and H",
                    paths[k]
                )));
            }
        }
    }

    let controls_of = |ket: &Ket, target: usize| -> Vec<(String, Qutrit)> {
        (0..n)
            .filter(|&k| k != target)
            .map(|k| (paths[k].clone(), ket.get(k)))
            .collect()
    };

    let (&last, walk) = differing.split_last().expect("nonempty");
    let mut current = x.clone();
    let mut steps = Vec::with_capacity(walk.len());
    for &k in walk {
        steps.push(Gate::ControlledNot {
            controls: controls_of(&current, k),
            target: paths[k].clone(),
        });
        let flipped = if current.get(k) == Qutrit::Vac { Qutrit::H } else { Qutrit::Vac };
        current = current.with(k, flipped);
    }

    // On the target path, index 0 of the gate is vacuum; orient `m` so that
    // the walked image of `x` lands on its own symbol.
    let matrix = if current.get(last) == Qutrit::Vac {
        m
    } else {
        [[m[1][1], m[1][0]], [m[0][1], m[0][0]]]
    };

    let mut gates = steps.clone();
    gates.push(Gate::ControlledTwoLevel {
        controls: controls_of(&current, last),
        target: paths[last].clone(),
        matrix,
    });
    gates.extend(steps.into_iter().rev());
    Ok(gates)
}

/// Gray-code circuit for the single-photon-pump crystal on `[p, s, i]`.
///
/// The two-level block couples `|H00⟩` and `|0HH⟩` through the gate `G`
/// with off-diagonal entries `−ig`, `−ig*`.
pub fn gray_code_decomposition(p: &str, s: &str, i: &str, g: Complex64) -> Result<Circuit> {
    let paths = vec![p.to_string(), s.to_string(), i.to_string()];
    let x: Ket = "H00".parse()?;
    let y: Ket = "0HH".parse()?;
    let minus_i = Complex64::new(0.0, -1.0);
    let m: TwoLevel = [
        [PerturbAmp::ONE, PerturbAmp::kappa_bar(minus_i * g.conj())],
        [PerturbAmp::kappa(minus_i * g), PerturbAmp::ONE],
    ];
    let mut circuit = Circuit::new(&paths)?;
    for gate in two_level_gray_code(&paths, &x, &y, m)? {
        circuit.push(gate)?;
    }
    Ok(circuit)
}

/// The `G` matrix of the two-level block, as used by [`gray_code_decomposition`].
pub fn g_matrix() -> TwoLevel {
    g_alpha_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{apply_nl, apply_nl_single_photon_pump, single_pump_basis};
    use crate::state::KetState;

    fn basis9() -> Vec<String> {
        let mut v = Vec::new();
        for a in Qutrit::ALL {
            for b in Qutrit::ALL {
                v.push(format!("{}{}", a.symbol(), b.symbol()));
            }
        }
        v
    }

    #[test]
    fn nl_decomposition_on_vacuum_and_pair() {
        let c = nl_decomposition("s", "i").unwrap();
        assert_eq!(c.len(), 3);
        for k in ["00", "HH"] {
            let input = KetState::from_strs(&["s", "i"], &[(k, PerturbAmp::ONE)]).unwrap();
            assert_eq!(c.run(&input).unwrap(), apply_nl(&input, "s", "i").unwrap(), "{k}");
        }
        let vv = KetState::from_strs(&["s", "i"], &[("VV", PerturbAmp::ONE)]).unwrap();
        assert_eq!(c.run(&vv).unwrap(), vv);
    }

    #[test]
    fn nl_decomposition_matches_on_first_order_inputs() {
        let c = nl_decomposition("s", "i").unwrap();
        for k in basis9() {
            let input = KetState::from_strs(&["s", "i"], &[(&k, PerturbAmp::kappa(Complex64::new(0.5, -0.25)))]).unwrap();
            assert_eq!(c.run(&input).unwrap(), apply_nl(&input, "s", "i").unwrap(), "{k}");
        }
    }

    #[test]
    fn gray_code_matches_single_pump_gate() {
        let g = Complex64::new(0.8, -0.3);
        let c = gray_code_decomposition("p", "s", "i", g).unwrap();
        for k in single_pump_basis() {
            let input = KetState::from_terms(&["p", "s", "i"], [(k.clone(), PerturbAmp::ONE)]).unwrap();
            let expect = apply_nl_single_photon_pump(&input, "p", "s", "i", g).unwrap();
            assert_eq!(c.run(&input).unwrap(), expect, "{k}");
        }
    }

    #[test]
    fn gray_code_walk_uses_multi_controlled_nots() {
        let c = gray_code_decomposition("p", "s", "i", Complex64::new(1.0, 0.0)).unwrap();
        // two walk steps, the two-level gate, two undo steps
        assert_eq!(c.len(), 5);
        assert!(matches!(&c.ops()[2], Gate::ControlledTwoLevel { controls, .. } if controls.len() == 2));
        assert!(c.ops()[..2].iter().all(|g| matches!(g, Gate::ControlledNot { controls, .. } if controls.len() == 2)));
    }

    #[test]
    fn gray_code_rejects_v_differences() {
        let paths = vec!["a".to_string(), "b".to_string()];
        let m = g_matrix();
        assert!(two_level_gray_code(&paths, &"H0".parse().unwrap(), &"0V".parse().unwrap(), m).is_err());
        assert!(two_level_gray_code(&paths, &"H0".parse().unwrap(), &"H0".parse().unwrap(), m).is_err());
    }
}

//! Post-selection on the detected pair: probabilities, reduced density
//! matrices, fidelities and parameter sweeps.
//!
//! Vacuum is never detected, so every quantity here is computed from the
//! order-`κ` coefficients and normalized within that sector. The physical
//! pair probability is [`pair_probability_coefficient`] times `|gα|²`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::amp::{Order, ZERO};
use crate::circuit::{Probe, Program};
use crate::error::{Error, Result};
use crate::state::{extract_order, KetState};

/// Tolerance on Hermiticity and unit trace of a reduced density matrix.
pub const DENSITY_TOL: f64 = 1e-12;
/// Lowest eigenvalue accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;

/// `Σ |c10|²` over every term with at least one photon.
pub fn pair_probability_coefficient(state: &KetState) -> f64 {
    state
        .terms()
        .filter(|(k, _)| !k.is_vacuum())
        .map(|(_, a)| a.c10.norm_sqr())
        .sum()
}

/// Order-`κ` photon terms as `(ket, c10/(−i))`, in ket order.
pub fn kappa_sector(state: &KetState) -> Vec<(String, Complex64)> {
    extract_order(state, Order::Kappa)
        .terms()
        .filter(|(k, _)| !k.is_vacuum())
        .map(|(k, a)| (k.to_string(), a.c00))
        .collect()
}

/// A post-selected reduced density matrix over labeled kets of kept paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensity {
    /// Kept paths, in label order.
    pub paths: Vec<String>,
    /// One symbol per kept path for each basis ket; only kets in the support appear.
    pub basis: Vec<String>,
    pub matrix: DMatrix<Complex64>,
}

impl ConditionalDensity {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Entry `⟨row|ρ|col⟩`; kets outside the support give zero.
    pub fn entry(&self, row: &str, col: &str) -> Complex64 {
        let r = self.basis.iter().position(|b| b == row);
        let c = self.basis.iter().position(|b| b == col);
        match (r, c) {
            (Some(r), Some(c)) => self.matrix[(r, c)],
            _ => ZERO,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.matrix - self.matrix.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        let tr = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        let min_eig = self.min_eigenvalue();
        if herm > DENSITY_TOL || tr > DENSITY_TOL || min_eig < PSD_FLOOR {
            return Err(Error::InvalidSpec(format!(
                "not a density matrix: hermiticity {herm:.2e}, trace error {tr:.2e}, min eigenvalue {min_eig:.2e}"
            )));
        }
        Ok(())
    }

    /// Traces out every path not in `keep`; `keep` also fixes the new label order.
    pub fn trace_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<ConditionalDensity> {
        let positions = keep
            .iter()
            .map(|p| {
                self.paths
                    .iter()
                    .position(|q| q == p.as_ref())
                    .ok_or_else(|| Error::UnknownPath(p.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let split = |label: &str| -> (String, String) {
            let chars: Vec<char> = label.chars().collect();
            let kept = positions.iter().map(|&i| chars[i]).collect();
            let rest = (0..chars.len()).filter(|i| !positions.contains(i)).map(|i| chars[i]).collect();
            (kept, rest)
        };
        let mut acc: BTreeMap<(String, String), Complex64> = BTreeMap::new();
        for (r, rl) in self.basis.iter().enumerate() {
            let (rk, rr) = split(rl);
            for (c, cl) in self.basis.iter().enumerate() {
                let (ck, cr) = split(cl);
                if rr == cr {
                    *acc.entry((rk.clone(), ck)).or_insert(ZERO) += self.matrix[(r, c)];
                }
            }
        }
        let basis: Vec<String> = {
            let mut b: Vec<String> = self.basis.iter().map(|l| split(l).0).collect();
            b.sort();
            b.dedup();
            b
        };
        let matrix = DMatrix::from_fn(basis.len(), basis.len(), |r, c| {
            acc.get(&(basis[r].clone(), basis[c].clone())).copied().unwrap_or(ZERO)
        });
        Ok(ConditionalDensity {
            paths: keep.iter().map(|p| p.as_ref().to_string()).collect(),
            basis,
            matrix,
        })
    }
}

/// Density matrix of the normalized order-`κ` sector, reduced to `keep`.
pub fn conditional_density<S: AsRef<str>>(state: &KetState, keep: &[S]) -> Result<ConditionalDensity> {
    let labels: Vec<&str> = keep.iter().map(|s| s.as_ref()).collect();
    let mut positions = Vec::with_capacity(labels.len());
    for l in &labels {
        let idx = state.index_of(l)?;
        if positions.contains(&idx) {
            return Err(Error::DuplicatePath(l.to_string()));
        }
        positions.push(idx);
    }

    let sector: Vec<_> = state
        .terms()
        .filter(|(k, a)| !k.is_vacuum() && a.c10 != ZERO)
        .collect();
    let norm: f64 = sector.iter().map(|(_, a)| a.c10.norm_sqr()).sum();
    if sector.is_empty() || norm == 0.0 {
        return Err(Error::EmptyKappaSector);
    }

    // environment label -> (kept label -> amplitude)
    let mut by_env: BTreeMap<String, BTreeMap<String, Complex64>> = BTreeMap::new();
    let env_positions: Vec<usize> = (0..state.paths().len()).filter(|i| !positions.contains(i)).collect();
    for (ket, amp) in &sector {
        let kept = state.restricted_label(ket, &positions);
        let env = state.restricted_label(ket, &env_positions);
        *by_env.entry(env).or_default().entry(kept).or_insert(ZERO) += amp.c10;
    }

    let mut basis: Vec<String> = by_env.values().flat_map(|m| m.keys().cloned()).collect();
    basis.sort();
    basis.dedup();
    let index = |l: &str| basis.iter().position(|b| b == l).expect("label in basis");

    let mut matrix = DMatrix::from_element(basis.len(), basis.len(), ZERO);
    for amps in by_env.values() {
        for (rl, ra) in amps {
            for (cl, ca) in amps {
                matrix[(index(rl), index(cl))] += ra * ca.conj();
            }
        }
    }
    matrix /= Complex64::new(norm, 0.0);
    Ok(ConditionalDensity {
        paths: labels.iter().map(|s| s.to_string()).collect(),
        basis,
        matrix,
    })
}

/// `⟨ψ|ρ|ψ⟩` for a vector over `ρ.basis`.
pub fn fidelity(rho: &ConditionalDensity, psi: &DVector<Complex64>) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.len(),
        });
    }
    Ok((psi.adjoint() * &rho.matrix * psi)[(0, 0)].re)
}

/// [`fidelity`] with `ψ` given as labeled kets; labels outside the support
/// contribute nothing.
pub fn fidelity_with_kets(rho: &ConditionalDensity, psi: &[(&str, Complex64)]) -> Result<f64> {
    let n = rho.paths.len();
    if let Some((bad, _)) = psi.iter().find(|(l, _)| l.chars().count() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.chars().count(),
        });
    }
    let mut acc = ZERO;
    for (rl, ra) in psi {
        for (cl, ca) in psi {
            acc += ra.conj() * rho.entry(rl, cl) * ca;
        }
    }
    Ok(acc.re)
}

/// Post-selected probability of finding a photon in each listed path.
pub fn detector_probabilities<S: AsRef<str>>(state: &KetState, paths: &[S]) -> Result<Vec<(String, f64)>> {
    let norm = pair_probability_coefficient(state);
    if norm == 0.0 {
        return Err(Error::EmptyKappaSector);
    }
    paths
        .iter()
        .map(|p| {
            let idx = state.index_of(p.as_ref())?;
            let hit: f64 = state
                .terms()
                .filter(|(k, _)| k.get(idx).is_occupied())
                .map(|(_, a)| a.c10.norm_sqr())
                .sum();
            Ok((p.as_ref().to_string(), hit / norm))
        })
        .collect()
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub pair_coefficient: f64,
    /// `(path, probability)` for every path named by a measure probe.
    pub detectors: Vec<(String, f64)>,
}

/// Runs `build(value)` for every grid point; rows come back in grid order.
pub fn sweep<F>(grid: &[f64], build: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<Program> + Sync,
{
    grid.par_iter()
        .map(|&value| {
            let program = build(value)?;
            let run = program.execute()?;
            let mut detectors = Vec::new();
            for (probe, state) in &run.snapshots {
                if let Probe::Measure { paths } = probe {
                    detectors.extend(detector_probabilities(state, paths)?);
                }
            }
            Ok(SweepRow {
                value,
                pair_coefficient: pair_probability_coefficient(&run.final_state),
                detectors,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amp::{PerturbAmp, ONE};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_state() -> KetState {
        KetState::from_strs(
            &["s2", "i2"],
            &[
                ("00", PerturbAmp::ONE),
                ("HH", PerturbAmp::kappa(c(0.0, -1.0))),
                ("VV", PerturbAmp::kappa(c(0.0, -1.0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coefficient_of_vacuum_is_zero() {
        assert_eq!(pair_probability_coefficient(&KetState::vacuum(&["a", "b"]).unwrap()), 0.0);
        assert_eq!(pair_probability_coefficient(&bell_state()), 2.0);
    }

    #[test]
    fn bell_density_and_fidelity() {
        let rho = conditional_density(&bell_state(), &["s2", "i2"]).unwrap();
        assert_eq!(rho.basis, vec!["HH", "VV"]);
        for (r, cl) in [("HH", "HH"), ("HH", "VV"), ("VV", "HH"), ("VV", "VV")] {
            assert!((rho.entry(r, cl) - c(0.5, 0.0)).norm() < 1e-15);
        }
        rho.validate().unwrap();
        let psi = DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        assert!((fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);
        let orth = DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]);
        assert!(fidelity(&rho, &orth).unwrap().abs() < 1e-12);
        assert!(matches!(
            fidelity(&rho, &DVector::from_element(3, ONE)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tracing_one_half_of_a_bell_pair_gives_mixed_state() {
        let rho = conditional_density(&bell_state(), &["s2"]).unwrap();
        assert_eq!(rho.basis, vec!["H", "V"]);
        assert!((rho.entry("H", "V")).norm() < 1e-15);
        assert!((rho.entry("H", "H") - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn empty_sector_cannot_be_post_selected() {
        let vac = KetState::vacuum(&["a", "b"]).unwrap();
        assert_eq!(conditional_density(&vac, &["a"]), Err(Error::EmptyKappaSector));
        assert!(detector_probabilities(&vac, &["a"]).is_err());
    }

    #[test]
    fn pure_projector_when_keeping_everything() {
        let rho = conditional_density(&bell_state(), &["s2", "i2"]).unwrap();
        let sq = &rho.matrix * &rho.matrix;
        assert!((sq - &rho.matrix).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn keep_order_defines_labels() {
        let s = KetState::from_strs(&["a", "b"], &[("H0", PerturbAmp::kappa(ONE))]).unwrap();
        let rho = conditional_density(&s, &["b", "a"]).unwrap();
        assert_eq!(rho.basis, vec!["0H"]);
    }

    #[test]
    fn detector_probabilities_of_bell() {
        let d = detector_probabilities(&bell_state(), &["s2", "i2"]).unwrap();
        assert_eq!(d, vec![("s2".to_string(), 1.0), ("i2".to_string(), 1.0)]);
    }
}

//! Brute-force simulation in a truncated Fock space.
//!
//! Every path carries an H mode, plus a V mode when the circuit touches
//! polarization. A single pump mode in a coherent state is shared by all
//! crystals. Crystals evolve under the full pair-creation Hamiltonian through
//! a dense matrix exponential; linear optics acts on creation operators. The
//! result serves as an independent check of the first-order engine.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::amp::{unit_phase, ONE, ZERO};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{object_matrix, Gate};
use crate::linalg::{pauli_x, Mat2};
use crate::state::{KetState, Qutrit};

/// Largest local operator handed to the dense exponential.
pub const DEFAULT_LOCAL_LIMIT: usize = 4096;
/// Largest state vector the oracle will allocate.
pub const DEFAULT_STATE_LIMIT: usize = 1 << 21;

#[derive(Debug, Clone, PartialEq)]
pub struct FockMode {
    pub name: String,
    /// Number of retained levels, i.e. photon cutoff plus one.
    pub levels: usize,
}

impl FockMode {
    pub fn new(name: impl Into<String>, levels: usize) -> FockMode {
        FockMode {
            name: name.into(),
            levels,
        }
    }
}

/// A dense state over the product of truncated modes; the last mode varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: Vec<FockMode>,
    strides: Vec<usize>,
    amps: Vec<Complex64>,
}

fn strides_of(modes: &[FockMode], limit: usize) -> Result<(Vec<usize>, usize)> {
    let mut strides = vec![0; modes.len()];
    let mut dim: usize = 1;
    for (k, m) in modes.iter().enumerate().rev() {
        strides[k] = dim;
        dim = dim
            .checked_mul(m.levels)
            .filter(|&d| d <= limit)
            .ok_or(Error::DimensionOverflow {
                dimension: dim.saturating_mul(m.levels),
                limit,
            })?;
    }
    Ok((strides, dim))
}

impl FockState {
    /// Product state with the given single-mode amplitudes.
    pub fn product(modes: Vec<FockMode>, factors: &[Vec<Complex64>], limit: usize) -> Result<FockState> {
        if factors.len() != modes.len() {
            return Err(Error::DimensionMismatch {
                expected: modes.len(),
                found: factors.len(),
            });
        }
        for (m, f) in modes.iter().zip(factors) {
            if f.len() != m.levels {
                return Err(Error::DimensionMismatch {
                    expected: m.levels,
                    found: f.len(),
                });
            }
        }
        let (strides, dim) = strides_of(&modes, limit)?;
        let mut amps = vec![ONE; dim];
        for (idx, a) in amps.iter_mut().enumerate() {
            for (k, f) in factors.iter().enumerate() {
                *a *= f[(idx / strides[k]) % modes[k].levels];
            }
        }
        Ok(FockState { modes, strides, amps })
    }

    pub fn vacuum(modes: Vec<FockMode>, limit: usize) -> Result<FockState> {
        let factors: Vec<Vec<Complex64>> = modes
            .iter()
            .map(|m| {
                let mut f = vec![ZERO; m.levels];
                f[0] = ONE;
                f
            })
            .collect();
        FockState::product(modes, &factors, limit)
    }

    pub fn modes(&self) -> &[FockMode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mode_index(&self, name: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::UnknownPath(name.to_string()))
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (k, &n) in occupations.iter().enumerate() {
            if n >= self.modes[k].levels {
                return Err(Error::DimensionMismatch {
                    expected: self.modes[k].levels,
                    found: n + 1,
                });
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.index_of(occupations)?])
    }

    /// Applies `op` to the listed modes, in the listed order, leaving the rest alone.
    pub fn apply_local(&mut self, modes: &[usize], op: &DMatrix<Complex64>) -> Result<()> {
        let local: Vec<usize> = modes.iter().map(|&m| self.modes[m].levels).collect();
        let local_dim: usize = local.iter().product();
        if op.nrows() != local_dim || op.ncols() != local_dim {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                found: op.nrows(),
            });
        }
        // offset of each local basis state within the full index
        let offsets: Vec<usize> = (0..local_dim)
            .map(|mut l| {
                let mut off = 0;
                for (k, &m) in modes.iter().enumerate().rev() {
                    off += (l % local[k]) * self.strides[m];
                    l /= local[k];
                }
                off
            })
            .collect();
        let is_local = |idx: usize| modes.iter().any(|&m| !(idx / self.strides[m]).is_multiple_of(self.modes[m].levels));

        let mut buf = vec![ZERO; local_dim];
        for base in 0..self.amps.len() {
            if is_local(base) {
                continue;
            }
            let mut any = false;
            for (b, &off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + off];
                any |= *b != ZERO;
            }
            if !any {
                continue;
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += op[(r, c)] * b;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }
}

/// `e^{−|α|²/2} αⁿ/√n!` for `n < levels`.
pub fn coherent_amplitudes(alpha: Complex64, levels: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(levels);
    let mut term = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..levels {
        out.push(term);
        term = term * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Fewest levels for which the discarded tail of `|α⟩` has norm below `tol`.
pub fn pump_levels(alpha: Complex64, tol: f64) -> usize {
    let mean = alpha.norm_sqr();
    let horizon = (mean + 20.0 * mean.sqrt() + 60.0) as usize;
    let probs: Vec<f64> = coherent_amplitudes(alpha, horizon).iter().map(|a| a.norm_sqr()).collect();
    let mut tail = 0.0;
    let mut levels = horizon;
    for n in (0..horizon).rev() {
        tail += probs[n];
        if tail.sqrt() >= tol {
            break;
        }
        levels = n;
    }
    levels.max(1)
}

/// `g a_p a_s† a_i† + g* a_p† a_s a_i` on `pump ⊗ signal ⊗ idler`.
pub fn nl_hamiltonian(pump: usize, signal: usize, idler: usize, g: Complex64) -> DMatrix<Complex64> {
    let dim = pump * signal * idler;
    let idx = |p: usize, s: usize, i: usize| (p * signal + s) * idler + i;
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    for p in 1..pump {
        for s in 0..signal - 1 {
            for i in 0..idler - 1 {
                let coupling = ((p * (s + 1) * (i + 1)) as f64).sqrt();
                // |p, s, i⟩ → |p−1, s+1, i+1⟩
                let from = idx(p, s, i);
                let to = idx(p - 1, s + 1, i + 1);
                h[(to, from)] += g * coupling;
                h[(from, to)] += g.conj() * coupling;
            }
        }
    }
    h
}

/// `exp(−iH)` for the crystal Hamiltonian.
pub fn nl_propagator(pump: usize, signal: usize, idler: usize, g: Complex64, limit: usize) -> Result<DMatrix<Complex64>> {
    let dim = pump * signal * idler;
    if dim > limit {
        return Err(Error::DimensionOverflow { dimension: dim, limit });
    }
    let h = nl_hamiltonian(pump, signal, idler, g);
    Ok((h * Complex64::new(0.0, -1.0)).exp())
}

/// Applies the exact crystal evolution to modes named `p`, `s`, `i`.
pub fn evolve_nl_exact(state: &FockState, p: &str, s: &str, i: &str, g: Complex64) -> Result<FockState> {
    evolve_nl_exact_with_limit(state, p, s, i, g, DEFAULT_LOCAL_LIMIT)
}

pub fn evolve_nl_exact_with_limit(
    state: &FockState,
    p: &str,
    s: &str,
    i: &str,
    g: Complex64,
    limit: usize,
) -> Result<FockState> {
    let idx = [state.mode_index(p)?, state.mode_index(s)?, state.mode_index(i)?];
    if idx[0] == idx[1] || idx[0] == idx[2] || idx[1] == idx[2] {
        return Err(Error::RepeatedTarget {
            gate: "nl",
            path: state.modes[idx[1]].name.clone(),
        });
    }
    let levels = idx.map(|k| state.modes[k].levels);
    let u = nl_propagator(levels[0], levels[1], levels[2], g, limit)?;
    let mut out = state.clone();
    out.apply_local(&idx, &u)?;
    Ok(out)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Fock-space action of the mode map `a_k† → Σ_j m[j][k] a_j†`.
///
/// Outputs above a mode's cutoff are dropped.
pub fn passive_operator(m: &DMatrix<Complex64>, levels: &[usize]) -> DMatrix<Complex64> {
    let k = levels.len();
    let dim: usize = levels.iter().product();
    let decode = |mut l: usize| -> Vec<usize> {
        let mut occ = vec![0; k];
        for j in (0..k).rev() {
            occ[j] = l % levels[j];
            l /= levels[j];
        }
        occ
    };
    let encode = |occ: &[usize]| occ.iter().zip(levels).fold(0, |acc, (&n, &d)| acc * d + n);

    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        let occ = decode(col);
        let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::from([(vec![0; k], ONE)]);
        let mut norm = 1.0;
        for (j, &n) in occ.iter().enumerate() {
            norm *= factorial(n);
            for _ in 0..n {
                let mut next = BTreeMap::new();
                for (mono, c) in &poly {
                    for l in 0..k {
                        let w = m[(l, j)];
                        if w == ZERO {
                            continue;
                        }
                        let mut e = mono.clone();
                        e[l] += 1;
                        *next.entry(e).or_insert(ZERO) += c * w;
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            if mono.iter().zip(levels).any(|(&n, &d)| n >= d) {
                continue;
            }
            let weight = (mono.iter().map(|&n| factorial(n)).product::<f64>() / norm).sqrt();
            out[(encode(&mono), col)] += c * weight;
        }
    }
    out
}

/// Settings for running a circuit through the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub g: Complex64,
    pub alpha: Complex64,
    /// Levels per signal/idler mode.
    pub path_levels: usize,
    /// Allowed norm of the discarded coherent-state tail.
    pub pump_tail: f64,
    pub local_limit: usize,
    pub state_limit: usize,
}

impl OracleConfig {
    pub fn new(g: Complex64, alpha: Complex64) -> OracleConfig {
        OracleConfig {
            g,
            alpha,
            path_levels: 3,
            pump_tail: 1e-10,
            local_limit: DEFAULT_LOCAL_LIMIT,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }

    pub fn kappa(&self) -> Complex64 {
        self.g * self.alpha
    }
}

/// Mode layout of a circuit: the pump first, then `H` (and `V`) per path.
#[derive(Debug, Clone, PartialEq)]
pub struct FockLayout {
    pub paths: Vec<String>,
    pub with_v: bool,
    pub pump_levels: usize,
}

impl FockLayout {
    pub const PUMP: &'static str = "pump";

    pub fn for_circuit(circuit: &Circuit, cfg: &OracleConfig) -> FockLayout {
        let with_v = circuit.ops().iter().any(|g| matches!(g, Gate::PolUnitary { .. }));
        FockLayout {
            paths: circuit.paths().to_vec(),
            with_v,
            pump_levels: pump_levels(cfg.alpha, cfg.pump_tail),
        }
    }

    fn pols(&self) -> &'static [char] {
        if self.with_v {
            &['H', 'V']
        } else {
            &['H']
        }
    }

    pub fn mode_name(path: &str, pol: char) -> String {
        format!("{path}.{pol}")
    }

    pub fn modes(&self, path_levels: usize) -> Vec<FockMode> {
        let mut modes = vec![FockMode::new(Self::PUMP, self.pump_levels)];
        for p in &self.paths {
            for &pol in self.pols() {
                modes.push(FockMode::new(Self::mode_name(p, pol), path_levels));
            }
        }
        modes
    }

    fn mode(&self, path: &str, pol: char) -> usize {
        let pi = self.paths.iter().position(|p| p == path).expect("registered path");
        1 + pi * self.pols().len() + if pol == 'H' { 0 } else { 1 }
    }
}

fn apply_passive_per_pol(state: &mut FockState, layout: &FockLayout, paths: [&str; 2], m: &Mat2) -> Result<()> {
    let dm = DMatrix::from_fn(2, 2, |r, c| m[(r, c)]);
    for &pol in layout.pols() {
        let idx = [layout.mode(paths[0], pol), layout.mode(paths[1], pol)];
        let op = passive_operator(&dm, &[state.modes[idx[0]].levels, state.modes[idx[1]].levels]);
        state.apply_local(&idx, &op)?;
    }
    Ok(())
}

fn apply_gate(state: &mut FockState, layout: &FockLayout, gate: &Gate, cfg: &OracleConfig) -> Result<()> {
    match gate {
        Gate::Nl { signal, idler } => {
            let s = layout.mode(signal, 'H');
            let i = layout.mode(idler, 'H');
            let levels = [state.modes[0].levels, state.modes[s].levels, state.modes[i].levels];
            let u = nl_propagator(levels[0], levels[1], levels[2], cfg.g, cfg.local_limit)?;
            state.apply_local(&[0, s, i], &u)
        }
        Gate::Swap { a, b } => apply_passive_per_pol(state, layout, [a, b], &pauli_x()),
        Gate::Phase { path, phi } => {
            let m = DMatrix::from_element(1, 1, unit_phase(-phi));
            for &pol in layout.pols() {
                let k = layout.mode(path, pol);
                let op = passive_operator(&m, &[state.modes[k].levels]);
                state.apply_local(&[k], &op)?;
            }
            Ok(())
        }
        Gate::PolUnitary { path, u } => {
            let idx = [layout.mode(path, 'H'), layout.mode(path, 'V')];
            let dm = DMatrix::from_fn(2, 2, |r, c| u[(r, c)]);
            let op = passive_operator(&dm, &[state.modes[idx[0]].levels, state.modes[idx[1]].levels]);
            state.apply_local(&idx, &op)
        }
        Gate::BeamSplitter { a, b, convention } => apply_passive_per_pol(state, layout, [a, b], &convention.matrix()),
        Gate::Object { path, loss, t, gamma } => apply_passive_per_pol(state, layout, [path, loss], &object_matrix(*t, *gamma)),
        other => Err(Error::UnsupportedGate(other.name().to_string())),
    }
}

/// Final oracle state together with the largest norm change over any gate.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub layout: FockLayout,
    pub state: FockState,
    pub norm_drift: f64,
}

/// Runs `circuit` from `|α⟩` and vacuum in every path.
pub fn run_oracle(circuit: &Circuit, cfg: &OracleConfig) -> Result<OracleRun> {
    for g in circuit.ops() {
        if !matches!(
            g,
            Gate::Nl { .. } | Gate::Swap { .. } | Gate::Phase { .. } | Gate::PolUnitary { .. } | Gate::BeamSplitter { .. } | Gate::Object { .. }
        ) {
            return Err(Error::UnsupportedGate(g.name().to_string()));
        }
    }
    let layout = FockLayout::for_circuit(circuit, cfg);
    let modes = layout.modes(cfg.path_levels);
    let mut factors = vec![coherent_amplitudes(cfg.alpha, layout.pump_levels)];
    for m in &modes[1..] {
        let mut f = vec![ZERO; m.levels];
        f[0] = ONE;
        factors.push(f);
    }
    let mut state = FockState::product(modes, &factors, cfg.state_limit)?;
    let mut norm_drift: f64 = 0.0;
    for gate in circuit.ops() {
        let before = state.norm();
        apply_gate(&mut state, &layout, gate, cfg)?;
        norm_drift = norm_drift.max((state.norm() - before).abs());
    }
    Ok(OracleRun {
        layout,
        state,
        norm_drift,
    })
}

/// `|α⟩ ⊗ ψ(κ)` with the first-order state evaluated at `κ = gα`.
pub fn embed_prediction(prediction: &KetState, run: &OracleRun, cfg: &OracleConfig) -> Result<Vec<Complex64>> {
    let layout = &run.layout;
    let pump = coherent_amplitudes(cfg.alpha, layout.pump_levels);
    let mut out = vec![ZERO; run.state.dim()];
    let mut occ = vec![0; run.state.modes.len()];
    for (ket, amp) in prediction.evaluate(cfg.kappa()) {
        occ[1..].iter_mut().for_each(|n| *n = 0);
        for (k, path) in layout.paths.iter().enumerate() {
            match ket.get(k) {
                Qutrit::Vac => {}
                Qutrit::H => occ[layout.mode(path, 'H')] = 1,
                Qutrit::V if layout.with_v => occ[layout.mode(path, 'V')] = 1,
                Qutrit::V => return Err(Error::UnsupportedGate("V photon without polarization modes".into())),
            }
        }
        for (n, p) in pump.iter().enumerate() {
            occ[0] = n;
            out[run.state.index_of(&occ)?] += amp * p;
        }
    }
    Ok(out)
}

/// Outcome of [`compare_first_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub kappa: Complex64,
    pub max_deviation: f64,
    /// `max_deviation / |κ|²`; zero when `κ = 0`.
    pub constant: f64,
    pub bound: f64,
    pub norm_drift: f64,
    pub dimension: usize,
    pub passed: bool,
}

/// Runs both engines and checks `deviation ≤ bound·|gα|²`.
pub fn compare_first_order(circuit: &Circuit, cfg: &OracleConfig, bound: f64) -> Result<OracleReport> {
    let run = run_oracle(circuit, cfg)?;
    let prediction = circuit.run_from_vacuum()?;
    let expected = embed_prediction(&prediction, &run, cfg)?;
    let max_deviation = run
        .state
        .amplitudes()
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let k2 = cfg.kappa().norm_sqr();
    let constant = if k2 > 0.0 { max_deviation / k2 } else { 0.0 };
    Ok(OracleReport {
        kappa: cfg.kappa(),
        max_deviation,
        constant,
        bound,
        norm_drift: run.norm_drift,
        dimension: run.state.dim(),
        passed: max_deviation <= bound * k2,
    })
}

//! The effective picture: vacuum dropped, a crystal acts as a superposer.
//!
//! Writing `|ψ⟩ = |0…0⟩ − iκ|ψ_eff⟩`, a coherently pumped crystal on the
//! signal/idler pair `(s, i)` maps `|ψ_eff⟩ ↦ |ψ_eff⟩ + |HH⟩_{s,i}`. The
//! accessible space is the direct sum of one 4-dimensional polarization block
//! `span{HH, HV, VH, VV}` per (signal, idler) pair. An explicit auxiliary
//! entry, 1 for physical states, turns the affine superposer into the 5×5
//! translation matrix on a single block.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::amp::{times_i, times_neg_i, PerturbAmp, ONE, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{apply_fixed, check_unitary, Mat4, Mat5};
use crate::state::{validate_register, Ket, KetState, Qutrit};

/// Index of `|HH⟩` inside a polarization block.
pub const HH: usize = 0;

pub type Block = [Complex64; 4];

/// Tolerance used when comparing effective states built along different
/// floating-point routes.
pub const WITNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EffState {
    signals: Vec<String>,
    idlers: Vec<String>,
    aux: Complex64,
    blocks: BTreeMap<(String, String), Block>,
}

fn block_is_zero(b: &Block) -> bool {
    b.iter().all(|z| *z == ZERO)
}

impl EffState {
    /// Effective vacuum (`aux = 1`, no blocks) on disjoint signal and idler registers.
    pub fn vacuum<S: AsRef<str>>(signals: &[S], idlers: &[S]) -> Result<EffState> {
        let signals = validate_register(signals)?;
        let idlers = validate_register(idlers)?;
        if let Some(shared) = signals.iter().find(|s| idlers.contains(s)) {
            return Err(Error::DuplicatePath(shared.clone()));
        }
        Ok(EffState {
            signals,
            idlers,
            aux: ONE,
            blocks: BTreeMap::new(),
        })
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn idlers(&self) -> &[String] {
        &self.idlers
    }

    pub fn aux(&self) -> Complex64 {
        self.aux
    }

    pub fn with_aux(mut self, aux: Complex64) -> EffState {
        self.aux = aux;
        self
    }

    fn check_pair(&self, s: &str, i: &str) -> Result<(String, String)> {
        if self.signals.iter().any(|x| x == s) && self.idlers.iter().any(|x| x == i) {
            Ok((s.to_string(), i.to_string()))
        } else {
            Err(Error::UnknownPair {
                signal: s.to_string(),
                idler: i.to_string(),
            })
        }
    }

    /// Replaces the block of `(s, i)`.
    pub fn with_block(mut self, s: &str, i: &str, block: Block) -> Result<EffState> {
        let key = self.check_pair(s, i)?;
        if block_is_zero(&block) {
            self.blocks.remove(&key);
        } else {
            self.blocks.insert(key, block);
        }
        Ok(self)
    }

    pub fn block(&self, s: &str, i: &str) -> Block {
        self.blocks
            .get(&(s.to_string(), i.to_string()))
            .copied()
            .unwrap_or([ZERO; 4])
    }

    /// Materialized (nonzero) blocks in key order.
    pub fn blocks(&self) -> impl Iterator<Item = (&(String, String), &Block)> {
        self.blocks.iter()
    }

    /// `c1·a + c2·b`, auxiliary entry included.
    pub fn combine(c1: Complex64, a: &EffState, c2: Complex64, b: &EffState) -> Result<EffState> {
        if a.signals != b.signals || a.idlers != b.idlers {
            return Err(Error::RegisterMismatch);
        }
        let mut out = EffState {
            signals: a.signals.clone(),
            idlers: a.idlers.clone(),
            aux: c1 * a.aux + c2 * b.aux,
            blocks: BTreeMap::new(),
        };
        let keys: std::collections::BTreeSet<_> = a.blocks.keys().chain(b.blocks.keys()).cloned().collect();
        for key in keys {
            let (x, y) = (a.block(&key.0, &key.1), b.block(&key.0, &key.1));
            let sum: Block = std::array::from_fn(|k| c1 * x[k] + c2 * y[k]);
            if !block_is_zero(&sum) {
                out.blocks.insert(key, sum);
            }
        }
        Ok(out)
    }

    /// Largest componentwise distance, auxiliary entry included.
    pub fn max_abs_diff(&self, other: &EffState) -> f64 {
        let mut worst = (self.aux - other.aux).norm();
        for key in self.blocks.keys().chain(other.blocks.keys()) {
            let (x, y) = (self.block(&key.0, &key.1), other.block(&key.0, &key.1));
            for k in 0..4 {
                worst = worst.max((x[k] - y[k]).norm());
            }
        }
        worst
    }

    /// `(aux, HH, HV, VH, VV)` for the block `(s, i)`.
    pub fn extended_vector(&self, s: &str, i: &str) -> Result<nalgebra::Vector5<Complex64>> {
        self.check_pair(s, i)?;
        let b = self.block(s, i);
        Ok(nalgebra::Vector5::new(self.aux, b[0], b[1], b[2], b[3]))
    }
}

/// The superposer: adds `aux·|HH⟩` to the block `(s, i)`.
pub fn eff_apply_nl(state: &EffState, s: &str, i: &str) -> Result<EffState> {
    let mut block = state.block(s, i);
    block[HH] += state.aux;
    state.clone().with_block(s, i, block)
}

/// Multiplies the block `(s, i)` by `u`; the auxiliary entry is untouched.
pub fn eff_apply_unitary(state: &EffState, s: &str, i: &str, u: &Mat4) -> Result<EffState> {
    check_unitary(u)?;
    let block = state.block(s, i);
    state.clone().with_block(s, i, apply_fixed(u, &block))
}

/// The superposer on one block in the extended basis `{a, HH, HV, VH, VV}`.
pub fn translation_matrix() -> Mat5 {
    let mut m = Mat5::identity();
    m[(1, 0)] = ONE;
    m
}

/// Whether the superposer fails linearity on `c1·ψ1 + c2·ψ2`.
///
/// The left side treats the combination as a physical state (the superposer
/// adds `|HH⟩` once); the right side combines the two images. Entries are
/// compared within [`WITNESS_TOL`].
pub fn eff_nonlinearity_witness(
    psi1: &EffState,
    psi2: &EffState,
    c1: Complex64,
    c2: Complex64,
    pair: (&str, &str),
) -> Result<bool> {
    let combined = EffState::combine(c1, psi1, c2, psi2)?.with_aux(ONE);
    let lhs = eff_apply_nl(&combined, pair.0, pair.1)?;
    let physical = |p: &EffState| p.clone().with_aux(ONE);
    let rhs = EffState::combine(
        c1,
        &eff_apply_nl(&physical(psi1), pair.0, pair.1)?,
        c2,
        &eff_apply_nl(&physical(psi2), pair.0, pair.1)?,
    )?;
    let mut differs = false;
    for key in lhs.blocks.keys().chain(rhs.blocks.keys()) {
        let (x, y) = (lhs.block(&key.0, &key.1), rhs.block(&key.0, &key.1));
        differs |= (0..4).any(|k| (x[k] - y[k]).norm() > WITNESS_TOL);
    }
    Ok(differs)
}

/// Reads `|ψ_eff⟩` off a unitary-picture state.
///
/// The order-zero part must be `aux·|vac⟩` and every order-`κ` term must hold
/// exactly one photon on a signal path and one on an idler path.
pub fn unitary_to_effective<S: AsRef<str>>(state: &KetState, signals: &[S], idlers: &[S]) -> Result<EffState> {
    let mut eff = EffState::vacuum(signals, idlers)?;
    let paths = state.paths();
    let (sig, idl) = (eff.signals.clone(), eff.idlers.clone());
    let role = |idx: usize| -> (bool, bool) {
        let p = &paths[idx];
        (sig.contains(p), idl.contains(p))
    };
    let bad = |ket: &Ket, reason: &str| Error::EffectiveStructure {
        ket: ket.to_string(),
        reason: reason.to_string(),
    };
    let mut aux = ZERO;
    for (ket, amp) in state.terms() {
        if amp.c01 != ZERO {
            return Err(bad(ket, "order-κ̄ amplitude"));
        }
        if ket.is_vacuum() {
            if amp.c10 != ZERO {
                return Err(bad(ket, "order-κ vacuum amplitude"));
            }
            aux = amp.c00;
            continue;
        }
        if amp.c00 != ZERO {
            return Err(bad(ket, "order-zero photon amplitude"));
        }
        let mut signal = None;
        let mut idler = None;
        for (idx, q) in ket.0.iter().enumerate() {
            let Some(pol) = q.polarization_index() else { continue };
            match role(idx) {
                (true, _) if signal.is_none() => signal = Some((idx, pol)),
                (_, true) if idler.is_none() => idler = Some((idx, pol)),
                (true, _) => return Err(bad(ket, "two signal paths occupied")),
                (_, true) => return Err(bad(ket, "two idler paths occupied")),
                _ => return Err(bad(ket, &format!("photon on path `{}` outside the signal/idler registers", paths[idx]))),
            }
        }
        let (Some((si, sp)), Some((ii, ip))) = (signal, idler) else {
            return Err(bad(ket, "not a signal/idler pair"));
        };
        let mut block = eff.block(&paths[si], &paths[ii]);
        block[2 * sp + ip] = times_i(amp.c10);
        eff = eff.with_block(&paths[si], &paths[ii], block)?;
    }
    Ok(eff.with_aux(aux))
}

/// Rebuilds `aux·|vac⟩ − iκ|ψ_eff⟩` over the register `paths`.
pub fn effective_to_unitary<S: AsRef<str>>(eff: &EffState, paths: &[S]) -> Result<KetState> {
    let register = validate_register(paths)?;
    let index = |label: &str| {
        register
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownPath(label.to_string()))
    };
    let vac = Ket::vacuum(register.len());
    let mut terms = vec![(vac.clone(), PerturbAmp::constant(eff.aux))];
    for ((s, i), block) in &eff.blocks {
        let (si, ii) = (index(s)?, index(i)?);
        for (k, e) in block.iter().enumerate() {
            let ket = vac
                .with(si, Qutrit::from_polarization_index(k / 2))
                .with(ii, Qutrit::from_polarization_index(k % 2));
            terms.push((ket, PerturbAmp::kappa(times_neg_i(*e))));
        }
    }
    KetState::from_terms(&register, terms)
}

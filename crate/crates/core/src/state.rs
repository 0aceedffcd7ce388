//! Sparse multi-path qutrit states.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amp::{times_i, Order, PerturbAmp};
use crate::error::{Error, Result};

/// Occupation of a single path: vacuum, one H photon or one V photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Qutrit {
    Vac,
    H,
    V,
}

impl Qutrit {
    pub const ALL: [Qutrit; 3] = [Qutrit::Vac, Qutrit::H, Qutrit::V];

    pub fn symbol(self) -> char {
        match self {
            Qutrit::Vac => '0',
            Qutrit::H => 'H',
            Qutrit::V => 'V',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            '0' => Ok(Qutrit::Vac),
            'H' => Ok(Qutrit::H),
            'V' => Ok(Qutrit::V),
            other => Err(Error::InvalidSymbol(other)),
        }
    }

    pub fn is_occupied(self) -> bool {
        self != Qutrit::Vac
    }

    /// Index of an occupied symbol in the `{H, V}` polarization basis.
    pub fn polarization_index(self) -> Option<usize> {
        match self {
            Qutrit::Vac => None,
            Qutrit::H => Some(0),
            Qutrit::V => Some(1),
        }
    }

    pub fn from_polarization_index(idx: usize) -> Qutrit {
        if idx == 0 {
            Qutrit::H
        } else {
            Qutrit::V
        }
    }
}

/// One occupation symbol per registered path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ket(pub Vec<Qutrit>);

impl Ket {
    pub fn vacuum(len: usize) -> Ket {
        Ket(vec![Qutrit::Vac; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.iter().all(|q| !q.is_occupied())
    }

    pub fn photon_count(&self) -> usize {
        self.0.iter().filter(|q| q.is_occupied()).count()
    }

    pub fn with(&self, idx: usize, q: Qutrit) -> Ket {
        let mut k = self.clone();
        k.0[idx] = q;
        k
    }

    pub fn get(&self, idx: usize) -> Qutrit {
        self.0[idx]
    }
}

impl FromStr for Ket {
    type Err = Error;
    fn from_str(s: &str) -> Result<Ket> {
        s.chars().map(Qutrit::from_symbol).collect::<Result<Vec<_>>>().map(Ket)
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.0 {
            write!(f, "{}", q.symbol())?;
        }
        Ok(())
    }
}

/// A sparse superposition of occupation strings over an ordered path register.
///
/// Terms are kept in a `BTreeMap`, so iteration order (and therefore every
/// floating-point summation order) is deterministic. Exact-zero amplitudes
/// are removed after every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct KetState {
    paths: Vec<String>,
    terms: BTreeMap<Ket, PerturbAmp>,
}

pub(crate) fn validate_register<S: AsRef<str>>(paths: &[S]) -> Result<Vec<String>> {
    if paths.is_empty() {
        return Err(Error::EmptyRegister);
    }
    let mut out: Vec<String> = Vec::with_capacity(paths.len());
    for p in paths {
        let p = p.as_ref();
        if out.iter().any(|q| q == p) {
            return Err(Error::DuplicatePath(p.to_string()));
        }
        out.push(p.to_string());
    }
    Ok(out)
}

/// The all-vacuum state `|0…0⟩` with amplitude 1.
pub fn vacuum_state<S: AsRef<str>>(paths: &[S]) -> Result<KetState> {
    let paths = validate_register(paths)?;
    let mut terms = BTreeMap::new();
    terms.insert(Ket::vacuum(paths.len()), PerturbAmp::ONE);
    Ok(KetState { paths, terms })
}

/// Keeps one coefficient of every amplitude.
///
/// For [`Order::Kappa`] the coefficient is divided by `-i`, so that
/// `|ψ⟩ = |vac⟩ − iκ|ψ_κ⟩` holds for the returned `|ψ_κ⟩`. The selected
/// values are stored as order-zero amplitudes.
pub fn extract_order(state: &KetState, which: Order) -> KetState {
    let terms = state.terms.iter().map(|(k, a)| {
        let c = a.coefficient(which);
        let c = if which == Order::Kappa { times_i(c) } else { c };
        (k.clone(), PerturbAmp::constant(c))
    });
    KetState::collect_unchecked(state.paths.clone(), terms)
}

impl KetState {
    pub fn vacuum<S: AsRef<str>>(paths: &[S]) -> Result<KetState> {
        vacuum_state(paths)
    }

    /// The empty superposition (every amplitude zero).
    pub fn zero<S: AsRef<str>>(paths: &[S]) -> Result<KetState> {
        Ok(KetState {
            paths: validate_register(paths)?,
            terms: BTreeMap::new(),
        })
    }

    /// Builds a state from `(ket, amplitude)` pairs; repeated kets are summed.
    pub fn from_terms<S, I>(paths: &[S], terms: I) -> Result<KetState>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Ket, PerturbAmp)>,
    {
        let paths = validate_register(paths)?;
        let n = paths.len();
        let mut collected = Vec::new();
        for (k, a) in terms {
            if k.len() != n {
                return Err(Error::KetLength {
                    ket: k.to_string(),
                    expected: n,
                    found: k.len(),
                });
            }
            collected.push((k, a));
        }
        Ok(KetState::collect_unchecked(paths, collected))
    }

    /// Convenience constructor from ket strings such as `"H00"`.
    pub fn from_strs<S: AsRef<str>>(paths: &[S], terms: &[(&str, PerturbAmp)]) -> Result<KetState> {
        let parsed = terms
            .iter()
            .map(|(s, a)| s.parse::<Ket>().map(|k| (k, *a)))
            .collect::<Result<Vec<_>>>()?;
        KetState::from_terms(paths, parsed)
    }

    pub(crate) fn collect_unchecked<I>(paths: Vec<String>, terms: I) -> KetState
    where
        I: IntoIterator<Item = (Ket, PerturbAmp)>,
    {
        let mut map: BTreeMap<Ket, PerturbAmp> = BTreeMap::new();
        for (k, a) in terms {
            *map.entry(k).or_default() += a;
        }
        map.retain(|_, a| !a.is_zero());
        KetState { paths, terms: map }
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Ket, &PerturbAmp)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.paths
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownPath(label.to_string()))
    }

    /// Resolves distinct path labels to register indices.
    pub(crate) fn indices<const N: usize>(&self, gate: &'static str, labels: [&str; N]) -> Result<[usize; N]> {
        let mut out = [0usize; N];
        for (slot, label) in out.iter_mut().zip(labels) {
            *slot = self.index_of(label)?;
        }
        for a in 0..N {
            for b in a + 1..N {
                if out[a] == out[b] {
                    return Err(Error::RepeatedTarget {
                        gate,
                        path: labels[a].to_string(),
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn amplitude(&self, ket: &Ket) -> PerturbAmp {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    /// Amplitude of a ket written as a string; panics on malformed input.
    pub fn amp(&self, ket: &str) -> PerturbAmp {
        self.amplitude(&ket.parse().expect("malformed ket literal"))
    }

    /// Rebuilds the state term by term; `f` may emit any number of outputs.
    pub(crate) fn map_terms<F>(&self, mut f: F) -> Result<KetState>
    where
        F: FnMut(&Ket, PerturbAmp, &mut Vec<(Ket, PerturbAmp)>) -> Result<()>,
    {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for (k, a) in &self.terms {
            f(k, *a, &mut out)?;
        }
        Ok(KetState::collect_unchecked(self.paths.clone(), out))
    }

    pub fn scale(&self, c: Complex64) -> KetState {
        KetState::collect_unchecked(
            self.paths.clone(),
            self.terms.iter().map(|(k, a)| (k.clone(), a.scale(c))),
        )
    }

    /// Sum of two states on the same register.
    pub fn add(&self, other: &KetState) -> Result<KetState> {
        if self.paths != other.paths {
            return Err(Error::DimensionMismatch {
                expected: self.paths.len(),
                found: other.paths.len(),
            });
        }
        Ok(KetState::collect_unchecked(
            self.paths.clone(),
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(k, a)| (k.clone(), *a)),
        ))
    }

    /// Largest componentwise amplitude difference over the union of supports.
    pub fn max_abs_diff(&self, other: &KetState) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, a) in &self.terms {
            worst = worst.max(a.max_abs_diff(&other.amplitude(k)));
        }
        for (k, b) in &other.terms {
            worst = worst.max(b.max_abs_diff(&self.amplitude(k)));
        }
        worst
    }

    /// Numerical amplitudes once `κ` is fixed.
    pub fn evaluate(&self, kappa: Complex64) -> Vec<(Ket, Complex64)> {
        self.terms
            .iter()
            .map(|(k, a)| (k.clone(), a.evaluate(kappa)))
            .filter(|(_, z)| *z != Complex64::new(0.0, 0.0))
            .collect()
    }

    /// Keeps the listed paths (in the given order) of every ket.
    pub fn restricted_label(&self, ket: &Ket, keep: &[usize]) -> String {
        keep.iter().map(|&i| ket.get(i).symbol()).collect()
    }
}

impl fmt::Display for KetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, a)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{a}]|{k}⟩")?;
        }
        Ok(())
    }
}

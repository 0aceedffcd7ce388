//! Circuits, initial states and analysis probes.

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::state::{validate_register, KetState};

/// An ordered list of gates over a fixed path register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    paths: Vec<String>,
    ops: Vec<Gate>,
}

impl Circuit {
    pub fn new<S: AsRef<str>>(paths: &[S]) -> Result<Circuit> {
        Ok(Circuit {
            paths: validate_register(paths)?,
            ops: Vec::new(),
        })
    }

    /// Appends a gate after checking its targets and parameters.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let targets = gate.targets();
        for (n, t) in targets.iter().enumerate() {
            if !self.paths.iter().any(|p| p == t) {
                return Err(Error::UnknownPath(t.to_string()));
            }
            if targets[..n].contains(t) {
                return Err(Error::RepeatedTarget {
                    gate: gate.name(),
                    path: t.to_string(),
                });
            }
        }
        gate.validate()?;
        self.ops.push(gate);
        Ok(())
    }

    pub fn with(mut self, gate: Gate) -> Result<Circuit> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn run(&self, initial: &KetState) -> Result<KetState> {
        if initial.paths() != self.paths.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.paths.len(),
                found: initial.paths().len(),
            });
        }
        self.ops.iter().try_fold(initial.clone(), |s, g| g.apply(&s))
    }

    pub fn run_from_vacuum(&self) -> Result<KetState> {
        self.run(&KetState::vacuum(&self.paths)?)
    }
}

/// An analysis request attached to a point in the gate sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// Post-selected density matrix of the kept paths.
    Density { keep: Vec<String> },
    /// Post-selected probability of a photon in each listed path.
    Measure { paths: Vec<String> },
}

/// A circuit together with its initial state and probes.
///
/// A probe at position `n` sees the state after the first `n` gates.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub circuit: Circuit,
    pub initial: KetState,
    pub probes: Vec<(usize, Probe)>,
}

/// The final state and the state seen by every probe.
#[derive(Debug, Clone)]
pub struct Execution {
    pub final_state: KetState,
    pub snapshots: Vec<(Probe, KetState)>,
}

impl Program {
    pub fn from_vacuum(circuit: Circuit) -> Result<Program> {
        let initial = KetState::vacuum(circuit.paths())?;
        Ok(Program {
            circuit,
            initial,
            probes: Vec::new(),
        })
    }

    /// Attaches a probe after the gates added so far.
    pub fn probe_here(&mut self, probe: Probe) {
        self.probes.push((self.circuit.len(), probe));
    }

    pub fn execute(&self) -> Result<Execution> {
        let mut state = self.initial.clone();
        let mut snapshots = Vec::with_capacity(self.probes.len());
        let mut probes = self.probes.iter().peekable();
        for (n, gate) in self.circuit.ops().iter().enumerate() {
            while let Some((_, p)) = probes.next_if(|(pos, _)| *pos == n) {
                snapshots.push((p.clone(), state.clone()));
            }
            state = gate.apply(&state)?;
        }
        for (_, p) in probes {
            snapshots.push((p.clone(), state.clone()));
        }
        Ok(Execution {
            final_state: state,
            snapshots,
        })
    }
}

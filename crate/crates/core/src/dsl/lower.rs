//! Evaluation of a document into a runnable program.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ast::{ComplexExpr, Document, Grid, MatrixSpec, Statement, StmtKind};
use super::diag::{Diagnostic, DiagnosticKind};
use super::expr::Expr;
use crate::amp::PerturbAmp;
use crate::analysis::{sweep, SweepRow};
use crate::circuit::{Circuit, Probe, Program};
use crate::error::Error;
use crate::gates::{BsConvention, Gate};
use crate::linalg::{hadamard, householder_completion, pauli_x, to_fixed};
use crate::state::KetState;

/// A document with every expression evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub program: Program,
    /// Final parameter values, in declaration order.
    pub params: Vec<(String, f64)>,
    pub sweep: Option<(String, Vec<f64>)>,
}

fn sem(stmt: &Statement, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Semantic, stmt.line, stmt.col, message).with_token(stmt.kind.keyword())
}

/// Evenly spaced values from `from`, excluding `to`.
pub fn range_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| from + (to - from) * k as f64 / steps as f64).collect()
}

struct Env {
    values: BTreeMap<String, f64>,
}

impl Env {
    fn eval(&self, stmt: &Statement, e: &Expr) -> Result<f64, Diagnostic> {
        e.eval(&self.values).map_err(|m| sem(stmt, m))
    }

    fn complex(&self, stmt: &Statement, (re, im): &ComplexExpr) -> Result<Complex64, Diagnostic> {
        Ok(Complex64::new(self.eval(stmt, re)?, self.eval(stmt, im)?))
    }

    fn matrix(&self, stmt: &Statement, spec: &MatrixSpec, dim: usize) -> Result<DMatrix<Complex64>, Diagnostic> {
        let shape_error = || sem(stmt, format!("expected a {dim}×{dim} matrix"));
        match spec {
            MatrixSpec::X => Ok(DMatrix::from_fn(2, 2, |r, c| pauli_x()[(r, c)])),
            MatrixSpec::H => Ok(DMatrix::from_fn(2, 2, |r, c| hadamard()[(r, c)])),
            MatrixSpec::Literal(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(shape_error());
                }
                let mut m = DMatrix::from_element(dim, dim, crate::amp::ZERO);
                for (r, row) in rows.iter().enumerate() {
                    for (c, z) in row.iter().enumerate() {
                        m[(r, c)] = self.complex(stmt, z)?;
                    }
                }
                Ok(m)
            }
            MatrixSpec::Householder(v) => {
                if v.len() != dim {
                    return Err(sem(stmt, format!("householder target needs {dim} entries")));
                }
                let target = v.iter().map(|z| self.complex(stmt, z)).collect::<Result<Vec<_>, _>>()?;
                householder_completion(&target).map_err(|e| sem(stmt, e.to_string()))
            }
        }
    }
}

impl Document {
    /// Runs the program once per value of parameter `name`, in grid order.
    pub fn run_sweep(&self, name: &str, grid: &[f64], overrides: &[(String, Expr)]) -> crate::error::Result<Vec<SweepRow>> {
        sweep(grid, |v| {
            let mut all: Vec<(String, Expr)> = overrides.iter().filter(|(n, _)| n != name).cloned().collect();
            all.push((name.to_string(), Expr::number(v)));
            self.lower(&all).map(|l| l.program).map_err(|ds| {
                Error::InvalidSpec(ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
            })
        })
    }

    /// Evaluates every statement, with `overrides` replacing parameter definitions.
    pub fn lower(&self, overrides: &[(String, Expr)]) -> Result<Lowered, Vec<Diagnostic>> {
        let declared: Vec<&str> = self.params().iter().map(|(n, _)| *n).collect();
        let unknown: Vec<Diagnostic> = overrides
            .iter()
            .filter(|(n, _)| !declared.contains(&n.as_str()))
            .map(|(n, _)| {
                Diagnostic::new(DiagnosticKind::Semantic, 0, 0, format!("unknown parameter `{n}`"))
                    .with_token(n.clone())
                    .with_expected(if declared.is_empty() {
                        "no parameters are declared".to_string()
                    } else {
                        format!("one of {}", declared.join(", "))
                    })
            })
            .collect();
        if !unknown.is_empty() {
            return Err(unknown);
        }

        let mut env = Env { values: BTreeMap::new() };
        let mut params = Vec::new();
        let mut circuit: Option<Circuit> = None;
        let mut initial: Option<KetState> = None;
        let mut probes = Vec::new();
        let mut sweep = None;
        let mut diags = Vec::new();

        for stmt in self.statements() {
            let step = (|| -> Result<(), Diagnostic> {
                let push = |circuit: &mut Option<Circuit>, gate: Gate| -> Result<(), Diagnostic> {
                    let c = circuit.as_mut().ok_or_else(|| sem(stmt, "gate before the paths declaration"))?;
                    c.push(gate).map_err(|e| sem(stmt, e.to_string()))
                };
                match &stmt.kind {
                    StmtKind::Paths(ps) => {
                        let c = Circuit::new(ps).map_err(|e| sem(stmt, e.to_string()))?;
                        initial = Some(KetState::vacuum(ps).map_err(|e| sem(stmt, e.to_string()))?);
                        circuit = Some(c);
                    }
                    StmtKind::Param { name, expr } => {
                        let expr = overrides.iter().rev().find(|(n, _)| n == name).map_or(expr, |(_, e)| e);
                        let v = env.eval(stmt, expr)?;
                        env.values.insert(name.clone(), v);
                        params.push((name.clone(), v));
                    }
                    StmtKind::Init(kets) => {
                        let c = circuit.as_ref().ok_or_else(|| sem(stmt, "init before the paths declaration"))?;
                        let terms: Vec<(&str, PerturbAmp)> = kets.iter().map(|k| (k.as_str(), PerturbAmp::ONE)).collect();
                        initial = Some(KetState::from_strs(c.paths(), &terms).map_err(|e| sem(stmt, e.to_string()))?);
                    }
                    StmtKind::Nl { signal, idler } => push(&mut circuit, Gate::nl(signal, idler))?,
                    StmtKind::Nl1p { pump, signal, idler, g } => {
                        let g = match g {
                            Some(e) => env.eval(stmt, e)?,
                            None => 1.0,
                        };
                        push(
                            &mut circuit,
                            Gate::NlSinglePump {
                                pump: pump.clone(),
                                signal: signal.clone(),
                                idler: idler.clone(),
                                g: Complex64::new(g, 0.0),
                            },
                        )?
                    }
                    StmtKind::Phase { path, phi } => {
                        let phi = env.eval(stmt, phi)?;
                        push(&mut circuit, Gate::phase(path, phi))?
                    }
                    StmtKind::Hwp { path } => push(&mut circuit, Gate::hwp(path))?,
                    StmtKind::Unitary { paths, matrix } => {
                        let gate = if paths.len() == 1 {
                            let m = env.matrix(stmt, matrix, 2)?;
                            Gate::PolUnitary {
                                path: paths[0].clone(),
                                u: to_fixed::<2>(&m).map_err(|e| sem(stmt, e.to_string()))?,
                            }
                        } else {
                            let m = env.matrix(stmt, matrix, 4)?;
                            Gate::TwoPathUnitary {
                                a: paths[0].clone(),
                                b: paths[1].clone(),
                                u: to_fixed::<4>(&m).map_err(|e| sem(stmt, e.to_string()))?,
                            }
                        };
                        push(&mut circuit, gate)?
                    }
                    StmtKind::Align { a, b } => push(&mut circuit, Gate::swap(a, b))?,
                    StmtKind::Bs { a, b, symmetric } => push(
                        &mut circuit,
                        Gate::BeamSplitter {
                            a: a.clone(),
                            b: b.clone(),
                            convention: if *symmetric { BsConvention::Symmetric } else { BsConvention::Hadamard },
                        },
                    )?,
                    StmtKind::Object { path, loss, t, gamma } => {
                        let t = env.eval(stmt, t)?;
                        let gamma = env.eval(stmt, gamma)?;
                        if !(0.0..=1.0).contains(&t) {
                            return Err(sem(stmt, format!("transmittance T={t} outside [0, 1]")));
                        }
                        push(
                            &mut circuit,
                            Gate::Object {
                                path: path.clone(),
                                loss: loss.clone(),
                                t,
                                gamma,
                            },
                        )?
                    }
                    StmtKind::Measure(ps) => {
                        let n = circuit.as_ref().map_or(0, |c| c.len());
                        probes.push((n, Probe::Measure { paths: ps.clone() }));
                    }
                    StmtKind::TraceKeep(ps) => {
                        let n = circuit.as_ref().map_or(0, |c| c.len());
                        probes.push((n, Probe::Density { keep: ps.clone() }));
                    }
                    StmtKind::Sweep { name, grid } => {
                        let values = match grid {
                            Grid::List(vs) => vs.iter().map(|e| env.eval(stmt, e)).collect::<Result<Vec<_>, _>>()?,
                            Grid::Range { from, to, steps } => range_grid(env.eval(stmt, from)?, env.eval(stmt, to)?, *steps),
                        };
                        sweep = Some((name.clone(), values));
                    }
                }
                Ok(())
            })();
            if let Err(d) = step {
                diags.push(d);
            }
        }

        let (Some(circuit), Some(initial)) = (circuit, initial) else {
            diags.insert(0, Diagnostic::new(DiagnosticKind::Semantic, 1, 1, "missing paths declaration"));
            return Err(diags);
        };
        if !diags.is_empty() {
            return Err(diags);
        }
        Ok(Lowered {
            program: Program {
                circuit,
                initial,
                probes,
            },
            params,
            sweep,
        })
    }
}

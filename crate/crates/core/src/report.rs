//! Result records shared by the command line and the tests.
//!
//! The JSON shape of [`RunReport`] is published in
//! `schema/run-report.schema.json` and stays stable; CSV uses the columns
//! `quantity,label,re,im`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::{conditional_density, detector_probabilities, kappa_sector, pair_probability_coefficient, ConditionalDensity, SweepRow};
use crate::circuit::{Execution, Probe};
use crate::error::Result;
use crate::fock::OracleReport;

/// The published JSON schema for [`RunReport`].
pub const RUN_REPORT_SCHEMA: &str = include_str!("../schema/run-report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmpEntry {
    pub ket: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub paths: Vec<String>,
    pub basis: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ConditionalDensity> for DensityReport {
    fn from(rho: &ConditionalDensity) -> DensityReport {
        let n = rho.dim();
        DensityReport {
            paths: rho.paths.clone(),
            basis: rho.basis.clone(),
            re: (0..n).map(|r| (0..n).map(|c| rho.matrix[(r, c)].re).collect()).collect(),
            im: (0..n).map(|r| (0..n).map(|c| rho.matrix[(r, c)].im).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorEntry {
    pub path: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry {
    pub kappa_re: f64,
    pub kappa_im: f64,
    pub max_deviation: f64,
    pub constant: f64,
    pub norm_drift: f64,
    pub dimension: usize,
    pub passed: bool,
}

impl From<&OracleReport> for OracleEntry {
    fn from(r: &OracleReport) -> OracleEntry {
        OracleEntry {
            kappa_re: r.kappa.re,
            kappa_im: r.kappa.im,
            max_deviation: r.max_deviation,
            constant: r.constant,
            norm_drift: r.norm_drift,
            dimension: r.dimension,
            passed: r.passed,
        }
    }
}

/// Everything `run` prints about one execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub paths: Vec<String>,
    /// Order-`κ` amplitudes with the creation factor `−i` divided out.
    pub kappa_sector: Vec<AmpEntry>,
    /// Pair probability in units of `|gα|²`.
    pub pair_coefficient: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub detectors: Vec<DetectorEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEntry>,
}

impl RunReport {
    /// Builds the report; `density` overrides the last `trace_keep` probe.
    pub fn from_execution(run: &Execution, density: Option<&[String]>) -> Result<RunReport> {
        let state = &run.final_state;
        let kappa_sector = kappa_sector(state)
            .into_iter()
            .map(|(ket, z)| AmpEntry { ket, re: z.re, im: z.im })
            .collect();

        let mut rho = None;
        let mut detectors = Vec::new();
        for (probe, snapshot) in &run.snapshots {
            match probe {
                Probe::Density { keep } if density.is_none() => rho = Some(conditional_density(snapshot, keep)?),
                Probe::Measure { paths } => {
                    for (path, probability) in detector_probabilities(snapshot, paths)? {
                        detectors.push(DetectorEntry { path, probability });
                    }
                }
                _ => {}
            }
        }
        if let Some(keep) = density {
            rho = Some(conditional_density(state, keep)?);
        }

        Ok(RunReport {
            paths: state.paths().to_vec(),
            kappa_sector,
            pair_coefficient: pair_probability_coefficient(state),
            density: rho.as_ref().map(DensityReport::from),
            detectors,
            oracle: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rows of `quantity,label,re,im`.
    pub fn csv_rows(&self) -> Vec<[String; 4]> {
        let row = |q: &str, l: String, re: f64, im: f64| [q.to_string(), l, re.to_string(), im.to_string()];
        let mut out = Vec::new();
        for a in &self.kappa_sector {
            out.push(row("kappa_sector", a.ket.clone(), a.re, a.im));
        }
        out.push(row("pair_coefficient", String::new(), self.pair_coefficient, 0.0));
        if let Some(d) = &self.density {
            for (r, rl) in d.basis.iter().enumerate() {
                for (c, cl) in d.basis.iter().enumerate() {
                    out.push(row("density", format!("{rl}|{cl}"), d.re[r][c], d.im[r][c]));
                }
            }
        }
        for d in &self.detectors {
            out.push(row("detector", d.path.clone(), d.probability, 0.0));
        }
        if let Some(o) = &self.oracle {
            out.push(row("oracle_kappa", String::new(), o.kappa_re, o.kappa_im));
            out.push(row("oracle_max_deviation", String::new(), o.max_deviation, 0.0));
            out.push(row("oracle_constant", String::new(), o.constant, 0.0));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "paths: {}", self.paths.join(" "));
        if self.kappa_sector.is_empty() {
            let _ = writeln!(s, "kappa sector: empty");
        } else {
            let _ = writeln!(s, "kappa sector:");
            for a in &self.kappa_sector {
                let _ = writeln!(s, "  |{}>  {:+.12} {:+.12}i", a.ket, a.re, a.im);
            }
        }
        let _ = writeln!(s, "pair coefficient: {:.12}", self.pair_coefficient);
        if let Some(d) = &self.density {
            let _ = writeln!(s, "density on {}:", d.paths.join(","));
            for (r, rl) in d.basis.iter().enumerate() {
                let cells: Vec<String> = (0..d.basis.len()).map(|c| format!("{:+.6}{:+.6}i", d.re[r][c], d.im[r][c])).collect();
                let _ = writeln!(s, "  {rl:>6}  {}", cells.join("  "));
            }
        }
        for d in &self.detectors {
            let _ = writeln!(s, "detector {}: {:.12}", d.path, d.probability);
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                s,
                "oracle: kappa {:+.3e}{:+.3e}i, max deviation {:.3e} = {:.3}·|kappa|^2, norm drift {:.1e}, {}",
                o.kappa_re,
                o.kappa_im,
                o.max_deviation,
                o.constant,
                o.norm_drift,
                if o.passed { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn detector_names(&self) -> Vec<String> {
        self.rows.first().map_or_else(Vec::new, |r| r.detectors.iter().map(|(p, _)| p.clone()).collect())
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec![self.param.clone(), "pair_coefficient".to_string()];
        h.extend(self.detector_names().into_iter().map(|p| format!("detector_{p}")));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.value.to_string(), r.pair_coefficient.to_string()];
                row.extend(r.detectors.iter().map(|(_, p)| p.to_string()));
                row
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.csv_header().join("\t"));
        for row in self.csv_rows() {
            let _ = writeln!(s, "{}", row.join("\t"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{build_bell, build_object_id_program};
    use crate::circuit::Program;

    #[test]
    fn bell_report_keys() {
        let run = Program::from_vacuum(build_bell().unwrap()).unwrap().execute().unwrap();
        let keep = vec!["s2".to_string(), "i2".to_string()];
        let r = RunReport::from_execution(&run, Some(&keep)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys, vec!["density", "kappa_sector", "pair_coefficient", "paths"]);
        assert_eq!(v["kappa_sector"][0]["ket"], "00HH");
        assert_eq!(v["kappa_sector"][0]["re"], 1.0);
        assert_eq!(v["pair_coefficient"], 2.0);
        assert_eq!(v["density"]["basis"][1], "VV");
        assert!(r.to_text().contains("pair coefficient: 2.0"));
    }

    #[test]
    fn probes_feed_density_and_detectors() {
        let run = build_object_id_program(1.0, 0.0, true).unwrap().execute().unwrap();
        let r = RunReport::from_execution(&run, None).unwrap();
        assert_eq!(r.density.as_ref().unwrap().paths, vec!["s1", "s2"]);
        assert_eq!(r.detectors.len(), 2);
        assert!((r.detectors[0].probability - 1.0).abs() < 1e-12);
        let rows = r.csv_rows();
        assert!(rows.iter().any(|row| row[0] == "detector" && row[1] == "s1"));
        assert!(rows.iter().all(|row| row.len() == 4));
    }

    #[test]
    fn schema_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(RUN_REPORT_SCHEMA).unwrap();
        assert_eq!(v["type"], "object");
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::problem::{qubo_to_ising, IsingProblem, QuboProblem, ThreeBodyTerm};
use crate::{Error, Result};

/// On-disk problem description: either `{"n", "Q"}` or
/// `{"n", "J", "h", "three_body"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemFile {
    Qubo {
        n: usize,
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Ising {
        n: usize,
        #[serde(rename = "J")]
        j: Vec<Vec<f64>>,
        h: Vec<f64>,
        #[serde(default)]
        three_body: Vec<ThreeBodyTerm>,
    },
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ProblemFile(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Ising form of the problem (QUBOs are mapped, keeping the offset).
    pub fn to_ising(&self) -> Result<IsingProblem> {
        let (n, p) = match self {
            ProblemFile::Qubo { n, q } => (*n, qubo_to_ising(&QuboProblem::new(q.clone())?)),
            ProblemFile::Ising { n, j, h, three_body } => {
                (*n, IsingProblem::new(j.clone(), h.clone())?.with_three_body(three_body.clone())?)
            }
        };
        if p.n_qubits != n {
            return Err(Error::ProblemFile(format!("n = {n} but matrices have size {}", p.n_qubits)));
        }
        Ok(p)
    }

    pub fn from_ising(p: &IsingProblem) -> Self {
        ProblemFile::Ising { n: p.n_qubits, j: p.j.clone(), h: p.h.clone(), three_body: p.three_body.clone() }
    }
}

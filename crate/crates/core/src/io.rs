//! JSON file formats shared with the command-line front end.
//!
//! Ensemble: `{"n": int, "dim": int, "states": [matrix, ...]}` where a matrix is
//! a row-major nested array of `[re, im]` pairs.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ensembles::StateEnsemble;
use crate::error::{Error, Result};
use crate::matcore::{c64, ComplexMatrix, Ket};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub n: usize,
    pub dim: usize,
    pub states: Vec<ComplexMatrix>,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &StateEnsemble) -> Self {
        Self {
            n: e.n(),
            dim: e.dim(),
            states: e.states().to_vec(),
        }
    }

    pub fn into_ensemble(self) -> Result<StateEnsemble> {
        if self.states.len() != self.n {
            return Err(Error::Parse(format!(
                "n = {} but {} states given",
                self.n,
                self.states.len()
            )));
        }
        if let Some(bad) = self.states.iter().position(|s| s.rows() != self.dim) {
            return Err(Error::Parse(format!(
                "state {bad} does not have dimension {}",
                self.dim
            )));
        }
        StateEnsemble::new(self.states)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_ensemble(path: &Path) -> Result<StateEnsemble> {
    read_json::<EnsembleFile>(path)?.into_ensemble()
}

/// Reads a list of kets stored as `[[[re, im], ...], ...]`.
pub fn read_kets(path: &Path) -> Result<Vec<Ket>> {
    let raw: Vec<Vec<[f64; 2]>> = read_json(path)?;
    Ok(raw
        .into_iter()
        .map(|v| Ket::from_iterator(v.len(), v.into_iter().map(|p| c64(p[0], p[1]))))
        .collect())
}

pub fn kets_to_json(kets: &[Ket]) -> String {
    let raw: Vec<Vec<[f64; 2]>> = kets
        .iter()
        .map(|k| k.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde_json::to_string(&raw).expect("serializable")
}

pub fn ensemble_to_json(e: &StateEnsemble) -> String {
    serde_json::to_string(&EnsembleFile::from_ensemble(e)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::equiangular_ensemble;

    #[test]
    fn ensemble_round_trip() {
        let e = equiangular_ensemble(3, 0.25).unwrap();
        let text = ensemble_to_json(&e);
        let back: EnsembleFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n, 3);
        let back = back.into_ensemble().unwrap();
        for (a, b) in back.states().iter().zip(e.states()) {
            assert!((a - b).max_abs() == 0.0);
        }
    }

    #[test]
    fn ket_list_round_trip() {
        let kets = crate::ensembles::equiangular_kets(3, 0.2).unwrap();
        let dir = std::env::temp_dir().join(format!("infocap-kets-{}", std::process::id()));
        std::fs::write(&dir, kets_to_json(&kets)).unwrap();
        let back = read_kets(&dir).unwrap();
        std::fs::remove_file(&dir).ok();
        assert_eq!(back, kets);
    }

    #[test]
    fn inconsistent_header_rejected() {
        let text = r#"{"n": 2, "dim": 1, "states": [[[[1.0, 0.0]]]]}"#;
        let f: EnsembleFile = serde_json::from_str(text).unwrap();
        assert!(matches!(f.into_ensemble(), Err(Error::Parse(_))));
    }
}

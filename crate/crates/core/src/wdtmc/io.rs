//! JSON file format for chains:
//! `{"states":[..],"initial":name,"edges":[{"src","dst","prob","weight"}]}`
//! with probabilities as `"a/b"` strings and weights as `{"ratio":"a/b"}`
//! or `"inf"`.

use super::{ChainError, Edge, Wdtmc};
use crate::exact::{Rat, Scale};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WdtmcFile {
    pub states: Vec<String>,
    pub initial: String,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub src: String,
    pub dst: String,
    pub prob: Rat,
    pub weight: Scale,
}

impl WdtmcFile {
    pub fn from_chain(chain: &Wdtmc) -> Self {
        WdtmcFile {
            states: chain.states().to_vec(),
            initial: chain.state_name(chain.initial()).to_string(),
            edges: chain
                .edges()
                .iter()
                .map(|e| EdgeFile {
                    src: chain.state_name(e.src).to_string(),
                    dst: chain.state_name(e.dst).to_string(),
                    prob: e.prob.clone(),
                    weight: e.weight.clone(),
                })
                .collect(),
        }
    }

    /// Resolves names to indices and builds the chain. Probabilistic
    /// invariants are left to [`Wdtmc::validate`].
    pub fn into_chain(self) -> Result<Wdtmc, ChainError> {
        let index = |name: &str| -> Result<usize, ChainError> {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ChainError::UnknownState(name.to_string()))
        };
        let initial = index(&self.initial)?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: index(&e.src)?,
                    dst: index(&e.dst)?,
                    prob: e.prob.clone(),
                    weight: e.weight.clone(),
                })
            })
            .collect::<Result<Vec<_>, ChainError>>()?;
        Wdtmc::new(self.states, edges, initial)
    }
}

impl Wdtmc {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&WdtmcFile::from_chain(self)).expect("serializable")
    }
}

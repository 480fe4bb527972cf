//! Weighted discrete-time Markov chains: the finite model every stability
//! question in this crate reduces to, plus its path machinery.
//!
//! Edge weights are held multiplicatively as [`Scale`] ratios. Every check
//! compares exact products against 1; the additive log view of a weight
//! exists only as a float for reporting.

mod analyze;
mod io;
mod sample;

pub use analyze::{Decomposition, EffectiveWeight};
pub use io::WdtmcFile;
pub use sample::{MonteCarloStats, SAMPLER_RNG};

use crate::exact::{ExactError, Rat, RatMatrix, Scale};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised by chain construction and analysis.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("state index {0} out of range for {1} states")]
    StateOutOfRange(usize, usize),
    #[error("not a path: no edge from {0:?} to {1:?}")]
    NotAPath(String, String),
    #[error("a path must contain at least one state")]
    EmptyPath,
    #[error("path has no edges")]
    NoEdgesOnPath,
    #[error("infinite-weight edge on path")]
    InfiniteEdgeOnPath,
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("chain is not aperiodic")]
    NotAperiodic,
    #[error("infinite-weight edge present: {0:?} -> {1:?}")]
    InfiniteEdgePresent(String, String),
    #[error("effective-weight comparison is indeterminate at the configured precision")]
    IndeterminateEffectiveWeight,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A violation of the chain invariants, reported by [`Wdtmc::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainDefect {
    /// Outgoing probabilities of `state` sum to `sum` instead of exactly 1.
    RowSumNotOne { state: String, sum: Rat },
    /// An edge has probability outside (0, 1].
    NonPositiveProb { src: String, dst: String, prob: Rat },
    /// More than one edge between the same ordered state pair.
    DuplicateEdge { src: String, dst: String },
}

impl fmt::Display for ChainDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainDefect::RowSumNotOne { state, sum } => {
                write!(f, "outgoing probabilities of {state:?} sum to {sum}, not 1")
            }
            ChainDefect::NonPositiveProb { src, dst, prob } => {
                write!(
                    f,
                    "edge {src:?} -> {dst:?} has probability {prob} outside (0, 1]"
                )
            }
            ChainDefect::DuplicateEdge { src, dst } => {
                write!(f, "duplicate edge {src:?} -> {dst:?}")
            }
        }
    }
}

/// One probabilistic transition with its multiplicative weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub prob: Rat,
    pub weight: Scale,
}

/// Finite weighted Markov chain over named states.
///
/// Immutable after construction; every analysis is a pure function of the
/// chain, so concurrent use needs no synchronization.
#[derive(Debug, Clone)]
pub struct Wdtmc {
    states: Vec<String>,
    edges: Vec<Edge>,
    initial: usize,
    /// outgoing edge indices per state, ordered by destination
    out: Vec<Vec<usize>>,
}

impl Wdtmc {
    /// Builds a chain, checking only structural well-formedness (indices in
    /// range, unique state names). Probabilistic invariants are reported by
    /// [`Wdtmc::validate`].
    pub fn new(
        states: Vec<String>,
        mut edges: Vec<Edge>,
        initial: usize,
    ) -> Result<Self, ChainError> {
        let n = states.len();
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(ChainError::DuplicateState(s.clone()));
            }
        }
        if initial >= n {
            return Err(ChainError::StateOutOfRange(initial, n));
        }
        for e in &edges {
            if e.src >= n {
                return Err(ChainError::StateOutOfRange(e.src, n));
            }
            if e.dst >= n {
                return Err(ChainError::StateOutOfRange(e.dst, n));
            }
        }
        edges.sort_by_key(|e| (e.src, e.dst));
        let mut out = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.src].push(i);
        }
        Ok(Wdtmc {
            states,
            edges,
            initial,
            out,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Outgoing edges of `state`, ordered by destination index.
    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &Edge> {
        self.out[state].iter().map(|&i| &self.edges[i])
    }

    pub fn edge_between(&self, src: usize, dst: usize) -> Option<&Edge> {
        self.out[src]
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.dst == dst)
    }

    /// Confirms every chain invariant, listing each violation found.
    pub fn validate(&self) -> Vec<ChainDefect> {
        let mut defects = Vec::new();
        for (s, outgoing) in self.out.iter().enumerate() {
            let mut sum = Rat::zero();
            for &i in outgoing {
                let e = &self.edges[i];
                if !e.prob.is_positive() || e.prob > Rat::one() {
                    defects.push(ChainDefect::NonPositiveProb {
                        src: self.states[e.src].clone(),
                        dst: self.states[e.dst].clone(),
                        prob: e.prob.clone(),
                    });
                }
                sum = &sum + &e.prob;
            }
            for w in outgoing.windows(2) {
                if self.edges[w[0]].dst == self.edges[w[1]].dst {
                    defects.push(ChainDefect::DuplicateEdge {
                        src: self.states[s].clone(),
                        dst: self.states[self.edges[w[0]].dst].clone(),
                    });
                }
            }
            if !sum.is_one() {
                defects.push(ChainDefect::RowSumNotOne {
                    state: self.states[s].clone(),
                    sum,
                });
            }
        }
        defects
    }

    /// States reachable from `from` along positive-probability edges,
    /// including `from` itself.
    pub fn reachable(&self, from: usize) -> Result<BTreeSet<usize>, ChainError> {
        if from >= self.states.len() {
            return Err(ChainError::StateOutOfRange(from, self.states.len()));
        }
        let mut seen = BTreeSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(from);
        queue.push_back(from);
        while let Some(s) = queue.pop_front() {
            for e in self.outgoing(s) {
                if seen.insert(e.dst) {
                    queue.push_back(e.dst);
                }
            }
        }
        Ok(seen)
    }

    pub(crate) fn check_path(&self, states: &[usize]) -> Result<(), ChainError> {
        if states.is_empty() {
            return Err(ChainError::EmptyPath);
        }
        for &s in states {
            if s >= self.states.len() {
                return Err(ChainError::StateOutOfRange(s, self.states.len()));
            }
        }
        for w in states.windows(2) {
            if self.edge_between(w[0], w[1]).is_none() {
                return Err(ChainError::NotAPath(
                    self.states[w[0]].clone(),
                    self.states[w[1]].clone(),
                ));
            }
        }
        Ok(())
    }

    /// Product of the edge scales along `path`; `Finite(1)` for a
    /// single-state path, `Infinite` as soon as any edge is infinite.
    pub fn path_weight(&self, path: &PathFin) -> Result<Scale, ChainError> {
        self.check_path(&path.states)?;
        let mut acc = Scale::one();
        for w in path.states.windows(2) {
            let e = self.edge_between(w[0], w[1]).expect("checked above");
            acc = acc.mul(&e.weight);
        }
        Ok(acc)
    }

    /// `rho(first state) * product of edge probabilities`, exactly.
    pub fn path_probability(&self, rho: &Distribution, path: &PathFin) -> Result<Rat, ChainError> {
        self.check_path(&path.states)?;
        let mut acc = rho.mass(path.states[0]).clone();
        for w in path.states.windows(2) {
            let e = self.edge_between(w[0], w[1]).expect("checked above");
            acc = &acc * &e.prob;
        }
        Ok(acc)
    }

    /// The one-step transition matrix P with exact rational entries.
    pub fn transition_matrix(&self) -> RatMatrix {
        let n = self.states.len();
        let mut p = RatMatrix::zero(n, n);
        for e in &self.edges {
            *p.get_mut(e.src, e.dst) = e.prob.clone();
        }
        p
    }

    /// Exact `n`-step transition matrix `P^n`; the identity for `n = 0`.
    pub fn n_step_matrix(&self, n: usize) -> RatMatrix {
        let p = self.transition_matrix();
        let mut acc = RatMatrix::identity(self.states.len());
        for _ in 0..n {
            acc = acc.mul(&p).expect("square matrices");
        }
        acc
    }
}

/// Finite path through a chain: a nonempty state-index sequence where every
/// consecutive pair must be an edge of the chain it is used with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFin {
    states: Vec<usize>,
}

impl PathFin {
    pub fn new(states: Vec<usize>) -> Self {
        assert!(!states.is_empty(), "a path has at least one state");
        PathFin { states }
    }

    pub fn of(states: &[usize]) -> Self {
        PathFin::new(states.to_vec())
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_edges(&self) -> usize {
        self.states.len() - 1
    }

    /// Ordered multiset of edges traversed.
    pub fn edge_multiset(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self.states.windows(2).map(|w| (w[0], w[1])).collect();
        edges.sort_unstable();
        edges
    }
}

/// Probability distribution over the states of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    mass: Vec<Rat>,
}

impl Distribution {
    /// Checks nonnegativity and an exact total of 1.
    pub fn new(mass: Vec<Rat>) -> Result<Self, ChainError> {
        let mut sum = Rat::zero();
        for m in &mass {
            if m.is_negative() {
                return Err(ChainError::Exact(ExactError::NonPositiveScale(
                    m.to_string(),
                )));
            }
            sum = &sum + m;
        }
        if !sum.is_one() {
            return Err(ChainError::Exact(ExactError::Parse(format!(
                "distribution mass sums to {sum}, not 1"
            ))));
        }
        Ok(Distribution { mass })
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut mass = vec![Rat::zero(); n];
        mass[at] = Rat::one();
        Distribution { mass }
    }

    pub fn mass(&self, state: usize) -> &Rat {
        &self.mass[state]
    }

    pub fn masses(&self) -> &[Rat] {
        &self.mass
    }
}

/// Sign of the effective weight in the log view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn from_cmp_one(cmp: Ordering) -> Self {
        match cmp {
            Ordering::Less => Sign::Neg,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Pos,
        }
    }
}

/// Decision of a convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Convergent,
    NotConvergent,
}

/// Evidence carried by a verdict: the reachable infinite edge, a genuine
/// cycle whose exact product exceeds 1, or the exact effective-weight
/// comparison against 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    InfiniteEdge {
        src: usize,
        dst: usize,
    },
    PositiveCycle(PathFin),
    EffectiveWeight {
        sign: Sign,
        cmp: Ordering,
        float_log: f64,
    },
    None,
}

/// Outcome of a convergence check together with its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    pub witness: Witness,
}

impl Verdict {
    pub fn is_convergent(&self) -> bool {
        self.decision == Decision::Convergent
    }
}

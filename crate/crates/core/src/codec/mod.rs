//! Exact minimum-bandwidth rack-aware cooperative code.
//!
//! A file of `B` symbols is first expanded by a Reed–Solomon code into `N`
//! global symbols. Most of them are stored verbatim on the last
//! `n/r − e/f` nodes of every rack; the rest fill `e/f` product-matrix
//! message matrices whose projections, masked with local parities, live on
//! the first `e/f` nodes of each rack.
//!
//! Indices are 0-based throughout the library; node `(l, 0)` is the relayer
//! of rack `l`.

mod build;
mod encode;
mod repair;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldSpec, FiniteField};
use crate::linalg::{LinalgError, Matrix};
use crate::params::{CodeParams, ConstructionLayout};

pub use build::{build_code, collector_rank_bound, deficient_collector, MAX_RESAMPLES};
pub use encode::{collect, encode, strip_parities, MessageMatrix};
pub use repair::{erase, repair, RepairTranscript, Transfer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("e/f = n/r leaves no global-symbol nodes in a rack")]
    NoGlobalNodes,
    #[error(
        "collector {{{collector}}} spans at most {bound} < B = {file_size} dimensions in any field"
    )]
    CollectorDeficit {
        collector: String,
        bound: usize,
        file_size: usize,
    },
    #[error("field of order {order} too small: {what}")]
    FieldTooSmall { order: u64, what: String },
    #[error("code verification failed after {attempts} coefficient draws: {reason}")]
    VerificationExhausted { attempts: usize, reason: String },
    #[error("message must have exactly B = {expected} symbols, got {got}")]
    MessageLength { expected: usize, got: usize },
    #[error("collector needs exactly k = {expected} distinct nodes, got {got}")]
    CollectorSize { expected: usize, got: usize },
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("node {0} is erased")]
    Erased(NodeId),
    #[error("cluster state does not match the code: {0}")]
    StateShape(String),
    #[error("erasure pattern not supported: {0}")]
    ErasurePattern(String),
    #[error("need exactly d = {expected} helper racks, got {got}")]
    HelperCount { expected: usize, got: usize },
    #[error("rack {0} cannot help: {1}")]
    BadHelper(usize, String),
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A node address, 0-based. Displayed 1-based as `rack:node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub rack: usize,
    pub node: usize,
}

impl NodeId {
    pub fn new(rack: usize, node: usize) -> Self {
        NodeId { rack, node }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.rack + 1, self.node + 1)
    }
}

/// Generated code: generator, projection matrices and local parities.
///
/// Immutable once built; every verification has already passed.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec<F> {
    params: CodeParams,
    seed: u64,
    /// Number of coefficient draws it took to pass verification (0 means
    /// the structured choice worked).
    attempt: usize,
    layout: ConstructionLayout,
    g: Matrix<F>,
    u: Matrix<F>,
    v: Matrix<F>,
    /// Local parity coefficients per rack, `e/f × (n/r − e/f)`.
    lambda: Vec<Matrix<F>>,
    /// `parity[l][i]`: `(2d+f) × (n/r − e/f)α`, last row zero.
    parity: Vec<Vec<Matrix<F>>>,
    /// Row `node_index(l, i)·α + p` is symbol `p` of node `(l, i)` as a
    /// functional of the message.
    functionals: Matrix<F>,
}

impl<F: FiniteField> CodeSpec<F> {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> FieldSpec {
        F::spec()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn attempt(&self) -> usize {
        self.attempt
    }

    pub fn layout(&self) -> &ConstructionLayout {
        &self.layout
    }

    pub fn file_size(&self) -> usize {
        self.layout.file_size
    }

    pub fn alpha(&self) -> usize {
        self.layout.alpha
    }

    pub fn generator(&self) -> &Matrix<F> {
        &self.g
    }

    pub fn u(&self) -> &Matrix<F> {
        &self.u
    }

    pub fn v(&self) -> &Matrix<F> {
        &self.v
    }

    pub fn lambda(&self, rack: usize) -> &Matrix<F> {
        &self.lambda[rack]
    }

    pub fn parity(&self, rack: usize, i: usize) -> &Matrix<F> {
        &self.parity[rack][i]
    }

    pub fn u_col(&self, rack: usize) -> Vec<F> {
        self.u.column(rack)
    }

    pub fn v_col(&self, rack: usize) -> Vec<F> {
        self.v.column(rack)
    }

    /// Stored symbols of `node` as an `α × B` map from the message.
    pub fn node_functionals(&self, node: NodeId) -> Matrix<F> {
        let a = self.alpha();
        let base = self.node_index(node) * a;
        self.functionals
            .select_rows(&(base..base + a).collect::<Vec<_>>())
    }

    /// Stacked functionals of several nodes, in the given order.
    pub fn collector_matrix(&self, nodes: &[NodeId]) -> Matrix<F> {
        let a = self.alpha();
        let rows: Vec<usize> = nodes
            .iter()
            .flat_map(|n| {
                let base = self.node_index(*n) * a;
                base..base + a
            })
            .collect();
        self.functionals.select_rows(&rows)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let nr = self.params.nodes_per_rack();
        (0..self.params.r()).flat_map(move |l| (0..nr).map(move |i| NodeId::new(l, i)))
    }

    pub fn is_mbcr_node(&self, node: NodeId) -> bool {
        node.node < self.params.failures_per_rack()
    }

    pub(crate) fn node_index(&self, node: NodeId) -> usize {
        node.rack * self.params.nodes_per_rack() + node.node
    }

    pub(crate) fn check_node(&self, node: NodeId) -> Result<(), CodecError> {
        if node.rack < self.params.r() && node.node < self.params.nodes_per_rack() {
            Ok(())
        } else {
            Err(CodecError::NoSuchNode(node))
        }
    }

    /// Global-symbol nodes per rack.
    pub(crate) fn global_nodes(&self) -> usize {
        self.params.nodes_per_rack() - self.params.failures_per_rack()
    }

    /// Test-only variant whose local parities are identically zero.
    #[cfg(test)]
    pub(crate) fn without_parities(&self) -> Self {
        let mut s = self.clone();
        for rack in &mut s.parity {
            for p in rack.iter_mut() {
                *p = Matrix::zeros(p.rows(), p.cols());
            }
        }
        for lam in &mut s.lambda {
            *lam = Matrix::zeros(lam.rows(), lam.cols());
        }
        s.functionals = build::functionals(&s);
        s
    }
}

/// Contents of every node; `None` marks an erased node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterState<F> {
    racks: Vec<Vec<Option<Vec<F>>>>,
}

impl<F: FiniteField> ClusterState<F> {
    pub fn from_racks(racks: Vec<Vec<Option<Vec<F>>>>) -> Self {
        ClusterState { racks }
    }

    pub fn racks(&self) -> &[Vec<Option<Vec<F>>>] {
        &self.racks
    }

    pub fn get(&self, node: NodeId) -> Option<&[F]> {
        self.racks
            .get(node.rack)
            .and_then(|r| r.get(node.node))
            .and_then(|c| c.as_deref())
    }

    pub fn live(&self, node: NodeId) -> Result<&[F], CodecError> {
        match self.racks.get(node.rack).and_then(|r| r.get(node.node)) {
            None => Err(CodecError::NoSuchNode(node)),
            Some(None) => Err(CodecError::Erased(node)),
            Some(Some(c)) => Ok(c),
        }
    }

    pub fn is_erased(&self, node: NodeId) -> bool {
        matches!(
            self.racks.get(node.rack).and_then(|r| r.get(node.node)),
            Some(None)
        )
    }

    pub fn set(&mut self, node: NodeId, content: Option<Vec<F>>) {
        self.racks[node.rack][node.node] = content;
    }

    pub fn erased_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for (l, rack) in self.racks.iter().enumerate() {
            for (i, c) in rack.iter().enumerate() {
                if c.is_none() {
                    out.push(NodeId::new(l, i));
                }
            }
        }
        out
    }

    /// Checks rack/node counts and that live nodes hold exactly `α` symbols.
    pub fn check_shape(&self, spec: &CodeSpec<F>) -> Result<(), CodecError> {
        let p = spec.params();
        if self.racks.len() != p.r() {
            return Err(CodecError::StateShape(format!(
                "{} racks, expected {}",
                self.racks.len(),
                p.r()
            )));
        }
        for (l, rack) in self.racks.iter().enumerate() {
            if rack.len() != p.nodes_per_rack() {
                return Err(CodecError::StateShape(format!(
                    "rack {} has {} nodes, expected {}",
                    l + 1,
                    rack.len(),
                    p.nodes_per_rack()
                )));
            }
            for (i, c) in rack.iter().enumerate() {
                if let Some(c) = c {
                    if c.len() != spec.alpha() {
                        return Err(CodecError::StateShape(format!(
                            "node {} holds {} symbols, expected {}",
                            NodeId::new(l, i),
                            c.len(),
                            spec.alpha()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

use alloc::vec::Vec;
use core::fmt;

use crate::field::Symbol;

/// A storage node identifier. Node ids are 1-based, as nodes are numbered
/// in every user-facing surface; [`NodeId::index`] gives the 0-based slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn from_index(index: usize) -> Self {
        Self(index + 1)
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The α symbols one node stores for one chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub id: NodeId,
    pub symbols: Vec<Symbol>,
    pub live: bool,
}

impl NodeState {
    pub fn new(id: NodeId, symbols: Vec<Symbol>) -> Self {
        Self {
            id,
            symbols,
            live: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelperContribution {
    pub node: NodeId,
    pub symbols_per_chunk: usize,
}

/// What moved over the wire during one regeneration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairTranscript {
    pub failed: NodeId,
    pub helpers: Vec<HelperContribution>,
    pub chunks: usize,
    /// Bit width of one stored symbol (`ceil(log2 q)`).
    pub symbol_bits: u32,
}

impl RepairTranscript {
    pub fn symbols_per_chunk(&self) -> usize {
        self.helpers.iter().map(|h| h.symbols_per_chunk).sum()
    }

    pub fn total_symbols(&self) -> usize {
        self.symbols_per_chunk() * self.chunks
    }

    /// Bytes one symbol takes when stored on its own.
    pub fn symbol_bytes(&self) -> usize {
        self.symbol_bits.div_ceil(8) as usize
    }

    /// Bytes moved when the downloaded symbols are sent bit-packed.
    pub fn total_bytes(&self) -> usize {
        (self.total_symbols() * self.symbol_bits as usize).div_ceil(8)
    }

    pub fn helper_ids(&self) -> Vec<NodeId> {
        self.helpers.iter().map(|h| h.node).collect()
    }
}

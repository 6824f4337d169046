//! Stateless source-routed forwarding: one bit per arc, or a LIPSIN-style
//! Bloom filter of arc signatures.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::pcf::MulticastTree;
use crate::topology::{ArcId, NetworkGraph, NodeId};

pub const DEFAULT_BLOOM_BITS: usize = 256;
pub const DEFAULT_BLOOM_HASHES: u32 = 4;
pub const DEFAULT_BLOOM_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Bit `arc_id` set for every tree arc.
    Exact,
    /// `k` double-hashed signature bits per arc in an `m`-bit filter.
    Bloom { m: usize, k: u32, seed: u64 },
}

impl Scheme {
    pub fn bloom_default() -> Self {
        Scheme::Bloom {
            m: DEFAULT_BLOOM_BITS,
            k: DEFAULT_BLOOM_HASHES,
            seed: DEFAULT_BLOOM_SEED,
        }
    }

    fn width(&self, graph: &NetworkGraph) -> usize {
        match *self {
            Scheme::Exact => graph.arc_count(),
            Scheme::Bloom { m, .. } => m,
        }
    }
}

/// Fixed-width bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitField {
    words: Vec<u64>,
    width: usize,
}

impl BitField {
    pub fn zeros(width: usize) -> Self {
        Self {
            words: vec![0; width.div_ceil(64)],
            width,
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut f = Self::zeros(width);
        for i in 0..width {
            f.set(i);
        }
        f
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.width && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&i| self.get(i))
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bloom signature of `arc`: positions `h1 + i·h2 mod m` for `i < k`.
pub fn bloom_signature(arc: ArcId, m: usize, k: u32, seed: u64) -> impl Iterator<Item = usize> {
    let h1 = splitmix64(seed ^ u64::from(arc.0));
    // odd step keeps positions distinct when m is a power of two
    let h2 = splitmix64(h1) | 1;
    let m = m as u64;
    (0..u64::from(k)).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) % m) as usize)
}

/// Forwarding identifier carried in each packet of a delivery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardingId {
    pub bits: BitField,
    pub scheme: Scheme,
}

impl ForwardingId {
    pub fn empty(scheme: Scheme, width: usize) -> Self {
        Self {
            bits: BitField::zeros(width),
            scheme,
        }
    }

    pub fn width(&self) -> usize {
        self.bits.width()
    }

    pub fn insert(&mut self, arc: ArcId) {
        match self.scheme {
            Scheme::Exact => self.bits.set(arc.index()),
            Scheme::Bloom { m, k, seed } => {
                for pos in bloom_signature(arc, m, k, seed) {
                    self.bits.set(pos);
                }
            }
        }
    }

    /// Membership test for an arc label.
    pub fn matches(&self, arc: ArcId) -> bool {
        match self.scheme {
            Scheme::Exact => self.bits.get(arc.index()),
            Scheme::Bloom { m, k, seed } => bloom_signature(arc, m, k, seed).all(|p| self.bits.get(p)),
        }
    }
}

pub fn encode_arcs<I>(arcs: I, scheme: Scheme, width: usize) -> ForwardingId
where
    I: IntoIterator<Item = ArcId>,
{
    let mut fid = ForwardingId::empty(scheme, width);
    for arc in arcs {
        fid.insert(arc);
    }
    fid
}

pub fn encode_tree(graph: &NetworkGraph, tree: &MulticastTree, scheme: Scheme) -> ForwardingId {
    encode_arcs(tree.arcs.iter().copied(), scheme, scheme.width(graph))
}

/// Out-arcs of `node` whose label tests positive in `fid`.
pub fn forward(fid: &ForwardingId, node: NodeId, graph: &NetworkGraph) -> Vec<ArcId> {
    graph
        .out_arcs(node)
        .iter()
        .copied()
        .filter(|&a| fid.matches(a))
        .collect()
}

/// Result of flooding a packet through the fabric from its root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub nodes: BTreeSet<NodeId>,
    /// Traversed arcs in breadth-first order; each at most once.
    pub arcs: Vec<ArcId>,
}

/// Applies [`forward`] transitively from `root`. Each arc is traversed at
/// most once, so every identifier terminates, including all-ones.
pub fn deliver_traversal(fid: &ForwardingId, root: NodeId, graph: &NetworkGraph) -> Delivery {
    let mut used = vec![false; graph.arc_count()];
    let mut nodes = BTreeSet::from([root]);
    let mut arcs = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        for arc in forward(fid, node, graph) {
            if used[arc.index()] {
                continue;
            }
            used[arc.index()] = true;
            arcs.push(arc);
            let next = graph.arc(arc).dst;
            if nodes.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Delivery { nodes, arcs }
}

pub fn deliver(fid: &ForwardingId, root: NodeId, graph: &NetworkGraph) -> BTreeSet<NodeId> {
    deliver_traversal(fid, root, graph).nodes
}

/// Expected false-positive rate `(1 - e^(-k·n/m))^k`.
pub fn fpr_theoretical(m: usize, k: u32, n_inserted: usize) -> f64 {
    let k = f64::from(k);
    (1.0 - (-k * n_inserted as f64 / m as f64).exp()).powf(k)
}

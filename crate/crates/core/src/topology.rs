//! Network graphs loaded from Internet Topology Zoo GraphML, unit-weight
//! shortest paths and closeness centrality.
//!
//! Every undirected source edge becomes two directed arcs `u→v` and `v→u`
//! with consecutive ids, so arc `2k` and `2k + 1` are the two directions of
//! the `k`-th distinct edge in document order.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Dense 0-based node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Dense 0-based directed arc identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ArcId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("malformed GraphML document: {0}")]
    Malformed(String),
    #[error("node {0:?} has no Latitude/Longitude attributes")]
    MissingCoordinates(String),
    #[error("graph is not connected ({0} components)")]
    Disconnected(usize),
    #[error("graph has no nodes")]
    Empty,
    #[error("edge references unknown node {0:?}")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    /// Degrees north.
    pub lat: f64,
    /// Degrees east.
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: ArcId,
    pub src: NodeId,
    pub dst: NodeId,
}

/// Directed-arc graph with geographic node coordinates.
///
/// Immutable once built; construction guarantees dense ids, arc doubling and
/// connectivity.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    arc_index: HashMap<(NodeId, NodeId), ArcId>,
}

/// What to do with GraphML nodes that carry no coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnlocatedNodes {
    /// Fail with [`TopologyError::MissingCoordinates`].
    #[default]
    Reject,
    /// Drop the node and every edge touching it.
    Drop,
}

impl NetworkGraph {
    /// Builds a graph from located nodes and undirected edges given as index
    /// pairs into `nodes`. Self-loops are ignored and parallel edges are
    /// collapsed.
    pub fn from_edges(
        nodes: Vec<(String, f64, f64)>,
        edges: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        let n = nodes.len();
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, (label, lat, lon))| Node {
                id: NodeId(i as u32),
                label,
                lat,
                lon,
            })
            .collect();

        let mut seen = HashSet::new();
        let mut arcs = Vec::with_capacity(edges.len() * 2);
        let mut out_arcs = vec![Vec::new(); n];
        let mut arc_index = HashMap::new();
        for &(u, v) in edges {
            if u >= n {
                return Err(TopologyError::UnknownNode(u.to_string()));
            }
            if v >= n {
                return Err(TopologyError::UnknownNode(v.to_string()));
            }
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            for (s, d) in [(u, v), (v, u)] {
                let id = ArcId(arcs.len() as u32);
                let (src, dst) = (NodeId(s as u32), NodeId(d as u32));
                arcs.push(Arc { id, src, dst });
                out_arcs[s].push(id);
                arc_index.insert((src, dst), id);
            }
        }

        let graph = NetworkGraph {
            nodes,
            arcs,
            out_arcs,
            arc_index,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(TopologyError::Disconnected(components));
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.index()]
    }

    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.out_arcs[node.index()]
    }

    /// The arc `src→dst`, if the two nodes are adjacent.
    pub fn find_arc(&self, src: NodeId, dst: NodeId) -> Option<ArcId> {
        self.arc_index.get(&(src, dst)).copied()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut components = 0;
        for start in 0..self.nodes.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &a in &self.out_arcs[u] {
                    let v = self.arcs[a.index()].dst.index();
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }
}

/// Parses a Topology Zoo GraphML document, rejecting nodes without
/// coordinates.
pub fn load_topology(document: &str) -> Result<NetworkGraph, TopologyError> {
    load_topology_with(document, UnlocatedNodes::Reject)
}

pub fn load_topology_with(
    document: &str,
    unlocated: UnlocatedNodes,
) -> Result<NetworkGraph, TopologyError> {
    let doc = roxmltree::Document::parse(document)
        .map_err(|e| TopologyError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(TopologyError::Malformed(format!(
            "root element is <{}>, expected <graphml>",
            root.tag_name().name()
        )));
    }

    // key id -> attribute name, node keys only
    let mut node_keys: HashMap<&str, &str> = HashMap::new();
    for key in root.children().filter(|n| n.has_tag_name("key")) {
        let for_node = matches!(key.attribute("for"), Some("node") | Some("all"));
        if let (true, Some(id), Some(name)) = (for_node, key.attribute("id"), key.attribute("attr.name")) {
            node_keys.insert(id, name);
        }
    }

    let graph = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| TopologyError::Malformed("missing <graph> element".into()))?;

    let mut located: Vec<(String, f64, f64)> = Vec::new();
    let mut index_of: HashMap<&str, Option<usize>> = HashMap::new();
    for node in graph.children().filter(|n| n.has_tag_name("node")) {
        let xml_id = node
            .attribute("id")
            .ok_or_else(|| TopologyError::Malformed("<node> without id".into()))?;
        let mut label = None;
        let mut lat = None;
        let mut lon = None;
        for data in node.children().filter(|n| n.has_tag_name("data")) {
            let Some(name) = data.attribute("key").and_then(|k| node_keys.get(k)) else {
                continue;
            };
            let text = data.text().unwrap_or("").trim();
            match *name {
                "label" => label = Some(text.to_string()),
                "Latitude" => lat = Some(parse_degrees(xml_id, "Latitude", text)?),
                "Longitude" => lon = Some(parse_degrees(xml_id, "Longitude", text)?),
                _ => {}
            }
        }
        let label = label.unwrap_or_else(|| xml_id.to_string());
        match (lat, lon) {
            (Some(lat), Some(lon)) => {
                index_of.insert(xml_id, Some(located.len()));
                located.push((label, lat, lon));
            }
            _ => match unlocated {
                UnlocatedNodes::Reject => {
                    return Err(TopologyError::MissingCoordinates(format!("{xml_id} ({label})")))
                }
                UnlocatedNodes::Drop => {
                    index_of.insert(xml_id, None);
                }
            },
        }
    }

    let mut edges = Vec::new();
    for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
        let endpoint = |attr: &str| -> Result<Option<usize>, TopologyError> {
            let id = edge
                .attribute(attr)
                .ok_or_else(|| TopologyError::Malformed(format!("<edge> without {attr}")))?;
            index_of
                .get(id)
                .copied()
                .ok_or_else(|| TopologyError::UnknownNode(id.to_string()))
        };
        if let (Some(u), Some(v)) = (endpoint("source")?, endpoint("target")?) {
            edges.push((u, v));
        }
    }

    NetworkGraph::from_edges(located, &edges)
}

fn parse_degrees(node: &str, attr: &str, text: &str) -> Result<f64, TopologyError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| TopologyError::Malformed(format!("node {node}: bad {attr} value {text:?}")))
}

/// All-pairs hop counts plus one predecessor tree per source.
#[derive(Debug, Clone)]
pub struct HopTable {
    n: usize,
    dist: Vec<u32>,
    pred: Vec<Option<NodeId>>,
    pred_arc: Vec<Option<ArcId>>,
}

impl HopTable {
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, src: NodeId, dst: NodeId) -> u32 {
        self.dist[src.index() * self.n + dst.index()]
    }

    /// Predecessor of `dst` on the shortest path tree rooted at `src`;
    /// `None` when `src == dst`.
    #[inline]
    pub fn pred(&self, src: NodeId, dst: NodeId) -> Option<NodeId> {
        self.pred[src.index() * self.n + dst.index()]
    }

    #[inline]
    fn pred_arc(&self, src: NodeId, dst: NodeId) -> Option<ArcId> {
        self.pred_arc[src.index() * self.n + dst.index()]
    }

    /// Nearest candidate to `from`, ties to the lowest node id.
    pub fn nearest<I>(&self, from: NodeId, candidates: I) -> Option<NodeId>
    where
        I: IntoIterator<Item = NodeId>,
    {
        candidates
            .into_iter()
            .min_by_key(|&c| (self.dist(from, c), c))
    }
}

/// Unit-weight shortest paths from every node. The predecessor of `t` in the
/// tree rooted at `s` is the lowest-id neighbour one hop closer to `s`.
pub fn all_pairs(graph: &NetworkGraph) -> HopTable {
    let n = graph.node_count();
    let mut dist = vec![u32::MAX; n * n];
    let mut pred = vec![None; n * n];
    let mut pred_arc = vec![None; n * n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in graph.out_arcs(NodeId(u as u32)) {
                let v = graph.arc(a).dst.index();
                if row[v] == u32::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for t in 0..n {
            if t == s {
                continue;
            }
            // in-arcs of t are the reverses of its out-arcs
            let best = graph
                .out_arcs(NodeId(t as u32))
                .iter()
                .map(|&a| graph.arc(a).dst)
                .filter(|u| row[u.index()] + 1 == row[t])
                .min();
            let u = best.expect("connected graph has a predecessor for every node");
            pred[s * n + t] = Some(u);
            pred_arc[s * n + t] = graph.find_arc(u, NodeId(t as u32));
        }
    }

    HopTable {
        n,
        dist,
        pred,
        pred_arc,
    }
}

/// Arcs of the shortest `src→dst` path, in travel order.
pub fn extract_path(hops: &HopTable, src: NodeId, dst: NodeId) -> Vec<ArcId> {
    let mut path = Vec::with_capacity(hops.dist(src, dst) as usize);
    let mut cur = dst;
    while cur != src {
        let arc = hops.pred_arc(src, cur).expect("predecessor tree reaches every node");
        path.push(arc);
        cur = hops.pred(src, cur).expect("predecessor tree reaches every node");
    }
    path.reverse();
    path
}

/// Closeness centrality `(|V| - 1) / Σ dist(node, u)`. A single-node graph
/// has closeness 1.
pub fn closeness(hops: &HopTable, node: NodeId) -> f64 {
    let n = hops.node_count();
    if n <= 1 {
        return 1.0;
    }
    let total: u64 = (0..n as u32)
        .map(|u| u64::from(hops.dist(node, NodeId(u))))
        .sum();
    (n - 1) as f64 / total as f64
}

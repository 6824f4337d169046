//! Path computation: scoped pub/sub rendezvous, nearest-subscriber matching
//! and multicast tree construction.
//!
//! Service offerings are subscriptions under the `HTTP` root scope keyed by
//! FQDN. Micro-services live under `HTTP-Micro` and carry a resource pattern
//! that may end in a single `*`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::topology::{extract_path, ArcId, HopTable, NetworkGraph, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PcfError {
    #[error("malformed wildcard pattern {0:?}: `*` may appear once, in final position")]
    BadPattern(String),
    #[error("no subscriber for {0}")]
    NoSubscriber(String),
    #[error("multicast tree needs at least one leaf")]
    NoLeaves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootScope {
    Http,
    HttpMicro,
}

impl fmt::Display for RootScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootScope::Http => "HTTP",
            RootScope::HttpMicro => "HTTP-Micro",
        })
    }
}

/// `root_scope / service [/ resource]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScopedName {
    scope: RootScope,
    service: String,
    resource: Option<String>,
}

impl ScopedName {
    pub fn new(scope: RootScope, service: impl Into<String>, resource: Option<String>) -> Result<Self, PcfError> {
        if let Some(r) = &resource {
            validate_pattern(r)?;
        }
        Ok(Self {
            scope,
            service: service.into(),
            resource,
        })
    }

    /// FQDN-level name under `HTTP`.
    pub fn service(fqdn: impl Into<String>) -> Self {
        Self {
            scope: RootScope::Http,
            service: fqdn.into(),
            resource: None,
        }
    }

    /// Resource name or pattern under `HTTP-Micro`.
    pub fn micro(fqdn: impl Into<String>, resource: impl Into<String>) -> Result<Self, PcfError> {
        Self::new(RootScope::HttpMicro, fqdn, Some(resource.into()))
    }

    pub fn scope(&self) -> RootScope {
        self.scope
    }

    pub fn fqdn(&self) -> &str {
        &self.service
    }

    pub fn resource(&self) -> Option<&str> {
        self.resource.as_deref()
    }
}

impl fmt::Display for ScopedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/{}/{}", self.scope, self.service)?;
        if let Some(r) = &self.resource {
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

fn validate_pattern(pattern: &str) -> Result<(), PcfError> {
    match pattern.find('*') {
        Some(i) if i + 1 != pattern.len() => Err(PcfError::BadPattern(pattern.to_string())),
        _ => Ok(()),
    }
}

/// True iff `url` equals `pattern`, or `pattern` ends in `*` and `url`
/// starts with the part before it.
pub fn wildcard_match(pattern: &str, url: &str) -> Result<bool, PcfError> {
    validate_pattern(pattern)?;
    Ok(match pattern.strip_suffix('*') {
        Some(prefix) => url.starts_with(prefix),
        None => url == pattern,
    })
}

/// Subscriptions by scoped name. Single writer, many readers.
#[derive(Debug, Clone, Default)]
pub struct RendezvousTable {
    subscriptions: BTreeMap<ScopedName, BTreeSet<NodeId>>,
}

impl RendezvousTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `sr` under `name`. Idempotent.
    pub fn subscribe(&mut self, name: ScopedName, sr: NodeId) {
        self.subscriptions.entry(name).or_default().insert(sr);
    }

    pub fn subscribers(&self, name: &ScopedName) -> impl Iterator<Item = NodeId> + '_ {
        self.subscriptions.get(name).into_iter().flatten().copied()
    }

    /// Number of distinct `(name, subscriber)` pairs.
    pub fn len(&self) -> usize {
        self.subscriptions.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.subscriptions.is_empty()
    }

    /// Subscribers whose names cover `publication`. Under `HTTP-Micro` a
    /// concrete resource is resolved against every wildcard of the same FQDN.
    pub fn candidates(&self, publication: &ScopedName) -> BTreeSet<NodeId> {
        match (publication.scope, &publication.resource) {
            (RootScope::HttpMicro, Some(url)) => self
                .subscriptions
                .range(micro_start(&publication.service)..)
                .take_while(|(name, _)| name.scope == RootScope::HttpMicro && name.service == publication.service)
                .filter(|(name, _)| {
                    name.resource
                        .as_deref()
                        .is_some_and(|p| wildcard_match(p, url).unwrap_or(false))
                })
                .flat_map(|(_, subs)| subs.iter().copied())
                .collect(),
            _ => self.subscribers(publication).collect(),
        }
    }

    /// Nearest covering subscriber to `publisher` by hop count, ties to the
    /// lowest node id. A publisher that subscribes to the name matches
    /// itself.
    pub fn match_publication(
        &self,
        hops: &HopTable,
        publication: &ScopedName,
        publisher: NodeId,
    ) -> Result<NodeId, PcfError> {
        hops.nearest(publisher, self.candidates(publication))
            .ok_or_else(|| PcfError::NoSubscriber(publication.to_string()))
    }
}

fn micro_start(fqdn: &str) -> ScopedName {
    ScopedName {
        scope: RootScope::HttpMicro,
        service: fqdn.to_string(),
        resource: None,
    }
}

/// Delivery tree from a service point to its consumption points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastTree {
    pub root: NodeId,
    pub leaves: BTreeSet<NodeId>,
    pub arcs: BTreeSet<ArcId>,
}

impl MulticastTree {
    /// Root plus every arc endpoint.
    pub fn nodes(&self, graph: &NetworkGraph) -> BTreeSet<NodeId> {
        let mut nodes: BTreeSet<NodeId> = self.arcs.iter().map(|&a| graph.arc(a).dst).collect();
        nodes.insert(self.root);
        nodes
    }
}

/// Union of the predecessor-tree shortest paths from `root` to each leaf.
pub fn build_tree(hops: &HopTable, root: NodeId, leaves: &BTreeSet<NodeId>) -> Result<MulticastTree, PcfError> {
    if leaves.is_empty() {
        return Err(PcfError::NoLeaves);
    }
    let arcs = leaves
        .iter()
        .flat_map(|&leaf| extract_path(hops, root, leaf))
        .collect();
    Ok(MulticastTree {
        root,
        leaves: leaves.clone(),
        arcs,
    })
}

//! Service Router behaviour.
//!
//! Fog and Cloud SRs subscribe to the service FQDN under `HTTP`; Cloud SRs
//! additionally offer the whole item bundle as a micro-service under
//! `HTTP-Micro`. A client request is matched to the nearest FQDN subscriber;
//! when that point lacks the item it publishes a micro-service request that
//! the PCF matches to the nearest covering Cloud SR.
//!
//! Quasi-synchronous requests for the same item at one service point are
//! merged per catchment interval and answered with a single multicast
//! response.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fabric::{deliver_traversal, encode_tree, Scheme};
use crate::pcf::{build_tree, PcfError, RendezvousTable, ScopedName};
use crate::placement::Placement;
use crate::topology::{extract_path, ArcId, HopTable, NetworkGraph, NodeId};
use crate::workload::{Item, ItemId};

/// FQDN offered by every service point in the simulator.
pub const SERVICE_FQDN: &str = "service.fog.example";
/// Micro-service pattern covering every catalogue item.
pub const ITEM_BUNDLE_PATTERN: &str = "/items/*";

/// Resource URL of a catalogue item.
pub fn item_url(item: ItemId) -> String {
    format!("/items/{}", item.0)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no cloud service point covers item {0}")]
    NoCoveringCloud(u32),
    #[error("no service point offers the service")]
    NoServicePoint,
    #[error("catalogue fraction cached at fog must lie in [0, 1), got {0}")]
    BadCacheFraction(String),
    #[error(transparent)]
    Pcf(#[from] PcfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Fog,
    Cloud,
}

/// Items held by a service point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheSet {
    All,
    /// Ranks `1..=n`.
    TopRanks(u32),
}

impl CacheSet {
    pub fn contains(&self, item: ItemId) -> bool {
        match *self {
            CacheSet::All => true,
            CacheSet::TopRanks(n) => item.0 <= n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrProfile {
    pub node: NodeId,
    pub role: Role,
    pub cache: CacheSet,
    pub fqdn: String,
}

/// Service point profiles of one trial, with their rendezvous state.
#[derive(Debug, Clone)]
pub struct ServiceRouting {
    profiles: Vec<SrProfile>,
    table: RendezvousTable,
    fqdn: String,
}

impl ServiceRouting {
    /// Fog points cache the `floor(fraction · catalogue_len)` most popular
    /// items; Cloud points cache everything.
    pub fn offer(placement: &Placement, catalogue_len: usize, fog_cache_fraction: f64) -> Result<Self, ResolveError> {
        if !(0.0..1.0).contains(&fog_cache_fraction) {
            return Err(ResolveError::BadCacheFraction(fog_cache_fraction.to_string()));
        }
        let fog_items = (fog_cache_fraction * catalogue_len as f64).floor() as u32;
        let fog = placement.fog.iter().map(|&node| SrProfile {
            node,
            role: Role::Fog,
            cache: CacheSet::TopRanks(fog_items),
            fqdn: SERVICE_FQDN.to_string(),
        });
        let cloud = placement.cloud.iter().map(|&node| SrProfile {
            node,
            role: Role::Cloud,
            cache: CacheSet::All,
            fqdn: SERVICE_FQDN.to_string(),
        });
        Ok(Self::from_profiles(fog.chain(cloud).collect(), SERVICE_FQDN))
    }

    pub fn from_profiles(profiles: Vec<SrProfile>, fqdn: &str) -> Self {
        let mut table = RendezvousTable::new();
        for p in &profiles {
            table.subscribe(ScopedName::service(&p.fqdn), p.node);
            if p.cache == CacheSet::All {
                let bundle = ScopedName::micro(&p.fqdn, ITEM_BUNDLE_PATTERN).expect("valid pattern");
                table.subscribe(bundle, p.node);
            }
        }
        Self {
            profiles,
            table,
            fqdn: fqdn.to_string(),
        }
    }

    pub fn profiles(&self) -> &[SrProfile] {
        &self.profiles
    }

    pub fn table(&self) -> &RendezvousTable {
        &self.table
    }

    pub fn fqdn(&self) -> &str {
        &self.fqdn
    }

    /// Whether any service point at `node` holds `item`.
    pub fn caches(&self, node: NodeId, item: ItemId) -> bool {
        self.profiles.iter().any(|p| p.node == node && p.cache.contains(item))
    }

    /// Distinct service point nodes, ascending.
    pub fn service_points(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self.profiles.iter().map(|p| p.node).collect();
        set.into_iter().collect()
    }

    /// Distinct Cloud nodes, ascending.
    pub fn clouds(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self
            .profiles
            .iter()
            .filter(|p| p.role == Role::Cloud)
            .map(|p| p.node)
            .collect();
        set.into_iter().collect()
    }
}

/// One request/response exchange. `response_arcs` run from `server` to
/// `requester`; the request travels the reverse arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub requester: NodeId,
    pub server: NodeId,
    pub response_arcs: Vec<ArcId>,
    /// Bits per second.
    pub bitrate: f64,
}

impl Leg {
    pub fn hops(&self) -> u32 {
        self.response_arcs.len() as u32
    }

    fn between(hops: &HopTable, requester: NodeId, server: NodeId, bitrate: f64) -> Self {
        Self {
            requester,
            server,
            response_arcs: extract_path(hops, server, requester),
            bitrate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanEvent {
    /// Client SR requests the resource from the matched service point.
    Request { from: NodeId, to: NodeId, name: ScopedName },
    /// Service point asks for an uncached resource under `HTTP-Micro`.
    MicroPublication { from: NodeId, to: NodeId, name: ScopedName },
    Response { from: NodeId, to: NodeId },
}

/// Legs needed to satisfy one request: the client leg, then an optional
/// fallback pull.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryPlan {
    pub item: ItemId,
    pub legs: Vec<Leg>,
    pub client_path_hops: u32,
}

impl DeliveryPlan {
    fn new(item: ItemId, legs: Vec<Leg>) -> Self {
        let client_path_hops = legs.first().map_or(0, Leg::hops);
        Self {
            item,
            legs,
            client_path_hops,
        }
    }

    pub fn serving_point(&self) -> NodeId {
        self.legs[0].server
    }

    pub fn fallback(&self) -> Option<&Leg> {
        self.legs.get(1)
    }

    /// Bit-hops per second one request puts on the core.
    pub fn backhaul(&self, include_fallback: bool) -> f64 {
        let take = if include_fallback { self.legs.len() } else { 1 };
        self.legs[..take]
            .iter()
            .map(|l| l.bitrate * f64::from(l.hops()))
            .sum()
    }

    /// Publication sequence: request, optional micro-service publication and
    /// its response, then the response to the client.
    pub fn events(&self, fqdn: &str) -> Vec<PlanEvent> {
        let client = &self.legs[0];
        let mut events = vec![PlanEvent::Request {
            from: client.requester,
            to: client.server,
            name: ScopedName::service(fqdn),
        }];
        if let Some(pull) = self.fallback() {
            events.push(PlanEvent::MicroPublication {
                from: pull.requester,
                to: pull.server,
                name: ScopedName::micro(fqdn, item_url(self.item)).expect("concrete URL"),
            });
            events.push(PlanEvent::Response {
                from: pull.server,
                to: pull.requester,
            });
        }
        events.push(PlanEvent::Response {
            from: client.server,
            to: client.requester,
        });
        events
    }
}

/// Resolves a request through the PCF, falling back to the nearest Cloud
/// micro-service when the matched point does not cache the item.
pub fn resolve_request(
    client: NodeId,
    item: &Item,
    routing: &ServiceRouting,
    hops: &HopTable,
) -> Result<DeliveryPlan, ResolveError> {
    let table = routing.table();
    let point = table
        .match_publication(hops, &ScopedName::service(routing.fqdn()), client)
        .map_err(|_| ResolveError::NoServicePoint)?;
    let mut legs = vec![Leg::between(hops, client, point, item.bitrate)];
    if !routing.caches(point, item.id) {
        let micro = ScopedName::micro(routing.fqdn(), item_url(item.id))?;
        let cloud = table
            .match_publication(hops, &micro, point)
            .map_err(|_| ResolveError::NoCoveringCloud(item.id.0))?;
        legs.push(Leg::between(hops, point, cloud, item.bitrate));
    }
    Ok(DeliveryPlan::new(item.id, legs))
}

/// Requests merged into one multicast response.
#[derive(Debug, Clone, PartialEq)]
pub struct CatchmentGroup {
    pub service_point: NodeId,
    pub item: ItemId,
    /// One entry per merged request.
    pub members: Vec<NodeId>,
    pub window_start: f64,
    pub interval: f64,
}

/// Event-driven windowing: the first request opens `[t, t + T]`, every
/// request up to `t + T` joins, the first later one opens the next window.
/// `arrivals` must be sorted by time.
pub fn catchment_group(
    service_point: NodeId,
    item: ItemId,
    arrivals: &[(NodeId, f64)],
    interval: f64,
) -> Vec<CatchmentGroup> {
    debug_assert!(arrivals.windows(2).all(|w| w[0].1 <= w[1].1), "arrivals must be sorted");
    let mut groups: Vec<CatchmentGroup> = Vec::new();
    for &(node, t) in arrivals {
        match groups.last_mut() {
            Some(g) if t <= g.window_start + interval => g.members.push(node),
            _ => groups.push(CatchmentGroup {
                service_point,
                item,
                members: vec![node],
                window_start: t,
                interval,
            }),
        }
    }
    groups
}

/// Window rate `Λ / (1 + Λ·T)` for Poisson requests at rate `Λ`.
pub fn group_rate(rate: f64, interval: f64) -> f64 {
    rate / (1.0 + rate * interval)
}

/// Rate of windows holding at least one request from a sub-population of
/// rate `sub_rate` out of `total_rate`: `G · (1 − (1 − q)·e^(−sub_rate·T))`
/// with `q = sub_rate / total_rate`. Equals `group_rate` for the whole
/// population and `sub_rate` at `T = 0`.
pub fn covered_group_rate(total_rate: f64, sub_rate: f64, interval: f64) -> f64 {
    if total_rate <= 0.0 || sub_rate <= 0.0 {
        return 0.0;
    }
    let q = (sub_rate / total_rate).min(1.0);
    group_rate(total_rate, interval) * (1.0 - (1.0 - q) * (-sub_rate * interval).exp())
}

/// Per-arc carried traffic in bits per second.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLoad {
    bps: Vec<f64>,
}

impl ArcLoad {
    pub fn zeros(arc_count: usize) -> Self {
        Self {
            bps: vec![0.0; arc_count],
        }
    }

    pub fn add(&mut self, arc: ArcId, bps: f64) {
        self.bps[arc.index()] += bps;
    }

    pub fn add_path(&mut self, arcs: &[ArcId], bps: f64) {
        for &a in arcs {
            self.add(a, bps);
        }
    }

    pub fn get(&self, arc: ArcId) -> f64 {
        self.bps[arc.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.bps
    }

    /// Sum over all arcs.
    pub fn total(&self) -> f64 {
        self.bps.iter().sum()
    }

    pub fn merge(&mut self, other: &ArcLoad) {
        for (a, b) in self.bps.iter_mut().zip(&other.bps) {
            *a += b;
        }
    }
}

/// Every tree arc carries `groups_per_s · bitrate` (1-second chunks).
pub fn multicast_load(groups_per_s: f64, tree: &crate::pcf::MulticastTree, bitrate: f64, arc_count: usize) -> ArcLoad {
    let mut load = ArcLoad::zeros(arc_count);
    for &arc in &tree.arcs {
        load.add(arc, groups_per_s * bitrate);
    }
    load
}

/// Aggregated requests for one item at one service point.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastDemand {
    pub service_point: NodeId,
    pub item: ItemId,
    /// Bits per second.
    pub bitrate: f64,
    /// Request rate per consumption node.
    pub members: BTreeMap<NodeId, f64>,
}

impl MulticastDemand {
    pub fn total_rate(&self) -> f64 {
        self.members.values().sum()
    }

    /// Remote consumption points; `None` if every request is local.
    pub fn leaves(&self) -> Option<BTreeSet<NodeId>> {
        let leaves: BTreeSet<NodeId> = self
            .members
            .keys()
            .copied()
            .filter(|&v| v != self.service_point)
            .collect();
        (!leaves.is_empty()).then_some(leaves)
    }

    /// Request rate flowing through each arc of the delivery tree.
    pub fn downstream_rates(&self, hops: &HopTable) -> BTreeMap<ArcId, f64> {
        let mut rates = BTreeMap::new();
        for (&v, &r) in &self.members {
            for arc in extract_path(hops, self.service_point, v) {
                *rates.entry(arc).or_insert(0.0) += r;
            }
        }
        rates
    }
}

/// Adds the response traffic of `demand` under catchment interval
/// `interval`: the service point answers each window once, and an arc
/// carries a window's response iff some member of that window sits below
/// it. Arcs reached only through Bloom false positives carry the traffic
/// arriving at their tail.
pub fn accumulate_multicast(
    load: &mut ArcLoad,
    graph: &NetworkGraph,
    hops: &HopTable,
    demand: &MulticastDemand,
    interval: f64,
    scheme: Scheme,
) -> Result<(), PcfError> {
    let Some(leaves) = demand.leaves() else {
        return Ok(());
    };
    let tree = build_tree(hops, demand.service_point, &leaves)?;
    let total = demand.total_rate();
    let downstream = demand.downstream_rates(hops);
    let fid = encode_tree(graph, &tree, scheme);
    let delivery = deliver_traversal(&fid, demand.service_point, graph);

    let mut node_rate = vec![0.0f64; graph.node_count()];
    node_rate[demand.service_point.index()] = group_rate(total, interval);
    for arc in delivery.arcs {
        let a = graph.arc(arc);
        let rate = match downstream.get(&arc) {
            Some(&sub) => covered_group_rate(total, sub, interval),
            None => node_rate[a.src.index()],
        };
        load.add(arc, rate * demand.bitrate);
        let dst = &mut node_rate[a.dst.index()];
        *dst = dst.max(rate);
    }
    Ok(())
}

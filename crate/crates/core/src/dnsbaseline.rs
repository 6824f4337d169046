//! DNS-redirection baseline: a client resolves through its nearest LDNS, and
//! the LDNS hands out the replica nearest to itself.

use crate::srouter::{DeliveryPlan, Leg, ResolveError, ServiceRouting};
use crate::topology::{extract_path, HopTable, NodeId};
use crate::workload::Item;

#[derive(Debug, Clone)]
pub struct DnsConfig {
    pub ldns: Vec<NodeId>,
    /// Same profiles and cache model as the service-routed architecture.
    pub services: ServiceRouting,
}

impl DnsConfig {
    pub fn service_points(&self) -> Vec<NodeId> {
        self.services.service_points()
    }
}

/// Nearest LDNS to `client`, ties to the lowest id.
pub fn ldns_of(client: NodeId, ldns: &[NodeId], hops: &HopTable) -> Option<NodeId> {
    hops.nearest(client, ldns.iter().copied())
}

/// Service point nearest to the LDNS (not the client), ties to the lowest id.
pub fn dns_select(ldns: NodeId, service_points: &[NodeId], hops: &HopTable) -> Option<NodeId> {
    hops.nearest(ldns, service_points.iter().copied())
}

/// Unicast resolution through DNS redirection. A selected point lacking the
/// item pulls it from its nearest Cloud point.
pub fn resolve_request_dns(
    client: NodeId,
    item: &Item,
    config: &DnsConfig,
    hops: &HopTable,
) -> Result<DeliveryPlan, ResolveError> {
    let resolver = ldns_of(client, &config.ldns, hops).ok_or(ResolveError::NoServicePoint)?;
    let point =
        dns_select(resolver, &config.service_points(), hops).ok_or(ResolveError::NoServicePoint)?;
    let mut legs = vec![Leg {
        requester: client,
        server: point,
        response_arcs: extract_path(hops, point, client),
        bitrate: item.bitrate,
    }];
    if !config.services.caches(point, item.id) {
        let cloud = hops
            .nearest(point, config.services.clouds())
            .ok_or(ResolveError::NoCoveringCloud(item.id.0))?;
        legs.push(Leg {
            requester: point,
            server: cloud,
            response_arcs: extract_path(hops, cloud, point),
            bitrate: item.bitrate,
        });
    }
    let client_path_hops = legs[0].hops();
    Ok(DeliveryPlan {
        item: item.id,
        legs,
        client_path_hops,
    })
}

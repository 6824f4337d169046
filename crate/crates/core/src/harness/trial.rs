use std::collections::BTreeMap;

use super::{Arch, Environment, Error, ScenarioConfig};
use crate::dnsbaseline::{resolve_request_dns, DnsConfig};
use crate::fabric::splitmix64;
use crate::placement::{place_all, Placement, PlacementConfig};
use crate::srouter::{accumulate_multicast, group_rate, resolve_request, ArcLoad, MulticastDemand, ServiceRouting};
use crate::topology::{ArcId, NodeId};
use crate::workload::{build_catalogue, draw_demand, DemandMatrix, ItemId, ServiceCatalogue};

const CATALOGUE_STREAM: u64 = 0xc47a_1095_0e00_0001;
const DEMAND_STREAM: u64 = 0xde3a_4d00_0e00_0002;

/// Seed of trial `index`. Depends only on the base seed and the index, so
/// every configuration of a sweep sees the same catalogue, demand and
/// placement draws for a given trial.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(index as u64))
}

/// Random inputs of one trial.
#[derive(Debug, Clone)]
pub struct TrialInputs {
    pub seed: u64,
    pub placement: Placement,
    pub catalogue: ServiceCatalogue,
    pub demand: DemandMatrix,
}

pub fn trial_inputs(env: &Environment, config: &ScenarioConfig, index: usize) -> Result<TrialInputs, Error> {
    let s = &config.settings;
    let seed = trial_seed(s.seed, index);
    let placement = place_all(
        &env.populations,
        &env.hops,
        &PlacementConfig {
            mode: config.placement,
            counts: config.counts(),
        },
        seed,
    )?;
    let catalogue = build_catalogue(
        s.catalogue.items,
        s.catalogue.alpha,
        &s.catalogue.bitrates_bps(),
        splitmix64(seed ^ CATALOGUE_STREAM),
    )?;
    let demand = draw_demand(
        &env.populations,
        &catalogue,
        s.load_fraction,
        s.target_bitrate,
        splitmix64(seed ^ DEMAND_STREAM),
    )?;
    Ok(TrialInputs {
        seed,
        placement,
        catalogue,
        demand,
    })
}

/// Measurements of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    /// Unicast per-arc load.
    pub unicast: ArcLoad,
    /// Per-arc load with catchment aggregation, one entry per interval in
    /// configuration order.
    pub multicast: Vec<(f64, ArcLoad)>,
    /// Client path length of every request, in demand-matrix order.
    pub path_samples: Vec<u32>,
    pub offered_bitrate: f64,
}

pub fn run_trial(env: &Environment, config: &ScenarioConfig, index: usize) -> Result<TrialMetrics, Error> {
    let inputs = trial_inputs(env, config, index)?;
    evaluate(env, config, &inputs.placement, &inputs.catalogue, &inputs.demand)
}

/// Resolves every request of `demand` and accumulates the arc loads.
pub fn evaluate(
    env: &Environment,
    config: &ScenarioConfig,
    placement: &Placement,
    catalogue: &ServiceCatalogue,
    demand: &DemandMatrix,
) -> Result<TrialMetrics, Error> {
    let s = &config.settings;
    let services = ServiceRouting::offer(placement, catalogue.len(), s.fog_cache_fraction)?;
    let dns = (config.arch == Arch::Dns).then(|| DnsConfig {
        ldns: placement.ldns.clone(),
        services: services.clone(),
    });
    let arc_count = env.graph.arc_count();
    let mut unicast = ArcLoad::zeros(arc_count);
    let mut path_samples = Vec::with_capacity(demand.total_requests() as usize);
    let mut groups: BTreeMap<(NodeId, ItemId), MulticastDemand> = BTreeMap::new();
    // (fog, item) -> (pull arcs, bitrate, request rate)
    let mut pulls: BTreeMap<(NodeId, ItemId), (Vec<ArcId>, f64, f64)> = BTreeMap::new();

    for (client, id, count) in demand.iter() {
        let item = catalogue.item(id);
        let plan = match &dns {
            Some(dns) => resolve_request_dns(client, item, dns, &env.hops)?,
            None => resolve_request(client, item, &services, &env.hops)?,
        };
        let rate = f64::from(count);
        let leg = &plan.legs[0];
        unicast.add_path(&leg.response_arcs, rate * leg.bitrate);
        path_samples.extend(std::iter::repeat_n(plan.client_path_hops, count as usize));
        if let Some(pull) = plan.fallback().filter(|_| s.count_fallback) {
            unicast.add_path(&pull.response_arcs, rate * pull.bitrate);
            pulls
                .entry((pull.requester, id))
                .or_insert_with(|| (pull.response_arcs.clone(), pull.bitrate, 0.0))
                .2 += rate;
        }
        if !config.catchment.is_empty() {
            *groups
                .entry((leg.server, id))
                .or_insert_with(|| MulticastDemand {
                    service_point: leg.server,
                    item: id,
                    bitrate: item.bitrate,
                    members: BTreeMap::new(),
                })
                .members
                .entry(client)
                .or_insert(0.0) += rate;
        }
    }

    let scheme = s.forwarding_scheme();
    let multicast = config
        .catchment
        .iter()
        .map(|&interval| {
            let mut load = ArcLoad::zeros(arc_count);
            for group in groups.values() {
                accumulate_multicast(&mut load, &env.graph, &env.hops, group, interval, scheme)?;
            }
            // the fog merges its own misses the same way
            for (arcs, bitrate, rate) in pulls.values() {
                load.add_path(arcs, group_rate(*rate, interval) * bitrate);
            }
            Ok((interval, load))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(TrialMetrics {
        unicast,
        multicast,
        path_samples,
        offered_bitrate: demand.offered_bitrate,
    })
}

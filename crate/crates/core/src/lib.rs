//! Trace-driven simulator comparing service-routed Fog delivery over an
//! information-centric core with a DNS-redirection baseline.
//!
//! Modules, bottom-up: [`topology`] loads the network and computes hop
//! tables, [`workload`] builds populations, catalogues and demand,
//! [`placement`] picks Fog/Cloud/LDNS nodes, [`pcf`] does rendezvous and
//! tree computation, [`fabric`] encodes and forwards on arc identifiers,
//! [`srouter`] and [`dnsbaseline`] resolve requests, and [`harness`] runs
//! trials and sweeps.

pub mod dnsbaseline;
pub mod fabric;
pub mod harness;
pub mod pcf;
pub mod placement;
pub mod srouter;
pub mod topology;
pub mod workload;

#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use fogsim::harness::Environment;
use fogsim::topology::{load_topology, NetworkGraph};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn geant() -> NetworkGraph {
    load_topology(&read_fixture("geant2012.graphml")).unwrap()
}

pub fn geant_env() -> Environment {
    Environment::load(&fixture("geant2012.graphml"), &fixture("geant2012_population.csv")).unwrap()
}

/// Undirected adjacency lists from an edge list, parallel edges kept.
pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    adj
}

/// Plain BFS hop counts from `src`; `u32::MAX` when unreachable.
pub fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Floyd-Warshall over unit weights.
pub fn floyd(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    const INF: u32 = u32::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(u, v) in edges {
        if u != v {
            d[u][v] = 1;
            d[v][u] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Connected random graph: a random spanning tree plus `extra` random edges.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: usize) -> (NetworkGraph, Vec<(usize, usize)>) {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let nodes = (0..n).map(|i| (format!("n{i}"), 0.0, i as f64 * 0.1)).collect();
    (NetworkGraph::from_edges(nodes, &edges).unwrap(), edges)
}

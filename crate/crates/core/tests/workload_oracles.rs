mod common;

use fogsim::topology::NodeId;
use fogsim::workload::{assign_population, build_catalogue, draw_demand, ItemId, PopulationCell, PopulationGrid};
use proptest::prelude::*;

use common::*;

fn unit_vector(lat: f64, lon: f64) -> [f64; 3] {
    let (la, lo) = (lat.to_radians(), lon.to_radians());
    [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[test]
fn voronoi_totals_match_linear_scan() {
    let g = geant();
    let grid = PopulationGrid::parse(&read_fixture("geant2012_population.csv")).unwrap();
    let got = assign_population(&g, &grid).unwrap();
    let anchors: Vec<[f64; 3]> = g.nodes().iter().map(|n| unit_vector(n.lat, n.lon)).collect();
    let mut oracle = vec![0u64; g.node_count()];
    for cell in grid.cells() {
        let p = unit_vector(cell.lat, cell.lon);
        // largest cosine = shortest arc; strict > keeps the lowest id on ties
        let mut best = 0;
        for (i, a) in anchors.iter().enumerate() {
            if dot(p, *a) > dot(p, anchors[best]) {
                best = i;
            }
        }
        oracle[best] += cell.count;
    }
    assert_eq!(got, oracle);
    assert_eq!(got.iter().sum::<u64>(), grid.total());
}

#[test]
fn zipf_head_matches_direct_sum() {
    let c = build_catalogue(1000, 0.8, &[20e6, 40e6, 60e6], 3).unwrap();
    let h: f64 = (1..=1000).rev().map(|j| f64::from(j).powf(-0.8)).sum();
    let p1 = c.item(ItemId(1)).probability;
    assert!((p1 - 1.0 / h).abs() < 1e-12, "{p1} vs {}", 1.0 / h);
    let p10 = c.item(ItemId(10)).probability;
    assert!((p10 - 10f64.powf(-0.8) / h).abs() < 1e-12);
}

#[test]
fn offered_bitrate_calibrated_over_seeds() {
    let env = geant_env();
    let mut sum = 0.0;
    for seed in 0..100u64 {
        let c = build_catalogue(1000, 0.8, &[20e6, 40e6, 60e6], seed).unwrap();
        let d = draw_demand(&env.populations, &c, 0.4, 70e9, seed ^ 0xabcdef).unwrap();
        sum += d.offered_bitrate;
    }
    let mean = sum / 100.0;
    assert!((mean / 70e9 - 1.0).abs() < 0.01, "mean offered {mean}");
}

/// Upper 1% quantile of chi-square with `k` degrees of freedom
/// (Wilson-Hilferty).
fn chi2_critical_1pct(k: f64) -> f64 {
    let z = 2.326_347_874;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn item_frequencies_follow_catalogue() {
    let c = build_catalogue(1000, 0.8, &[20e6, 40e6, 60e6], 11).unwrap();
    let samples = 100_000.0;
    let d = draw_demand(&[1], &c, 1.0, samples * c.expected_bitrate(), 99).unwrap();
    assert_eq!(d.total_requests(), 100_000);
    let chi2: f64 = c
        .items()
        .iter()
        .map(|item| {
            let expected = samples * item.probability;
            let observed = f64::from(d.get(NodeId(0), item.id));
            (observed - expected).powi(2) / expected
        })
        .sum();
    assert!(chi2 < chi2_critical_1pct(999.0), "chi2 = {chi2}");
}

#[test]
fn draw_demand_deterministic() {
    let env = geant_env();
    let c = build_catalogue(1000, 0.8, &[20e6, 40e6, 60e6], 5).unwrap();
    let a = draw_demand(&env.populations, &c, 0.4, 70e9, 8).unwrap();
    let b = draw_demand(&env.populations, &c, 0.4, 70e9, 8).unwrap();
    assert_eq!(a, b);
    let other = draw_demand(&env.populations, &c, 0.4, 70e9, 9).unwrap();
    assert_ne!(a, other);
}

proptest! {
    #[test]
    fn catalogue_is_strictly_decreasing_distribution(n in 1usize..2000, alpha in 0.01f64..3.0, seed in any::<u64>()) {
        let c = build_catalogue(n, alpha, &[20e6, 40e6], seed).unwrap();
        let total: f64 = c.items().iter().map(|i| i.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(c.items().windows(2).all(|w| w[0].probability > w[1].probability));
        prop_assert!(c.items().iter().all(|i| i.bitrate == 20e6 || i.bitrate == 40e6));
    }

    #[test]
    fn voronoi_conserves_population(
        cells in prop::collection::vec((-89.0f64..89.0, -179.0f64..179.0, 1u64..1_000_000), 1..60)
    ) {
        let g = geant();
        let grid = PopulationGrid::new(
            cells.iter().map(|&(lat, lon, count)| PopulationCell { lat, lon, count }).collect(),
        ).unwrap();
        let per_node = assign_population(&g, &grid).unwrap();
        prop_assert_eq!(per_node.iter().sum::<u64>(), grid.total());
    }
}

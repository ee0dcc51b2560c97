use statrs::distribution::{ChiSquared, ContinuousCDF};

use holesim::geometry::GridSpec;
use holesim::sim::{mobile_count, place_nodes, stream_rng, Stream};

#[test]
fn placement_passes_chi_square_over_100_bins() {
    let grid = GridSpec::new(1000.0, 1000.0, 10.0, 100.0).unwrap();
    let n = 10_000;
    let mut rng = stream_rng(2024, Stream::Placement);
    let nodes = place_nodes(n, 0.2, &grid, &mut rng);
    let mut bins = [0u32; 100];
    for (_, p) in &nodes {
        let bx = ((p.x / 100.0) as usize).min(9);
        let by = ((p.y / 100.0) as usize).min(9);
        bins[by * 10 + bx] += 1;
    }
    let expected = n as f64 / 100.0;
    let stat: f64 = bins.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(99.0).unwrap().cdf(stat);
    assert!(p > 0.01, "chi2 = {stat}, p = {p}");
}

#[test]
fn mobile_share_and_bounds() {
    let grid = GridSpec::new(300.0, 200.0, 10.0, 100.0).unwrap();
    let nodes = place_nodes(50, 0.2, &grid, &mut stream_rng(1, Stream::Placement));
    assert_eq!(mobile_count(50, 0.2), 10);
    let mobiles = nodes.iter().filter(|(k, _)| *k == holesim::protocol::NodeKind::Mobile).count();
    assert_eq!(mobiles, 10);
    assert!(nodes.iter().all(|(_, p)| grid.contains_point(*p)));
    assert_eq!(mobile_count(7, 0.0), 0);
    assert_eq!(mobile_count(7, 1.0), 7);
}

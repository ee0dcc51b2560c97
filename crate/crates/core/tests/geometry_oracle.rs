mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use holesim::geometry::{annulus, cells_in_radius, coverage_ratio, CellSet, CoverageSets, GridSpec, Point};
use holesim::protocol::detect_q_hat;

use common::{brute_disk, brute_q_hat, detect_via_network, random_detect_instance};

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    (1u32..=10, 1u32..=50, 1u32..=50).prop_map(|(side, cols, rows)| {
        let s = side as f64;
        GridSpec::new(cols as f64 * s, rows as f64 * s, s, s).unwrap()
    })
}

fn instance() -> impl Strategy<Value = (GridSpec, Point, f64, f64)> {
    grid_strategy().prop_flat_map(|g| {
        let max_r = 5.0 * g.cell_side;
        (Just(g), 0.0..=g.width, 0.0..=g.height, 0.0..=max_r, 0.0..=1.0f64)
            .prop_map(|(g, x, y, r_s, f)| (g, Point::new(x, y), r_s * f, r_s))
    })
}

proptest! {
    #[test]
    fn quadrant_walk_matches_full_scan((g, p, _, r) in instance()) {
        prop_assert_eq!(cells_in_radius(p, r, &g), brute_disk(&g, p, r));
    }

    #[test]
    fn annulus_matches_full_scan((g, p, r_in, r_out) in instance()) {
        prop_assume!(r_in < r_out);
        let expect: CellSet = brute_disk(&g, p, r_out).difference(&brute_disk(&g, p, r_in)).copied().collect();
        prop_assert_eq!(annulus(p, r_in, r_out, &g).unwrap(), expect);
    }

    #[test]
    fn disk_grows_with_radius((g, p, r1, r2) in instance()) {
        prop_assert!(cells_in_radius(p, r1, &g).is_subset(&cells_in_radius(p, r2, &g)));
    }

    #[test]
    fn coverage_sets_partition_outer_disk((g, p, r_l, r_s) in instance()) {
        let s = CoverageSets::compute(p, r_l, r_s, &g);
        prop_assert!(s.q_l.is_disjoint(&s.q_l_minus_s));
        let union: CellSet = s.q_l.union(&s.q_l_minus_s).copied().collect();
        prop_assert_eq!(union, s.q_star);
    }

    #[test]
    fn coverage_ratio_in_unit_interval((g, p, _, r) in instance()) {
        let ratio = coverage_ratio(&[(p, r)], &g);
        prop_assert!((0.0..=1.0).contains(&ratio));
        prop_assert_eq!(ratio, brute_disk(&g, p, r).len() as f64 / g.cell_count() as f64);
    }

    #[test]
    fn q_hat_is_annulus_minus_neighbor_disks(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, nodes) = random_detect_instance(&mut rng);
        let got = detect_via_network(g, &nodes);
        for (id, q_hat) in got.iter().enumerate() {
            prop_assert_eq!(q_hat, &brute_q_hat(&g, &nodes, id));
        }
    }
}

#[test]
fn set_algebra_detection_agrees_with_network() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (g, nodes) = random_detect_instance(&mut rng);
        let got = detect_via_network(g, &nodes);
        for (id, n) in nodes.iter().enumerate() {
            let ring = CoverageSets::compute(n.pos, n.r_l, n.r_s, &g).q_l_minus_s;
            let disks: Vec<CellSet> = nodes
                .iter()
                .enumerate()
                .filter(|&(j, m)| j != id && n.pos.distance(m.pos) <= 2.0 * m.r_s)
                .map(|(_, m)| cells_in_radius(m.pos, m.r_l, &g))
                .collect();
            assert_eq!(detect_q_hat(&ring, disks.iter()), got[id]);
        }
    }
}

#[test]
fn fully_surrounded_node_sees_no_hole() {
    let g = GridSpec::new(100.0, 100.0, 10.0, 50.0).unwrap();
    let centre =
        holesim::sim::NodeSpec::new(holesim::protocol::NodeKind::Static, Point::new(50.0, 50.0), 1.0, 5.0, 30.0);
    let mut nodes = vec![centre];
    // a ring of wide disks covering the whole annulus
    for k in 0..8 {
        let a = k as f64 * std::f64::consts::FRAC_PI_4;
        let p = Point::new(50.0 + 25.0 * a.cos(), 50.0 + 25.0 * a.sin());
        nodes.push(holesim::sim::NodeSpec::new(holesim::protocol::NodeKind::Static, p, 1.0, 30.0, 30.0));
    }
    assert!(detect_via_network(g, &nodes)[0].is_empty());
}

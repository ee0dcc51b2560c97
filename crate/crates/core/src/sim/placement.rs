use rand::Rng;

use crate::geometry::{GridSpec, Point};
use crate::protocol::NodeKind;

/// Number of mobile nodes for a deployment of `count` nodes.
pub fn mobile_count(count: usize, mobile_fraction: f64) -> usize {
    ((count as f64 * mobile_fraction).round() as usize).min(count)
}

/// Places `count` nodes i.i.d. uniformly over the area. The last
/// `mobile_count(count, mobile_fraction)` of them are mobile.
pub fn place_nodes<R: Rng + ?Sized>(
    count: usize,
    mobile_fraction: f64,
    grid: &GridSpec,
    rng: &mut R,
) -> Vec<(NodeKind, Point)> {
    let n_static = count - mobile_count(count, mobile_fraction);
    (0..count)
        .map(|i| {
            let p = Point::new(rng.random::<f64>() * grid.width, rng.random::<f64>() * grid.height);
            (if i < n_static { NodeKind::Static } else { NodeKind::Mobile }, p)
        })
        .collect()
}

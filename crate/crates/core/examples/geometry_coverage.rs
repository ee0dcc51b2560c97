//! Grid coverage basics: the cells a sensing disk covers, the detection
//! annulus between the current and maximum radius, and what a node reports
//! as a hole once its neighbors' disks are subtracted.
//!
//! `cargo run --example geometry_coverage`

use holesim::geometry::{annulus, cells_in_radius, coverage_ratio, GridSpec, Point};
use holesim::protocol::detect_q_hat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::new(100.0, 100.0, 10.0, 50.0)?;
    let me = Point::new(50.0, 50.0);
    let disk = cells_in_radius(me, 20.0, &grid);
    let ring = annulus(me, 20.0, 35.0, &grid)?;
    println!("grid {}x{} cells of {} m", grid.cols(), grid.rows(), grid.cell_side);
    println!("disk r=20: {} cells, annulus 20..35: {} cells", disk.len(), ring.len());

    let neighbors = [Point::new(80.0, 50.0), Point::new(50.0, 20.0)];
    let their_disks: Vec<_> = neighbors.iter().map(|&p| cells_in_radius(p, 20.0, &grid)).collect();
    let hole = detect_q_hat(&ring, their_disks.iter());
    println!("annulus cells no neighbor covers: {}", hole.len());

    // render the area: # own disk, o neighbor disks, ! reported hole
    for iy in (0..grid.rows()).rev() {
        let row: String = (0..grid.cols())
            .map(|ix| {
                let c = holesim::geometry::Cell::new(ix, iy);
                if disk.contains(&c) {
                    '#'
                } else if hole.contains(&c) {
                    '!'
                } else if their_disks.iter().any(|d| d.contains(&c)) {
                    'o'
                } else {
                    '.'
                }
            })
            .collect();
        println!("  {row}");
    }

    let sensors: Vec<(Point, f64)> = std::iter::once((me, 20.0)).chain(neighbors.iter().map(|&p| (p, 20.0))).collect();
    println!("coverage ratio: {:.3}", coverage_ratio(&sensors, &grid));
    Ok(())
}

//! Grid geometry: cells, disk coverage and the per-node cell sets used by the
//! update and detection phases.
//!
//! Coverage is evaluated at cell centers with an inclusive distance test, so a
//! cell whose center sits exactly on the disk boundary counts as covered.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("cell ({ix}, {iy}) lies outside the {cols}x{rows} grid")]
    CellOutsideGrid { ix: u32, iy: u32, cols: u32, rows: u32 },
    #[error("inner radius {inner} must be smaller than outer radius {outer}")]
    BadAnnulus { inner: f64, outer: f64 },
    #[error("farthest distance requested over an empty cell set")]
    EmptyCellSet,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A location in the target area, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        distance(self, other)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// A grid square addressed by column and row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub ix: u32,
    pub iy: u32,
}

impl Cell {
    pub const fn new(ix: u32, iy: u32) -> Self {
        Self { ix, iy }
    }
}

pub type CellSet = BTreeSet<Cell>;

/// Target-area dimensions together with the cell and sub-region sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: f64,
    pub height: f64,
    pub cell_side: f64,
    pub subregion_side: f64,
}

fn is_multiple(value: f64, unit: f64) -> bool {
    let ratio = value / unit;
    (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0
}

impl GridSpec {
    pub fn new(width: f64, height: f64, cell_side: f64, subregion_side: f64) -> Result<Self, GeometryError> {
        let grid = Self { width, height, cell_side, subregion_side };
        let problems = grid.violations();
        if problems.is_empty() {
            Ok(grid)
        } else {
            Err(GeometryError::InvalidGrid(problems.join("; ")))
        }
    }

    /// Every constraint the dimensions break; empty when the grid is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite = [self.width, self.height, self.cell_side, self.subregion_side].iter().all(|v| v.is_finite());
        if !finite {
            out.push("grid dimensions must be finite".to_string());
            return out;
        }
        if self.cell_side <= 0.0 {
            out.push(format!("grid.cell_side must be > 0 (got {})", self.cell_side));
            return out;
        }
        if self.width <= 0.0 || self.height <= 0.0 {
            out.push(format!("grid.width and grid.height must be > 0 (got {} x {})", self.width, self.height));
            return out;
        }
        if !is_multiple(self.subregion_side, self.cell_side) {
            out.push(format!(
                "grid.subregion_side ({}) must be an integer multiple of grid.cell_side ({})",
                self.subregion_side, self.cell_side
            ));
        }
        if self.subregion_side > 0.0
            && !(is_multiple(self.width, self.subregion_side) && is_multiple(self.height, self.subregion_side))
        {
            out.push(format!(
                "grid.width ({}) and grid.height ({}) must be integer multiples of grid.subregion_side ({})",
                self.width, self.height, self.subregion_side
            ));
        }
        out
    }

    pub fn cols(&self) -> u32 {
        (self.width / self.cell_side).ceil() as u32
    }

    pub fn rows(&self) -> u32 {
        (self.height / self.cell_side).ceil() as u32
    }

    pub fn cell_count(&self) -> usize {
        self.cols() as usize * self.rows() as usize
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        cell.ix < self.cols() && cell.iy < self.rows()
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }

    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new((cell.ix as f64 + 0.5) * self.cell_side, (cell.iy as f64 + 0.5) * self.cell_side)
    }

    /// Cell holding `p`; points on the far edge fold into the last row/column.
    pub fn cell_of(&self, p: Point) -> Cell {
        let ix = ((p.x / self.cell_side).floor().max(0.0) as u32).min(self.cols().saturating_sub(1));
        let iy = ((p.y / self.cell_side).floor().max(0.0) as u32).min(self.rows().saturating_sub(1));
        Cell::new(ix, iy)
    }

    /// Dense index of a cell, row-major.
    pub fn index(&self, cell: Cell) -> usize {
        cell.iy as usize * self.cols() as usize + cell.ix as usize
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let cols = self.cols();
        (0..self.rows()).flat_map(move |iy| (0..cols).map(move |ix| Cell::new(ix, iy)))
    }

    pub fn subregion_cols(&self) -> u32 {
        (self.width / self.subregion_side).round() as u32
    }

    pub fn subregion_rows(&self) -> u32 {
        (self.height / self.subregion_side).round() as u32
    }

    fn check(&self, cell: Cell) -> Result<(), GeometryError> {
        if self.contains_cell(cell) {
            Ok(())
        } else {
            Err(GeometryError::CellOutsideGrid { ix: cell.ix, iy: cell.iy, cols: self.cols(), rows: self.rows() })
        }
    }
}

/// True iff the cell's center lies within `radius` of the sensor (inclusive).
pub fn cell_covered(cell: Cell, sensor_pos: Point, radius: f64, grid: &GridSpec) -> Result<bool, GeometryError> {
    grid.check(cell)?;
    Ok(covers(grid, cell, sensor_pos, radius))
}

#[inline]
fn covers(grid: &GridSpec, cell: Cell, sensor_pos: Point, radius: f64) -> bool {
    distance(sensor_pos, grid.cell_center(cell)) <= radius
}

/// Cells whose centers lie inside the sensing disk.
///
/// Walks the four quadrant boxes anchored at the sensor's own cell, each
/// `H = ceil(radius / l_c)` cells deep, then drops the cells of the box that
/// fall outside the disk. Offsets run over `0..=H` so the boxes always enclose
/// the disk whatever the sensor's position inside its cell. Offsets that leave
/// the grid are discarded.
pub fn cells_in_radius(sensor_pos: Point, radius: f64, grid: &GridSpec) -> CellSet {
    let mut out = CellSet::new();
    if radius.is_nan() || radius < 0.0 {
        return out;
    }
    let h = (radius / grid.cell_side).ceil() as i64;
    let origin = grid.cell_of(sensor_pos);
    let (ox, oy) = (origin.ix as i64, origin.iy as i64);
    let (cols, rows) = (grid.cols() as i64, grid.rows() as i64);
    // quadrant sign pairs: (+x,-y), (-x,-y), (-x,+y), (+x,+y)
    for (sx, sy) in [(1i64, -1i64), (-1, -1), (-1, 1), (1, 1)] {
        for k1 in 0..=h {
            let ix = ox + sx * k1;
            if ix < 0 || ix >= cols {
                continue;
            }
            for k2 in 0..=h {
                let iy = oy + sy * k2;
                if iy < 0 || iy >= rows {
                    continue;
                }
                let cell = Cell::new(ix as u32, iy as u32);
                if covers(grid, cell, sensor_pos, radius) {
                    out.insert(cell);
                }
            }
        }
    }
    out
}

/// Cells covered at `r_outer` but not at `r_inner`.
pub fn annulus(sensor_pos: Point, r_inner: f64, r_outer: f64, grid: &GridSpec) -> Result<CellSet, GeometryError> {
    if r_inner.is_nan() || r_outer.is_nan() || r_inner >= r_outer {
        return Err(GeometryError::BadAnnulus { inner: r_inner, outer: r_outer });
    }
    let inner = cells_in_radius(sensor_pos, r_inner, grid);
    let outer = cells_in_radius(sensor_pos, r_outer, grid);
    Ok(outer.difference(&inner).copied().collect())
}

/// Fraction of grid cells covered by at least one of the given disks.
pub fn coverage_ratio(sensors: &[(Point, f64)], grid: &GridSpec) -> f64 {
    let total = grid.cell_count();
    if total == 0 {
        return 0.0;
    }
    let mut covered = vec![false; total];
    for &(pos, radius) in sensors {
        for cell in cells_in_radius(pos, radius, grid) {
            covered[grid.index(cell)] = true;
        }
    }
    covered.iter().filter(|&&c| c).count() as f64 / total as f64
}

/// Distance from the sensor to the farthest cell center of `cells`; the
/// radius a node needs to reach every one of them.
pub fn farthest_uncovered_distance<'a>(
    sensor_pos: Point,
    cells: impl IntoIterator<Item = &'a Cell>,
    grid: &GridSpec,
) -> Result<f64, GeometryError> {
    let mut best: Option<f64> = None;
    for &cell in cells {
        let d = distance(sensor_pos, grid.cell_center(cell));
        best = Some(best.map_or(d, |b: f64| b.max(d)));
    }
    best.ok_or(GeometryError::EmptyCellSet)
}

/// Per-node cell sets refreshed by the update phase and consumed by detection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageSets {
    /// Cells inside the current sensing radius.
    pub q_l: CellSet,
    /// Cells inside the maximum sensing radius.
    pub q_star: CellSet,
    /// `q_star - q_l`.
    pub q_l_minus_s: CellSet,
    /// Cells of `q_l_minus_s` that no neighbor covers; the detected hole.
    pub q_hat: CellSet,
}

impl CoverageSets {
    /// Recomputes `q_l`, `q_star` and `q_l_minus_s`; `q_hat` is left empty until
    /// the detection phase fills it.
    pub fn compute(pos: Point, r_current: f64, r_max: f64, grid: &GridSpec) -> Self {
        let q_l = cells_in_radius(pos, r_current, grid);
        let q_star = cells_in_radius(pos, r_max, grid);
        let q_l_minus_s = q_star.difference(&q_l).copied().collect();
        Self { q_l, q_star, q_l_minus_s, q_hat: CellSet::new() }
    }
}

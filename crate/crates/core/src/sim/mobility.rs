use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{distance, GridSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityParams {
    pub sample_s: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub pause_s: f64,
    pub target_count: usize,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self { sample_s: 1.0, v_min: 1.0, v_max: 10.0, pause_s: 0.0, target_count: 1 }
    }
}

/// A target moving under the random waypoint model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetState {
    pub pos: Point,
    pub waypoint: Point,
    pub speed: f64,
    pub pause_until: f64,
}

fn uniform_point<R: Rng + ?Sized>(rng: &mut R, grid: &GridSpec) -> Point {
    Point::new(rng.random::<f64>() * grid.width, rng.random::<f64>() * grid.height)
}

fn uniform_speed<R: Rng + ?Sized>(rng: &mut R, p: &MobilityParams) -> f64 {
    if p.v_max > p.v_min {
        rng.random_range(p.v_min..=p.v_max)
    } else {
        p.v_min
    }
}

impl TargetState {
    pub fn spawn<R: Rng + ?Sized>(rng: &mut R, grid: &GridSpec, p: &MobilityParams) -> Self {
        let pos = uniform_point(rng, grid);
        let waypoint = uniform_point(rng, grid);
        let speed = uniform_speed(rng, p);
        Self { pos, waypoint, speed, pause_until: 0.0 }
    }

    /// Advances the target from `now` to `now + dt`: it moves toward its
    /// waypoint, pauses on arrival, then draws a new waypoint and speed.
    pub fn step<R: Rng + ?Sized>(&mut self, now: f64, dt: f64, rng: &mut R, grid: &GridSpec, p: &MobilityParams) {
        let end = now + dt;
        let mut t = now;
        // bounded so a zero pause with tiny legs cannot spin forever
        for _ in 0..1000 {
            if t >= end {
                break;
            }
            if t < self.pause_until {
                t = self.pause_until.min(end);
                continue;
            }
            let left = distance(self.pos, self.waypoint);
            let reach = self.speed * (end - t);
            if reach < left {
                let f = reach / left;
                self.pos = Point::new(
                    self.pos.x + (self.waypoint.x - self.pos.x) * f,
                    self.pos.y + (self.waypoint.y - self.pos.y) * f,
                );
                break;
            }
            t += if self.speed > 0.0 { left / self.speed } else { end - t };
            self.pos = self.waypoint;
            self.pause_until = t + p.pause_s;
            self.waypoint = uniform_point(rng, grid);
            self.speed = uniform_speed(rng, p);
        }
        self.pos = Point::new(self.pos.x.clamp(0.0, grid.width), self.pos.y.clamp(0.0, grid.height));
    }
}

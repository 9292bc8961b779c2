//! Distance and intersection queries between link capsules and box obstacles.
//!
//! The arm's links are capsules (segments swept by a sphere) and obstacles are
//! axis-aligned boxes. The only fact the environment needs per step is whether
//! any link touches any obstacle and how much clearance is left, so the
//! queries stay deliberately small: point-to-box is closed form, segment-to-box
//! minimizes point-to-box along the segment (the distance to a convex solid is
//! convex along a line, so a coarse scan plus golden-section search finds the
//! global minimum).

use crate::kinematics::LinkFrames;
use crate::math::Vec3;
use serde::{Deserialize, Serialize};

/// Segment swept by a sphere. `p0 == p1` degenerates to a sphere and is legal.
#[derive(Debug, Clone, Copy)]
pub struct Capsule {
    pub p0: Vec3,
    pub p1: Vec3,
    pub radius: f64,
}

/// Axis-aligned box, `min_corner <= max_corner` component-wise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Aabb {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
}

impl Aabb {
    pub fn new(min_corner: Vec3, max_corner: Vec3) -> Aabb {
        Aabb { min_corner, max_corner }
    }

    /// Box of size `size` centered on `center`.
    pub fn centered(center: Vec3, size: Vec3) -> Aabb {
        let half = size * 0.5;
        Aabb {
            min_corner: center - half,
            max_corner: center + half,
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min_corner + self.max_corner) * 0.5
    }

    pub fn is_valid(&self) -> bool {
        self.min_corner.x <= self.max_corner.x
            && self.min_corner.y <= self.max_corner.y
            && self.min_corner.z <= self.max_corner.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min_corner.x
            && p.x <= self.max_corner.x
            && p.y >= self.min_corner.y
            && p.y <= self.max_corner.y
            && p.z >= self.min_corner.z
            && p.z <= self.max_corner.z
    }
}

/// Euclidean distance from a point to the closest point of the solid box
/// (zero inside).
pub fn point_aabb_distance(p: Vec3, bx: &Aabb) -> f64 {
    let clamped = p.max(bx.min_corner).min(bx.max_corner);
    (p - clamped).norm()
}

const COARSE_SAMPLES: usize = 16;
const GOLDEN_ITERS: usize = 48;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum over the segment `p0..p1` of the point-to-box distance.
///
/// Coarse scan of 16 intervals brackets the minimum, then golden-section
/// refines it; convexity of the distance along the segment makes the bracket
/// global. Returns 0 when the segment intersects the box.
pub fn segment_aabb_distance(p0: Vec3, p1: Vec3, bx: &Aabb) -> f64 {
    let d = p1 - p0;
    let eval = |t: f64| point_aabb_distance(p0 + d * t, bx);

    let mut best_t = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..=COARSE_SAMPLES {
        let t = i as f64 / COARSE_SAMPLES as f64;
        let v = eval(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    if best == 0.0 {
        return 0.0;
    }

    let step = 1.0 / COARSE_SAMPLES as f64;
    let mut lo = (best_t - step).max(0.0);
    let mut hi = (best_t + step).min(1.0);
    let mut t1 = hi - INV_PHI * (hi - lo);
    let mut t2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(t1);
    let mut f2 = eval(t2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - INV_PHI * (hi - lo);
            f1 = eval(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + INV_PHI * (hi - lo);
            f2 = eval(t2);
        }
    }
    best.min(f1).min(f2)
}

/// Capsule-vs-box verdict. Contact at exactly zero clearance counts as a
/// collision.
#[derive(Debug, Clone, Copy)]
pub struct CollisionQuery {
    pub collides: bool,
    /// Distance minus radius; negative when penetrating.
    pub clearance: f64,
}

pub fn capsule_aabb_collides(c: &Capsule, bx: &Aabb) -> CollisionQuery {
    let dist = segment_aabb_distance(c.p0, c.p1, bx);
    CollisionQuery {
        collides: dist <= c.radius,
        clearance: dist - c.radius,
    }
}

/// Aggregate query over every (link capsule, obstacle) pair.
#[derive(Debug, Clone, Copy)]
pub struct ArmObstacleQuery {
    pub any_collision: bool,
    pub min_clearance: f64,
}

/// Capsule i spans frame i origin to frame i+1 origin (the last capsule ends
/// at the tip); `radii[i]` is its radius.
pub fn arm_obstacle_query(frames: &LinkFrames, radii: &[f64], obstacles: &[Aabb]) -> ArmObstacleQuery {
    assert_eq!(
        radii.len(),
        frames.link_count(),
        "one radius per link is required"
    );
    let mut any = false;
    let mut min_clear = f64::INFINITY;
    for (i, &radius) in radii.iter().enumerate() {
        let (p0, p1) = frames.link_segment(i);
        let capsule = Capsule { p0, p1, radius };
        for bx in obstacles {
            let q = capsule_aabb_collides(&capsule, bx);
            any |= q.collides;
            min_clear = min_clear.min(q.clearance);
        }
    }
    ArmObstacleQuery {
        any_collision: any,
        min_clearance: min_clear,
    }
}

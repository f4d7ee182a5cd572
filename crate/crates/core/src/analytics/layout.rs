//! Overlap removal for projected glyphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    /// Minimum center-to-center distance after layout.
    pub diameter: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl LayoutParams {
    pub fn new(diameter: f64, seed: u64) -> Self {
        LayoutParams {
            diameter,
            max_iterations: 300,
            seed,
        }
    }
}

// Pairs are pushed a hair past the diameter so the result survives rounding.
const OVERSHOOT: f64 = 1e-9;

pub fn min_pairwise_distance(points: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = (points[j].0 - points[i].0).hypot(points[j].1 - points[i].1);
            best = best.min(d);
        }
    }
    best
}

/// Pushes apart every pair closer than `params.diameter`.
///
/// Each sweep visits pairs in index order and moves both points symmetrically
/// along their connecting line; coincident points get a seeded random
/// direction. Only overlapping pairs interact. If the sweep budget runs out
/// with overlaps left, the layout is scaled about its centroid until the
/// closest pair reaches the diameter.
pub fn relax(initial: &[(f64, f64)], params: &LayoutParams) -> Vec<(f64, f64)> {
    let mut pts = initial.to_vec();
    let d = params.diameter;
    if pts.len() < 2 || d.is_nan() || d <= 0.0 {
        return pts;
    }
    let target = d * (1.0 + OVERSHOOT);
    let coincident = d * 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    for _ in 0..params.max_iterations {
        let mut moved = false;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let (dx, dy) = (pts[j].0 - pts[i].0, pts[j].1 - pts[i].1);
                let dist = dx.hypot(dy);
                if dist >= d {
                    continue;
                }
                let (ux, uy) = if dist <= coincident {
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    (angle.cos(), angle.sin())
                } else {
                    (dx / dist, dy / dist)
                };
                let push = (target - dist) / 2.0;
                pts[i].0 -= ux * push;
                pts[i].1 -= uy * push;
                pts[j].0 += ux * push;
                pts[j].1 += uy * push;
                moved = true;
            }
        }
        if !moved {
            return pts;
        }
    }

    let closest = min_pairwise_distance(&pts);
    if closest < d && closest > 0.0 {
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let scale = target / closest;
        for p in &mut pts {
            p.0 = cx + (p.0 - cx) * scale;
            p.1 = cy + (p.1 - cy) * scale;
        }
    }
    pts
}

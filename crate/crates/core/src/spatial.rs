//! A static kd-tree over points in R^3.
//!
//! Used to accelerate nearest-node queries on embedded sphere grids: the
//! chordal (Euclidean) distance is monotone in the geodesic distance on the
//! sphere, so the chordal nearest neighbor is also the geodesic one.

/// Balanced kd-tree stored as a recursively median-split index array.
#[derive(Debug, Clone)]
pub struct KdTree3 {
    points: Vec<[f64; 3]>,
    order: Vec<u32>,
}

impl KdTree3 {
    pub fn build(points: Vec<[f64; 3]>) -> KdTree3 {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        if !order.is_empty() {
            split(&points, &mut order, 0);
        }
        KdTree3 { points, order }
    }

    /// Index of the nearest point and the squared Euclidean distance to it.
    pub fn nearest(&self, q: &[f64; 3]) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.order.len(), 0, &mut best);
        Some(best)
    }

    fn search(&self, q: &[f64; 3], lo: usize, hi: usize, depth: usize, best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid] as usize;
        let p = &self.points[idx];
        let d2 = dist2(q, p);
        if d2 < best.1 {
            *best = (idx, d2);
        }
        let axis = depth % 3;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, best);
        if delta * delta < best.1 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn split(points: &[[f64; 3]], order: &mut [u32], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis].total_cmp(&points[b as usize][axis])
    });
    let (left, rest) = order.split_at_mut(mid);
    split(points, left, depth + 1);
    split(points, &mut rest[1..], depth + 1);
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

use crate::Vec3;

/// A neighbor returned by [`KdTree::knn`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    /// Index into the cloud the tree was built from.
    pub index: usize,
    pub point: Vec3,
    pub distance: f64,
}

/// Static, balanced 3-d tree over a point cloud.
///
/// The tree is implicit: the node for a slice is its middle element and the
/// split axis of that node lives in `axes`.
#[derive(Clone, Debug, Default)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    ids: Vec<u32>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn new(cloud: &[Vec3]) -> Self {
        let mut items: Vec<([f64; 3], u32)> = cloud
            .iter()
            .enumerate()
            .map(|(i, p)| ([p.x, p.y, p.z], i as u32))
            .collect();
        let mut axes = vec![0u8; items.len()];
        build(&mut items, &mut axes, 0);
        let (points, ids) = items.into_iter().unzip();
        Self { points, ids, axes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact k nearest neighbors, closest first. Returns fewer than `k` when
    /// the cloud is smaller.
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<Neighbor> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let q = [query.x, query.y, query.z];
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.search(0, self.points.len(), &q, k, &mut best);
        best.into_iter()
            .map(|(d2, slot)| {
                let p = self.points[slot as usize];
                Neighbor {
                    index: self.ids[slot as usize] as usize,
                    point: Vec3::new(p[0], p[1], p[2]),
                    distance: d2.sqrt(),
                }
            })
            .collect()
    }

    fn search(&self, lo: usize, hi: usize, q: &[f64; 3], k: usize, best: &mut Vec<(f64, u32)>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = &self.points[mid];
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
        offer(best, k, d2, mid as u32);

        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, k, best);
        let worst = if best.len() < k { f64::INFINITY } else { best[k - 1].0 };
        if diff * diff < worst {
            self.search(far.0, far.1, q, k, best);
        }
    }
}

fn offer(best: &mut Vec<(f64, u32)>, k: usize, d2: f64, slot: u32) {
    if best.len() == k && d2 >= best[k - 1].0 {
        return;
    }
    let at = best.partition_point(|&(d, _)| d <= d2);
    best.insert(at, (d2, slot));
    best.truncate(k);
}

fn build(items: &mut [([f64; 3], u32)], axes: &mut [u8], depth: usize) {
    if items.len() <= 1 {
        if let Some(a) = axes.first_mut() {
            *a = (depth % 3) as u8;
        }
        return;
    }
    // split on the widest extent
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (p, _) in items.iter() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]));
    axes[mid] = axis as u8;
    let (left, rest) = items.split_at_mut(mid);
    let (left_axes, rest_axes) = axes.split_at_mut(mid);
    build(left, left_axes, depth + 1);
    build(&mut rest[1..], &mut rest_axes[1..], depth + 1);
}

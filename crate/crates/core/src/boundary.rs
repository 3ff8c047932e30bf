//! Alpha-shape boundary extraction.
//!
//! The alpha complex is the Delaunay triangulation with every triangle of
//! circumradius greater than `alpha` removed. Only the largest edge-connected
//! group of surviving triangles is kept; its perimeter vertices are the
//! boundary. Perimeter edges facing the unbounded exterior form the outer
//! boundary, the rest outline holes.

use delaunator::{triangulate, EMPTY};

use crate::geometry::{circumradius, Point};

/// Per-node boundary flags, `true` meaning boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLabeling {
    pub flags: Vec<bool>,
}

impl BoundaryLabeling {
    pub fn new(flags: Vec<bool>) -> Self {
        BoundaryLabeling { flags }
    }

    pub fn all(n: usize, value: bool) -> Self {
        BoundaryLabeling {
            flags: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn boundary_count(&self) -> usize {
        self.flags.iter().filter(|&&b| b).count()
    }

    pub fn boundary_ids(&self) -> Vec<usize> {
        (0..self.flags.len()).filter(|&i| self.flags[i]).collect()
    }

    /// Swaps the boundary and interior classes.
    pub fn complement(&self) -> Self {
        BoundaryLabeling {
            flags: self.flags.iter().map(|b| !b).collect(),
        }
    }
}

/// Labels the perimeter vertices of the alpha complex of `points`.
///
/// Fewer than three distinct points, an all-collinear set, or an empty
/// complex label every point as boundary.
pub fn alpha_shape_boundary(points: &[Point], alpha: f64, include_holes: bool) -> BoundaryLabeling {
    let n = points.len();
    let (unique, rep) = dedup(points);
    if unique.len() < 3 {
        return BoundaryLabeling::all(n, true);
    }
    let coords: Vec<delaunator::Point> = unique
        .iter()
        .map(|&i| delaunator::Point {
            x: points[i].x,
            y: points[i].y,
        })
        .collect();
    let tri = triangulate(&coords);
    let nt = tri.triangles.len() / 3;
    if nt == 0 {
        return BoundaryLabeling::all(n, true);
    }

    let vertex = |e: usize| points[unique[tri.triangles[e]]];
    let kept: Vec<bool> = (0..nt)
        .map(|t| circumradius(vertex(3 * t), vertex(3 * t + 1), vertex(3 * t + 2)) <= alpha)
        .collect();

    // Largest edge-connected group of kept triangles; ties go to the group
    // touching the lowest node id.
    let mut group = vec![usize::MAX; nt];
    let mut best = (0usize, usize::MAX, usize::MAX);
    let mut stack = Vec::new();
    let mut next = 0usize;
    for seed in 0..nt {
        if !kept[seed] || group[seed] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut low = usize::MAX;
        group[seed] = next;
        stack.push(seed);
        while let Some(t) = stack.pop() {
            size += 1;
            for e in 3 * t..3 * t + 3 {
                low = low.min(unique[tri.triangles[e]]);
                let opp = tri.halfedges[e];
                if opp != EMPTY {
                    let u = opp / 3;
                    if kept[u] && group[u] == usize::MAX {
                        group[u] = next;
                        stack.push(u);
                    }
                }
            }
        }
        if size > best.0 || (size == best.0 && low < best.2) {
            best = (size, next, low);
        }
        next += 1;
    }
    if best.1 == usize::MAX {
        return BoundaryLabeling::all(n, true);
    }
    let in_shape: Vec<bool> = group.iter().map(|&g| g == best.1).collect();

    // Flood the empty space reachable from the convex-hull rim.
    let mut exterior = vec![false; nt];
    for t in 0..nt {
        if in_shape[t] || exterior[t] {
            continue;
        }
        if (3 * t..3 * t + 3).any(|e| tri.halfedges[e] == EMPTY) {
            exterior[t] = true;
            stack.push(t);
            while let Some(s) = stack.pop() {
                for e in 3 * s..3 * s + 3 {
                    let opp = tri.halfedges[e];
                    if opp != EMPTY {
                        let u = opp / 3;
                        if !in_shape[u] && !exterior[u] {
                            exterior[u] = true;
                            stack.push(u);
                        }
                    }
                }
            }
        }
    }

    let mut unique_flags = vec![false; unique.len()];
    let mut present = vec![false; unique.len()];
    for e in 0..tri.triangles.len() {
        present[tri.triangles[e]] = true;
        if !in_shape[e / 3] {
            continue;
        }
        let opp = tri.halfedges[e];
        let on_perimeter = if opp == EMPTY {
            true
        } else {
            let u = opp / 3;
            !in_shape[u] && (exterior[u] || include_holes)
        };
        if on_perimeter {
            let next_e = if e % 3 == 2 { e - 2 } else { e + 1 };
            unique_flags[tri.triangles[e]] = true;
            unique_flags[tri.triangles[next_e]] = true;
        }
    }

    // The triangulator silently drops near-coincident points; give those the
    // label of the closest point it kept.
    for u in 0..unique.len() {
        if present[u] {
            continue;
        }
        let p = points[unique[u]];
        let nearest = (0..unique.len())
            .filter(|&w| present[w])
            .min_by(|&a, &b| {
                p.dist(points[unique[a]])
                    .total_cmp(&p.dist(points[unique[b]]))
            });
        if let Some(w) = nearest {
            unique_flags[u] = unique_flags[w];
        }
    }

    BoundaryLabeling::new(rep.iter().map(|&u| unique_flags[u]).collect())
}

/// Distinct points (as indices into `points`) and, for every input point, the
/// index of its representative among them.
fn dedup(points: &[Point]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
            .then(a.cmp(&b))
    });
    let mut unique = Vec::new();
    let mut rep = vec![0; points.len()];
    let mut prev: Option<Point> = None;
    for &i in &order {
        if prev != Some(points[i]) {
            unique.push(i);
            prev = Some(points[i]);
        }
        rep[i] = unique.len() - 1;
    }
    (unique, rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_center() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let labels = alpha_shape_boundary(&pts, 2f64.sqrt(), false);
        assert_eq!(labels.flags, vec![true, true, true, true, false]);
    }

    #[test]
    fn three_points_are_all_boundary() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(alpha_shape_boundary(&pts, 10.0, false).flags, vec![true; 3]);
    }

    #[test]
    fn collinear_points_are_all_boundary() {
        let pts: Vec<Point> = (0..6).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(alpha_shape_boundary(&pts, 1.0, false).flags, vec![true; 6]);
    }

    #[test]
    fn coincident_points_share_a_label() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 4.0),
            Point::new(2.0, 2.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 0.0),
        ];
        let l = alpha_shape_boundary(&pts, f64::INFINITY, false);
        assert_eq!(l.flags, vec![true, true, true, true, false, false, true]);
    }

    #[test]
    fn ring_hole_is_labelled_only_on_request() {
        // Outer square ring of 8 points, an inner ring of 4, and a hole in
        // the middle that is too wide for the alpha complex to bridge.
        let mut pts = Vec::new();
        for i in 0..16 {
            let th = i as f64 * std::f64::consts::TAU / 16.0;
            pts.push(Point::new(10.0 * th.cos(), 10.0 * th.sin()));
        }
        for i in 0..16 {
            let th = (i as f64 + 0.5) * std::f64::consts::TAU / 16.0;
            pts.push(Point::new(7.0 * th.cos(), 7.0 * th.sin()));
        }
        let outer = alpha_shape_boundary(&pts, 3.0, false);
        assert!(outer.flags[..16].iter().all(|&b| b));
        assert!(outer.flags[16..].iter().all(|&b| !b));
        let holes = alpha_shape_boundary(&pts, 3.0, true);
        assert!(holes.flags.iter().all(|&b| b));
    }
}

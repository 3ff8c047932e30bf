use std::ops::{Add, Mul, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates about the origin by `theta` radians.
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of triangle `abc`; positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Circumradius of triangle `abc`, `+inf` for degenerate triangles.
pub fn circumradius(a: Point, b: Point, c: Point) -> f64 {
    let area2 = orient(a, b, c).abs();
    if area2 == 0.0 {
        return f64::INFINITY;
    }
    a.dist(b) * b.dist(c) * c.dist(a) / (2.0 * area2)
}

pub fn centroid(points: impl IntoIterator<Item = Point>) -> Option<Point> {
    let mut sum = Point::default();
    let mut count = 0usize;
    for p in points {
        sum = sum + p;
        count += 1;
    }
    (count > 0).then(|| sum * (1.0 / count as f64))
}

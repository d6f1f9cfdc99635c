//! Planar geometry for yaw-rotated rectangular footprints.
//!
//! Objects are axis boxes rotated about z, so every footprint is a convex
//! quad. Overlap area comes from Sutherland-Hodgman clipping plus the
//! shoelace formula; no external geometry crate is warranted for two convex
//! quads.

/// A rectangle in the table plane, rotated by `yaw` about its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub cx: f64,
    pub cy: f64,
    pub yaw: f64,
    pub half_l: f64,
    pub half_w: f64,
}

impl Footprint {
    pub fn new(cx: f64, cy: f64, yaw: f64, length: f64, width: f64) -> Self {
        Self {
            cx,
            cy,
            yaw,
            half_l: length / 2.0,
            half_w: width / 2.0,
        }
    }

    /// Corners in counterclockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let local = [
            [self.half_l, self.half_w],
            [-self.half_l, self.half_w],
            [-self.half_l, -self.half_w],
            [self.half_l, -self.half_w],
        ];
        local.map(|[lx, ly]| [self.cx + c * lx - s * ly, self.cy + s * lx + c * ly])
    }

    /// Point-in-rectangle via projection onto the rectangle's own axes.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= self.half_l && v.abs() <= self.half_w
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_l * self.half_w
    }

    /// Width of the rectangle as seen by a gripper whose jaws close along
    /// an axis rotated by `grip_yaw`: the projection of the footprint onto
    /// the jaw-normal direction.
    pub fn extent_across(&self, grip_yaw: f64) -> f64 {
        let rel = self.yaw - grip_yaw;
        2.0 * (self.half_l * rel.sin().abs() + self.half_w * rel.cos().abs())
    }
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..poly.len() {
        let [x1, y1] = poly[i];
        let [x2, y2] = poly[(i + 1) % poly.len()];
        sum += x1 * y2 - x2 * y1;
    }
    sum.abs() / 2.0
}

/// Clip `subject` against the half-plane on the left of edge a->b.
fn clip_edge(subject: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
    let intersect = |p: [f64; 2], q: [f64; 2]| {
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-18 {
            return p;
        }
        let t = ((a[0] - p[0]) * ey - (a[1] - p[1]) * ex) / denom;
        [p[0] + t * dx, p[1] + t * dy]
    };
    let mut out = Vec::with_capacity(subject.len() + 1);
    for i in 0..subject.len() {
        let cur = subject[i];
        let prev = subject[(i + subject.len() - 1) % subject.len()];
        match (inside(cur), inside(prev)) {
            (true, true) => out.push(cur),
            (true, false) => {
                out.push(intersect(prev, cur));
                out.push(cur);
            }
            (false, true) => out.push(intersect(prev, cur)),
            (false, false) => {}
        }
    }
    out
}

/// Area of the intersection of two rotated rectangles.
pub fn overlap_area(a: &Footprint, b: &Footprint) -> f64 {
    let clip = b.corners();
    let mut poly: Vec<[f64; 2]> = a.corners().to_vec();
    for i in 0..4 {
        if poly.is_empty() {
            return 0.0;
        }
        poly = clip_edge(&poly, clip[i], clip[(i + 1) % 4]);
    }
    polygon_area(&poly)
}

/// Overlap area as a fraction of the smaller footprint, in `[0, 1]`.
pub fn overlap_fraction(a: &Footprint, b: &Footprint) -> f64 {
    let min_area = a.area().min(b.area());
    if min_area <= 0.0 {
        return 0.0;
    }
    (overlap_area(a, b) / min_area).min(1.0)
}

//! Small fixed-size vector/matrix helpers and axis-aligned bounding boxes.

use crate::scalar::Real;

pub type Vec3<S> = [S; 3];

#[inline]
pub fn add3<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub3<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale3<S: Real>(a: Vec3<S>, s: S) -> Vec3<S> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot3<S: Real>(a: Vec3<S>, b: Vec3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3<S: Real>(a: Vec3<S>, b: Vec3<S>) -> Vec3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3<S: Real>(a: Vec3<S>) -> S {
    dot3(a, a).sqrt()
}

/// Squared Euclidean distance. Nearest-neighbor code paths (kd-tree and the
/// brute-force oracle) must both go through this so their minima agree bitwise.
#[inline]
pub fn dist_sq3<S: Real>(a: Vec3<S>, b: Vec3<S>) -> S {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn normalize3<S: Real>(a: Vec3<S>) -> Vec3<S> {
    let n = norm3(a);
    if n == S::zero() {
        [S::zero(), S::zero(), S::zero()]
    } else {
        scale3(a, S::one() / n)
    }
}

/// Twice the triangle area (cross-product magnitude halved).
#[inline]
pub fn triangle_area<S: Real>(a: Vec3<S>, b: Vec3<S>, c: Vec3<S>) -> S {
    norm3(cross3(sub3(b, a), sub3(c, a))) * S::of(0.5)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<S> {
    pub min: Vec3<S>,
    pub max: Vec3<S>,
}

impl<S: Real> Aabb<S> {
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Vec3<S>>,
        S: 'a,
    {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut aabb = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            for k in 0..3 {
                aabb.min[k] = aabb.min[k].min(p[k]);
                aabb.max[k] = aabb.max[k].max(p[k]);
            }
        }
        Some(aabb)
    }

    pub fn center(&self) -> Vec3<S> {
        let half = S::of(0.5);
        [
            (self.min[0] + self.max[0]) * half,
            (self.min[1] + self.max[1]) * half,
            (self.min[2] + self.max[2]) * half,
        ]
    }

    pub fn extents(&self) -> Vec3<S> {
        sub3(self.max, self.min)
    }

    pub fn longest_edge(&self) -> S {
        let e = self.extents();
        e[0].max(e[1]).max(e[2])
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..3 {
            out.min[k] = out.min[k].min(other.min[k]);
            out.max[k] = out.max[k].max(other.max[k]);
        }
        out
    }

    pub fn contains(&self, p: Vec3<S>) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn grow(&mut self, p: Vec3<S>) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn inflate(&self, eps: S) -> Self {
        Aabb {
            min: [self.min[0] - eps, self.min[1] - eps, self.min[2] - eps],
            max: [self.max[0] + eps, self.max[1] + eps, self.max[2] + eps],
        }
    }
}

/// Column-major 4x4 matrix, matching the glTF convention.
pub type Mat4<S> = [S; 16];

pub fn mat4_identity<S: Real>() -> Mat4<S> {
    let mut m = [S::zero(); 16];
    m[0] = S::one();
    m[5] = S::one();
    m[10] = S::one();
    m[15] = S::one();
    m
}

pub fn mat4_mul<S: Real>(a: &Mat4<S>, b: &Mat4<S>) -> Mat4<S> {
    let mut out = [S::zero(); 16];
    for col in 0..4 {
        for row in 0..4 {
            let mut acc = S::zero();
            for k in 0..4 {
                acc += a[k * 4 + row] * b[col * 4 + k];
            }
            out[col * 4 + row] = acc;
        }
    }
    out
}

/// Transform a point (w = 1), returning the homogeneous result.
pub fn mat4_transform_point<S: Real>(m: &Mat4<S>, p: Vec3<S>) -> [S; 4] {
    let mut out = [S::zero(); 4];
    for row in 0..4 {
        out[row] = m[row] * p[0] + m[4 + row] * p[1] + m[8 + row] * p[2] + m[12 + row];
    }
    out
}

/// Compose translation * rotation(quaternion xyzw) * scale, glTF node order.
pub fn mat4_from_trs<S: Real>(t: Vec3<S>, q: [S; 4], s: Vec3<S>) -> Mat4<S> {
    let two = S::of(2.0);
    let (x, y, z, w) = (q[0], q[1], q[2], q[3]);
    let mut m = mat4_identity::<S>();
    // rotation columns scaled by s
    let r = [
        [
            S::one() - two * (y * y + z * z),
            two * (x * y + z * w),
            two * (x * z - y * w),
        ],
        [
            two * (x * y - z * w),
            S::one() - two * (x * x + z * z),
            two * (y * z + x * w),
        ],
        [
            two * (x * z + y * w),
            two * (y * z - x * w),
            S::one() - two * (x * x + y * y),
        ],
    ];
    for col in 0..3 {
        for row in 0..3 {
            m[col * 4 + row] = r[col][row] * s[col];
        }
    }
    m[12] = t[0];
    m[13] = t[1];
    m[14] = t[2];
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aabb_of_two_points() {
        let pts = [[0.0f64, 2.0, -1.0], [1.0, -2.0, 5.0]];
        let b = Aabb::from_points(pts.iter()).unwrap();
        assert_eq!(b.min, [0.0, -2.0, -1.0]);
        assert_eq!(b.max, [1.0, 2.0, 5.0]);
        assert_eq!(b.center(), [0.5, 0.0, 2.0]);
        assert_eq!(b.longest_edge(), 6.0);
    }

    #[test]
    fn trs_identity() {
        let m = mat4_from_trs::<f64>([0.0; 3], [0.0, 0.0, 0.0, 1.0], [1.0; 3]);
        assert_eq!(m, mat4_identity::<f64>());
        let p = mat4_transform_point(&m, [1.0, 2.0, 3.0]);
        assert_eq!(&p[..3], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn trs_translate_scale() {
        let m = mat4_from_trs::<f64>([1.0, 2.0, 3.0], [0.0, 0.0, 0.0, 1.0], [2.0; 3]);
        let p = mat4_transform_point(&m, [1.0, 1.0, 1.0]);
        assert_eq!(&p[..3], &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn quarter_turn_about_z() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = mat4_from_trs::<f64>([0.0; 3], [0.0, 0.0, h, h], [1.0; 3]);
        let p = mat4_transform_point(&m, [1.0, 0.0, 0.0]);
        assert!((p[0] - 0.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }
}

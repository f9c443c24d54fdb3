//! Triangle rasterization: look-at view, perspective projection, near-plane
//! clipping, edge-function fill with a top-left rule, and a z-buffer over
//! NDC depth.

use super::{Camera, Image, RenderConfig};
use crate::math::{cross3, dot3, normalize3, sub3, Vec3};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

struct ViewBasis<S> {
    right: Vec3<S>,
    up: Vec3<S>,
    forward: Vec3<S>,
    position: Vec3<S>,
}

impl<S: Real> ViewBasis<S> {
    fn new(camera: &Camera<S>) -> Self {
        let forward = normalize3(sub3(camera.target, camera.position));
        let right = normalize3(cross3(forward, camera.up));
        let up = cross3(right, forward);
        ViewBasis {
            right,
            up,
            forward,
            position: camera.position,
        }
    }

    /// World point to camera space (x right, y up, camera looks down -z).
    fn to_view(&self, p: Vec3<S>) -> Vec3<S> {
        let d = sub3(p, self.position);
        [
            dot3(d, self.right),
            dot3(d, self.up),
            -dot3(d, self.forward),
        ]
    }
}

/// Clip-space vertex (x, y, z, w) before perspective division.
#[derive(Clone, Copy)]
struct ClipVertex<S> {
    pos: [S; 4],
}

fn project<S: Real>(view: Vec3<S>, camera: &Camera<S>, aspect: S) -> ClipVertex<S> {
    let f = S::one() / (camera.vertical_fov * S::of(0.5)).tan();
    let (near, far) = (camera.near, camera.far);
    let a = (far + near) / (near - far);
    let b = (S::of(2.0) * far * near) / (near - far);
    ClipVertex {
        pos: [
            view[0] * (f / aspect),
            view[1] * f,
            view[2] * a + b,
            -view[2],
        ],
    }
}

/// Sutherland-Hodgman against the near plane z_clip >= -w (w > 0 afterwards).
fn clip_near<S: Real>(poly: &mut Vec<ClipVertex<S>>, scratch: &mut Vec<ClipVertex<S>>) {
    scratch.clear();
    let inside = |v: &ClipVertex<S>| v.pos[2] + v.pos[3] >= S::zero() && v.pos[3] > S::zero();
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let cur_in = inside(&cur);
        let prev_in = inside(&prev);
        if cur_in != prev_in {
            // boundary: (z + w) interpolates to zero
            let da = prev.pos[2] + prev.pos[3];
            let db = cur.pos[2] + cur.pos[3];
            let t = da / (da - db);
            let mut mid = [S::zero(); 4];
            for k in 0..4 {
                mid[k] = prev.pos[k] + (cur.pos[k] - prev.pos[k]) * t;
            }
            scratch.push(ClipVertex { pos: mid });
        }
        if cur_in {
            scratch.push(cur);
        }
    }
    std::mem::swap(poly, scratch);
}

#[derive(Clone, Copy)]
struct ScreenVertex<S> {
    x: S,
    y: S,
    z: S, // NDC depth, smaller is nearer
}

fn orient2d<S: Real>(a: &ScreenVertex<S>, b: &ScreenVertex<S>, px: S, py: S) -> S {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Top-left fill rule: a pixel center exactly on an edge belongs to the
/// triangle only when the edge is a top or left edge, so shared edges are
/// covered exactly once.
fn edge_is_top_left<S: Real>(a: &ScreenVertex<S>, b: &ScreenVertex<S>) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dy < S::zero() || (dy == S::zero() && dx > S::zero())
}

pub(super) fn rasterize<S: Real>(
    mesh: &TriangleMesh<S>,
    camera: &Camera<S>,
    config: &RenderConfig<S>,
) -> Image<S> {
    let width = config.width.max(1);
    let height = config.height.max(1);
    let mut img = Image::filled(width, height, config.background);
    let mut zbuf = vec![S::infinity(); (width * height) as usize];

    let basis = ViewBasis::new(camera);
    let aspect = S::of_usize(width as usize) / S::of_usize(height as usize);
    let light = normalize3(config.light_direction);
    let half_w = S::of_usize(width as usize) * S::of(0.5);
    let half_h = S::of_usize(height as usize) * S::of(0.5);

    let mut poly: Vec<ClipVertex<S>> = Vec::with_capacity(4);
    let mut scratch: Vec<ClipVertex<S>> = Vec::with_capacity(4);

    for f in 0..mesh.face_count() {
        let world = mesh.triangle(f);
        let view = [
            basis.to_view(world[0]),
            basis.to_view(world[1]),
            basis.to_view(world[2]),
        ];

        // flat shade from the view-space face normal, oriented toward the camera
        let mut normal = normalize3(cross3(sub3(view[1], view[0]), sub3(view[2], view[0])));
        if normal == [S::zero(); 3] {
            continue; // degenerate triangle
        }
        if normal[2] < S::zero() {
            normal = [-normal[0], -normal[1], -normal[2]];
        }
        let lambert = dot3(normal, light).max(S::zero());
        let shade = (config.ambient + config.diffuse * lambert).min(S::one());
        let rgb = [shade, shade, shade];

        poly.clear();
        for v in view {
            poly.push(project(v, camera, aspect));
        }
        clip_near(&mut poly, &mut scratch);
        if poly.len() < 3 {
            continue;
        }

        let screen: Vec<ScreenVertex<S>> = poly
            .iter()
            .map(|c| {
                let inv_w = S::one() / c.pos[3];
                let ndc_x = c.pos[0] * inv_w;
                let ndc_y = c.pos[1] * inv_w;
                let ndc_z = c.pos[2] * inv_w;
                ScreenVertex {
                    x: (ndc_x + S::one()) * half_w,
                    y: (S::one() - ndc_y) * half_h,
                    z: ndc_z,
                }
            })
            .collect();

        for i in 1..screen.len() - 1 {
            fill_triangle(
                &mut img,
                &mut zbuf,
                &screen[0],
                &screen[i],
                &screen[i + 1],
                rgb,
            );
        }
    }
    img
}

fn fill_triangle<S: Real>(
    img: &mut Image<S>,
    zbuf: &mut [S],
    a: &ScreenVertex<S>,
    b: &ScreenVertex<S>,
    c: &ScreenVertex<S>,
    rgb: Vec3<S>,
) {
    let (width, height) = (img.width, img.height);
    let mut v0 = *a;
    let mut v1 = *b;
    let v2 = *c;
    let mut area = orient2d(&v0, &v1, v2.x, v2.y);
    if area == S::zero() {
        return;
    }
    if area < S::zero() {
        std::mem::swap(&mut v0, &mut v1);
        area = -area;
    }

    let min_x = v0.x.min(v1.x).min(v2.x).floor().to_f64().max(0.0) as u32;
    let min_y = v0.y.min(v1.y).min(v2.y).floor().to_f64().max(0.0) as u32;
    let max_xf = v0.x.max(v1.x).max(v2.x).ceil().to_f64();
    let max_yf = v0.y.max(v1.y).max(v2.y).ceil().to_f64();
    if max_xf < 0.0 || max_yf < 0.0 || min_x as f64 >= width as f64 || min_y as f64 >= height as f64
    {
        return;
    }
    let max_x = (max_xf as u32).min(width.saturating_sub(1));
    let max_y = (max_yf as u32).min(height.saturating_sub(1));

    let accept = |w: S, tl: bool| w > S::zero() || (w == S::zero() && tl);
    let tl0 = edge_is_top_left(&v1, &v2);
    let tl1 = edge_is_top_left(&v2, &v0);
    let tl2 = edge_is_top_left(&v0, &v1);
    let inv_area = S::one() / area;
    let half = S::of(0.5);

    for py in min_y..=max_y {
        let cy = S::of_usize(py as usize) + half;
        for px in min_x..=max_x {
            let cx = S::of_usize(px as usize) + half;
            let w0 = orient2d(&v1, &v2, cx, cy);
            let w1 = orient2d(&v2, &v0, cx, cy);
            let w2 = orient2d(&v0, &v1, cx, cy);
            if !(accept(w0, tl0) && accept(w1, tl1) && accept(w2, tl2)) {
                continue;
            }
            let l0 = w0 * inv_area;
            let l1 = w1 * inv_area;
            let l2 = w2 * inv_area;
            let depth = l0 * v0.z + l1 * v1.z + l2 * v2.z;
            if depth > S::one() {
                continue; // beyond the far plane
            }
            let zi = (py * width + px) as usize;
            if depth < zbuf[zi] {
                zbuf[zi] = depth;
                img.set_pixel(px, py, rgb);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{orbit_poses, render};
    use crate::shapes;

    fn headon_camera() -> Camera<f64> {
        Camera {
            position: [0.0, 0.0, 3.0],
            target: [0.0, 0.0, 0.0],
            up: [0.0, 1.0, 0.0],
            vertical_fov: std::f64::consts::FRAC_PI_4,
            near: 0.1,
            far: 30.0,
        }
    }

    fn square_at_z(z: f64, half: f64) -> TriangleMesh<f64> {
        TriangleMesh::new(
            vec![
                [-half, -half, z],
                [half, -half, z],
                [half, half, z],
                [-half, half, z],
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    #[test]
    fn empty_mesh_renders_background() {
        let cfg = RenderConfig::<f64> {
            width: 16,
            height: 16,
            background: [0.2, 0.4, 0.6],
            ..RenderConfig::default()
        };
        let img = render(&TriangleMesh::empty(), &headon_camera(), &cfg);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(img.pixel(x, y), [0.2, 0.4, 0.6]);
            }
        }
    }

    #[test]
    fn nearer_surface_wins_depth_test() {
        let cfg = RenderConfig::<f64> {
            width: 64,
            height: 64,
            ..RenderConfig::default()
        };
        let cam = headon_camera();
        // tilt the near square so its shade differs from the far one
        let mut near = square_at_z(0.5, 0.3);
        for v in &mut near.vertices {
            let (y, z) = (v[1], v[2]);
            let (s, c) = (0.5f64.sin(), 0.5f64.cos());
            v[1] = y * c - (z - 0.5) * s;
            v[2] = y * s + (z - 0.5) * c + 0.5;
        }
        let far = square_at_z(-0.5, 0.9);

        let near_only = render(&near, &cam, &cfg);
        let far_only = render(&far, &cam, &cfg);
        let mut both = near.clone();
        let base = both.vertices.len() as u32;
        both.vertices.extend_from_slice(&far.vertices);
        both.faces
            .extend(far.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));

        let center = both_center(&render(&both, &cam, &cfg));
        assert_eq!(center, both_center(&near_only));
        assert_ne!(center, both_center(&far_only));

        // triangle submission order must not matter
        let mut reversed = both.clone();
        reversed.faces.reverse();
        assert_eq!(render(&both, &cam, &cfg), render(&reversed, &cam, &cfg));
    }

    fn both_center(img: &Image<f64>) -> [f64; 3] {
        img.pixel(img.width / 2, img.height / 2)
    }

    #[test]
    fn repeated_renders_are_byte_identical() {
        let cfg = RenderConfig::<f64> {
            width: 48,
            height: 48,
            ..RenderConfig::default()
        };
        let mesh = shapes::icosphere::<f64>(2, 0.4);
        let cams = orbit_poses::<f64>(2, &[0.3], 2.0);
        for cam in &cams {
            let a = render(&mesh, cam, &cfg);
            let b = render(&mesh, cam, &cfg);
            let bits = |img: &Image<f64>| {
                img.channels().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            };
            assert_eq!(bits(&a), bits(&b));
        }
    }

    #[test]
    fn shading_stays_within_bounds() {
        let cfg = RenderConfig::<f64> {
            width: 32,
            height: 32,
            background: [0.0, 0.0, 0.0],
            ..RenderConfig::default()
        };
        let mesh = shapes::unit_cube::<f64>();
        let cams = orbit_poses::<f64>(4, &[0.4], 2.5);
        let cap = cfg.ambient + cfg.diffuse;
        for cam in &cams {
            let img = render(&mesh, cam, &cfg);
            for v in img.channels() {
                assert!(*v >= 0.0 && *v <= cap);
            }
        }
    }
}

//! Deterministic headless software rasterizer. Perspective projection,
//! z-buffered triangle fill with a top-left convention, flat Lambert shading
//! on an untextured white material. No GPU, no display server, bit-identical
//! output for identical inputs.

mod png;
mod raster;

pub use png::encode_png;

use crate::geometry::GeometryError;
use crate::math::{dist_sq3, normalize3, Vec3};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

/// Orbit camera: position/target/up plus a vertical field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera<S> {
    pub position: Vec3<S>,
    pub target: Vec3<S>,
    pub up: Vec3<S>,
    pub vertical_fov: S,
    pub near: S,
    pub far: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig<S> {
    pub width: u32,
    pub height: u32,
    pub background: Vec3<S>,
    /// Directional light in camera space.
    pub light_direction: Vec3<S>,
    pub ambient: S,
    pub diffuse: S,
}

impl<S: Real> Default for RenderConfig<S> {
    fn default() -> Self {
        RenderConfig {
            width: 512,
            height: 512,
            background: [S::one(), S::one(), S::one()],
            light_direction: normalize3([S::of(0.3), S::of(0.3), S::one()]),
            ambient: S::of(0.25),
            diffuse: S::of(0.7),
        }
    }
}

/// Float RGB raster in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<S> {
    pub width: u32,
    pub height: u32,
    data: Vec<S>,
}

impl<S: Real> Image<S> {
    pub fn filled(width: u32, height: u32, color: Vec3<S>) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&color);
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Vec3<S> {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: Vec3<S>) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i] = rgb[0];
        self.data[i + 1] = rgb[1];
        self.data[i + 2] = rgb[2];
    }

    pub fn channels(&self) -> &[S] {
        &self.data
    }

    pub fn channels_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Rec. 601 luma.
    pub fn to_luma(&self) -> Vec<S> {
        self.data
            .chunks_exact(3)
            .map(|px| {
                px[0] * S::of(0.299) + px[1] * S::of(0.587) + px[2] * S::of(0.114)
            })
            .collect()
    }
}

/// Deterministic orbit poses: `n_azimuth` equally spaced azimuths (azimuth 0
/// along +x) for each elevation, all at `distance` from the origin and aimed
/// at it. Up is +z, falling back to +x when looking straight down a pole.
pub fn orbit_poses<S: Real>(
    n_azimuth: usize,
    elevations: &[S],
    distance: S,
) -> Vec<Camera<S>> {
    let mut cams = Vec::with_capacity(n_azimuth * elevations.len());
    let tau = S::of(std::f64::consts::TAU);
    for &elevation in elevations {
        let (sin_e, cos_e) = (elevation.sin(), elevation.cos());
        for k in 0..n_azimuth {
            let azimuth = tau * S::of_usize(k) / S::of_usize(n_azimuth);
            let position = [
                distance * cos_e * azimuth.cos(),
                distance * cos_e * azimuth.sin(),
                distance * sin_e,
            ];
            let up = if cos_e.abs() < S::of(1e-9) {
                [S::one(), S::zero(), S::zero()]
            } else {
                [S::zero(), S::zero(), S::one()]
            };
            cams.push(Camera {
                position,
                target: [S::zero(); 3],
                up,
                vertical_fov: S::of(std::f64::consts::FRAC_PI_4),
                near: distance * S::of(0.01),
                far: distance * S::of(10.0),
            });
        }
    }
    cams
}

/// Camera distance that frames the mesh: `margin * r / tan(fov / 2)` with `r`
/// the bounding-sphere radius about the AABB center.
pub fn fit_distance<S: Real>(
    mesh: &TriangleMesh<S>,
    vertical_fov: S,
    margin: S,
) -> Result<S, GeometryError> {
    let aabb = mesh.aabb().ok_or(GeometryError::DegenerateExtent)?;
    let center = aabb.center();
    let mut r_sq = S::zero();
    for v in &mesh.vertices {
        r_sq = r_sq.max(dist_sq3(*v, center));
    }
    let r = r_sq.sqrt();
    if !(r > S::zero()) {
        return Err(GeometryError::DegenerateExtent);
    }
    Ok(margin * r / (vertical_fov * S::of(0.5)).tan())
}

/// Distance that frames any normalized mesh (longest AABB edge 1): uses the
/// worst-case bounding-sphere radius sqrt(3)/2 so every object in a run
/// shares one camera set.
pub fn envelope_distance<S: Real>(vertical_fov: S, margin: S) -> S {
    let r = S::of(3.0).sqrt() * S::of(0.5);
    margin * r / (vertical_fov * S::of(0.5)).tan()
}

/// Render the mesh. Empty meshes produce a pure-background image.
pub fn render<S: Real>(
    mesh: &TriangleMesh<S>,
    camera: &Camera<S>,
    config: &RenderConfig<S>,
) -> Image<S> {
    raster::rasterize(mesh, camera, config)
}

//! recon-eval: a model-agnostic evaluation toolkit for single-view 3D
//! reconstruction.
//!
//! The pipeline loads ground-truth and reconstructed meshes (OBJ / PLY / GLB),
//! renders deterministic headless views of both under identical cameras and
//! lighting, scores the renders with PSNR / SSIM / LPIPS, scores the geometry
//! with volumetric IoU / Chamfer / Hausdorff, colors reconstructions by
//! surface error, and aggregates everything into mean/max/min benchmark
//! tables.
//!
//! All numeric kernels are generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); the harness and CLI run on `f64`, and
//! the aliases below pin that choice.

pub mod geometry;
pub mod harness;
pub mod heatmap;
pub mod io;
pub mod math;
pub mod mesh;
pub mod metrics2d;
pub mod metrics3d;
pub mod render;
pub mod rng;
pub mod scalar;
pub mod shapes;

pub use rng::SeededRng;
pub use scalar::Real;

/// Pipeline-precision aliases (the harness and CLI work in `f64`).
pub type Mesh = mesh::TriangleMesh<f64>;
pub type Cloud = mesh::PointCloud<f64>;
pub type Rgb = math::Vec3<f64>;
pub type Frame = render::Image<f64>;
pub type View = render::Camera<f64>;

/// Single-precision variants for memory-constrained callers.
pub type Mesh32 = mesh::TriangleMesh<f32>;
pub type Cloud32 = mesh::PointCloud<f32>;
pub type Frame32 = render::Image<f32>;

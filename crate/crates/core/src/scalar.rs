//! Scalar abstraction: every geometric and metric kernel in this crate is
//! generic over [`Real`], instantiated as `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

/// Floating-point scalar usable by the mesh, geometry, render, and metric kernels.
pub trait Real:
    num_traits::Float
    + num_traits::NumAssign
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// PLY property type name for this scalar ("float" or "double").
    const PLY_TYPE: &'static str;
    /// Byte width of the little-endian on-disk encoding.
    const LE_WIDTH: usize;

    /// Convert an `f64` literal or intermediate into this scalar.
    fn of(v: f64) -> Self;
    fn of_usize(n: usize) -> Self;
    fn to_f64(self) -> f64;

    fn write_le(self, out: &mut Vec<u8>);
    /// Decode from exactly `LE_WIDTH` little-endian bytes.
    fn from_le(bytes: &[u8]) -> Self;
}

impl Real for f32 {
    const PLY_TYPE: &'static str = "float";
    const LE_WIDTH: usize = 4;

    fn of(v: f64) -> Self {
        v as f32
    }
    fn of_usize(n: usize) -> Self {
        n as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn from_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Real for f64 {
    const PLY_TYPE: &'static str = "double";
    const LE_WIDTH: usize = 8;

    fn of(v: f64) -> Self {
        v
    }
    fn of_usize(n: usize) -> Self {
        n as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn from_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

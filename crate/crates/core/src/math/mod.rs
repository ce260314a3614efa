//! Deterministic geometry and metric substrate: cameras, rays, stratified
//! sampling along rays, image downsampling and PSNR.
//!
//! Everything here is a pure function over `f64`; training code casts the
//! results into its working scalar.

mod camera;
mod image;
mod sampling;
mod vec3;

pub use camera::{generate_ray, CameraModel, Ray};
pub use image::{downsample, psnr, Image, Psnr};
pub use sampling::stratified_samples;
pub use vec3::{Mat3, Vec3};

/// Axis-aligned box used to bound the scene; fields normalize points into
/// `[0,1]^3` relative to it before encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    /// Cube of half-extent `h` centered at the origin.
    pub fn centered(h: f64) -> Self {
        Aabb {
            min: Vec3::new(-h, -h, -h),
            max: Vec3::new(h, h, h),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Maps a contained point to the unit cube.
    pub fn normalize(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            (p.x - self.min.x) / (self.max.x - self.min.x),
            (p.y - self.min.y) / (self.max.y - self.min.y),
            (p.z - self.min.z) / (self.max.z - self.min.z),
        )
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// Intersects a ray with the box, clipped to `[ray.t_near, ray.t_far]`.
    /// Returns `None` when the ray misses the box entirely.
    pub fn clip_ray(&self, ray: &Ray) -> Option<(f64, f64)> {
        let mut t0 = ray.t_near;
        let mut t1 = ray.t_far;
        for axis in 0..3 {
            let o = ray.origin.get(axis);
            let d = ray.direction.get(axis);
            let (lo, hi) = (self.min.get(axis), self.max.get(axis));
            if d.abs() < 1e-12 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut ta, mut tb) = ((lo - o) * inv, (hi - o) * inv);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 >= t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

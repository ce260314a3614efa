use crate::error::CoreError;
use crate::math::vec3::{Mat3, Vec3};

/// Pinhole camera with a rigid camera-to-world pose.
///
/// Convention: camera space looks down `-z` with `+y` up (the synthetic
/// dataset convention); pixel centers sit at half-integer offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Camera-to-world rotation.
    pub rotation: Mat3,
    /// Camera position in world space.
    pub translation: Vec3,
}

impl CameraModel {
    pub fn new(
        width: usize,
        height: usize,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        rotation: Mat3,
        translation: Vec3,
    ) -> Result<Self, CoreError> {
        if width < 1 || height < 1 {
            return Err(CoreError::domain("camera dimensions must be >= 1"));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(CoreError::domain("focal lengths must be positive"));
        }
        let defect = rotation.orthonormality_defect();
        if defect > 1e-6 {
            return Err(CoreError::domain(format!(
                "rotation is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(CameraModel {
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            rotation,
            translation,
        })
    }

    /// Camera with identity pose and principal point at the image center.
    pub fn centered(width: usize, height: usize, focal: f64) -> Result<Self, CoreError> {
        CameraModel::new(
            width,
            height,
            focal,
            focal,
            width as f64 / 2.0,
            height as f64 / 2.0,
            Mat3::IDENTITY,
            Vec3::ZERO,
        )
    }

    /// Scales intrinsics for an image downsampled by `factor`.
    pub fn downsampled(&self, factor: usize) -> Result<Self, CoreError> {
        if factor == 0 || self.width % factor != 0 || self.height % factor != 0 {
            return Err(CoreError::domain(format!(
                "downsample factor {factor} does not divide {}x{}",
                self.width, self.height
            )));
        }
        let f = factor as f64;
        CameraModel::new(
            self.width / factor,
            self.height / factor,
            self.fx / f,
            self.fy / f,
            self.cx / f,
            self.cy / f,
            self.rotation,
            self.translation,
        )
    }
}

/// A world-space ray with a unit direction and sampling bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub t_near: f64,
    pub t_far: f64,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3, t_near: f64, t_far: f64) -> Result<Self, CoreError> {
        if (direction.norm() - 1.0).abs() > 1e-6 {
            return Err(CoreError::domain("ray direction must be unit length"));
        }
        if !(0.0 <= t_near && t_near < t_far) {
            return Err(CoreError::domain("ray bounds must satisfy 0 <= near < far"));
        }
        Ok(Ray {
            origin,
            direction,
            t_near,
            t_far,
        })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    /// Same ray with tighter sampling bounds.
    pub fn with_bounds(&self, t_near: f64, t_far: f64) -> Result<Self, CoreError> {
        Ray::new(self.origin, self.direction, t_near, t_far)
    }
}

/// Casts the ray through pixel `(u, v)`; `u` runs along width, `v` down
/// height, both continuous with the pixel center at `+0.5`.
pub fn generate_ray(cam: &CameraModel, u: f64, v: f64, t_near: f64, t_far: f64) -> Result<Ray, CoreError> {
    if !(0.0 <= u && u < cam.width as f64 && 0.0 <= v && v < cam.height as f64) {
        return Err(CoreError::domain(format!(
            "pixel ({u}, {v}) outside {}x{} image",
            cam.width, cam.height
        )));
    }
    let dir_cam = Vec3::new(
        (u + 0.5 - cam.cx) / cam.fx,
        -(v + 0.5 - cam.cy) / cam.fy,
        -1.0,
    );
    let dir_world = cam.rotation.mul_vec(dir_cam).normalized();
    Ray::new(cam.translation, dir_world, t_near, t_far)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_point_ray_is_forward() {
        let cam = CameraModel::new(1, 1, 1.0, 1.0, 0.5, 0.5, Mat3::IDENTITY, Vec3::ZERO).unwrap();
        let ray = generate_ray(&cam, 0.0, 0.0, 0.1, 10.0).unwrap();
        assert_eq!(ray.origin, Vec3::ZERO);
        assert!((ray.direction - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn offset_pixel_gives_45_degree_ray() {
        let cam =
            CameraModel::new(200, 100, 100.0, 100.0, 50.0, 50.0, Mat3::IDENTITY, Vec3::ZERO)
                .unwrap();
        let ray = generate_ray(&cam, 149.5, 49.5, 0.1, 10.0).unwrap();
        let expect = Vec3::new(1.0, 0.0, -1.0).normalized();
        assert!((ray.direction - expect).norm() < 1e-12);
    }

    #[test]
    fn rotated_pose_matches_matrix_vector_oracle() {
        // Oracle: apply the same rotation to the identity-pose direction by
        // an explicit row-by-row matrix-vector product.
        let rot = Mat3::rotation_y(std::f64::consts::FRAC_PI_2);
        let cam_id =
            CameraModel::new(200, 100, 100.0, 100.0, 50.0, 50.0, Mat3::IDENTITY, Vec3::ZERO)
                .unwrap();
        let cam_rot =
            CameraModel::new(200, 100, 100.0, 100.0, 50.0, 50.0, rot, Vec3::ZERO).unwrap();
        let (u, v) = (123.0, 17.0);
        let d_id = generate_ray(&cam_id, u, v, 0.1, 10.0).unwrap().direction;
        let d_rot = generate_ray(&cam_rot, u, v, 0.1, 10.0).unwrap().direction;

        let mut oracle = [0.0; 3];
        let d = d_id.to_array();
        for (i, row) in rot.rows.iter().enumerate() {
            oracle[i] = row[0] * d[0] + row[1] * d[1] + row[2] * d[2];
        }
        let oracle = Vec3::from_array(oracle);
        assert!((d_rot - oracle).norm() < 1e-12);
    }

    #[test]
    fn out_of_bounds_pixel_is_rejected() {
        let cam = CameraModel::centered(4, 4, 2.0).unwrap();
        assert!(generate_ray(&cam, 4.0, 0.0, 0.1, 1.0).is_err());
        assert!(generate_ray(&cam, -0.1, 0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn direction_is_unit_for_random_cameras() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rot = Mat3::rotation_y(rng.gen_range(-3.0..3.0));
            let cam = CameraModel::new(
                64,
                48,
                rng.gen_range(10.0..200.0),
                rng.gen_range(10.0..200.0),
                rng.gen_range(0.0..64.0),
                rng.gen_range(0.0..48.0),
                rot,
                Vec3::new(rng.gen_range(-2.0..2.0), 0.0, rng.gen_range(-2.0..2.0)),
            )
            .unwrap();
            let u = rng.gen_range(0.0..64.0);
            let v = rng.gen_range(0.0..48.0);
            let ray = generate_ray(&cam, u, v, 0.5, 5.0).unwrap();
            assert!((ray.direction.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn non_orthonormal_rotation_is_rejected() {
        let bad = Mat3::new([[1.0, 0.0, 0.0], [0.0, 1.1, 0.0], [0.0, 0.0, 1.0]]);
        assert!(CameraModel::new(4, 4, 1.0, 1.0, 2.0, 2.0, bad, Vec3::ZERO).is_err());
    }
}

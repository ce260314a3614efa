use crate::error::CoreError;
use crate::math::camera::Ray;
use rand::Rng;

/// Stratified quadrature points along a ray: `[t_near, t_far]` is split into
/// `n` equal bins and one point is drawn per bin (bin midpoint when `jitter`
/// is `None`). The result is strictly increasing.
pub fn stratified_samples(
    ray: &Ray,
    n: usize,
    mut jitter: Option<&mut dyn rand::RngCore>,
) -> Result<Vec<f64>, CoreError> {
    if n == 0 {
        return Err(CoreError::domain("sample count must be >= 1"));
    }
    let span = ray.t_far - ray.t_near;
    let bin = span / n as f64;
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let u = match jitter.as_deref_mut() {
            Some(rng) => rng.gen_range(0.0..1.0),
            None => 0.5,
        };
        ts.push(ray.t_near + (i as f64 + u) * bin);
    }
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use rand::SeedableRng;

    fn unit_ray(near: f64, far: f64) -> Ray {
        Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0), near, far).unwrap()
    }

    #[test]
    fn midpoints_without_jitter() {
        let ts = stratified_samples(&unit_ray(0.0, 1.0), 2, None).unwrap();
        assert_eq!(ts, vec![0.25, 0.75]);
        let ts = stratified_samples(&unit_ray(2.0, 4.0), 1, None).unwrap();
        assert_eq!(ts, vec![3.0]);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(stratified_samples(&unit_ray(0.0, 1.0), 0, None).is_err());
    }

    #[test]
    fn jittered_samples_respect_bins_and_order() {
        let ray = unit_ray(0.0, 1.0);
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ts = stratified_samples(&ray, 64, Some(&mut rng)).unwrap();
            assert_eq!(ts.len(), 64);
            let bin = 1.0 / 64.0;
            for (i, &t) in ts.iter().enumerate() {
                assert!(t >= i as f64 * bin && t < (i + 1) as f64 * bin, "t {t} bin {i}");
            }
            for w in ts.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }
}

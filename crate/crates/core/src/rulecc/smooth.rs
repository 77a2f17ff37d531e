use crate::cube::FrameMap;
use crate::error::{Error, Result};
use crate::preprocess::StdMap;

/// Normalized 1-D Gaussian taps over `[-radius, radius]`, radius = ceil(3 sigma).
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// 2-D Gaussian blur with zero padding.
///
/// The 2-D kernel is the outer product of [`gaussian_kernel`] with itself,
/// so it is applied as two 1-D passes.
pub fn gaussian_smooth(map: &StdMap, sigma: f64) -> Result<StdMap> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let k = gaussian_kernel(sigma);
    let radius = (k.len() / 2) as isize;
    let (rows, cols) = map.shape();
    let src = map.data();

    let mut horiz = vec![0.0f64; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (ki, w) in k.iter().enumerate() {
                let cc = c as isize + ki as isize - radius;
                if (0..cols as isize).contains(&cc) {
                    acc += w * src[r * cols + cc as usize];
                }
            }
            horiz[r * cols + c] = acc;
        }
    }
    let mut out = vec![0.0f64; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (ki, w) in k.iter().enumerate() {
                let rr = r as isize + ki as isize - radius;
                if (0..rows as isize).contains(&rr) {
                    acc += w * horiz[rr as usize * cols + c];
                }
            }
            // clamp tiny negative rounding residue
            out[r * cols + c] = acc.max(0.0);
        }
    }
    StdMap::new(FrameMap::new(rows, cols, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Direct 2-D convolution straight from the definition.
    fn oracle(map: &FrameMap, sigma: f64) -> Vec<f64> {
        let rad = (3.0 * sigma).ceil() as i64;
        let mut weights = Vec::new();
        let mut total = 0.0;
        for dr in -rad..=rad {
            for dc in -rad..=rad {
                let w = (-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)).exp();
                weights.push((dr, dc, w));
                total += w;
            }
        }
        let mut out = vec![0.0; map.rows() * map.cols()];
        for r in 0..map.rows() as i64 {
            for c in 0..map.cols() as i64 {
                let mut acc = 0.0;
                for &(dr, dc, w) in &weights {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 0 && cc >= 0 && rr < map.rows() as i64 && cc < map.cols() as i64 {
                        acc += w / total * map.get(rr as usize, cc as usize);
                    }
                }
                out[r as usize * map.cols() + c as usize] = acc;
            }
        }
        out
    }

    #[test]
    fn kernel_shape() {
        let k = gaussian_kernel(0.8);
        assert_eq!(k.len(), 7);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(k[3] > k[2] && k[2] > k[1]);
    }

    #[test]
    fn zero_map_stays_zero() {
        let m = StdMap::new(FrameMap::filled(12, 91, 0.0)).unwrap();
        assert!(gaussian_smooth(&m, 0.8).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_interior_preserved_border_reduced() {
        let m = StdMap::new(FrameMap::filled(12, 91, 2.0)).unwrap();
        let s = gaussian_smooth(&m, 0.8).unwrap();
        let o = oracle(&m, 0.8);
        for (a, b) in s.data().iter().zip(&o) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.get(6, 45) - 2.0).abs() < 1e-12);
        assert!(s.get(0, 0) < 2.0 - 1e-3);
        assert!(s.get(0, 45) < 2.0 - 1e-3);
    }

    #[test]
    fn impulse_gives_kernel() {
        let mut f = FrameMap::filled(12, 91, 0.0);
        f.set(6, 45, 1.0);
        let s = gaussian_smooth(&StdMap::new(f.clone()).unwrap(), 0.8).unwrap();
        let k = gaussian_kernel(0.8);
        assert!((s.get(6, 45) - k[3] * k[3]).abs() < 1e-15);
        let o = oracle(&f, 0.8);
        for (a, b) in s.data().iter().zip(&o) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_maps_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for sigma in [0.5, 0.8, 1.0] {
            let f = FrameMap::from_fn(12, 91, |_, _| rng.random_range(0.0..0.1));
            let s = gaussian_smooth(&StdMap::new(f.clone()).unwrap(), sigma).unwrap();
            for (a, b) in s.data().iter().zip(&oracle(&f, sigma)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_sigma() {
        let m = StdMap::new(FrameMap::filled(2, 2, 0.0)).unwrap();
        assert!(gaussian_smooth(&m, 0.0).is_err());
    }
}

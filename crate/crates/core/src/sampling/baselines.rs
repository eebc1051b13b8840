use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{dist2, BoundingBox, Point3, PointCloud};
use crate::error::{Error, Result};

fn check_count(cloud: &PointCloud, m: usize) -> Result<()> {
    if m == 0 || m > cloud.len() {
        return Err(Error::InsufficientPoints {
            needed: m.max(1),
            available: cloud.len(),
        });
    }
    Ok(())
}

/// Greedy farthest-point order starting at `start`; ties go to the lower index.
pub fn sample_fps(cloud: &PointCloud, m: usize, start: usize) -> Result<Vec<usize>> {
    check_count(cloud, m)?;
    let pts = cloud.positions();
    if start >= pts.len() {
        return Err(Error::InvalidParameter(format!(
            "start index {start} outside 0..{}",
            pts.len()
        )));
    }
    let mut nearest = vec![f64::INFINITY; pts.len()];
    let mut out = Vec::with_capacity(m);
    let mut cur = start;
    for _ in 0..m {
        out.push(cur);
        nearest[cur] = f64::NEG_INFINITY;
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, p) in pts.iter().enumerate() {
            if nearest[i] == f64::NEG_INFINITY {
                continue;
            }
            let d = dist2(p, &pts[cur]);
            if d < nearest[i] {
                nearest[i] = d;
            }
            if nearest[i] > best_d {
                best_d = nearest[i];
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        cur = best;
    }
    Ok(out)
}

/// Uniform choice without replacement, returned ascending.
pub fn sample_random(cloud: &PointCloud, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > cloud.len() {
        return Err(Error::InsufficientPoints {
            needed: m,
            available: cloud.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, cloud.len(), m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Dart throwing over a seeded permutation of the points: a point is accepted
/// when every accepted point is at least `r` away. The result is maximal and
/// listed in acceptance order.
pub fn sample_poisson(cloud: &PointCloud, r: f64, seed: u64) -> Result<Vec<usize>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("Poisson radius {r}")));
    }
    let pts = cloud.positions();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let Ok(bb) = BoundingBox::of(pts) else {
        return Ok(Vec::new());
    };
    // keep cell coordinates well inside i64
    let cell = r.max(bb.peak() * 1e-9);
    let key = |p: &Point3| -> [i64; 3] {
        std::array::from_fn(|a| ((p[a] - bb.min[a]) / cell).floor() as i64)
    };
    let r2 = r * r;
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut accepted = Vec::new();
    for i in order {
        let p = &pts[i];
        let c = key(p);
        let blocked = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                (-1..=1).any(|dz| {
                    grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz])
                        .is_some_and(|v| v.iter().any(|&j| dist2(p, &pts[j]) < r2))
                })
            })
        });
        if !blocked {
            grid.entry(c).or_default().push(i);
            accepted.push(i);
        }
    }
    Ok(accepted)
}

/// Poisson-disk sampling steered to exactly `m` points: the radius is bisected
/// until at least `m` points survive, then the acceptance order is truncated.
/// Returned ascending.
pub fn sample_poisson_count(cloud: &PointCloud, m: usize, seed: u64) -> Result<Vec<usize>> {
    check_count(cloud, m)?;
    let peak = cloud.bounding_box()?.peak();
    if !(peak > 0.0) {
        return sample_random(cloud, m, seed);
    }
    let (mut lo, mut hi) = (0.0f64, peak * 2.0);
    let mut best: Option<Vec<usize>> = None;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        let got = sample_poisson(cloud, mid, seed)?;
        if got.len() >= m {
            let exact = got.len() == m;
            best = Some(got);
            lo = mid;
            if exact {
                break;
            }
        } else {
            hi = mid;
        }
    }
    let mut idx = match best {
        Some(v) => v,
        // even tiny radii fail only for duplicated points; fall back to all of them
        None => sample_poisson(cloud, peak * 1e-12, seed)?,
    };
    if idx.len() < m {
        let mut taken = vec![false; cloud.len()];
        idx.iter().for_each(|&i| taken[i] = true);
        idx.extend((0..cloud.len()).filter(|&i| !taken[i]).take(m - idx.len()));
    }
    idx.truncate(m);
    idx.sort_unstable();
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| [rng.random(), rng.random(), rng.random()])
                .collect(),
        )
        .unwrap()
    }

    fn fps_oracle(pts: &[Point3], m: usize, start: usize) -> Vec<usize> {
        let mut sel = vec![start];
        while sel.len() < m {
            let mut best = (f64::NEG_INFINITY, 0);
            for i in 0..pts.len() {
                if sel.contains(&i) {
                    continue;
                }
                let d = sel
                    .iter()
                    .map(|&j| dist2(&pts[i], &pts[j]))
                    .fold(f64::INFINITY, f64::min);
                if d > best.0 {
                    best = (d, i);
                }
            }
            sel.push(best.1);
        }
        sel
    }

    #[test]
    fn fps_single_is_start() {
        assert_eq!(sample_fps(&random_cloud(10, 0), 1, 7).unwrap(), vec![7]);
    }

    #[test]
    fn fps_square_corners() {
        let c = PointCloud::new(vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(sample_fps(&c, 2, 0).unwrap(), vec![0, 3]);
        // 1 and 2 tie after {0,3}; lower index wins
        assert_eq!(sample_fps(&c, 3, 0).unwrap(), vec![0, 3, 1]);
    }

    #[test]
    fn fps_rejects_bad_arguments() {
        let c = random_cloud(4, 0);
        assert!(matches!(
            sample_fps(&c, 5, 0),
            Err(Error::InsufficientPoints { .. })
        ));
        assert!(sample_fps(&c, 2, 4).is_err());
    }

    #[test]
    fn random_full_set_is_sorted_identity() {
        let c = random_cloud(50, 1);
        assert_eq!(
            sample_random(&c, 50, 9).unwrap(),
            (0..50).collect::<Vec<_>>()
        );
        assert!(sample_random(&c, 51, 9).is_err());
        assert_eq!(
            sample_random(&c, 10, 3).unwrap(),
            sample_random(&c, 10, 3).unwrap()
        );
    }

    #[test]
    fn poisson_two_points_keep_one() {
        let c = PointCloud::new(vec![[0.0; 3], [0.5, 0.0, 0.0]]).unwrap();
        assert_eq!(sample_poisson(&c, 1.0, 0).unwrap().len(), 1);
        assert!(sample_poisson(&c, 0.0, 0).is_err());
    }

    #[test]
    fn poisson_count_hits_target() {
        let c = random_cloud(2048, 3);
        for m in [128, 256, 1024, 2048] {
            let idx = sample_poisson_count(&c, m, 5).unwrap();
            assert_eq!(idx.len(), m);
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
    }

    proptest! {
        #[test]
        fn fps_matches_greedy_oracle(seed in 0u64..1000, n in 1usize..=64, mfrac in 0.0f64..1.0, sfrac in 0.0f64..1.0) {
            let c = random_cloud(n, seed);
            let m = 1 + ((n - 1) as f64 * mfrac) as usize;
            let start = ((n as f64 * sfrac) as usize).min(n - 1);
            prop_assert_eq!(sample_fps(&c, m, start).unwrap(), fps_oracle(c.positions(), m, start));
        }

        #[test]
        fn poisson_separated_and_maximal(seed in 0u64..1000, n in 1usize..200, r in 0.02f64..0.6) {
            let c = random_cloud(n, seed);
            let pts = c.positions();
            let acc = sample_poisson(&c, r, seed).unwrap();
            for (a, &i) in acc.iter().enumerate() {
                for &j in &acc[a + 1..] {
                    prop_assert!(dist2(&pts[i], &pts[j]).sqrt() >= r);
                }
            }
            for i in 0..n {
                if !acc.contains(&i) {
                    prop_assert!(acc.iter().any(|&j| dist2(&pts[i], &pts[j]).sqrt() < r));
                }
            }
        }
    }
}

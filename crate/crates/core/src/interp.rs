//! K-nearest-neighbor extension of node functions to off-cloud points.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::Scalar;

/// Interpolation settings: plain averaging over the k nearest cloud points
/// in ambient Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpConfig {
    pub k: usize,
}

/// Value at each query point: the arithmetic mean of `theta` over the k
/// nearest cloud points (distance ties broken by lowest index).
pub fn knn_interpolate<T: Scalar>(
    theta: &Array1<T>,
    cloud: &PointCloud<T>,
    queries: &Array2<T>,
    config: &InterpConfig,
) -> Result<Array1<T>> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::invalid("cloud", "cannot interpolate from an empty cloud"));
    }
    if config.k == 0 || config.k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= {n}, got {}", config.k)));
    }
    if theta.len() != n {
        return Err(Error::DimensionMismatch {
            what: "node function",
            expected: n,
            got: theta.len(),
        });
    }
    if queries.ncols() != cloud.ambient_dim() {
        return Err(Error::DimensionMismatch {
            what: "query ambient dimension",
            expected: cloud.ambient_dim(),
            got: queries.ncols(),
        });
    }
    if queries.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("queries", "non-finite query coordinate"));
    }

    let inv_k = T::one() / T::cast_usize(config.k);
    let mut out = Array1::zeros(queries.nrows());
    let mut scratch: Vec<(T, usize)> = Vec::with_capacity(n);
    for (qi, query) in queries.rows().into_iter().enumerate() {
        scratch.clear();
        for i in 0..n {
            let mut d2 = T::zero();
            for (a, b) in cloud.points.row(i).iter().zip(query.iter()) {
                let diff = *a - *b;
                d2 += diff * diff;
            }
            scratch.push((d2, i));
        }
        scratch.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let mut acc = T::zero();
        for &(_, idx) in scratch.iter().take(config.k) {
            acc += theta[idx];
        }
        out[qi] = acc * inv_k;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat_interval, semi_ellipse};
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn coincident_query_with_k1_returns_the_node_value() {
        let cloud = semi_ellipse::<f64>(30).unwrap();
        let theta = Array1::from_shape_fn(30, |i| (i as f64).sin());
        let queries = cloud.points.slice(ndarray::s![4..5, ..]).to_owned();
        let vals = knn_interpolate(&theta, &cloud, &queries, &InterpConfig { k: 1 }).unwrap();
        assert_eq!(vals[0], theta[4]);
    }

    #[test]
    fn constants_are_reproduced_for_any_k() {
        let cloud = flat_interval::<f64>(25).unwrap();
        let theta = Array1::from_elem(25, 3.75);
        let queries = array![[0.31], [0.77], [-0.4]];
        for k in [1usize, 3, 25] {
            let vals = knn_interpolate(&theta, &cloud, &queries, &InterpConfig { k }).unwrap();
            for v in vals.iter() {
                assert_relative_eq!(*v, 3.75);
            }
        }
    }

    #[test]
    fn hand_computed_two_neighbor_average() {
        let points = array![[0.0], [1.0], [2.0]];
        let cloud = PointCloud::new(
            points.clone(),
            points,
            vec![0, 2],
            vec![
                crate::geometry::BoundaryComponent { label: "B1".into(), idx: vec![0] },
                crate::geometry::BoundaryComponent { label: "B2".into(), idx: vec![2] },
            ],
            crate::geometry::GridInfo::Path { n: 3 },
        )
        .unwrap();
        let theta = array![0.0, 1.0, 2.0];
        let vals =
            knn_interpolate(&theta, &cloud, &array![[0.9]], &InterpConfig { k: 2 }).unwrap();
        // Neighbors of 0.9 are nodes 1 (0.1 away) and 0 (0.9 away).
        assert_relative_eq!(vals[0], 0.5);
    }

    #[test]
    fn rejects_empty_cloud_and_bad_k() {
        let cloud = flat_interval::<f64>(10).unwrap();
        let theta = Array1::zeros(10);
        let q = array![[0.5]];
        assert!(knn_interpolate(&theta, &cloud, &q, &InterpConfig { k: 0 }).is_err());
        assert!(knn_interpolate(&theta, &cloud, &q, &InterpConfig { k: 11 }).is_err());
        assert!(knn_interpolate(&theta, &cloud, &array![[f64::NAN]], &InterpConfig { k: 1 }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Output is a convex combination, so it stays inside the range of
        /// theta, and the map is exactly linear in theta.
        #[test]
        fn convexity_and_linearity(seed in 0u64..500, k in 1usize..8, q in -0.5f64..1.5) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cloud = flat_interval::<f64>(12).unwrap();
            let a = Array1::from_shape_fn(12, |_| rng.random::<f64>() * 4.0 - 2.0);
            let b = Array1::from_shape_fn(12, |_| rng.random::<f64>() * 4.0 - 2.0);
            let queries = array![[q]];
            let config = InterpConfig { k };
            let va = knn_interpolate(&a, &cloud, &queries, &config).unwrap();
            let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(va[0] >= lo - 1e-12 && va[0] <= hi + 1e-12);

            let vb = knn_interpolate(&b, &cloud, &queries, &config).unwrap();
            let combined = knn_interpolate(&(&a * 2.5 + &b), &cloud, &queries, &config).unwrap();
            prop_assert!((combined[0] - (2.5 * va[0] + vb[0])).abs() <= 1e-12);
        }
    }
}

//! Kernel matrices and graph Laplacians on point clouds: bandwidth
//! calibration, kernel density estimation, the kappa-weighted Laplacian,
//! the self-tuned Laplacian, truncation onto the cloud block, and dense
//! spectral decompositions.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Kernel bandwidth configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig<T> {
    /// Bandwidth, in squared-length units.
    pub epsilon: T,
    /// Neighbor count used during calibration.
    pub k_closest: usize,
    /// Intrinsic dimension of the sampled manifold.
    pub d: usize,
}

impl<T: Scalar> KernelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        if self.k_closest < 2 {
            return Err(Error::invalid("k_closest", "need at least 2 neighbors"));
        }
        if self.d < 1 {
            return Err(Error::invalid("d", "intrinsic dimension must be at least 1"));
        }
        Ok(())
    }
}

/// What a graph operator discretizes; fixes which operations accept it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    WeightedLaplacian,
    SelfTuned,
    Truncated,
    Gpdm,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::WeightedLaplacian => "weighted_laplacian",
            OperatorKind::SelfTuned => "self_tuned",
            OperatorKind::Truncated => "truncated",
            OperatorKind::Gpdm => "gpdm",
        }
    }
}

/// Interior/boundary partition metadata carried by an operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInfo {
    pub interior: usize,
    pub boundary: usize,
    /// permutation[new_position] = original index; interior first.
    pub permutation: Vec<usize>,
}

/// A dense Laplacian-type matrix over a point set.
#[derive(Debug, Clone)]
pub struct GraphOperator<T> {
    pub matrix: Array2<T>,
    pub kind: OperatorKind,
    pub block: Option<BlockInfo>,
    pub epsilon: Option<T>,
}

impl<T: Scalar> GraphOperator<T> {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn with_block(mut self, block: BlockInfo) -> Self {
        self.block = Some(block);
        self
    }
}

/// The m smallest eigenpairs of a symmetric graph operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T> {
    /// Ascending eigenvalues, length m.
    pub eigenvalues: Vec<T>,
    /// N x m orthonormal eigenvectors, columns matching `eigenvalues`.
    pub eigenvectors: Array2<T>,
}

impl<T: Scalar> SpectralDecomposition<T> {
    pub fn retained(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn nodes(&self) -> usize {
        self.eigenvectors.nrows()
    }
}

/// Full N x N matrix of pairwise squared Euclidean distances.
pub fn pairwise_sq_dists<T: Scalar>(points: &Array2<T>) -> Array2<T> {
    let n = points.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = T::zero();
            for (a, b) in points.row(i).iter().zip(points.row(j).iter()) {
                let diff = *a - *b;
                acc += diff * diff;
            }
            out[[i, j]] = acc;
            out[[j, i]] = acc;
        }
    }
    out
}

/// Squared distances from every point to its k nearest neighbors (self
/// excluded, distance ties broken by lowest index), as an N x k array with
/// neighbors ascending.
fn knn_sq_dists<T: Scalar>(points: &Array2<T>, k: usize) -> Result<Array2<T>> {
    let n = points.nrows();
    if k >= n {
        return Err(Error::invalid("k_closest", format!("need k < N, got k={k}, N={n}")));
    }
    let d2 = pairwise_sq_dists(points);
    let mut out = Array2::zeros((n, k));
    let mut scratch: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        scratch.clear();
        for j in 0..n {
            if j != i {
                scratch.push((d2[[i, j]], j));
            }
        }
        scratch.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        for (slot, (dist, _)) in out.row_mut(i).iter_mut().zip(scratch.iter().take(k)) {
            *slot = *dist;
        }
    }
    Ok(out)
}

/// Evenly log-spaced bandwidth candidates, the default calibration grid.
pub fn log_epsilon_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    assert!(count >= 2 && lo > T::zero() && hi > lo);
    let l0 = lo.ln();
    let l1 = hi.ln();
    (0..count)
        .map(|i| {
            let t = T::cast_usize(i) / T::cast_usize(count - 1);
            (l0 + (l1 - l0) * t).exp()
        })
        .collect()
}

/// 41 candidates spanning [1e-6, 1e2].
pub fn default_epsilon_grid<T: Scalar>() -> Vec<T> {
    log_epsilon_grid(T::cast(1e-6), T::cast(1e2), 41)
}

/// One row of the calibration table.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationRow<T> {
    pub epsilon: T,
    pub log_epsilon: T,
    pub log_t: T,
    /// Centered slope of log T against log epsilon; absent at the ends.
    pub slope: Option<T>,
}

/// Result of bandwidth calibration.
#[derive(Debug, Clone)]
pub struct Calibration<T> {
    pub epsilon_star: T,
    pub slope_at_star: T,
    pub table: Vec<CalibrationRow<T>>,
}

/// Calibrate the kernel bandwidth by maximizing the slope of
/// log T(eps) = log sum_{i, j<=K} exp(-|x_i - x_j(i)|^2 / (4 eps))
/// against log eps over the candidate grid, where x_j(i) ranges over the K
/// closest points to x_i. The maximizing slope approaches d/2 on data
/// sampled from a d-dimensional manifold.
pub fn calibrate_epsilon<T: Scalar>(
    points: &Array2<T>,
    k_closest: usize,
    grid: &[T],
) -> Result<Calibration<T>> {
    let n = points.nrows();
    if k_closest < 2 || k_closest >= n {
        return Err(Error::invalid(
            "k_closest",
            format!("need 2 <= K < N, got K={k_closest}, N={n}"),
        ));
    }
    if grid.len() < 8 {
        return Err(Error::invalid("grid", "need at least 8 candidates for a centered slope"));
    }
    let span = *grid.last().unwrap() / grid[0];
    if !(grid[0] > T::zero()) || span < T::cast(1e4) {
        return Err(Error::invalid("grid", "candidates must be positive and span >= 4 decades"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "candidates must ascend"));
    }

    // The K closest points to x_i include x_i itself, so each row of the
    // pair table carries a zero distance. That self term pins T to N as
    // eps -> 0 and keeps the slope of log T bounded; without it the
    // maximum-slope criterion diverges at the small end of the grid.
    let neighbors = knn_sq_dists(points, k_closest - 1)?;
    let mut d2 = Array2::zeros((n, k_closest));
    d2.slice_mut(ndarray::s![.., 1..]).assign(&neighbors);
    let d2_max = d2.iter().fold(T::zero(), |acc, &v| acc.max(v));
    if d2_max == T::zero() {
        return Err(Error::invalid("points", "all points identical"));
    }

    let quarter = T::cast(0.25);
    let log_t: Vec<T> = grid
        .iter()
        .map(|&eps| {
            // log-sum-exp, shifted by the largest exponent so tight clouds
            // at tiny bandwidths do not underflow to log(0).
            let scale = -quarter / eps;
            let max_exp = d2.iter().fold(T::neg_infinity(), |acc, &v| acc.max(scale * v));
            let sum: T = d2.iter().map(|&v| (scale * v - max_exp).exp()).sum();
            max_exp + sum.ln()
        })
        .collect();

    let log_eps: Vec<T> = grid.iter().map(|e| e.ln()).collect();
    let mut best = 1usize;
    let mut best_slope = T::neg_infinity();
    let mut table = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let slope = if i > 0 && i + 1 < grid.len() {
            let s = (log_t[i + 1] - log_t[i - 1]) / (log_eps[i + 1] - log_eps[i - 1]);
            if s > best_slope {
                best_slope = s;
                best = i;
            }
            Some(s)
        } else {
            None
        };
        table.push(CalibrationRow {
            epsilon: grid[i],
            log_epsilon: log_eps[i],
            log_t: log_t[i],
            slope,
        });
    }
    Ok(Calibration {
        epsilon_star: grid[best],
        slope_at_star: best_slope,
        table,
    })
}

/// Kernel density estimate of the sampling density:
/// q_j = (2^d pi^{d/2} N eps^{d/2})^{-1} sum_k exp(-|x_j - x_k|^2 / (4 eps)).
pub fn kernel_density<T: Scalar>(points: &Array2<T>, epsilon: T, d: usize) -> Result<Array1<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    if d < 1 {
        return Err(Error::invalid("d", "intrinsic dimension must be at least 1"));
    }
    let n = points.nrows();
    let d2 = pairwise_sq_dists(points);
    let quarter = T::cast(0.25);
    let half_d = T::cast_usize(d) / T::cast(2.0);
    let norm = T::cast(2.0).powi(d as i32)
        * T::cast(std::f64::consts::PI).powf(half_d)
        * T::cast_usize(n)
        * epsilon.powf(half_d);
    let mut q = Array1::zeros(n);
    for j in 0..n {
        let mut acc = T::zero();
        for k in 0..n {
            acc += (-d2[[j, k]] * quarter / epsilon).exp();
        }
        q[j] = acc / norm;
    }
    Ok(q)
}

/// Kernel and row-sum pieces of the weighted Laplacian that depend only on
/// the point set, reusable across different kappa fields.
#[derive(Debug, Clone)]
pub struct KernelCache<T> {
    /// H_ij = exp(-|x_i - x_j|^2 / (4 eps)).
    pub h: Array2<T>,
    /// Q_i = sum_j H_ij.
    pub q: Array1<T>,
    pub epsilon: T,
}

impl<T: Scalar> KernelCache<T> {
    pub fn build(points: &Array2<T>, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        let n = points.nrows();
        let d2 = pairwise_sq_dists(points);
        let quarter = T::cast(0.25);
        let mut h = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] = (-d2[[i, j]] * quarter / epsilon).exp();
            }
        }
        let q = Array1::from_iter(h.rows().into_iter().map(|r| r.iter().copied().sum()));
        Ok(Self { h, q, epsilon })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Assemble (W - D)/eps for the given kappa values:
    /// W_ij = sqrt(kappa_i kappa_j) H_ij / Q_j, D = diag(row sums of W).
    pub fn weighted_laplacian_matrix(&self, kappa: &Array1<T>) -> Result<Array2<T>> {
        let n = self.len();
        if kappa.len() != n {
            return Err(Error::DimensionMismatch {
                what: "kappa values",
                expected: n,
                got: kappa.len(),
            });
        }
        if kappa.iter().any(|&k| !(k > T::zero()) || !k.is_finite()) {
            return Err(Error::invalid("kappa", "all entries must be positive and finite"));
        }
        let sqrt_kappa = kappa.mapv(T::sqrt);
        let inv_eps = T::one() / self.epsilon;
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            let si = sqrt_kappa[i];
            let mut row_sum = T::zero();
            {
                let h_row = self.h.row(i);
                let mut out_row = m.row_mut(i);
                for j in 0..n {
                    let w = si * sqrt_kappa[j] * h_row[j] / self.q[j];
                    out_row[j] = w * inv_eps;
                    row_sum += w;
                }
            }
            m[[i, i]] -= row_sum * inv_eps;
        }
        Ok(m)
    }
}

/// Discretized weighted Laplacian (W - D)/eps over a point set with a
/// positive diffusion field kappa. The matrix annihilates constants by
/// construction and approximates +div(kappa grad .) pointwise.
pub fn weighted_laplacian<T: Scalar>(
    points: &Array2<T>,
    kappa: &Array1<T>,
    epsilon: T,
    d: usize,
) -> Result<GraphOperator<T>> {
    if d < 1 {
        return Err(Error::invalid("d", "intrinsic dimension must be at least 1"));
    }
    let cache = KernelCache::build(points, epsilon)?;
    let matrix = cache.weighted_laplacian_matrix(kappa)?;
    Ok(GraphOperator {
        matrix,
        kind: OperatorKind::WeightedLaplacian,
        block: None,
        epsilon: Some(epsilon),
    })
}

/// Self-tuned graph Laplacian: per-point bandwidths sigma_i set by the
/// k_nn-th nearest neighbor, kernel S_ij = exp(-|x_i-x_j|^2 / (sigma_i
/// sigma_j)), then the symmetric normalized Laplacian
/// I - R^{-1/2} S R^{-1/2}, restored to the scale of the continuum
/// operator by the factor 4 / mean(sigma_i^2) (the effective kernel
/// bandwidth is sigma^2 / 4). Symmetric positive semidefinite.
///
/// The kernel is used raw, with no density renormalization: the density
/// bias this keeps near boundaries is what the ghost-point augmentation
/// corrects, and the cloud-only operator is expected to show it.
///
/// Without the scale factor the eigenvalues are dimensionless and shrink
/// with resolution, and length-scale parameters measured against them
/// (Matern tau, heat observation times) lose their meaning.
pub fn self_tuned_laplacian<T: Scalar>(points: &Array2<T>, k_nn: usize) -> Result<GraphOperator<T>> {
    let n = points.nrows();
    if k_nn < 1 || k_nn >= n {
        return Err(Error::invalid(
            "k_nn",
            format!("need 1 <= k_nn < N, got k_nn={k_nn}, N={n}"),
        ));
    }
    let knn = knn_sq_dists(points, k_nn)?;
    let mut sigma = Array1::zeros(n);
    for i in 0..n {
        let s2 = knn[[i, k_nn - 1]];
        if s2 == T::zero() {
            return Err(Error::invalid(
                "points",
                format!("duplicate points give zero self-tuning bandwidth at index {i}"),
            ));
        }
        sigma[i] = s2.sqrt();
    }

    let d2 = pairwise_sq_dists(points);
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        s[[i, i]] = T::one();
        for j in (i + 1)..n {
            let v = (-d2[[i, j]] / (sigma[i] * sigma[j])).exp();
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    // Symmetric normalized Laplacian of the self-tuned kernel, scaled back
    // to the continuum operator's units.
    let mean_sigma_sq = sigma.iter().map(|&v| v * v).sum::<T>() / T::cast_usize(n);
    let scale = T::cast(4.0) / mean_sigma_sq;
    let r = Array1::from_iter(s.rows().into_iter().map(|r| r.iter().copied().sum::<T>()));
    let r_inv_sqrt = r.mapv(|v| T::one() / v.sqrt());
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let v = -r_inv_sqrt[i] * s[[i, j]] * r_inv_sqrt[j];
            m[[i, j]] = scale * if i == j { T::one() + v } else { v };
        }
    }
    // Exact symmetry despite the two diagonal scalings.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (m[[i, j]] + m[[j, i]]) * T::cast(0.5);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    Ok(GraphOperator {
        matrix: m,
        kind: OperatorKind::SelfTuned,
        block: None,
        epsilon: None,
    })
}

/// Leading cloud_size x cloud_size principal submatrix of an operator built
/// over cloud + ghosts with the cloud indexed first. Approximates the
/// homogeneous-Dirichlet operator on the cloud.
pub fn truncated_laplacian<T: Scalar>(
    full: &GraphOperator<T>,
    cloud_size: usize,
) -> Result<GraphOperator<T>> {
    if full.kind != OperatorKind::SelfTuned {
        return Err(Error::UnsupportedOperator {
            kind: full.kind.as_str(),
            operation: "truncation onto the cloud block",
        });
    }
    let n_full = full.len();
    if cloud_size == 0 || cloud_size > n_full {
        return Err(Error::invalid(
            "cloud_size",
            format!("cloud block of {cloud_size} does not fit a {n_full} x {n_full} operator"),
        ));
    }
    let matrix = full
        .matrix
        .slice(ndarray::s![..cloud_size, ..cloud_size])
        .to_owned();
    Ok(GraphOperator {
        matrix,
        kind: OperatorKind::Truncated,
        block: None,
        epsilon: full.epsilon,
    })
}

/// Smallest-m eigenpairs of a symmetric graph operator, ascending, with the
/// deterministic sign convention that the first entry of each eigenvector
/// that is distinguishable from zero is positive.
pub fn spectral_decompose<T: Scalar>(
    op: &GraphOperator<T>,
    m: usize,
) -> Result<SpectralDecomposition<T>> {
    match op.kind {
        OperatorKind::SelfTuned | OperatorKind::Truncated => {}
        other => {
            return Err(Error::UnsupportedOperator {
                kind: other.as_str(),
                operation: "spectral decomposition (solved, not decomposed)",
            })
        }
    }
    let n = op.len();
    if m == 0 || m > n {
        return Err(Error::invalid("m", format!("need 1 <= m <= {n}, got {m}")));
    }
    let eig = linalg::symmetric_eigen(&op.matrix)?;
    let eigenvalues = eig.eigenvalues[..m].to_vec();
    let mut eigenvectors = eig.vectors.slice(ndarray::s![.., ..m]).to_owned();
    fix_signs(&mut eigenvectors);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Flip eigenvector columns so the first entry above the noise floor is
/// positive.
fn fix_signs<T: Scalar>(vectors: &mut Array2<T>) {
    let tol = T::cast(1e-12);
    for mut col in vectors.columns_mut() {
        let max_abs = col.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if max_abs == T::zero() {
            continue;
        }
        let threshold = tol * max_abs;
        let lead = col.iter().find(|v| v.abs() > threshold).copied();
        if let Some(lead) = lead {
            if lead < T::zero() {
                col.mapv_inplace(|v| -v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle_cloud(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, 2), |(i, j)| {
            let t = 2.0 * PI * i as f64 / n as f64;
            if j == 0 {
                t.cos()
            } else {
                t.sin()
            }
        })
    }

    #[test]
    fn calibration_slope_vanishes_for_huge_bandwidth() {
        let points = circle_cloud(64);
        let grid = log_epsilon_grid(1e2, 1e8, 13);
        let cal = calibrate_epsilon(&points, 8, &grid).unwrap();
        // log T is flat at log(N*K) far beyond the data scale.
        let last = cal.table.last().unwrap();
        assert_relative_eq!(last.log_t, (64.0_f64 * 8.0).ln(), epsilon = 1e-3);
        for row in &cal.table {
            if let Some(s) = row.slope {
                assert!(s.abs() < 1e-2, "slope {s} should be ~0");
            }
        }
    }

    #[test]
    fn calibration_rejects_identical_points_and_short_grids() {
        let points = Array2::<f64>::zeros((12, 2));
        let grid = default_epsilon_grid::<f64>();
        assert!(calibrate_epsilon(&points, 3, &grid).is_err());

        let points = circle_cloud(12);
        assert!(calibrate_epsilon(&points, 3, &grid[..5]).is_err());
    }

    #[test]
    fn calibration_slope_near_half_on_semi_ellipse() {
        let cloud = geometry::semi_ellipse::<f64>(630).unwrap();
        let cal = calibrate_epsilon(&cloud.points, 51, &default_epsilon_grid()).unwrap();
        assert!(
            (cal.slope_at_star - 0.5).abs() <= 0.15,
            "slope {} not within 0.15 of 1/2",
            cal.slope_at_star
        );
    }

    #[test]
    fn density_single_point_closed_form() {
        let points = array![[0.25]];
        let eps: f64 = 0.37;
        let q = kernel_density(&points, eps, 1).unwrap();
        let expected = 1.0 / (2.0 * PI.sqrt() * eps.sqrt());
        assert_relative_eq!(q[0], expected, max_relative = 1e-14);
    }

    #[test]
    fn density_is_permutation_equivariant() {
        let points = array![[0.0, 0.0], [1.0, 0.2], [0.3, 0.7], [2.0, 1.0]];
        let permuted = array![[2.0, 1.0], [0.3, 0.7], [0.0, 0.0], [1.0, 0.2]];
        let q = kernel_density(&points, 0.5, 2).unwrap();
        let qp = kernel_density(&permuted, 0.5, 2).unwrap();
        let perm = [3usize, 2, 0, 1]; // permuted[i] = points[perm[i]]
        for (i, &orig) in perm.iter().enumerate() {
            assert_relative_eq!(qp[i], q[orig], max_relative = 1e-14);
        }
    }

    #[test]
    fn density_recovers_uniform_circle_law() {
        // 200 uniform nodes on the unit circle sample density 1/(2 pi) per
        // unit arclength.
        let points = circle_cloud(200);
        let cal = calibrate_epsilon(&points, 10, &default_epsilon_grid()).unwrap();
        let q = kernel_density(&points, cal.epsilon_star, 1).unwrap();
        for &v in q.iter() {
            assert!(
                (v * 2.0 * PI - 1.0).abs() <= 0.1,
                "density {v} too far from 1/(2 pi)"
            );
        }
    }

    #[test]
    fn weighted_two_points_closed_form() {
        let r: f64 = 0.8;
        let eps = 0.3;
        let points = array![[0.0], [r]];
        let kappa = array![1.0, 1.0];
        let op = weighted_laplacian(&points, &kappa, eps, 1).unwrap();
        let a = (-r * r / (4.0 * eps)).exp();
        let off = a / (1.0 + a) / eps;
        assert_relative_eq!(op.matrix[[0, 1]], off, max_relative = 1e-14);
        assert_relative_eq!(op.matrix[[1, 0]], off, max_relative = 1e-14);
        assert_relative_eq!(op.matrix[[0, 0]], -off, max_relative = 1e-14);
        assert_relative_eq!(op.matrix[[1, 1]], -off, max_relative = 1e-14);
    }

    #[test]
    fn weighted_laplacian_annihilates_constants() {
        let cloud = geometry::semi_ellipse::<f64>(80).unwrap();
        let kappa = Array1::from_shape_fn(80, |i| 1.5 + (i as f64 * 0.17).sin().abs());
        let op = weighted_laplacian(&cloud.points, &kappa, 0.01, 1).unwrap();
        let ones = Array1::from_elem(80, 1.0);
        let lu = op.matrix.dot(&ones);
        let scale = linalg::norm_inf(&op.matrix);
        for v in lu.iter() {
            assert!(v.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn weighted_laplacian_sign_convention_on_circle() {
        // On the unit circle (W - D)/eps tends to d^2/d alpha^2, so applying
        // it to sin(alpha) returns -sin(alpha).
        let n = 400;
        let points = circle_cloud(n);
        let cal = calibrate_epsilon(&points, 20, &default_epsilon_grid()).unwrap();
        let kappa = Array1::from_elem(n, 1.0);
        let op = weighted_laplacian(&points, &kappa, cal.epsilon_star, 1).unwrap();
        let u = Array1::from_shape_fn(n, |i| (2.0 * PI * i as f64 / n as f64).sin());
        let lu = op.matrix.dot(&u);
        let resid = (&lu + &u).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let umax = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(resid / umax <= 0.1, "relative residual {}", resid / umax);
    }

    #[test]
    fn self_tuned_is_symmetric_psd_with_known_null_vector() {
        let points = circle_cloud(48);
        let op = self_tuned_laplacian(&points, 2).unwrap();
        let n = op.len();
        for i in 0..n {
            for j in 0..n {
                assert!((op.matrix[[i, j]] - op.matrix[[j, i]]).abs() <= 1e-15);
            }
        }
        let eig = linalg::symmetric_eigen(&op.matrix).unwrap();
        let lambda_max = *eig.eigenvalues.last().unwrap();
        assert!(eig.eigenvalues[0] >= -1e-8 * lambda_max);
        assert!(eig.eigenvalues[0].abs() <= 1e-10);
        // Null vector proportional to R^{1/2} 1: check directly that each
        // row of the Laplacian annihilates it.
        let null = eig.vectors.column(0).to_owned();
        let image = op.matrix.dot(&null);
        for v in image.iter() {
            assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn self_tuned_rejects_duplicates() {
        let points = array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]];
        assert!(self_tuned_laplacian(&points, 1).is_err());
    }

    #[test]
    fn truncation_keeps_symmetry_and_psd() {
        let cloud = geometry::semi_ellipse::<f64>(60).unwrap();
        let ghosts = geometry::construct_ghost_points(&cloud, 5).unwrap();
        let mut all = Array2::zeros((70, 2));
        all.slice_mut(ndarray::s![..60, ..]).assign(&cloud.points);
        all.slice_mut(ndarray::s![60.., ..])
            .assign(&ghosts.stacked_points(2));
        let full = self_tuned_laplacian(&all, 2).unwrap();
        assert_eq!(full.len(), 70);
        let trunc = truncated_laplacian(&full, 60).unwrap();
        assert_eq!(trunc.len(), 60);
        assert_eq!(trunc.kind, OperatorKind::Truncated);
        let eig = linalg::symmetric_eigen(&trunc.matrix).unwrap();
        let lambda_max = *eig.eigenvalues.last().unwrap();
        assert!(eig.eigenvalues[0] >= -1e-8 * lambda_max);
    }

    #[test]
    fn truncation_rejects_wrong_kinds_and_sizes() {
        let points = circle_cloud(10);
        let kappa = Array1::from_elem(10, 1.0);
        let weighted = weighted_laplacian(&points, &kappa, 0.1, 1).unwrap();
        assert!(truncated_laplacian(&weighted, 5).is_err());
        let tuned = self_tuned_laplacian(&points, 2).unwrap();
        assert!(truncated_laplacian(&tuned, 11).is_err());
    }

    #[test]
    fn spectral_decompose_two_by_two() {
        let op = GraphOperator {
            matrix: array![[1.0, -1.0], [-1.0, 1.0]],
            kind: OperatorKind::SelfTuned,
            block: None,
            epsilon: None,
        };
        let dec = spectral_decompose(&op, 2).unwrap();
        assert_relative_eq!(dec.eigenvalues[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(dec.eigenvalues[1], 2.0, epsilon = 1e-14);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        // Sign convention: leading entries positive.
        assert_relative_eq!(dec.eigenvectors[[0, 0]], inv_sqrt2, epsilon = 1e-14);
        assert_relative_eq!(dec.eigenvectors[[1, 0]], inv_sqrt2, epsilon = 1e-14);
        assert_relative_eq!(dec.eigenvectors[[0, 1]], inv_sqrt2, epsilon = 1e-14);
        assert_relative_eq!(dec.eigenvectors[[1, 1]], -inv_sqrt2, epsilon = 1e-14);
    }

    #[test]
    fn spectral_decompose_rejects_nonsymmetric_kinds() {
        let points = circle_cloud(12);
        let kappa = Array1::from_elem(12, 1.0);
        let op = weighted_laplacian(&points, &kappa, 0.1, 1).unwrap();
        assert!(matches!(
            spectral_decompose(&op, 3),
            Err(Error::UnsupportedOperator { .. })
        ));
    }

    #[test]
    fn spectral_residuals_within_contract() {
        let points = circle_cloud(40);
        let op = self_tuned_laplacian(&points, 3).unwrap();
        let dec = spectral_decompose(&op, 12).unwrap();
        let norm = linalg::norm_inf(&op.matrix);
        for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
            let v = dec.eigenvectors.column(k).to_owned();
            let av = op.matrix.dot(&v);
            let resid = linalg::norm_2(&(&av - &(&v * lambda)));
            assert!(resid <= 1e-8 * (1.0 + lambda.abs()) * norm);
        }
        let gram = dec.eigenvectors.t().dot(&dec.eigenvectors);
        for i in 0..12 {
            for j in 0..12 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn path_graph_closed_form_through_operator_interface() {
        let n = 10;
        let mut matrix = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            matrix[[i, i]] = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            if i + 1 < n {
                matrix[[i, i + 1]] = -1.0;
                matrix[[i + 1, i]] = -1.0;
            }
        }
        let op = GraphOperator {
            matrix,
            kind: OperatorKind::SelfTuned,
            block: None,
            epsilon: None,
        };
        let dec = spectral_decompose(&op, n).unwrap();
        for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
            let want = 2.0 - 2.0 * (k as f64 * PI / n as f64).cos();
            assert_relative_eq!(lambda, want, epsilon = 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Scaling kappa scales the weighted Laplacian linearly.
        #[test]
        fn weighted_laplacian_homogeneous_in_kappa(
            seed in 0u64..1000,
            c in 0.1f64..10.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 14;
            let points = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>());
            let kappa = Array1::from_shape_fn(n, |_| 0.5 + rng.random::<f64>());
            let a = weighted_laplacian(&points, &kappa, 0.05, 2).unwrap();
            let b = weighted_laplacian(&points, &kappa.mapv(|k| c * k), 0.05, 2).unwrap();
            let scale = linalg::norm_inf(&a.matrix);
            for (x, y) in a.matrix.iter().zip(b.matrix.iter()) {
                prop_assert!((c * x - y).abs() <= 1e-10 * c * scale);
            }
        }

        /// Row sums of (W - D)/eps vanish for arbitrary positive kappa.
        #[test]
        fn weighted_laplacian_rows_sum_to_zero(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 17;
            let points = Array2::from_shape_fn((n, 3), |_| rng.random::<f64>());
            let kappa = Array1::from_shape_fn(n, |_| 0.1 + 5.0 * rng.random::<f64>());
            let op = weighted_laplacian(&points, &kappa, 0.1, 2).unwrap();
            let scale = linalg::norm_inf(&op.matrix);
            for row in op.matrix.rows() {
                let s: f64 = row.iter().sum();
                prop_assert!(s.abs() <= 1e-10 * scale);
            }
        }
    }
}

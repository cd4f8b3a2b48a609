//! Test manifolds as point clouds, boundary bookkeeping, ghost-point
//! construction, and manufactured PDE data.
//!
//! The built-in geometries are a flat unit interval, an ellipse arc
//! (x, y) = (cos a, 3 sin a), and a semi-torus. Intrinsic coordinates are
//! kept only for these test geometries; all operator construction downstream
//! works from ambient coordinates alone.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One labeled connected piece of the boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub label: String,
    pub idx: Vec<usize>,
}

/// Structured-grid metadata for the built-in generators. The manufactured
/// right-hand side needs it to refine the intrinsic grid; everything else
/// ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridInfo {
    /// No usable structure.
    Irregular,
    /// 1-d chain of `n` nodes, uniform in the intrinsic coordinate.
    Path { n: usize },
    /// 2-d grid, periodic in the first coordinate (n1 nodes) and a closed
    /// interval in the second (n2 nodes). Node index is i2 * n1 + i1.
    PeriodicStrip { n1: usize, n2: usize },
}

/// A sampled manifold: ambient points, intrinsic coordinates, and the
/// boundary/interior index partition.
#[derive(Debug, Clone)]
pub struct PointCloud<T> {
    /// N x D ambient coordinates.
    pub points: Array2<T>,
    /// N x d intrinsic coordinates (test geometries only).
    pub intrinsic: Array2<T>,
    /// Ordered indices of boundary nodes.
    pub boundary_idx: Vec<usize>,
    /// Complementary ordered index list.
    pub interior_idx: Vec<usize>,
    /// Partition of `boundary_idx` into labeled components.
    pub boundary_components: Vec<BoundaryComponent>,
    pub grid: GridInfo,
}

impl<T: Scalar> PointCloud<T> {
    /// Validating constructor; checks the index partition and finiteness.
    pub fn new(
        points: Array2<T>,
        intrinsic: Array2<T>,
        boundary_idx: Vec<usize>,
        boundary_components: Vec<BoundaryComponent>,
        grid: GridInfo,
    ) -> Result<Self> {
        let n = points.nrows();
        if intrinsic.nrows() != n {
            return Err(Error::DimensionMismatch {
                what: "intrinsic coordinate rows",
                expected: n,
                got: intrinsic.nrows(),
            });
        }
        let d = intrinsic.ncols();
        let dim = points.ncols();
        if d < 1 || dim < d {
            return Err(Error::invalid(
                "dimensions",
                format!("need D >= d >= 1, got D={dim}, d={d}"),
            ));
        }
        if points.iter().any(|x| !x.is_finite()) || intrinsic.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("points", "non-finite coordinate"));
        }
        let mut seen = vec![false; n];
        for &b in &boundary_idx {
            if b >= n {
                return Err(Error::invalid("boundary_idx", format!("index {b} out of range")));
            }
            if seen[b] {
                return Err(Error::invalid("boundary_idx", format!("index {b} repeated")));
            }
            seen[b] = true;
        }
        let interior_idx: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
        let from_components: usize = boundary_components.iter().map(|c| c.idx.len()).sum();
        if from_components != boundary_idx.len()
            || boundary_components
                .iter()
                .flat_map(|c| c.idx.iter())
                .any(|i| !seen[*i])
        {
            return Err(Error::invalid(
                "boundary_components",
                "components must partition boundary_idx",
            ));
        }
        Ok(Self {
            points,
            intrinsic,
            boundary_idx,
            interior_idx,
            boundary_components,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// Ambient dimension D.
    pub fn ambient_dim(&self) -> usize {
        self.points.ncols()
    }

    /// Intrinsic dimension d.
    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic.ncols()
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary_idx.len()
    }
}

/// Ghost chains hanging off every boundary point along the estimated
/// outward normal.
#[derive(Debug, Clone)]
pub struct GhostChain<T> {
    /// Index of the boundary point this chain is anchored at.
    pub boundary_idx: usize,
    /// Index of the nearest interior point used for the secant normal.
    pub companion_idx: usize,
    /// Unit outward normal estimate.
    pub normal: Array1<T>,
    /// Chain spacing h = distance from the boundary point to its companion.
    pub spacing: T,
    /// K x D ghost coordinates, k = 1..K outward.
    pub ghosts: Array2<T>,
}

/// All ghost chains of a cloud, ordered like `cloud.boundary_idx`.
#[derive(Debug, Clone)]
pub struct GhostSet<T> {
    pub chains: Vec<GhostChain<T>>,
    pub ghosts_per_point: usize,
}

impl<T: Scalar> GhostSet<T> {
    /// Total number of ghost points, B * K.
    pub fn len(&self) -> usize {
        self.chains.len() * self.ghosts_per_point
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ghost coordinates stacked (B*K) x D, chain-major with k ascending
    /// inside each chain. This ordering is the contract every consumer of
    /// ghost-indexed matrices relies on.
    pub fn stacked_points(&self, ambient_dim: usize) -> Array2<T> {
        let mut out = Array2::zeros((self.len(), ambient_dim));
        let mut row = 0;
        for chain in &self.chains {
            for k in 0..self.ghosts_per_point {
                out.row_mut(row).assign(&chain.ghosts.row(k));
                row += 1;
            }
        }
        out
    }
}

/// Squared Euclidean distance between two ambient rows.
pub(crate) fn sq_dist<T: Scalar>(a: &Array2<T>, i: usize, b: &Array2<T>, j: usize) -> T {
    let mut acc = T::zero();
    for (x, y) in a.row(i).iter().zip(b.row(j).iter()) {
        let diff = *x - *y;
        acc += diff * diff;
    }
    acc
}

/// Uniform grid on [0, 1] with boundary at both ends. Ambient = intrinsic.
pub fn flat_interval<T: Scalar>(n: usize) -> Result<PointCloud<T>> {
    if n < 3 {
        return Err(Error::invalid("n", "need at least 3 points for an interior"));
    }
    let step = T::one() / T::cast_usize(n - 1);
    let coords = Array2::from_shape_fn((n, 1), |(i, _)| T::cast_usize(i) * step);
    PointCloud::new(
        coords.clone(),
        coords,
        vec![0, n - 1],
        vec![
            BoundaryComponent { label: "B1".into(), idx: vec![0] },
            BoundaryComponent { label: "B2".into(), idx: vec![n - 1] },
        ],
        GridInfo::Path { n },
    )
}

/// Arc of the ellipse (cos a, 3 sin a) for a in [0, alpha_max], n uniform
/// nodes inclusive of both endpoints.
pub fn ellipse_arc<T: Scalar>(n: usize, alpha_max: T) -> Result<PointCloud<T>> {
    if n < 3 {
        return Err(Error::invalid("n", "need at least 3 points for an interior"));
    }
    if !(alpha_max > T::zero()) {
        return Err(Error::invalid("alpha_max", "must be positive"));
    }
    let step = alpha_max / T::cast_usize(n - 1);
    let three = T::cast(3.0);
    let mut points = Array2::zeros((n, 2));
    let mut intrinsic = Array2::zeros((n, 1));
    for i in 0..n {
        let alpha = T::cast_usize(i) * step;
        points[[i, 0]] = alpha.cos();
        points[[i, 1]] = three * alpha.sin();
        intrinsic[[i, 0]] = alpha;
    }
    PointCloud::new(
        points,
        intrinsic,
        vec![0, n - 1],
        vec![
            BoundaryComponent { label: "B1".into(), idx: vec![0] },
            BoundaryComponent { label: "B2".into(), idx: vec![n - 1] },
        ],
        GridInfo::Path { n },
    )
}

/// Half ellipse: the arc over [0, pi].
pub fn semi_ellipse<T: Scalar>(n: usize) -> Result<PointCloud<T>> {
    ellipse_arc(n, T::cast(std::f64::consts::PI))
}

/// Semi-torus ((2 + cos a) cos b, (2 + cos a) sin b, sin a) on an n1 x n2
/// grid: a in [0, 2 pi) periodic with the endpoint excluded (it would
/// duplicate a = 0), b in [0, pi] inclusive. The boundary circles b = 0 and
/// b = pi are stored as components B1 and B2, n1 nodes each.
pub fn semi_torus<T: Scalar>(n1: usize, n2: usize) -> Result<PointCloud<T>> {
    if n1 < 3 || n2 < 3 {
        return Err(Error::invalid("n1/n2", "need at least a 3 x 3 grid"));
    }
    let pi = T::cast(std::f64::consts::PI);
    let two = T::cast(2.0);
    let alpha_step = two * pi / T::cast_usize(n1);
    let beta_step = pi / T::cast_usize(n2 - 1);
    let n = n1 * n2;
    let mut points = Array2::zeros((n, 3));
    let mut intrinsic = Array2::zeros((n, 2));
    for i2 in 0..n2 {
        let beta = T::cast_usize(i2) * beta_step;
        for i1 in 0..n1 {
            let alpha = T::cast_usize(i1) * alpha_step;
            let ring = two + alpha.cos();
            let row = i2 * n1 + i1;
            points[[row, 0]] = ring * beta.cos();
            points[[row, 1]] = ring * beta.sin();
            points[[row, 2]] = alpha.sin();
            intrinsic[[row, 0]] = alpha;
            intrinsic[[row, 1]] = beta;
        }
    }
    let first_ring: Vec<usize> = (0..n1).collect();
    let last_ring: Vec<usize> = ((n2 - 1) * n1..n).collect();
    let mut boundary_idx = first_ring.clone();
    boundary_idx.extend_from_slice(&last_ring);
    PointCloud::new(
        points,
        intrinsic,
        boundary_idx,
        vec![
            BoundaryComponent { label: "B1".into(), idx: first_ring },
            BoundaryComponent { label: "B2".into(), idx: last_ring },
        ],
        GridInfo::PeriodicStrip { n1, n2 },
    )
}

/// Build K ghost points per boundary node along the secant-line normal
/// through the nearest interior neighbor (ambient Euclidean distance, ties
/// broken by lowest index).
pub fn construct_ghost_points<T: Scalar>(cloud: &PointCloud<T>, k: usize) -> Result<GhostSet<T>> {
    if k == 0 {
        return Err(Error::invalid("k", "need at least one ghost per boundary point"));
    }
    if cloud.boundary_idx.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let dim = cloud.ambient_dim();
    let mut chains = Vec::with_capacity(cloud.boundary_len());
    for &b in &cloud.boundary_idx {
        let mut best = usize::MAX;
        let mut best_d2 = T::infinity();
        for &i in &cloud.interior_idx {
            let d2 = sq_dist(&cloud.points, b, &cloud.points, i);
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        if best == usize::MAX {
            return Err(Error::invalid("cloud", "no interior point available"));
        }
        if best_d2 == T::zero() {
            return Err(Error::DuplicatePoints { i: b, j: best });
        }
        let spacing = best_d2.sqrt();
        let mut normal = Array1::zeros(dim);
        for (j, slot) in normal.iter_mut().enumerate() {
            *slot = (cloud.points[[b, j]] - cloud.points[[best, j]]) / spacing;
        }
        let mut ghosts = Array2::zeros((k, dim));
        for step in 1..=k {
            let reach = spacing * T::cast_usize(step);
            for j in 0..dim {
                ghosts[[step - 1, j]] = cloud.points[[b, j]] + reach * normal[j];
            }
        }
        chains.push(GhostChain {
            boundary_idx: b,
            companion_idx: best,
            normal,
            spacing,
            ghosts,
        });
    }
    Ok(GhostSet { chains, ghosts_per_point: k })
}

/// Diagonal analytic metric of a built-in geometry, used only to
/// manufacture right-hand sides.
pub enum AnalyticMetric<T> {
    /// d = 1: scalar metric g(a).
    Curve { g: Box<dyn Fn(T) -> T + Send + Sync> },
    /// d = 2 with diag(g11, g22) in the intrinsic coordinates (a, b);
    /// `a` may be periodic with the given period.
    Surface {
        g11: Box<dyn Fn(T, T) -> T + Send + Sync>,
        g22: Box<dyn Fn(T, T) -> T + Send + Sync>,
        alpha_period: Option<T>,
    },
}

impl<T: Scalar> AnalyticMetric<T> {
    /// g = 1 on the flat interval.
    pub fn flat_interval() -> Self {
        AnalyticMetric::Curve { g: Box::new(|_| T::one()) }
    }

    /// g(a) = sin^2 a + 9 cos^2 a for the ellipse arc.
    pub fn ellipse_arc() -> Self {
        AnalyticMetric::Curve {
            g: Box::new(|a: T| {
                let nine = T::cast(9.0);
                a.sin().powi(2) + nine * a.cos().powi(2)
            }),
        }
    }

    /// diag(1, (2 + cos a)^2) for the semi-torus.
    pub fn semi_torus() -> Self {
        let two = T::cast(2.0);
        AnalyticMetric::Surface {
            g11: Box::new(|_, _| T::one()),
            g22: Box::new(move |a: T, _| (two + a.cos()).powi(2)),
            alpha_period: Some(T::cast(2.0 * std::f64::consts::PI)),
        }
    }
}

/// Default refinement of the auxiliary grid relative to the cloud spacing.
pub const DEFAULT_RHS_REFINE: usize = 32;

/// Manufacture the load f = -div(kappa grad u) at every cloud node from
/// closures for kappa and the exact solution, by central finite differences
/// of (1/sqrt(det g)) d_i (kappa g^{ii} d_i u sqrt(det g)) on an auxiliary
/// intrinsic grid `refine` times finer than the cloud spacing.
pub fn manufacture_rhs<T: Scalar>(
    kappa: &dyn Fn(&[T]) -> T,
    u_true: &dyn Fn(&[T]) -> T,
    cloud: &PointCloud<T>,
    metric: &AnalyticMetric<T>,
    refine: usize,
) -> Result<Array1<T>> {
    if refine < 8 {
        return Err(Error::invalid("refine", "auxiliary grid must be at least 8x finer"));
    }
    match (metric, cloud.grid) {
        (AnalyticMetric::Curve { g }, GridInfo::Path { n }) => {
            manufacture_rhs_1d(kappa, u_true, cloud, g.as_ref(), n, refine)
        }
        (
            AnalyticMetric::Surface { g11, g22, alpha_period },
            GridInfo::PeriodicStrip { n1, n2 },
        ) => {
            let period = alpha_period.ok_or_else(|| {
                Error::invalid("metric", "surface metric needs a periodic first coordinate")
            })?;
            manufacture_rhs_2d(kappa, u_true, cloud, g11.as_ref(), g22.as_ref(), period, n1, n2, refine)
        }
        _ => Err(Error::invalid(
            "metric",
            "metric dimensionality does not match the cloud grid structure",
        )),
    }
}

fn check_finite<T: Scalar>(value: T, what: &str) -> Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::FieldEvaluation(format!("{what} evaluated to {value}")))
    }
}

fn manufacture_rhs_1d<T: Scalar>(
    kappa: &dyn Fn(&[T]) -> T,
    u_true: &dyn Fn(&[T]) -> T,
    cloud: &PointCloud<T>,
    g: &(dyn Fn(T) -> T + Send + Sync),
    n: usize,
    refine: usize,
) -> Result<Array1<T>> {
    let a0 = cloud.intrinsic[[0, 0]];
    let a1 = cloud.intrinsic[[n - 1, 0]];
    let step = (a1 - a0) / T::cast_usize((n - 1) * refine);
    // Two pad nodes on each side so two nested central differences reach
    // every cloud node, including the endpoints.
    let pad = 2isize;
    let total = (n - 1) * refine + 1;
    let coord = |j: isize| a0 + T::cast(j as f64) * step;

    let mut u = Vec::with_capacity(total + 2 * pad as usize);
    let mut flux_weight = Vec::with_capacity(total + 2 * pad as usize);
    for j in -pad..(total as isize + pad) {
        let a = coord(j);
        let ga = check_finite(g(a), "metric")?;
        if !(ga > T::zero()) {
            return Err(Error::FieldEvaluation(format!("metric not positive at {a}")));
        }
        u.push(check_finite(u_true(&[a]), "u_true")?);
        flux_weight.push(check_finite(kappa(&[a]), "kappa")? / ga.sqrt());
    }
    let at = |j: isize| (j + pad) as usize;

    // flux F = kappa g^{-1/2} u'; defined wherever u has both neighbors.
    let two_step = step * T::cast(2.0);
    let mut flux = vec![T::zero(); total + 2];
    for j in -1..(total as isize + 1) {
        let du = (u[at(j + 1)] - u[at(j - 1)]) / two_step;
        flux[(j + 1) as usize] = flux_weight[at(j)] * du;
    }
    let mut out = Array1::zeros(n);
    for i in 0..n {
        let j = (i * refine) as isize;
        let dflux = (flux[(j + 2) as usize] - flux[j as usize]) / two_step;
        let ga = g(coord(j));
        out[i] = -dflux / ga.sqrt();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn manufacture_rhs_2d<T: Scalar>(
    kappa: &dyn Fn(&[T]) -> T,
    u_true: &dyn Fn(&[T]) -> T,
    cloud: &PointCloud<T>,
    g11: &(dyn Fn(T, T) -> T + Send + Sync),
    g22: &(dyn Fn(T, T) -> T + Send + Sync),
    alpha_period: T,
    n1: usize,
    n2: usize,
    refine: usize,
) -> Result<Array1<T>> {
    let b0 = cloud.intrinsic[[0, 1]];
    let b1 = cloud.intrinsic[[(n2 - 1) * n1, 1]];
    let na = n1 * refine; // periodic in alpha
    let nb = (n2 - 1) * refine + 1;
    let pad = 2isize;
    let step_a = alpha_period / T::cast_usize(na);
    let step_b = (b1 - b0) / T::cast_usize(nb - 1);
    let coord_a = |i: isize| T::cast(i.rem_euclid(na as isize) as f64) * step_a;
    let coord_b = |j: isize| b0 + T::cast(j as f64) * step_b;
    let rows = nb + 2 * pad as usize;

    // Precompute u, kappa and metric factors on the padded grid,
    // beta-major (row j, column i).
    let mut u = vec![T::zero(); rows * na];
    let mut kap = vec![T::zero(); rows * na];
    let mut vol = vec![T::zero(); rows * na]; // sqrt(det g)
    let mut inv_g11 = vec![T::zero(); rows * na];
    let mut inv_g22 = vec![T::zero(); rows * na];
    for j in -pad..(nb as isize + pad) {
        let b = coord_b(j);
        for i in 0..na {
            let a = coord_a(i as isize);
            let idx = (j + pad) as usize * na + i;
            let m11 = check_finite(g11(a, b), "g11")?;
            let m22 = check_finite(g22(a, b), "g22")?;
            if !(m11 > T::zero() && m22 > T::zero()) {
                return Err(Error::FieldEvaluation(format!(
                    "metric not positive at ({a}, {b})"
                )));
            }
            u[idx] = check_finite(u_true(&[a, b]), "u_true")?;
            kap[idx] = check_finite(kappa(&[a, b]), "kappa")?;
            vol[idx] = (m11 * m22).sqrt();
            inv_g11[idx] = T::one() / m11;
            inv_g22[idx] = T::one() / m22;
        }
    }
    let at = |i: isize, j: isize| -> usize {
        ((j + pad) as usize) * na + (i.rem_euclid(na as isize) as usize)
    };

    let two_da = step_a * T::cast(2.0);
    let two_db = step_b * T::cast(2.0);
    // Fluxes on the inner padded band (one pad layer in beta).
    let band = nb + 2;
    let mut flux_a = vec![T::zero(); band * na];
    let mut flux_b = vec![T::zero(); band * na];
    for j in -1..(nb as isize + 1) {
        for i in 0..na as isize {
            let du_a = (u[at(i + 1, j)] - u[at(i - 1, j)]) / two_da;
            let du_b = (u[at(i, j + 1)] - u[at(i, j - 1)]) / two_db;
            let c = at(i, j);
            let out = (j + 1) as usize * na + i as usize;
            flux_a[out] = kap[c] * inv_g11[c] * du_a * vol[c];
            flux_b[out] = kap[c] * inv_g22[c] * du_b * vol[c];
        }
    }
    let fat = |i: isize, j: isize| -> usize {
        ((j + 1) as usize) * na + (i.rem_euclid(na as isize) as usize)
    };

    let mut out = Array1::zeros(n1 * n2);
    for i2 in 0..n2 {
        let j = (i2 * refine) as isize;
        for i1 in 0..n1 {
            let i = (i1 * refine) as isize;
            let div_a = (flux_a[fat(i + 1, j)] - flux_a[fat(i - 1, j)]) / two_da;
            let div_b = (flux_b[fat(i, j + 1)] - flux_b[fat(i, j - 1)]) / two_db;
            out[i2 * n1 + i1] = -(div_a + div_b) / vol[at(i, j)];
        }
    }
    Ok(out)
}

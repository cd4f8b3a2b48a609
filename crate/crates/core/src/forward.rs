//! Discretized forward maps for the two inverse problems, plus synthetic
//! observation generation.
//!
//! Elliptic: log-diffusion values on the cloud feed a fresh ghost-point
//! operator (the kernel and extrapolation geometry are cached, only the
//! kappa-dependent factors are rebuilt) and a block Dirichlet solve.
//!
//! Heat: a coefficient representation of the initial condition propagates
//! through the truncated-Laplacian eigenbasis as exp(-lambda t*) mode by
//! mode; the harmonic boundary term rides along unchanged in time.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{GhostSet, PointCloud};
use crate::gpdm::GpdmFactory;
use crate::graph_ops::SpectralDecomposition;
use crate::linalg;
use crate::prior::{interior_term, BoundaryBasis, MaternSpec};
use crate::scalar::Scalar;

/// Elliptic forward model: kappa = exp(theta) to the Dirichlet solution.
#[derive(Debug, Clone)]
pub struct EllipticForwardModel<T> {
    factory: GpdmFactory<T>,
    /// Load sampled at every cloud node; only interior entries enter the
    /// solve.
    pub f_full: Array1<T>,
    /// Dirichlet data, one value per boundary node in cloud order.
    pub h_boundary: Array1<T>,
    /// Observation nodes, a subset of cloud indices.
    pub obs_idx: Vec<usize>,
    interior_idx: Vec<usize>,
}

impl<T: Scalar> EllipticForwardModel<T> {
    pub fn new(
        cloud: &PointCloud<T>,
        ghosts: &GhostSet<T>,
        epsilon: T,
        f_full: Array1<T>,
        h_boundary: Array1<T>,
        obs_idx: Vec<usize>,
    ) -> Result<Self> {
        let n = cloud.len();
        if f_full.len() != n {
            return Err(Error::DimensionMismatch {
                what: "load vector",
                expected: n,
                got: f_full.len(),
            });
        }
        if h_boundary.len() != cloud.boundary_len() {
            return Err(Error::DimensionMismatch {
                what: "boundary data",
                expected: cloud.boundary_len(),
                got: h_boundary.len(),
            });
        }
        if obs_idx.iter().any(|&i| i >= n) {
            return Err(Error::invalid("obs_idx", "observation index out of range"));
        }
        Ok(Self {
            factory: GpdmFactory::new(cloud, ghosts, epsilon)?,
            f_full,
            h_boundary,
            obs_idx,
            interior_idx: cloud.interior_idx.clone(),
        })
    }

    /// Solve for the field theta = log kappa given at every cloud node.
    /// Boundary entries of the result equal `h_boundary` bitwise.
    pub fn evaluate(&self, theta: &Array1<T>) -> Result<Array1<T>> {
        if theta.len() != self.factory.cloud_len() {
            return Err(Error::DimensionMismatch {
                what: "log-diffusion field",
                expected: self.factory.cloud_len(),
                got: theta.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteForward {
                detail: summarize_vector("theta", theta),
            });
        }
        let kappa = theta.mapv(T::exp);
        let run = || -> Result<Array1<T>> {
            let op = self.factory.assemble(&kappa)?;
            let f_interior =
                Array1::from_iter(self.interior_idx.iter().map(|&i| self.f_full[i]));
            op.solve_dirichlet(&f_interior, &self.h_boundary)
        };
        run().map_err(|source| Error::NonFiniteForward {
            detail: format!("{source}; {}", summarize_vector("theta", theta)),
        })
    }

    /// Restrict a node field to the observation nodes.
    pub fn observe(&self, u: &Array1<T>) -> Array1<T> {
        Array1::from_iter(self.obs_idx.iter().map(|&i| u[i]))
    }

    pub fn epsilon(&self) -> T {
        self.factory.epsilon()
    }
}

/// Elliptic forward map as a free function.
pub fn elliptic_forward<T: Scalar>(
    model: &EllipticForwardModel<T>,
    theta: &Array1<T>,
) -> Result<Array1<T>> {
    model.evaluate(theta)
}

fn summarize_vector<T: Scalar>(name: &str, v: &Array1<T>) -> String {
    if v.len() <= 64 {
        return format!("{name} = {v:?}");
    }
    let mut min = T::infinity();
    let mut max = T::neg_infinity();
    let mut bad = None;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() && bad.is_none() {
            bad = Some(i);
        }
        min = min.min(x);
        max = max.max(x);
    }
    match bad {
        Some(i) => format!(
            "{name}: len={}, min={min}, max={max}, first non-finite at {i} = {}",
            v.len(),
            v[i]
        ),
        None => format!("{name}: len={}, min={min}, max={max}", v.len()),
    }
}

/// Heat forward model over the coefficient representation of the initial
/// condition.
#[derive(Debug, Clone)]
pub struct HeatForwardModel<T> {
    pub spec: MaternSpec<T>,
    pub spectrum: SpectralDecomposition<T>,
    pub basis: BoundaryBasis<T>,
    /// Observation time; zero is allowed and is the identity.
    pub t_star: T,
    pub obs_idx: Vec<usize>,
}

impl<T: Scalar> HeatForwardModel<T> {
    pub fn new(
        spec: MaternSpec<T>,
        spectrum: SpectralDecomposition<T>,
        basis: BoundaryBasis<T>,
        t_star: T,
        obs_idx: Vec<usize>,
    ) -> Result<Self> {
        if !(t_star >= T::zero()) || !t_star.is_finite() {
            return Err(Error::invalid("t_star", "must be finite and nonnegative"));
        }
        let n = spectrum.nodes();
        if obs_idx.iter().any(|&i| i >= n) {
            return Err(Error::invalid("obs_idx", "observation index out of range"));
        }
        if spec.m > spectrum.retained() {
            return Err(Error::DimensionMismatch {
                what: "retained eigenpairs",
                expected: spec.m,
                got: spectrum.retained(),
            });
        }
        Ok(Self {
            spec,
            spectrum,
            basis,
            t_star,
            obs_idx,
        })
    }

    /// Propagate: psi3 from zeta, each eigencomponent decays as
    /// exp(-lambda_n t*), and the harmonic boundary term is added back
    /// unchanged.
    pub fn evaluate(&self, zeta: &Array1<T>, mu: &Array1<T>) -> Result<Array1<T>> {
        let psi3 = interior_term(&self.spec, &self.spectrum, zeta)?;
        let m = self.spec.m;
        let modes = self.spectrum.eigenvectors.slice(ndarray::s![.., ..m]);
        let mut proj = modes.t().dot(&psi3);
        for (n, p) in proj.iter_mut().enumerate() {
            let lambda = self.spectrum.eigenvalues[n].max(T::zero());
            *p *= (-lambda * self.t_star).exp();
        }
        let w = modes.dot(&proj);
        let boundary = self.basis.boundary_term(mu, self.spectrum.nodes())?;
        Ok(w + boundary)
    }

    pub fn observe(&self, u: &Array1<T>) -> Array1<T> {
        Array1::from_iter(self.obs_idx.iter().map(|&i| u[i]))
    }

    /// Smallest retained eigenvalue, the slowest decay rate.
    pub fn lambda_min(&self) -> T {
        self.spectrum.eigenvalues[0].max(T::zero())
    }
}

/// Heat forward map from a full coefficient pair.
pub fn heat_forward<T: Scalar>(
    model: &HeatForwardModel<T>,
    zeta: &Array1<T>,
    mu: &Array1<T>,
) -> Result<Array1<T>> {
    model.evaluate(zeta, mu)
}

/// Observation time giving the slowest mode a decay factor of exactly
/// `decay` (e.g. 0.1): t* = -ln(decay)/lambda_1.
pub fn t_star_for_decay<T: Scalar>(lambda_min: T, decay: T) -> Result<T> {
    if !(lambda_min > T::zero()) {
        return Err(Error::invalid("lambda_min", "need a positive decay rate"));
    }
    if !(decay > T::zero() && decay < T::one()) {
        return Err(Error::invalid("decay", "need 0 < decay < 1"));
    }
    Ok(-decay.ln() / lambda_min)
}

/// Least-squares coefficients of an initial condition on the combined
/// basis [retained eigenvectors | boundary lifts], returned in the
/// representation the heat forward consumes (zeta is the raw mode
/// coefficient divided by the KL weight).
pub fn heat_regress_coefficients<T: Scalar>(
    u0: &Array1<T>,
    spec: &MaternSpec<T>,
    spectrum: &SpectralDecomposition<T>,
    basis: &BoundaryBasis<T>,
) -> Result<(Array1<T>, Array1<T>)> {
    let n = spectrum.nodes();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            what: "initial condition",
            expected: n,
            got: u0.len(),
        });
    }
    let m = spec.m;
    let l_total = basis.total_lifts();
    let cols = m + l_total;
    if cols == 0 || cols > n {
        return Err(Error::invalid(
            "basis",
            format!("design matrix with {cols} columns over {n} nodes"),
        ));
    }
    let mut design = Array2::zeros((n, cols));
    design
        .slice_mut(ndarray::s![.., ..m])
        .assign(&spectrum.eigenvectors.slice(ndarray::s![.., ..m]));
    for (j, lift) in basis.flat_lifts().enumerate() {
        design.column_mut(m + j).assign(lift);
    }
    let gram = design.t().dot(&design);
    let rhs = design.t().dot(u0);
    let beta = linalg::cholesky_solve(&gram, &rhs).map_err(|col| Error::RankDeficient {
        column: column_label(col, m, basis),
    })?;

    let mut zeta = Array1::zeros(m);
    for i in 0..m {
        let weight = spec.weight(spectrum.eigenvalues[i])?;
        zeta[i] = beta[i] / weight;
    }
    let mu = Array1::from_iter(beta.iter().skip(m).copied());
    Ok((zeta, mu))
}

fn column_label<T: Scalar>(col: usize, m: usize, basis: &BoundaryBasis<T>) -> String {
    if col < m {
        return format!("phi_{}", col + 1);
    }
    let mut rest = col - m;
    for (c, lifts) in basis.lifts.iter().enumerate() {
        if rest < lifts.len() {
            return format!("psi_{}_{}", c + 1, rest + 1);
        }
        rest -= lifts.len();
    }
    format!("column_{col}")
}

/// Pointwise observations with i.i.d. centered Gaussian noise of the given
/// variance. `exact` skips the noise entirely (the zero-noise flag).
#[derive(Debug, Clone)]
pub struct Observation<T> {
    pub y: Array1<T>,
    pub noise_var: T,
    pub obs_idx: Vec<usize>,
}

pub fn generate_observations<T: Scalar, R: Rng + ?Sized>(
    u: &Array1<T>,
    obs_idx: &[usize],
    noise_var: T,
    rng: &mut R,
    exact: bool,
) -> Result<Observation<T>> {
    if !(noise_var > T::zero()) {
        return Err(Error::invalid("noise_var", "must be positive"));
    }
    if obs_idx.iter().any(|&i| i >= u.len()) {
        return Err(Error::invalid("obs_idx", "observation index out of range"));
    }
    let sd = noise_var.sqrt();
    let y = Array1::from_iter(obs_idx.iter().map(|&i| {
        if exact {
            u[i]
        } else {
            u[i] + sd * T::standard_normal(rng)
        }
    }));
    Ok(Observation {
        y,
        noise_var,
        obs_idx: obs_idx.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{construct_ghost_points, flat_interval, semi_ellipse, AnalyticMetric};
    use crate::graph_ops::{calibrate_epsilon, default_epsilon_grid};
    use crate::prior::{boundary_basis_1d, truncated_spectrum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn eps_for(points: &Array2<f64>, k: usize) -> f64 {
        calibrate_epsilon(points, k, &default_epsilon_grid())
            .unwrap()
            .epsilon_star
    }

    #[test]
    fn elliptic_constant_boundary_data_passes_through() {
        let cloud = semi_ellipse::<f64>(60).unwrap();
        let ghosts = construct_ghost_points(&cloud, 5).unwrap();
        let eps = eps_for(&cloud.points, 10);
        let model = EllipticForwardModel::new(
            &cloud,
            &ghosts,
            eps,
            Array1::zeros(60),
            Array1::from_elem(2, 4.5),
            (0..60).collect(),
        )
        .unwrap();
        let u = model.evaluate(&Array1::zeros(60)).unwrap();
        for v in u.iter() {
            assert!((v - 4.5).abs() <= 1e-8);
        }
        assert_eq!(u[0].to_bits(), 4.5_f64.to_bits());
    }

    #[test]
    fn elliptic_flat_interval_matches_analytic_solution() {
        let n = 200;
        let cloud = flat_interval::<f64>(n).unwrap();
        let ghosts = construct_ghost_points(&cloud, 10).unwrap();
        let eps = eps_for(&cloud.points, 20);
        let f = Array1::from_shape_fn(n, |i| PI * PI * (PI * cloud.points[[i, 0]]).sin());
        let model =
            EllipticForwardModel::new(&cloud, &ghosts, eps, f, Array1::zeros(2), (0..n).collect())
                .unwrap();
        let u = model.evaluate(&Array1::zeros(n)).unwrap();
        let exact = Array1::from_shape_fn(n, |i| (PI * cloud.points[[i, 0]]).sin());
        let err = linalg::norm_2(&(&u - &exact)) / linalg::norm_2(&exact);
        assert!(err <= 0.05, "relative L2 error {err}");
    }

    #[test]
    fn elliptic_semi_ellipse_recovers_manufactured_truth() {
        let n = 315;
        let cloud = semi_ellipse::<f64>(n).unwrap();
        let ghosts = construct_ghost_points(&cloud, 10).unwrap();
        let eps = eps_for(&cloud.points, 26);
        let f = crate::geometry::manufacture_rhs(
            &|x: &[f64]| 2.0 + (3.0 * x[0]).cos(),
            &|x: &[f64]| x[0].sin(),
            &cloud,
            &AnalyticMetric::ellipse_arc(),
            crate::geometry::DEFAULT_RHS_REFINE,
        )
        .unwrap();
        let model =
            EllipticForwardModel::new(&cloud, &ghosts, eps, f, Array1::zeros(2), (0..n).collect())
                .unwrap();
        let theta = Array1::from_shape_fn(n, |i| (2.0 + (3.0 * cloud.intrinsic[[i, 0]]).cos()).ln());
        let u = model.evaluate(&theta).unwrap();
        let exact = Array1::from_shape_fn(n, |i| cloud.intrinsic[[i, 0]].sin());
        let err = linalg::norm_2(&(&u - &exact)) / linalg::norm_2(&exact);
        assert!(err <= 0.05, "relative L2 error {err}");
    }

    #[test]
    fn elliptic_is_inverse_homogeneous_in_kappa() {
        let n = 90;
        let cloud = flat_interval::<f64>(n).unwrap();
        let ghosts = construct_ghost_points(&cloud, 5).unwrap();
        let eps = eps_for(&cloud.points, 10);
        let f = Array1::from_shape_fn(n, |i| ((i as f64) * 0.1).sin());
        let model =
            EllipticForwardModel::new(&cloud, &ghosts, eps, f, Array1::zeros(2), (0..n).collect())
                .unwrap();
        let theta = Array1::from_shape_fn(n, |i| 0.3 * ((i as f64) * 0.05).cos());
        let u1 = model.evaluate(&theta).unwrap();
        let u2 = model.evaluate(&theta.mapv(|t| t + 2.0_f64.ln())).unwrap();
        for (a, b) in u1.iter().zip(u2.iter()) {
            assert!((a / 2.0 - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn elliptic_rejects_non_finite_proposals_with_diagnostics() {
        let cloud = flat_interval::<f64>(40).unwrap();
        let ghosts = construct_ghost_points(&cloud, 3).unwrap();
        let eps = eps_for(&cloud.points, 8);
        let model = EllipticForwardModel::new(
            &cloud,
            &ghosts,
            eps,
            Array1::zeros(40),
            Array1::zeros(2),
            vec![0, 5],
        )
        .unwrap();
        let mut theta = Array1::zeros(40);
        theta[7] = f64::NAN;
        let err = model.evaluate(&theta).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("theta"), "{msg}");
    }

    fn heat_setup(n: usize, m: usize, t_star: f64) -> HeatForwardModel<f64> {
        let cloud = semi_ellipse::<f64>(n).unwrap();
        let ghosts = construct_ghost_points(&cloud, 10).unwrap();
        let eps = eps_for(&cloud.points, 20);
        let spectrum = truncated_spectrum(&cloud, &ghosts, 2, m).unwrap();
        let basis = boundary_basis_1d(&cloud, &ghosts, eps).unwrap();
        let spec = MaternSpec::from_spectrum(0.3, 6.0, m, &spectrum, n, 1).unwrap();
        HeatForwardModel::new(spec, spectrum, basis, t_star, (0..n).collect()).unwrap()
    }

    #[test]
    fn heat_propagates_single_modes_exactly() {
        let model = heat_setup(120, 12, 2.5);
        for k in [0usize, 4, 11] {
            let mut zeta = Array1::zeros(12);
            zeta[k] = 1.0;
            let mu = Array1::zeros(2);
            let u = model.evaluate(&zeta, &mu).unwrap();
            let lambda = model.spectrum.eigenvalues[k].max(0.0);
            let scale = model.spec.weight(model.spectrum.eigenvalues[k]).unwrap()
                * (-lambda * 2.5).exp();
            let phi = model.spectrum.eigenvectors.column(k);
            for (a, b) in u.iter().zip(phi.iter()) {
                assert!(
                    (a - scale * b).abs() <= 1e-10 * (1.0 + scale.abs()),
                    "mode {k}"
                );
            }
        }
    }

    #[test]
    fn heat_at_time_zero_is_identity() {
        let model = heat_setup(100, 10, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zeta = Array1::from_shape_fn(10, |_| f64::standard_normal(&mut rng));
        let mu = Array1::from_shape_fn(2, |_| f64::standard_normal(&mut rng));
        let u = model.evaluate(&zeta, &mu).unwrap();
        let theta =
            crate::prior::reconstruct(&model.spec, &model.spectrum, &model.basis, &zeta, &mu)
                .unwrap();
        for (a, b) in u.iter().zip(theta.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn heat_long_time_leaves_only_the_boundary_term() {
        let mut model = heat_setup(100, 10, 0.0);
        let lambda1 = model.lambda_min();
        assert!(lambda1 > 0.0);
        model.t_star = 1e3 / lambda1;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let zeta = Array1::from_shape_fn(10, |_| f64::standard_normal(&mut rng));
        let mu = Array1::from_shape_fn(2, |_| f64::standard_normal(&mut rng));
        let u = model.evaluate(&zeta, &mu).unwrap();
        let boundary = model.basis.boundary_term(&mu, 100).unwrap();
        for (a, b) in u.iter().zip(boundary.iter()) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn heat_satisfies_the_semigroup_property() {
        let n = 110;
        let m = 10;
        let (s, r) = (1.3, 2.9);
        let base = heat_setup(n, m, s);
        let mut model_r = base.clone();
        model_r.t_star = r;
        let mut model_sr = base.clone();
        model_sr.t_star = s + r;

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let zeta = Array1::from_shape_fn(m, |_| f64::standard_normal(&mut rng));
        let mu = Array1::zeros(2);
        let u_s = base.evaluate(&zeta, &mu).unwrap();
        // Interior projection of the intermediate state back to
        // coefficients, then propagate the remaining r.
        let modes = base.spectrum.eigenvectors.slice(ndarray::s![.., ..m]);
        let proj = modes.t().dot(&u_s);
        let mut zeta_mid = Array1::zeros(m);
        for i in 0..m {
            zeta_mid[i] = proj[i] / base.spec.weight(base.spectrum.eigenvalues[i]).unwrap();
        }
        let two_step = model_r.evaluate(&zeta_mid, &mu).unwrap();
        let direct = model_sr.evaluate(&zeta, &mu).unwrap();
        for (a, b) in two_step.iter().zip(direct.iter()) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn regression_reproduces_basis_members() {
        let model = heat_setup(100, 20, 1.0);
        // u0 = psi_1 exactly.
        let psi1 = model.basis.lifts[0][0].clone();
        let (zeta, mu) =
            heat_regress_coefficients(&psi1, &model.spec, &model.spectrum, &model.basis).unwrap();
        assert!((mu[0] - 1.0).abs() <= 1e-8);
        assert!(mu[1].abs() <= 1e-8);
        for (i, z) in zeta.iter().enumerate() {
            let raw = z * model.spec.weight(model.spectrum.eigenvalues[i]).unwrap();
            assert!(raw.abs() <= 1e-8, "mode {i} coefficient {raw}");
        }

        // u0 = phi_3 exactly: raw unit coefficient on that column.
        let phi3 = model.spectrum.eigenvectors.column(2).to_owned();
        let (zeta, mu) =
            heat_regress_coefficients(&phi3, &model.spec, &model.spectrum, &model.basis).unwrap();
        let raw3 = zeta[2] * model.spec.weight(model.spectrum.eigenvalues[2]).unwrap();
        assert!((raw3 - 1.0).abs() <= 1e-8);
        for (i, z) in zeta.iter().enumerate() {
            if i != 2 {
                let raw = z * model.spec.weight(model.spectrum.eigenvalues[i]).unwrap();
                assert!(raw.abs() <= 1e-8);
            }
        }
        assert!(mu.iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn regression_fits_the_paper_initial_condition() {
        let n = 200;
        let cloud = semi_ellipse::<f64>(n).unwrap();
        let model = heat_setup(n, 20, 1.0);
        let u0 = Array1::from_shape_fn(n, |i| 10.0 * cloud.intrinsic[[i, 0]].sin() + 2.0);
        let (zeta, mu) =
            heat_regress_coefficients(&u0, &model.spec, &model.spectrum, &model.basis).unwrap();
        let fit = crate::prior::reconstruct(&model.spec, &model.spectrum, &model.basis, &zeta, &mu)
            .unwrap();
        let resid = linalg::norm_2(&(&fit - &u0)) / linalg::norm_2(&u0);
        assert!(resid <= 0.05, "relative residual {resid}");
    }

    #[test]
    fn regression_rejects_collinear_columns_by_name() {
        let model = heat_setup(60, 5, 1.0);
        let mut basis = model.basis.clone();
        // Duplicate the first lift: the Gram matrix loses rank at the
        // second lift column.
        basis.lifts[1][0] = basis.lifts[0][0].clone();
        let u0 = Array1::from_elem(60, 1.0);
        let err =
            heat_regress_coefficients(&u0, &model.spec, &model.spectrum, &basis).unwrap_err();
        match err {
            Error::RankDeficient { column } => assert_eq!(column, "psi_2_1"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn observations_have_the_requested_noise_level() {
        let u = Array1::from_shape_fn(50, |i| (i as f64 * 0.2).sin());
        let idx: Vec<usize> = (0..50).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Pass-through mode.
        let clean = generate_observations(&u, &idx, 0.01, &mut rng, true).unwrap();
        for (a, b) in clean.y.iter().zip(u.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // Monte Carlo variance of the added noise.
        let noise_var = 0.01;
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..200 {
            let obs = generate_observations(&u, &idx, noise_var, &mut rng, false).unwrap();
            for (a, b) in obs.y.iter().zip(u.iter()) {
                acc += (a - b) * (a - b);
                count += 1;
            }
        }
        let empirical = acc / count as f64;
        assert!(
            (empirical - noise_var).abs() <= 0.1 * noise_var,
            "empirical variance {empirical}"
        );
    }

    #[test]
    fn observation_rejects_bad_noise_and_indices() {
        let u = Array1::from_elem(10, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_observations(&u, &[0], 0.0, &mut rng, false).is_err());
        assert!(generate_observations(&u, &[10], 0.1, &mut rng, false).is_err());
    }
}

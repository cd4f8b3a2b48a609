//! Boundary-aware Matern-type Gaussian priors on point clouds.
//!
//! A sample has two parts. The interior term is a truncated KL expansion in
//! eigenvectors of the truncated (cloud-block) graph Laplacian, whose
//! eigenvectors are small at the boundary; its variance is normalized to
//! one per node. The boundary term superposes harmonic lifts of an
//! eigenbasis on each boundary component, giving the field honest degrees
//! of freedom on and near the boundary.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{GhostSet, PointCloud};
use crate::gpdm::{solve_harmonic_with, GpdmFactory};
use crate::graph_ops::{
    self_tuned_laplacian, spectral_decompose, truncated_laplacian, SpectralDecomposition,
};
use crate::scalar::Scalar;

/// Eigenvalues this far below zero are treated as roundoff and clamped.
const EIGENVALUE_CLAMP: f64 = 1e-8;

/// Matern spectral parameters: covariance c_N (tau I + Lap)^{-s} in the
/// retained eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternSpec<T> {
    /// Inverse length-scale.
    pub tau: T,
    /// Smoothness exponent; must exceed d/2 for a well-defined continuum
    /// limit.
    pub s: T,
    /// Retained eigenpair count.
    pub m: usize,
    /// Per-node variance normalization.
    pub c_n: T,
}

/// c_N = N / sum_n (tau + lambda_n)^{-s} over exactly the given
/// eigenvalues. With the retained-m convention this makes the realized
/// interior term have unit average per-node variance.
pub fn normalization_constant<T: Scalar>(
    eigenvalues: &[T],
    tau: T,
    s: T,
    n_nodes: usize,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::invalid("tau", "must be positive"));
    }
    if eigenvalues.is_empty() || n_nodes == 0 {
        return Err(Error::invalid("eigenvalues", "need at least one eigenvalue and one node"));
    }
    let mut sum = T::zero();
    for &raw in eigenvalues {
        let lambda = clamp_eigenvalue(raw)?;
        let shifted = tau + lambda;
        if !(shifted > T::zero()) {
            return Err(Error::invalid("tau", "tau + lambda must be positive"));
        }
        sum += shifted.powf(-s);
    }
    Ok(T::cast_usize(n_nodes) / sum)
}

fn clamp_eigenvalue<T: Scalar>(raw: T) -> Result<T> {
    let clamp = T::cast(EIGENVALUE_CLAMP);
    if raw < -clamp {
        return Err(Error::invalid(
            "eigenvalues",
            format!("eigenvalue {raw} below the -{EIGENVALUE_CLAMP:e} roundoff floor"),
        ));
    }
    Ok(raw.max(T::zero()))
}

impl<T: Scalar> MaternSpec<T> {
    /// Build from a spectrum, normalizing over the m retained eigenvalues.
    pub fn from_spectrum(
        tau: T,
        s: T,
        m: usize,
        spectrum: &SpectralDecomposition<T>,
        n_nodes: usize,
        intrinsic_dim: usize,
    ) -> Result<Self> {
        Self::validate_shape(tau, s, m, spectrum, n_nodes, intrinsic_dim)?;
        let c_n = normalization_constant(&spectrum.eigenvalues[..m], tau, s, n_nodes)?;
        Ok(Self { tau, s, m, c_n })
    }

    /// Build normalizing over the whole supplied spectrum (the full-sum
    /// convention) while still retaining only m terms in samples.
    pub fn from_spectrum_full_sum(
        tau: T,
        s: T,
        m: usize,
        spectrum: &SpectralDecomposition<T>,
        n_nodes: usize,
        intrinsic_dim: usize,
    ) -> Result<Self> {
        Self::validate_shape(tau, s, m, spectrum, n_nodes, intrinsic_dim)?;
        let c_n = normalization_constant(&spectrum.eigenvalues, tau, s, n_nodes)?;
        Ok(Self { tau, s, m, c_n })
    }

    fn validate_shape(
        tau: T,
        s: T,
        m: usize,
        spectrum: &SpectralDecomposition<T>,
        n_nodes: usize,
        intrinsic_dim: usize,
    ) -> Result<()> {
        if !(tau > T::zero()) {
            return Err(Error::invalid("tau", "must be positive"));
        }
        let half_d = T::cast_usize(intrinsic_dim) / T::cast(2.0);
        if !(s > half_d) {
            return Err(Error::invalid("s", format!("need s > d/2 = {half_d}")));
        }
        if m == 0 || m > spectrum.retained() {
            return Err(Error::invalid(
                "m",
                format!("need 1 <= m <= {} retained eigenpairs", spectrum.retained()),
            ));
        }
        if n_nodes == 0 || m > n_nodes {
            return Err(Error::invalid("m", "cannot retain more modes than nodes"));
        }
        Ok(())
    }

    /// KL weight sqrt(c_N) (tau + lambda)^{-s/2}.
    pub fn weight(&self, lambda: T) -> Result<T> {
        let lambda = clamp_eigenvalue(lambda)?;
        let half = T::cast(0.5);
        Ok(self.c_n.sqrt() * (self.tau + lambda).powf(-self.s * half))
    }
}

/// Harmonic boundary lifts grouped per boundary component, plus the
/// boundary eigenvectors they extend.
#[derive(Debug, Clone)]
pub struct BoundaryBasis<T> {
    /// lifts[c][l] is an N-vector, harmonic with eigenvector l of component
    /// c as boundary data there and zero on every other component.
    pub lifts: Vec<Vec<Array1<T>>>,
    /// boundary_eigs[c][l] holds that eigenvector on the component's nodes.
    pub boundary_eigs: Vec<Vec<Array1<T>>>,
    /// Node indices of each component, in the order the eigenvectors use.
    pub component_idx: Vec<Vec<usize>>,
}

impl<T: Scalar> BoundaryBasis<T> {
    /// Total number of lifts across components.
    pub fn total_lifts(&self) -> usize {
        self.lifts.iter().map(|l| l.len()).sum()
    }

    /// Lifts flattened component-major, the coefficient order used by
    /// samples and chains.
    pub fn flat_lifts(&self) -> impl Iterator<Item = &Array1<T>> {
        self.lifts.iter().flat_map(|l| l.iter())
    }

    /// Sum of mu_j psi_j over the flattened lifts.
    pub fn boundary_term(&self, mu: &Array1<T>, n_nodes: usize) -> Result<Array1<T>> {
        if mu.len() != self.total_lifts() {
            return Err(Error::DimensionMismatch {
                what: "boundary coefficients",
                expected: self.total_lifts(),
                got: mu.len(),
            });
        }
        let mut out = Array1::zeros(n_nodes);
        for (lift, &coeff) in self.flat_lifts().zip(mu.iter()) {
            if lift.len() != n_nodes {
                return Err(Error::DimensionMismatch {
                    what: "lift length",
                    expected: n_nodes,
                    got: lift.len(),
                });
            }
            out.scaled_add(coeff, lift);
        }
        Ok(out)
    }
}

/// Self-tuned Laplacian eigenvectors on one boundary component's nodes
/// alone: the first `count` eigenvectors, sign-fixed, unit norm.
pub fn boundary_eigenbasis<T: Scalar>(
    cloud: &PointCloud<T>,
    component_label: &str,
    count: usize,
    k_nn: usize,
) -> Result<Vec<Array1<T>>> {
    let component = cloud
        .boundary_components
        .iter()
        .find(|c| c.label == component_label)
        .ok_or_else(|| {
            Error::invalid("component", format!("no boundary component `{component_label}`"))
        })?;
    let size = component.idx.len();
    if size < count + 1 {
        return Err(Error::invalid(
            "component",
            format!("component `{component_label}` has {size} nodes, too small for {count} eigenvectors"),
        ));
    }
    let mut points = Array2::zeros((size, cloud.ambient_dim()));
    for (row, &idx) in component.idx.iter().enumerate() {
        points.row_mut(row).assign(&cloud.points.row(idx));
    }
    let laplacian = self_tuned_laplacian(&points, k_nn)?;
    let spectrum = spectral_decompose(&laplacian, count)?;
    Ok((0..count)
        .map(|l| spectrum.eigenvectors.column(l).to_owned())
        .collect())
}

/// Harmonic lifts of the given per-component eigenbases: for component c
/// and basis vector l, solve the Laplace problem with that vector as
/// boundary data on c and zero on every other component.
pub fn build_boundary_basis<T: Scalar>(
    cloud: &PointCloud<T>,
    ghosts: &GhostSet<T>,
    epsilon: T,
    eigenbases: Vec<Vec<Array1<T>>>,
) -> Result<BoundaryBasis<T>> {
    if eigenbases.len() != cloud.boundary_components.len() {
        return Err(Error::DimensionMismatch {
            what: "per-component eigenbases",
            expected: cloud.boundary_components.len(),
            got: eigenbases.len(),
        });
    }
    let factory = GpdmFactory::new(cloud, ghosts, epsilon)?;
    build_boundary_basis_with(cloud, &factory, eigenbases)
}

/// Same as [`build_boundary_basis`] but reusing a prebuilt factory.
pub fn build_boundary_basis_with<T: Scalar>(
    cloud: &PointCloud<T>,
    factory: &GpdmFactory<T>,
    eigenbases: Vec<Vec<Array1<T>>>,
) -> Result<BoundaryBasis<T>> {
    let b = cloud.boundary_len();
    // Position of each boundary node inside cloud.boundary_idx.
    let mut boundary_pos = vec![usize::MAX; cloud.len()];
    for (pos, &idx) in cloud.boundary_idx.iter().enumerate() {
        boundary_pos[idx] = pos;
    }
    let mut lifts = Vec::with_capacity(eigenbases.len());
    let mut component_idx = Vec::with_capacity(eigenbases.len());
    for (component, basis) in cloud.boundary_components.iter().zip(eigenbases.iter()) {
        let mut component_lifts = Vec::with_capacity(basis.len());
        for vector in basis {
            if vector.len() != component.idx.len() {
                return Err(Error::DimensionMismatch {
                    what: "boundary eigenvector length",
                    expected: component.idx.len(),
                    got: vector.len(),
                });
            }
            let mut data = Array1::zeros(b);
            for (&node, &value) in component.idx.iter().zip(vector.iter()) {
                data[boundary_pos[node]] = value;
            }
            component_lifts.push(solve_harmonic_with(factory, &data)?);
        }
        lifts.push(component_lifts);
        component_idx.push(component.idx.clone());
    }
    Ok(BoundaryBasis {
        lifts,
        boundary_eigs: eigenbases,
        component_idx,
    })
}

/// The two point-boundary lifts of a 1-d cloud (boundary data (1, 0) and
/// (0, 1)): the special case of [`build_boundary_basis`] where every
/// component is a single node carrying the trivial eigenbasis.
pub fn boundary_basis_1d<T: Scalar>(
    cloud: &PointCloud<T>,
    ghosts: &GhostSet<T>,
    epsilon: T,
) -> Result<BoundaryBasis<T>> {
    if cloud
        .boundary_components
        .iter()
        .any(|c| c.idx.len() != 1)
    {
        return Err(Error::invalid(
            "cloud",
            "1-d boundary basis needs single-node boundary components",
        ));
    }
    let bases = cloud
        .boundary_components
        .iter()
        .map(|_| vec![Array1::from_elem(1, T::one())])
        .collect();
    build_boundary_basis(cloud, ghosts, epsilon, bases)
}

/// Spectrum of the truncated graph Laplacian: self-tuned Laplacian over
/// cloud + ghosts, cut back to the cloud block, decomposed.
pub fn truncated_spectrum<T: Scalar>(
    cloud: &PointCloud<T>,
    ghosts: &GhostSet<T>,
    k_nn: usize,
    m: usize,
) -> Result<SpectralDecomposition<T>> {
    let n = cloud.len();
    let dim = cloud.ambient_dim();
    let mut all = Array2::zeros((n + ghosts.len(), dim));
    all.slice_mut(ndarray::s![..n, ..]).assign(&cloud.points);
    all.slice_mut(ndarray::s![n.., ..])
        .assign(&ghosts.stacked_points(dim));
    let full = self_tuned_laplacian(&all, k_nn)?;
    let truncated = truncated_laplacian(&full, n)?;
    spectral_decompose(&truncated, m)
}

/// One prior draw: coefficients and the realized node values.
#[derive(Debug, Clone)]
pub struct PriorSample<T> {
    pub zeta: Array1<T>,
    pub mu: Array1<T>,
    pub theta: Array1<T>,
}

/// Interior KL term alone: sum_n sqrt(c_N) (tau + lambda_n)^{-s/2} zeta_n
/// phi_n.
pub fn interior_term<T: Scalar>(
    spec: &MaternSpec<T>,
    spectrum: &SpectralDecomposition<T>,
    zeta: &Array1<T>,
) -> Result<Array1<T>> {
    if zeta.len() != spec.m {
        return Err(Error::DimensionMismatch {
            what: "interior coefficients",
            expected: spec.m,
            got: zeta.len(),
        });
    }
    if spec.m > spectrum.retained() {
        return Err(Error::DimensionMismatch {
            what: "retained eigenpairs",
            expected: spec.m,
            got: spectrum.retained(),
        });
    }
    let mut weighted = Array1::zeros(spec.m);
    for n in 0..spec.m {
        weighted[n] = spec.weight(spectrum.eigenvalues[n])? * zeta[n];
    }
    Ok(spectrum
        .eigenvectors
        .slice(ndarray::s![.., ..spec.m])
        .dot(&weighted))
}

/// Deterministic reconstruction of node values from coefficients.
pub fn reconstruct<T: Scalar>(
    spec: &MaternSpec<T>,
    spectrum: &SpectralDecomposition<T>,
    basis: &BoundaryBasis<T>,
    zeta: &Array1<T>,
    mu: &Array1<T>,
) -> Result<Array1<T>> {
    let interior = interior_term(spec, spectrum, zeta)?;
    let boundary = basis.boundary_term(mu, spectrum.nodes())?;
    Ok(interior + boundary)
}

/// Draw a prior sample: all coefficients i.i.d. standard normal (zeta
/// first, then mu component-major), realized through [`reconstruct`].
pub fn sample_prior<T: Scalar, R: Rng + ?Sized>(
    spec: &MaternSpec<T>,
    spectrum: &SpectralDecomposition<T>,
    basis: &BoundaryBasis<T>,
    rng: &mut R,
) -> Result<PriorSample<T>> {
    let zeta = Array1::from_iter((0..spec.m).map(|_| T::standard_normal(rng)));
    let mu = Array1::from_iter((0..basis.total_lifts()).map(|_| T::standard_normal(rng)));
    let theta = reconstruct(spec, spectrum, basis, &zeta, &mu)?;
    Ok(PriorSample { zeta, mu, theta })
}

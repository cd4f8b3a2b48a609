//! Linearized-posterior (Laplace) band for the desk-scale elliptic
//! inversion: separates prior design from sampler mixing.

use gpdm_bayes::forward::EllipticForwardModel;
use gpdm_bayes::geometry::{construct_ghost_points, semi_ellipse, AnalyticMetric};
use gpdm_bayes::graph_ops::{calibrate_epsilon, default_epsilon_grid};
use gpdm_bayes::linalg;
use gpdm_bayes::prior::{boundary_basis_1d, reconstruct, truncated_spectrum, MaternSpec};
use gpdm_bayes::inference::split_coefficients;
use ndarray::{Array1, Array2};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let tau: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5.0);
    let s_par: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(4.0);
    let m: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(12);

    let n = 315;
    let cloud = semi_ellipse::<f64>(n).unwrap();
    let ghosts = construct_ghost_points(&cloud, 10).unwrap();
    let eps = calibrate_epsilon(&cloud.points, 26, &default_epsilon_grid()).unwrap().epsilon_star;
    let kappa_true = Array1::from_shape_fn(n, |i| 2.0 + (3.0 * cloud.intrinsic[[i, 0]]).cos());
    let f = gpdm_bayes::geometry::manufacture_rhs(
        &|x: &[f64]| 2.0 + (3.0 * x[0]).cos(),
        &|x: &[f64]| x[0].sin(),
        &cloud, &AnalyticMetric::ellipse_arc(), 32).unwrap();
    let obs_idx: Vec<usize> = (0..n).collect();
    let model = EllipticForwardModel::new(&cloud, &ghosts, eps, f, ndarray::array![0.0, 0.0], obs_idx).unwrap();

    let spectrum = truncated_spectrum(&cloud, &ghosts, 2, m).unwrap();
    let basis = boundary_basis_1d(&cloud, &ghosts, eps).unwrap();
    let spec = MaternSpec::from_spectrum(tau, s_par, m, &spectrum, n, 1).unwrap();
    let dim = m + 2;

    // Coefficient representation of the truth (projection).
    let theta_true = kappa_true.mapv(f64::ln);
    let mu_t = [theta_true[0], theta_true[n - 1]];
    let mut resid = theta_true.clone();
    for (lift, mc) in basis.flat_lifts().zip(mu_t.iter()) { resid = resid - lift * *mc; }
    let proj = spectrum.eigenvectors.t().dot(&resid);
    let mut coef_true = Array1::zeros(dim);
    for k in 0..m { coef_true[k] = proj[k] / spec.weight(spectrum.eigenvalues[k]).unwrap(); }
    coef_true[m] = mu_t[0];
    coef_true[m + 1] = mu_t[1];

    let to_theta = |c: &Array1<f64>| {
        let (z, mu) = split_coefficients(c, m).unwrap();
        reconstruct(&spec, &spectrum, &basis, &z, &mu).unwrap()
    };
    let g_of = |c: &Array1<f64>| model.observe(&model.evaluate(&to_theta(c)).unwrap());

    // Finite-difference Jacobian at the projected truth.
    let g0 = g_of(&coef_true);
    let h = 1e-4;
    let mut jac = Array2::zeros((n, dim));
    for k in 0..dim {
        let mut cp = coef_true.clone();
        cp[k] += h;
        let gp = g_of(&cp);
        let mut cm = coef_true.clone();
        cm[k] -= h;
        let gm = g_of(&cm);
        for i in 0..n { jac[[i, k]] = (gp[i] - gm[i]) / (2.0 * h); }
    }
    // Posterior precision = J^T J / sigma^2 + I, covariance by inversion.
    let sigma2 = 0.01;
    let mut prec = jac.t().dot(&jac).mapv(|v| v / sigma2);
    for k in 0..dim { prec[[k, k]] += 1.0; }
    let eig = linalg::symmetric_eigen(&prec).unwrap();
    // Sigma_post = V diag(1/lambda) V^T
    let mut cov = Array2::<f64>::zeros((dim, dim));
    for k in 0..dim {
        let v = eig.vectors.column(k);
        let w = 1.0 / eig.eigenvalues[k];
        for i in 0..dim { for j in 0..dim { cov[[i, j]] += w * v[i] * v[j]; } }
    }
    println!("posterior coef sd: {:?}", (0..dim).map(|k| (cov[[k,k]].sqrt()*100.0).round()/100.0).collect::<Vec<_>>());

    // Node-wise band of theta: linear map L: coef -> theta node values.
    let mut lmap = Array2::zeros((n, dim));
    for k in 0..m {
        let w = spec.weight(spectrum.eigenvalues[k]).unwrap();
        for i in 0..n { lmap[[i, k]] = w * spectrum.eigenvectors[[i, k]]; }
    }
    for (j, lift) in basis.flat_lifts().enumerate() {
        for i in 0..n { lmap[[i, m + j]] = lift[i]; }
    }
    // mean shift: posterior mean approx = coef_true + cov * J^T (y - g0)/sigma2 with y = u_true + noise;
    // ignore noise (zero-noise Laplace): mean = coef_true + cov J^T (u_true - g0)/sigma2 (discretization pull).
    let u_true = Array1::from_shape_fn(n, |i| cloud.intrinsic[[i, 0]].sin());
    let pull = cov.dot(&jac.t().dot(&(&u_true - &g0)).mapv(|v| v / sigma2));
    let mean_coef = &coef_true + &pull;
    let theta_mean = to_theta(&mean_coef);
    let mut covered = 0usize;
    let mut worst: Vec<(usize, f64)> = vec![];
    for i in 0..n {
        let mut var = 0.0;
        for a in 0..dim { for b in 0..dim { var += lmap[[i, a]] * cov[[a, b]] * lmap[[i, b]]; } }
        let sd = var.sqrt();
        let lo = theta_mean[i] - 1.96 * sd;
        let hi = theta_mean[i] + 1.96 * sd;
        let t = theta_true[i];
        if lo <= t && t <= hi { covered += 1; } else { worst.push((i, ((t - theta_mean[i]) / sd).abs())); }
    }
    println!("tau={tau} s={s_par} m={m}: Laplace coverage = {:.3}", covered as f64 / n as f64);
    if !worst.is_empty() {
        let mx = worst.iter().map(|w| w.1).fold(0.0_f64, f64::max);
        println!("  misses: {} nodes, worst z-score {:.2}", worst.len(), mx);
    }
}

use gpdm_bayes::geometry::{construct_ghost_points, semi_ellipse};
use gpdm_bayes::graph_ops::{calibrate_epsilon, default_epsilon_grid};
use gpdm_bayes::prior::{boundary_basis_1d, truncated_spectrum, MaternSpec};
use ndarray::Array1;

fn main() {
    let n = 315;
    let m = 20;
    let cloud = semi_ellipse::<f64>(n).unwrap();
    let ghosts = construct_ghost_points(&cloud, 10).unwrap();
    let eps = calibrate_epsilon(&cloud.points, 26, &default_epsilon_grid()).unwrap().epsilon_star;
    let spectrum = truncated_spectrum(&cloud, &ghosts, 2, m).unwrap();
    let basis = boundary_basis_1d(&cloud, &ghosts, eps).unwrap();

    let theta_true = Array1::from_shape_fn(n, |i| (2.0 + (3.0 * cloud.intrinsic[[i, 0]]).cos()).ln());
    // Boundary term via the lifts anchored at the true endpoint values.
    let mu = [theta_true[0], theta_true[n - 1]];
    let mut residual = theta_true.clone();
    for (lift, m_c) in basis.flat_lifts().zip(mu.iter()) {
        residual = residual - lift * *m_c;
    }
    // Interior coefficient demand per mode.
    let proj = spectrum.eigenvectors.t().dot(&residual);
    for (tau, s) in [(0.2, 4.0), (0.2, 2.0), (0.5, 2.0), (1.0, 2.0), (0.2, 1.5), (1.0, 4.0), (5.0, 4.0), (10.0, 4.0)] {
        let spec = MaternSpec::from_spectrum(tau, s, m, &spectrum, n, 1).unwrap();
        let demands: Vec<f64> = (0..m)
            .map(|k| proj[k] / spec.weight(spectrum.eigenvalues[k]).unwrap())
            .collect();
        let max = demands.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        let big: Vec<String> = demands.iter().enumerate().filter(|(_, d)| d.abs() > 1.0)
            .map(|(k, d)| format!("z{}={:.1}", k + 1, d)).collect();
        println!("tau={tau:4} s={s:3}: max |zeta| demand = {max:7.2}   heavy: {}", big.join(" "));
    }
    // How much of the residual is even in the span of the first m modes?
    let fitted = spectrum.eigenvectors.slice(ndarray::s![.., ..m]).dot(&proj);
    let miss = (&residual - &fitted).iter().map(|v| v * v).sum::<f64>().sqrt()
        / residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("relative residual outside 20-mode span: {miss:.4}");
}

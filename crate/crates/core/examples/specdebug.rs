use gpdm_bayes::geometry::{construct_ghost_points, semi_ellipse, semi_torus};
use gpdm_bayes::prior::truncated_spectrum;

fn main() {
    let cloud = semi_ellipse::<f64>(315).unwrap();
    let ghosts = construct_ghost_points(&cloud, 10).unwrap();
    let spec = truncated_spectrum(&cloud, &ghosts, 2, 20).unwrap();
    println!("semi-ellipse N=315 truncated eigenvalues:");
    let s_total = 6.682446; // arclength of the half ellipse (a=1, b=3)
    for (n, l) in spec.eigenvalues.iter().enumerate() {
        let mu = ((n + 1) as f64 * std::f64::consts::PI / s_total).powi(2);
        println!("  lambda_{:>2} = {l:10.4}   continuum Dirichlet mu = {mu:10.4}", n + 1);
    }
    let torus = semi_torus::<f64>(24, 24).unwrap();
    let tg = construct_ghost_points(&torus, 6).unwrap();
    let tspec = truncated_spectrum(&torus, &tg, 4, 8).unwrap();
    println!("semi-torus 24x24 truncated eigenvalues: {:?}", tspec.eigenvalues.iter().map(|v| (v*1000.0).round()/1000.0).collect::<Vec<_>>());
}

use gpdm_bayes::{geometry, graph_ops};
use ndarray::Array2;
use std::f64::consts::PI;

fn main() {
    let cloud = gpdm_bayes::geometry::semi_ellipse::<f64>(630).unwrap();
    let cal = graph_ops::calibrate_epsilon(&cloud.points, 51, &graph_ops::default_epsilon_grid()).unwrap();
    println!("semi-ellipse N=630 K=51: eps* = {:.6e}, slope = {:.4}", cal.epsilon_star, cal.slope_at_star);

    let torus = geometry::semi_torus::<f64>(36, 36).unwrap();
    let cal2 = graph_ops::calibrate_epsilon(&torus.points, 128, &graph_ops::default_epsilon_grid()).unwrap();
    println!("semi-torus 36x36 K=128: eps* = {:.6e}, slope = {:.4}", cal2.epsilon_star, cal2.slope_at_star);

    let n = 400;
    let circle = Array2::from_shape_fn((n, 2), |(i, j)| {
        let t = 2.0 * PI * i as f64 / n as f64;
        if j == 0 { t.cos() } else { t.sin() }
    });
    let cal3 = graph_ops::calibrate_epsilon(&circle, 20, &graph_ops::default_epsilon_grid()).unwrap();
    println!("circle N=400 K=20: eps* = {:.6e}, slope = {:.4}", cal3.epsilon_star, cal3.slope_at_star);

    let circle200 = Array2::from_shape_fn((200, 2), |(i, j)| {
        let t = 2.0 * PI * i as f64 / 200.0;
        if j == 0 { t.cos() } else { t.sin() }
    });
    let cal4 = graph_ops::calibrate_epsilon(&circle200, 10, &graph_ops::default_epsilon_grid()).unwrap();
    println!("circle N=200 K=10: eps* = {:.6e}, slope = {:.4}", cal4.epsilon_star, cal4.slope_at_star);
    let q = graph_ops::kernel_density(&circle200, cal4.epsilon_star, 1).unwrap();
    let err = q.iter().map(|v| (v * 2.0 * PI - 1.0).abs()).fold(0.0_f64, f64::max);
    println!("circle density max |2 pi q - 1| = {:.4}", err);

    let flat200 = geometry::flat_interval::<f64>(200).unwrap();
    let cal5 = graph_ops::calibrate_epsilon(&flat200.points, 20, &graph_ops::default_epsilon_grid()).unwrap();
    println!("flat N=200 K=20: eps* = {:.6e}, slope = {:.4}", cal5.epsilon_star, cal5.slope_at_star);
}

use trotterkit_wasm::{error_sweep, order_scan, zeros_view};

#[test]
fn zeros_view_for_k_20() {
    let v = zeros_view(20).unwrap();
    assert_eq!(v.normalized.len(), 20);
    assert_eq!(v.szego.len(), 256);
    // Normalized zeros sit inside the unit disc and away from the origin.
    for [re, im] in &v.normalized {
        let r = (re * re + im * im).sqrt();
        assert!(r < 1.0 && r > 0.27, "{r}");
    }
    assert!(v.min_modulus_over_k > 0.3);
    assert!(zeros_view(0).is_err());
    assert!(zeros_view(1000).is_err());
}

#[test]
fn sweep_shows_cancellation_in_the_sum() {
    let pts = error_sweep(52, -40.0, -1.0, 40).unwrap();
    assert_eq!(pts.len(), 40);
    assert_eq!(pts[0].x, -40.0);
    assert_eq!(pts[39].x, -1.0);
    let worst_sum = pts.iter().map(|p| p.err_sum).fold(0.0, f64::max);
    let worst_prod = pts.iter().map(|p| p.err_prod).fold(0.0, f64::max);
    assert!(worst_prod < 1e-13, "{worst_prod}");
    assert!(worst_sum > 10.0 * worst_prod, "{worst_sum} vs {worst_prod}");
    assert!(error_sweep(10, 1.0, 0.0, 5).is_err());
}

#[test]
fn order_scan_recovers_fourth_order() {
    let s = order_scan("suzuki", 3, 6, 11).unwrap();
    assert_eq!(s.claimed_order, 4);
    assert!((s.slope - 4.0).abs() < 0.3, "{}", s.slope);
    assert_eq!(s.points.len(), 5);
    assert!(order_scan("nope", 3, 6, 1).is_err());
    assert!(order_scan("strang", 1, 6, 1).is_err());
}

#[test]
fn serialized_shape() {
    let json = serde_json::to_value(zeros_view(5).unwrap()).unwrap();
    assert!(json["normalized"][0].as_array().unwrap().len() == 2);
    assert!(json["min_modulus_over_k"].is_number());
}

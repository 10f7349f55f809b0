//! Frozen feature values for a fixed candidate. Any change to the extractor
//! that moves these numbers changes what trained models see.

use memristim_core::dr::{extract_features, ClassHint, LesionCandidate, RasterImage, FEATURE_NAMES};

/// A 12x10 colour image: dim ramp background with a brighter 3x3 block.
fn image() -> RasterImage {
    let (w, h) = (12, 10);
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let inside = (4..7).contains(&x) && (3..6).contains(&y);
            let ramp = 0.02 * x as f64 + 0.01 * y as f64;
            let px = if inside { [0.9, 0.7 + ramp, 0.3] } else { [0.5, 0.25 + ramp, 0.1] };
            data.extend(px);
        }
    }
    RasterImage::new(w, h, 3, data).unwrap()
}

/// The block plus one background pixel sticking out to the right.
fn candidate() -> LesionCandidate {
    let px = (3..6).flat_map(|y| (4..7).map(move |x| (x, y))).chain([(7, 4)]).collect();
    LesionCandidate::from_pixels(0, px, ClassHint::Bright).unwrap()
}

fn features() -> Vec<f64> {
    extract_features(&image(), &candidate()).unwrap().values.to_vec()
}

fn value(name: &str) -> f64 {
    let k = FEATURE_NAMES.iter().position(|n| *n == name).unwrap();
    features()[k]
}

const GOLDEN: [(&str, f64); 81] = [
    ("area", 10.0),
    ("perimeter", 14.0),
    ("compactness", 0.8163265306122449),
    ("bbox_width", 4.0),
    ("bbox_height", 3.0),
    ("bbox_aspect", 1.3333333333333333),
    ("extent", 0.8333333333333334),
    ("centroid_x_in_bbox", 0.425),
    ("centroid_y_in_bbox", 0.5),
    ("mu20", 0.96),
    ("mu02", 0.6),
    ("mu11", 0.0),
    ("major_axis", 3.919183588453085),
    ("minor_axis", 3.0983866769659336),
    ("eccentricity", 0.6123724356957945),
    ("orientation", 0.0),
    ("equivalent_diameter", 3.5682482323055424),
    ("radial_mean", 1.1724957370772915),
    ("radial_std", 0.43041113663052316),
    ("radial_max", 1.8),
    ("hu1", 0.156),
    ("hu2", 0.0012960000000000003),
    ("hu3", 0.0003317760000000002),
    ("hu4", 9.216000000000037e-6),
    ("boundary_pixels", 8.0),
    ("boundary_fraction", 0.8),
    ("mean_run_length", 3.3333333333333335),
    ("r_mean", 0.8600000000000001),
    ("g_mean", 0.7989999999999999),
    ("b_mean", 0.27999999999999997),
    ("r_std", 0.12000000000000001),
    ("g_std", 0.12421352583354194),
    ("b_std", 0.059999999999999984),
    ("r_min", 0.5),
    ("g_min", 0.43000000000000005),
    ("b_min", 0.1),
    ("r_max", 0.9),
    ("g_max", 0.8699999999999999),
    ("b_max", 0.3),
    ("r_ring_mean", 0.5),
    ("g_ring_mean", 0.39818181818181825),
    ("b_ring_mean", 0.1),
    ("r_contrast", 0.3600000000000001),
    ("g_contrast", 0.4008181818181817),
    ("b_contrast", 0.17999999999999997),
    ("gray_p10", 0.6373333333333333),
    ("gray_p25", 0.6741666666666667),
    ("gray_p50", 0.6783333333333333),
    ("gray_p75", 0.6833333333333332),
    ("gray_p90", 0.6869999999999999),
    ("ring_gray_std", 0.017656554099342088),
    ("ring_gray_min", 0.3),
    ("ring_gray_max", 0.36333333333333334),
    ("gray_contrast_ratio", 0.32031289825356274),
    ("s0_boundary_grad_mean", 1.4430789593596687),
    ("s0_boundary_grad_std", 0.05982200773101617),
    ("s0_boundary_grad_max", 1.5416081069959238),
    ("s0_interior_grad_mean", 0.7032795732959851),
    ("s0_interior_grad_std", 0.643651093895991),
    ("s0_interior_grad_max", 1.346930667191976),
    ("s0_ring_grad_mean", 0.3825618042161038),
    ("s0_laplacian_mean", -0.38499999999999995),
    ("s0_laplacian_std", 0.33018933962198105),
    ("s1_boundary_grad_mean", 0.7016972867643111),
    ("s1_boundary_grad_std", 0.05517299390904545),
    ("s1_boundary_grad_max", 0.7990185959549296),
    ("s1_interior_grad_mean", 0.325288793406971),
    ("s1_interior_grad_std", 0.2656603140069758),
    ("s1_interior_grad_max", 0.5909491074139468),
    ("s1_ring_grad_mean", 0.3270936387132387),
    ("s1_laplacian_mean", -0.12482634110196247),
    ("s1_laplacian_std", 0.05934466073730288),
    ("s2_boundary_grad_mean", 0.17296794858519035),
    ("s2_boundary_grad_std", 0.035396313742046805),
    ("s2_boundary_grad_max", 0.23450764247169126),
    ("s2_interior_grad_mean", 0.07462002548762882),
    ("s2_interior_grad_std", 0.015727856050185587),
    ("s2_interior_grad_max", 0.09034788153781441),
    ("s2_ring_grad_mean", 0.17335920373863617),
    ("s2_laplacian_mean", -0.030758150595016586),
    ("s2_laplacian_std", 0.006523229599860627),
];

#[test]
fn roster_is_frozen() {
    assert_eq!(FEATURE_NAMES.len(), GOLDEN.len());
    for (name, (golden, _)) in FEATURE_NAMES.iter().zip(GOLDEN) {
        assert_eq!(*name, golden);
    }
}

#[test]
fn values_are_frozen() {
    for ((name, want), got) in GOLDEN.iter().zip(features()) {
        let tol = 1e-9 * want.abs().max(1e-6);
        assert!((got - want).abs() <= tol, "{name}: {got} vs {want}");
    }
}

#[test]
fn shape_values_match_hand_computation() {
    // pixels: 3x3 block at x 4..7, y 3..6, plus (7, 4)
    let xs: Vec<f64> = (0..9).map(|k| 4.0 + (k % 3) as f64).chain([7.0]).collect();
    let ys: Vec<f64> = (0..9).map(|k| 3.0 + (k / 3) as f64).chain([4.0]).collect();
    let n = xs.len() as f64;
    let (cx, cy) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let mu20 = xs.iter().map(|x| (x - cx).powi(2)).sum::<f64>() / n;
    let mu02 = ys.iter().map(|y| (y - cy).powi(2)).sum::<f64>() / n;

    assert_eq!(value("area"), 10.0);
    assert_eq!(value("bbox_width"), 4.0);
    assert_eq!(value("bbox_height"), 3.0);
    assert!((value("extent") - 10.0 / 12.0).abs() < 1e-12);
    assert!((value("centroid_x_in_bbox") - (cx - 4.0 + 0.5) / 4.0).abs() < 1e-12);
    assert!((value("centroid_y_in_bbox") - (cy - 3.0 + 0.5) / 3.0).abs() < 1e-12);
    assert!((value("mu20") - mu20).abs() < 1e-12);
    assert!((value("mu02") - mu02).abs() < 1e-12);
    assert!((value("equivalent_diameter") - (4.0 * n / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    // nine block pixels at r = 0.9 and one background pixel at 0.5
    assert!((value("r_mean") - (9.0 * 0.9 + 0.5) / 10.0).abs() < 1e-12);
    assert_eq!(value("r_min"), 0.5);
    assert_eq!(value("b_max"), 0.3);
}

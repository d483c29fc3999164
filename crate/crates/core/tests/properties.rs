use finsler_core::catalog::{Catalog, EntryKind};
use finsler_core::diff::DiffConfig;
use finsler_core::finsler::{
    fundamental_tensor, metric_eval, projective_k, psi_k, riemann_tensor, spray_direct,
    GeneralABMetric,
};
use finsler_core::geometry::definiteness_ratio;
use finsler_core::riemann::AlphaBeta;
use proptest::prelude::*;

fn metric(name: &str) -> GeneralABMetric {
    Catalog::builtin().entry(name).unwrap().metric(3).unwrap()
}

fn point() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-0.25f64..0.25, 3),
        prop::collection::vec(-1.0f64..1.0, 3),
    )
        .prop_filter("nonzero y", |(_, y)| y.iter().map(|v| v * v).sum::<f64>() > 0.01)
}

fn classical() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["funk", "berwald", "bryant", "shen"])
}

fn scaled(y: &[f64], t: f64) -> Vec<f64> {
    y.iter().map(|v| t * v).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_and_spray_are_homogeneous(name in classical(), (x, y) in point(), t in 0.2f64..5.0) {
        let m = metric(name);
        let cfg = DiffConfig::jet();
        let f = metric_eval(&m, &x, &y).unwrap();
        prop_assert!((metric_eval(&m, &x, &scaled(&y, t)).unwrap() - t * f).abs() <= 1e-12 * t * f);
        let g = spray_direct(&m, &x, &y, &cfg).unwrap();
        let gt = spray_direct(&m, &x, &scaled(&y, t), &cfg).unwrap();
        prop_assert!((&gt - &g * (t * t)).norm() <= 1e-10 * t * t * g.norm().max(f * f));
    }

    #[test]
    fn riemann_is_homogeneous_of_degree_two(name in classical(), (x, y) in point(), t in 0.2f64..5.0) {
        let m = metric(name);
        let cfg = DiffConfig::jet();
        let f = metric_eval(&m, &x, &y).unwrap();
        let r = riemann_tensor(&m, &x, &y, &cfg).unwrap();
        let rt = riemann_tensor(&m, &x, &scaled(&y, t), &cfg).unwrap();
        prop_assert!((&rt - &r * (t * t)).norm() <= 1e-9 * t * t * r.norm().max(f * f));
    }

    #[test]
    fn g_is_symmetric_and_positive(name in classical(), (x, y) in point()) {
        let m = metric(name);
        for cfg in [DiffConfig::jet(), DiffConfig::fd()] {
            let g = fundamental_tensor(&m, &x, &y, &cfg).unwrap();
            prop_assert!((&g - g.transpose()).amax() <= 1e-12 * g.amax());
            prop_assert!(definiteness_ratio(&g) > 0.0);
        }
    }

    #[test]
    fn projective_and_psi_routes_agree(name in classical(), (x, y) in point()) {
        let m = metric(name);
        let cfg = DiffConfig::jet();
        let kp = projective_k(&m, &x, &y, &cfg).unwrap();
        let ks = psi_k(&m, &x, &y, &cfg).unwrap();
        prop_assert!((kp - ks).abs() <= 1e-8, "{kp} vs {ks}");
        prop_assert!((kp - m.expected_k.unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn deformations_round_trip(idx in 0usize..3, (x, y) in point()) {
        let cat = Catalog::builtin();
        let conformal: Vec<_> = cat
            .entries()
            .iter()
            .filter(|e| matches!(e.kind, EntryKind::Deformation(_)))
            .filter_map(|e| e.deformation(3).ok())
            .filter(|p| p.kind == finsler_core::deform::Deformation::Conformal)
            .collect();
        prop_assume!(idx < conformal.len());
        let p = &conformal[idx];
        prop_assume!(p.chart.admissible(&x).is_ok() && p.values(&x, &y).is_ok());
        let (a2, b) = p.reverse(&x, &y).unwrap();
        let alpha2 = p.chart.alpha_sq(&x, &y);
        let beta = p.chart.beta(&x, &y);
        prop_assert!((a2 - alpha2).abs() <= 1e-9 * alpha2.max(1.0));
        prop_assert!((b - beta).abs() <= 1e-9 * alpha2.sqrt().max(1.0));
    }
}

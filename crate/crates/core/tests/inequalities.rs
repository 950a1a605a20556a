use std::sync::Arc;

use robin_core::fem::{mesh_star, ScalarField};
use robin_core::inequalities::{
    check_ec_ball_minimality, check_intermediate, check_quantitative, check_trace_poincare, sweep, Family, ObstacleLevel,
    Resolution, ShapeCheck, ShapeLab, SweepConfig,
};
use robin_core::radial::RadialParams;
use robin_core::{InequalityReport, StarDomain};

fn coarse() -> Resolution {
    Resolution::new(16, 64)
}

#[test]
fn disk_is_an_equality_case() {
    let disk = StarDomain::disk(1.0, 4096).unwrap();
    let lab = ShapeLab::new(&disk, 1.0, Resolution::default()).unwrap();
    for q in [1.0, 1.5] {
        let thm = lab.intermediate(q).unwrap();
        assert!(thm.pass() && thm.deficit().abs() <= thm.tolerance(), "q={q}: {thm:?}");
        let quant = lab.quantitative(q).unwrap();
        assert!(quant.pass() && quant.deficit().abs() <= quant.tolerance());
        assert!(quant.input("ratio").is_none());
    }
}

#[test]
fn ellipse_satisfies_both_inequalities() {
    let ellipse = StarDomain::ellipse(1.3, 1.0 / 1.3, 1024).unwrap();
    for q in [1.0, 1.5] {
        let thm = check_intermediate(&ellipse, q, 1.0, Resolution::default()).unwrap();
        assert!(thm.pass() && thm.deficit() > thm.tolerance());
        assert!(thm.is_consistent());
        let quant = check_quantitative(&ellipse, q, 1.0, Resolution::default()).unwrap();
        assert!(quant.pass());
        assert!(quant.input("ratio").unwrap() > 0.0);
    }
}

#[test]
fn perturbed_ball_satisfies_obstacle_minimality() {
    let shape = StarDomain::perturbed(1.0, 0.1, 3, 1024).unwrap();
    for c in [0.0, 0.3, 1.5] {
        let p = RadialParams::new(2, 1.0, 0.5, c, 0.0).unwrap();
        let report = check_ec_ball_minimality(&shape, &p, coarse()).unwrap();
        assert!(report.pass(), "c={c}: {report:?}");
    }
}

#[test]
fn constant_field_satisfies_trace_poincare() {
    let mesh = Arc::new(mesh_star(&StarDomain::ellipse(1.4, 0.7, 512).unwrap(), 16, 64).unwrap());
    let ones = ScalarField::constant(mesh, 1.0).unwrap();
    for q in [1.0, 1.5, 2.0] {
        let report = check_trace_poincare(&ones, q, 1.0, 1e-3).unwrap();
        assert!(report.pass(), "q={q}: {report:?}");
        assert!(report.deficit() > 0.0);
    }
}

#[test]
fn intermediate_deficit_grows_with_aspect_ratio() {
    let deficits: Vec<f64> = [1.1, 1.3, 1.6, 2.0]
        .iter()
        .map(|&a| {
            let d = StarDomain::ellipse(a, 1.0 / a, 512).unwrap();
            check_intermediate(&d, 1.0, 1.0, coarse()).unwrap().deficit()
        })
        .collect();
    assert!(deficits.windows(2).all(|w| w[1] > w[0]), "{deficits:?}");
}

#[test]
fn sweep_is_deterministic_and_complete() {
    let mut cfg = SweepConfig::new(
        Family::Ellipse { aspects: vec![1.1, 1.4] },
        vec![ShapeCheck::Intermediate, ShapeCheck::Quantitative, ShapeCheck::EcBall],
        vec![1.0],
        vec![0.5, 2.0],
    );
    cfg.c = vec![ObstacleLevel::RelativeToInf(0.5), ObstacleLevel::Absolute(1.0)];
    cfg.resolution = coarse();
    cfg.samples = 256;
    let first = sweep(&cfg).unwrap();
    let second = sweep(&cfg).unwrap();
    assert_eq!(first.rows.len(), 2 * 2 * (1 + 1 + 2));
    assert!(first.all_passed());
    assert!(first.empirical_constant.unwrap() > 0.0);
    let csv = |r: &robin_core::inequalities::SweepResult| {
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(&first), csv(&second));
    let text = String::from_utf8(csv(&first)).unwrap();
    assert!(text.starts_with("check,family,params,q,beta,c,lhs,rhs,deficit,tolerance,pass"));
    assert_eq!(text.lines().count(), first.rows.len() + 1);
}

#[test]
fn empty_family_is_a_config_error() {
    let cfg = SweepConfig::new(Family::Ellipse { aspects: vec![] }, vec![ShapeCheck::Intermediate], vec![1.0], vec![1.0]);
    assert!(cfg.validate().is_err());
    assert!(sweep(&cfg).is_err());
}

#[test]
fn reports_round_trip_through_json() {
    let d = StarDomain::ellipse(1.2, 1.0 / 1.2, 256).unwrap();
    let report = check_intermediate(&d, 1.0, 1.0, coarse()).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: InequalityReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.pass(), report.pass());
}

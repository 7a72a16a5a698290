use nifrontier::design::required_n0;
use nifrontier::{
    inflated_design, normal_cdf, normal_quantile, power, sample_size, DesignSpec, Error, Risk,
    SampleSize, Scale,
};

fn base() -> DesignSpec {
    DesignSpec::new(0.05, 0.05, 0.10, 1.0, 0.025, 0.90).unwrap()
}

fn r(x: f64) -> Risk {
    Risk::new(x).unwrap()
}

#[test]
fn normal_reference_values() {
    assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    assert!((normal_quantile(0.975).unwrap() - 1.959_964).abs() < 1e-6);
    assert!((normal_cdf(-3.244) - 0.000_59).abs() < 1e-5);
    assert!(normal_quantile(0.0).is_err());
}

#[test]
fn base_case_sizes() {
    let d = base();
    let n = |s| sample_size(&d, s).unwrap();
    assert_eq!(
        n(Scale::RiskDifference),
        SampleSize {
            n0: 400,
            n1: 400,
            total: 800
        }
    );
    assert_eq!(n(Scale::LogRiskRatio).n0, 832);
    assert_eq!(n(Scale::ArcsineDifference).total, 1136);
}

#[test]
fn half_power_needs_no_power_quantile() {
    let d = DesignSpec {
        power: 0.5,
        ..base()
    };
    assert_eq!(sample_size(&d, Scale::RiskDifference).unwrap().n0, 146);
}

#[test]
fn inflated_totals() {
    let d = base();
    assert_eq!(
        inflated_design(&d, Scale::RiskDifference, 0.01)
            .unwrap()
            .total,
        990
    );
    assert_eq!(
        inflated_design(&d, Scale::RiskDifference, 0.015)
            .unwrap()
            .total,
        906
    );
    assert_eq!(
        inflated_design(&d, Scale::RiskDifference, 0.025)
            .unwrap()
            .total,
        800
    );
    assert!(inflated_design(&d, Scale::RiskDifference, 0.03).is_err());
}

#[test]
fn unequal_allocation_rounds_the_active_arm_up() {
    let d = DesignSpec {
        ratio: 1.5,
        ..base()
    };
    let n = sample_size(&d, Scale::RiskDifference).unwrap();
    let n0 = required_n0(&d, Scale::RiskDifference).unwrap();
    assert_eq!(n.n0, n0.ceil() as u64);
    assert_eq!(n.n1, (1.5 * n.n0 as f64).ceil() as u64);
}

#[test]
fn infeasible_when_expected_effect_reaches_the_margin() {
    let d = DesignSpec::new(0.05, 0.10, 0.10, 1.0, 0.025, 0.9).unwrap();
    assert!(matches!(
        sample_size(&d, Scale::RiskDifference),
        Err(Error::InfeasibleDesign)
    ));
}

#[test]
fn power_at_true_risks() {
    let d = base();
    let n = SampleSize::new(400, 400).unwrap();
    let at_design = power(&d, Scale::RiskDifference, &n, r(0.05), r(0.05)).unwrap();
    assert!((at_design - 0.90).abs() < 0.005);
    assert!(power(&d, Scale::RiskDifference, &n, r(0.10), r(0.10)).unwrap() < 0.75);

    let n = SampleSize::new(568, 568).unwrap();
    for i in 0..=29 {
        let p = 0.01 + 0.01 * i as f64;
        let pw = power(&d, Scale::ArcsineDifference, &n, r(p), r(p)).unwrap();
        assert!((pw - 0.90).abs() < 0.01, "p = {p}: {pw}");
    }
}

#[test]
fn figure_panels() {
    // fixed 5% difference: size grows with control risk; fixed 2-fold ratio: size shrinks
    let mut last_rd = 0;
    let mut last_rr = u64::MAX;
    for i in 1..=9 {
        let p = 0.05 * i as f64;
        let rd = DesignSpec::new(p, p, p + 0.05, 1.0, 0.025, 0.9).unwrap();
        let rr = DesignSpec::new(p, p, 2.0 * p, 1.0, 0.025, 0.9).unwrap();
        let n_rd = sample_size(&rd, Scale::RiskDifference).unwrap().total;
        let n_rr = sample_size(&rr, Scale::LogRiskRatio).unwrap().total;
        assert!(n_rd > last_rd && n_rr < last_rr);
        last_rd = n_rd;
        last_rr = n_rr;
    }
}

#[test]
fn invalid_designs() {
    assert!(DesignSpec::new(0.05, 0.05, 0.10, 0.0, 0.025, 0.9).is_err());
    assert!(DesignSpec::new(0.05, 0.05, 0.10, 1.0, 0.5, 0.9).is_err());
    assert!(DesignSpec::new(0.05, 0.05, 0.10, 1.0, 0.025, 1.0).is_err());
    assert!(DesignSpec::new(0.05, 0.05, 0.04, 1.0, 0.025, 0.9).is_err());
}

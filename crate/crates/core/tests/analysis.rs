use nifrontier::{
    analyze_arcsine, analyze_fixed_margin, backcalc_alpha_rd, backcalc_margin_rd,
    conditional_modify_margin, estimate_effect, wald_test, AlphaLookup, AlphaStrategy, Breakpoint,
    ConditionalRule, DesignSpec, EffectEstimate, Error, Method, Scale, TrialData,
};

fn design() -> DesignSpec {
    DesignSpec::new(0.05, 0.05, 0.10, 1.0, 0.025, 0.90).unwrap()
}

fn t(e0: u64, e1: u64) -> TrialData {
    TrialData::new(568, 568, e0, e1).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn example_one_estimates() {
    let ex1 = t(57, 57);
    let a = estimate_effect(&ex1, Scale::ArcsineDifference).unwrap();
    let d = estimate_effect(&ex1, Scale::RiskDifference).unwrap();
    let r = estimate_effect(&ex1, Scale::LogRiskRatio).unwrap();
    assert!(a.estimate == 0.0 && close(a.se, 0.0297, 5e-5));
    assert!(d.estimate == 0.0 && close(d.se, 0.0178, 5e-5));
    assert!(r.estimate == 0.0 && close(r.se, 0.18, 5e-3));
}

#[test]
fn swapping_arms_negates_estimates() {
    let x = TrialData::new(300, 500, 21, 64).unwrap();
    for s in [
        Scale::RiskDifference,
        Scale::LogRiskRatio,
        Scale::ArcsineDifference,
    ] {
        let a = estimate_effect(&x, s).unwrap();
        let b = estimate_effect(&x.swapped(), s).unwrap();
        assert!(close(a.estimate, -b.estimate, 1e-15));
        assert!(close(a.se, b.se, 1e-15));
    }
}

#[test]
fn degenerate_tables() {
    let zero = TrialData::new(50, 50, 0, 3).unwrap();
    assert!(matches!(
        estimate_effect(&zero, Scale::LogRiskRatio),
        Err(Error::DegenerateRatio(_))
    ));
    let none = TrialData::new(50, 50, 0, 0).unwrap();
    assert!(matches!(
        estimate_effect(&none, Scale::RiskDifference),
        Err(Error::DegenerateVariance)
    ));
    assert!(estimate_effect(&none, Scale::ArcsineDifference).is_ok());
    assert!(TrialData::new(50, 50, 51, 0).is_err());
}

#[test]
fn wald_reference_values() {
    let e = EffectEstimate {
        scale: Scale::ArcsineDifference,
        estimate: 0.0,
        se: 0.029_67,
    };
    let w = wald_test(&e, 0.096_24, 0.025).unwrap();
    assert!(close(w.z, -3.244, 5e-4) && w.p < 0.01);
    assert!(close(w.ci.0, -0.058, 5e-4) && close(w.ci.1, 0.058, 5e-4));

    // 0.05 / 0.0178 is 2.809; the worked example's -2.778 corresponds to se 0.018
    let e = EffectEstimate {
        scale: Scale::RiskDifference,
        estimate: 0.0,
        se: 0.0178,
    };
    let w = wald_test(&e, 0.05, 0.025).unwrap();
    assert!(close(w.z, -2.809, 5e-4));
    assert!(close(w.ci.1, 0.035, 5e-4));

    let w = wald_test(
        &EffectEstimate {
            scale: Scale::RiskDifference,
            estimate: 0.05,
            se: 0.02,
        },
        0.05,
        0.025,
    )
    .unwrap();
    assert_eq!((w.z, w.p), (0.0, 0.5));
}

#[test]
fn arcsine_reports() {
    let f = design().frontier().unwrap();
    let r = analyze_arcsine(&t(57, 57), &f, 0.025).unwrap();
    assert_eq!(r.method, Method::Arcsine);
    assert!(close(r.ci.1, 0.058, 5e-4) && close(r.margin_tested, 0.096, 5e-4) && r.p < 0.01);
    let r = analyze_arcsine(&t(57, 85), &f, 0.025).unwrap();
    assert!(close(r.ci.0, 0.017, 1e-3) && close(r.ci.1, 0.133, 1e-3));
    assert!(close(r.p, 0.25, 0.02) && !r.noninferior);
}

#[test]
fn backcalc_margin_reports() {
    let f = design().frontier().unwrap();
    let r = backcalc_margin_rd(&t(57, 57), &f, 0.025).unwrap();
    assert!(close(r.margin_tested, 0.058, 5e-4));
    assert!(close(r.ci.1, 0.035, 5e-4) && r.p < 0.01);
    let r = backcalc_margin_rd(&t(57, 85), &f, 0.025).unwrap();
    assert!(close(r.margin_tested, 0.063, 1e-3));
    assert!(close(r.ci.0, 0.011, 1e-3) && close(r.ci.1, 0.088, 1e-3));
}

#[test]
fn backcalc_alpha_reports() {
    let f = design().frontier().unwrap();
    let r = backcalc_alpha_rd(&t(57, 57), &f, 0.025).unwrap();
    assert!(close(r.margin_tested, 0.065, 5e-4));
    assert!(close(r.alpha_used, 0.014, 5e-4) && close(r.ci_level, 0.972, 5e-4));
    assert!(close(r.ci.1, 0.039, 5e-4));
    let r = backcalc_alpha_rd(&t(57, 85), &f, 0.025).unwrap();
    assert!(close(r.alpha_used, 0.015, 5e-4) && close(r.ci_level, 0.970, 5e-4));
    let r = backcalc_alpha_rd(&t(34, 57), &f, 0.025).unwrap();
    assert!(close(r.margin_tested, 0.054, 5e-4) && close(r.alpha_used, 0.013, 5e-4));
    assert!(close(r.ci_level, 0.974, 1e-3));
}

#[test]
fn conditional_reports() {
    let d = design();
    let rd = |a| {
        ConditionalRule::new(
            Scale::RiskDifference,
            0.0125,
            AlphaStrategy::ReducedFixed(a),
        )
        .unwrap()
    };
    let rr = ConditionalRule::new(
        Scale::LogRiskRatio,
        1.25f64.ln(),
        AlphaStrategy::Nominal(0.025),
    )
    .unwrap();

    let r = conditional_modify_margin(&t(57, 57), &d, &rd(0.01)).unwrap();
    assert!(r.margin_modified && close(r.margin_tested, 0.065, 5e-4));
    assert!(close(r.ci.1, 0.042, 1e-3) && r.p < 0.01 && r.ci_level == 0.95);

    let r = conditional_modify_margin(&t(34, 57), &d, &rd(0.01)).unwrap();
    assert!(!r.margin_modified && r.margin_tested == 0.05);
    assert!(close(r.p, 0.27, 0.01));

    let r = conditional_modify_margin(&t(57, 57), &d, &rr).unwrap();
    assert!(r.margin_modified && close(r.reported_margin(), 1.65, 5e-3));
    assert!(close(r.ci.0, 0.71, 5e-3) && close(r.ci.1, 1.42, 5e-3) && r.p < 0.01);

    let r = conditional_modify_margin(&t(57, 85), &d, &rr).unwrap();
    assert!(r.margin_modified && close(r.reported_margin(), 1.65, 5e-3));
    assert!(close(r.p, 0.27, 0.01));
}

#[test]
fn fixed_margin_reports() {
    let d = design();
    let r = analyze_fixed_margin(&t(57, 85), &d, Scale::RiskDifference, 0.025).unwrap();
    assert!(close(r.p, 0.49, 0.01) && r.margin_tested == 0.05);
    let r = analyze_fixed_margin(&t(57, 57), &d, Scale::LogRiskRatio, 0.025).unwrap();
    assert!(close(r.reported_margin(), 2.0, 1e-12) && r.p < 0.01);
}

#[test]
fn lookup_strategies() {
    let d = design();
    let table = AlphaLookup::new(vec![
        Breakpoint {
            lower: 0.0,
            alpha: 0.01,
        },
        Breakpoint {
            lower: 0.04,
            alpha: 0.015,
        },
    ])
    .unwrap();
    let rule =
        ConditionalRule::new(Scale::RiskDifference, 0.0125, AlphaStrategy::Lookup(table)).unwrap();
    assert_eq!(
        conditional_modify_margin(&t(57, 57), &d, &rule)
            .unwrap()
            .alpha_used,
        0.015
    );
    assert_eq!(
        conditional_modify_margin(&t(17, 20), &d, &rule)
            .unwrap()
            .alpha_used,
        0.01
    );

    let partial = AlphaLookup::new(vec![Breakpoint {
        lower: 0.04,
        alpha: 0.015,
    }])
    .unwrap();
    let rule = ConditionalRule::new(
        Scale::RiskDifference,
        0.0125,
        AlphaStrategy::Lookup(partial),
    )
    .unwrap();
    assert!(matches!(
        conditional_modify_margin(&t(17, 20), &d, &rule),
        Err(Error::LookupNotCovering(_))
    ));

    let json = r#"{"breakpoints":[{"lower":0.0,"alpha":0.01},{"lower":0.0,"alpha":0.02}]}"#;
    assert!(serde_json::from_str::<AlphaLookup>(json).is_err());
}

use igauss::certify::{certify, certify_default, CertifyParams, EstimateId, GridPlan, Verdict};

#[test]
fn every_estimate_certifies_in_one_dimension() {
    let params = CertifyParams::new(1);
    for id in EstimateId::ALL {
        let c = certify_default(id, &params, 7).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{id:?}: C = {}, worst = {}", c.calibrated_c, c.worst_ratio);
        assert!(c.worst_ratio <= c.calibrated_c);
        assert!(c.grid.verification.samples > c.grid.calibration.samples);
    }
}

#[test]
fn certificates_are_reproducible() {
    let params = CertifyParams::new(1);
    let a = serde_json::to_string(&certify_default(EstimateId::RieszGlobal, &params, 99).unwrap()).unwrap();
    let b = serde_json::to_string(&certify_default(EstimateId::RieszGlobal, &params, 99).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn a_shrunken_constant_is_caught() {
    // Headroom below 1 cannot cover the calibration maximum itself.
    let mut params = CertifyParams::new(1);
    params.headroom = 0.5;
    let plan = GridPlan::default_for(EstimateId::MbetaGlobal, 1, 1);
    let c = certify(EstimateId::MbetaGlobal, &plan, &params).unwrap();
    assert_eq!(c.verdict, Verdict::Fail);
}

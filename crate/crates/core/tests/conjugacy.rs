use padyn::conjugacy::*;
use padyn::dynamics::*;
use padyn::{NormValue, PAdic, PrecisionContext};

fn digit_local(ctx: &PrecisionContext, k: i32, seed: u64) -> LipschitzPerturbation {
    make_lipschitz_perturbation(ctx, NormValue::Pow(k), &PerturbationKind::DigitLocal, seed).unwrap()
}

#[test]
fn zero_perturbation_gives_identity() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    let phi = make_lipschitz_perturbation(&ctx, NormValue::Zero, &PerturbationKind::Zero, 0).unwrap();
    let g = perturb(&f, &phi);
    let h = build_conjugacy_thm1(&f, &fam, &g, 4).unwrap();
    assert!(h.closeness.is_zero());
    assert_eq!(h.certified_exp, ctx.cap());
    assert!(verify_conjugacy(&f, &g, &h).unwrap().zero_defect());
}

#[test]
fn shift_conjugacy_and_inverse() {
    let ctx = PrecisionContext::zp(3, 7).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    for seed in 0..3 {
        let phi = digit_local(&ctx, 2, seed);
        let g = perturb(&f, &phi);
        let h = build_conjugacy_thm1(&f, &fam, &g, 5).unwrap();
        let report = verify_conjugacy(&f, &g, &h).unwrap();
        assert!(report.zero_defect(), "{report:?}");
        assert!(report.injective);
        assert!(h.closeness <= NormValue::Pow(3));
        let (tfam, _) = transfer_family(&f, &fam, &phi).unwrap();
        let ht = build_inverse_conjugacy_thm1(&f, &g, &tfam, 5).unwrap();
        assert!(verify_conjugacy(&g, &f, &ht).unwrap().zero_defect());
        assert!(composition_defect(&ht, &h).is_zero());
    }
}

#[test]
fn corrupted_conjugacy_detected() {
    let ctx = PrecisionContext::zp(2, 8).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    let phi = digit_local(&ctx, 3, 11);
    let g = perturb(&f, &phi);
    let h = build_conjugacy_thm1(&f, &fam, &g, 5).unwrap();
    let cert = h.certified_exp;
    let bad = h.with_entry(5, (h.table()[5] + PAdic::constant(2, 2)).truncate(cert));
    let report = verify_conjugacy(&f, &g, &bad).unwrap();
    assert!(!report.zero_defect());
}

#[test]
fn delta_too_large_for_family() {
    let ctx = PrecisionContext::zp(2, 6).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    let phi = digit_local(&ctx, 0, 1);
    let g = perturb(&f, &phi);
    assert!(matches!(build_conjugacy_thm1(&f, &fam, &g, 4), Err(padyn::Error::DeltaTooLarge(_))));
}

#[test]
fn lemma51_doubling_example() {
    use num_rational::Ratio;
    let b = lemma51_bound(Ratio::new(1, 2), Ratio::new(1, 4));
    assert_eq!(b, Ratio::new(4, 7));
    let b = lemma51_bound(Ratio::new(1, 3), Ratio::new(1, 9));
    assert_eq!(b, Ratio::new(9, 26));

    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    let phi = digit_local(&ctx, 2, 4);
    for r in &fam.members {
        let t = transfer_right_inverse(&f, r, &phi).unwrap();
        assert!(t.right_inverse_ok && t.image_equal && t.lip_within_bound());
    }
}

#[test]
fn thm3_affine_constant_shift() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let r = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 1)).unwrap();
    let phi = make_lipschitz_perturbation(
        &ctx,
        NormValue::Pow(2),
        &PerturbationKind::Constant { c: PAdic::constant(3, 9) },
        0,
    )
    .unwrap();
    let build = build_conjugacy_thm3(&r, &phi, 8, 12).unwrap();
    let report = verify_conjugacy(&r, &build.t, &build.h).unwrap();
    assert!(report.zero_defect(), "{report:?}");
    assert!(report.injective);
    assert!(build.h.closeness <= NormValue::Pow(2));
    assert_eq!(build.fixed_points_match, Some(true));
}

#[test]
fn thm3_digit_local() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let r = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 1)).unwrap();
    for seed in 0..4 {
        let phi = digit_local(&ctx, 3, seed);
        let build = build_conjugacy_thm3(&r, &phi, 8, 12).unwrap();
        let report = verify_conjugacy(&r, &build.t, &build.h).unwrap();
        assert!(report.zero_defect(), "seed {seed}: {report:?}");
        assert!(report.injective);
        assert!(build.h.closeness <= NormValue::Pow(3));
        assert_eq!(build.fixed_points_match, Some(true));
    }
}

#[test]
fn thm3_rejects_non_bilipschitz() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let r = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 1)).unwrap();
    let phi = digit_local(&ctx, 1, 0);
    assert!(matches!(build_conjugacy_thm3(&r, &phi, 8, 12), Err(padyn::Error::DeltaTooLarge(_))));
}

#[test]
fn homogeneity_moves_points() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    let ys: Vec<PAdic> = [1, 2, 4].iter().map(|&v| ctx.int(v)).collect();
    let zs: Vec<PAdic> = [1 + 9, 2 + 18, 4 + 9].iter().map(|&v| ctx.int(v)).collect();
    let phi = homogeneity_homeomorphism(&ys, &zs, NormValue::Pow(1), &ctx).unwrap();
    assert!(phi.is_injective());
    for (y, z) in ys.iter().zip(&zs) {
        assert!(phi.apply(y).unwrap().eq_mod(z, ctx.cap()));
    }
    assert!(phi.closeness < NormValue::Pow(1));
    assert!(matches!(
        homogeneity_homeomorphism(&ys, &ys[..1].repeat(3), NormValue::Pow(1), &ctx),
        Err(padyn::Error::NotProper(_))
    ));
}

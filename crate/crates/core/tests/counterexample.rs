use padyn::counterexample::*;
use padyn::dynamics::{make_lipschitz_perturbation, PerturbationKind};
use padyn::{NormValue, PAdic, PrecisionContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn even_system(depth: usize) -> Thm2System {
    let x = build_even_subshift(3, 200).unwrap();
    Thm2System::new(build_cantor_chart(&x, depth, SplitRule::Balanced).unwrap()).unwrap()
}

fn full_system(depth: usize) -> Thm2System {
    let x = build_full_shift(3, 200).unwrap();
    Thm2System::new(build_cantor_chart(&x, depth, SplitRule::Balanced).unwrap()).unwrap()
}

#[test]
fn right_inverses_and_covering_failure() {
    let sys = even_system(4);
    let ctx = *sys.f.ctx();
    assert_eq!(ctx.cap(), 6);
    assert_eq!(sys.family.right_inverse_failure(&sys.f).unwrap(), None);
    let count = covering_count(&sys.family).unwrap();
    assert_eq!(count.image_residues, 2 * 3u64.pow(4));
    assert_eq!(count.total_residues, 3u64.pow(6));
    assert!(!count.covering);
    for x in ctx.residues().unwrap().filter(|x| x.digit(0) == Some(0)) {
        assert_eq!(sys.f.eval(&x).unwrap(), x);
    }
}

#[test]
fn nowhere_locally_constant_spot_check() {
    let sys = even_system(5);
    let ctx = *sys.f.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let x = ctx.residue(rng.gen_range(0..ctx.residue_count()));
        if x.digit(0) == Some(0) || x.digit(1) == Some(0) {
            continue;
        }
        let k = local_variation(&sys.f, &x).unwrap();
        assert!(k.is_some_and(|k| k >= 2), "{x}: {k:?}");
        checked += 1;
    }
}

#[test]
fn chart_conjugates_the_shift() {
    let sys = even_system(8);
    let x = build_even_subshift(3, 200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let mut seq = vec![];
        while seq.len() < 120 {
            let f = x.followers(&seq[seq.len().saturating_sub(40)..]).unwrap();
            let mut w = seq.clone();
            let a = f[rng.gen_range(0..f.len())];
            w.push(a);
            if x.admissible(&w[w.len().saturating_sub(60)..]) {
                seq = w;
            }
        }
        let wx = sys.chart.encode(&seq, 8).unwrap();
        let wsx = sys.chart.encode(&seq[1..], 8).unwrap();
        let s = sys.s.eval(&wx).unwrap();
        assert!(s.dist(&wsx).is_zero());
        assert!(s.prec() >= 5, "{s}");
    }
}

#[test]
fn even_shift_witness_and_full_shift_control() {
    let (delta, eps) = (NormValue::Pow(5), NormValue::Pow(2));
    let sys = even_system(8);
    let out = demonstrate_non_shadowing(&sys, delta, eps, true).unwrap();
    assert!(out.zeros % 2 == 1);
    assert!(out.oracle.best_error > eps);
    let lifted = out.lifted.unwrap();
    assert_eq!(lifted.epsilon, NormValue::Pow(4));
    assert!(!lifted.shadowed);

    let control = full_system(8);
    let c = run_splice_pipeline(&control, delta, eps, true).unwrap();
    assert!(c.shadowed && c.oracle.best_error <= eps);
    assert!(c.lifted.unwrap().shadowed);
    assert!(matches!(
        demonstrate_non_shadowing(&control, delta, eps, false),
        Err(padyn::Error::NoWitnessFound(_))
    ));
}

#[test]
fn witness_survives_smaller_delta() {
    let sys = even_system(7);
    for k in 4..=6 {
        let out = demonstrate_non_shadowing(&sys, NormValue::Pow(k), NormValue::Pow(2), false).unwrap();
        assert!(out.oracle.best_error > NormValue::Pow(2), "δ = 3^-{k}");
    }
    assert!(matches!(
        demonstrate_non_shadowing(&sys, NormValue::Pow(7), NormValue::Pow(2), false),
        Err(padyn::Error::DeltaTooSmall(_))
    ));
}

#[test]
fn conjugacy_obstruction() {
    let sys = even_system(5);
    let ctx: PrecisionContext = *sys.f.ctx();
    let kind = PerturbationKind::Indicator {
        c: PAdic::constant(3, 9),
        center: PAdic::constant(3, 0),
        radius: NormValue::Pow(1),
    };
    let phi = make_lipschitz_perturbation(&ctx, NormValue::Pow(2), &kind, 0).unwrap();
    let report = obstruction_scan(&sys.f, &phi).unwrap();
    assert_eq!(report.fixed_in_ball, 0);
    assert_eq!(report.fixed_residues.len(), 2);
    assert!(!report.fixed_set_open);
}

#[test]
fn thm2_map_needs_odd_prime_and_depth() {
    let sys = even_system(4);
    let ctx = PrecisionContext::zp(3, 8).unwrap();
    assert!(matches!(build_thm2_map(&sys.s, &ctx), Err(padyn::Error::DepthInsufficient(_))));
    let x = build_even_subshift(2, 60).unwrap();
    let chart = build_cantor_chart(&x, 4, SplitRule::Balanced).unwrap();
    assert!(matches!(Thm2System::new(chart), Err(padyn::Error::BadParams(_))));
}

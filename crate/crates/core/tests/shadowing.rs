use padyn::dynamics::*;
use padyn::shadowing::*;
use padyn::padic::pow_u64;
use padyn::{NormValue, PAdic, PrecisionContext};

/// Shadowing error of the residue `a` under the shift, computed on integers:
/// Sⁿ(a) = ⌊a/pⁿ⌋ is known modulo p^(N−n).
fn shift_error(p: u32, n: u32, a: u64, points: &[PAdic]) -> NormValue {
    let mut worst = NormValue::Zero;
    for (k, x) in points.iter().enumerate() {
        let known = n as i32 - k as i32;
        if known <= 0 {
            break;
        }
        let m = pow_u64(p, known as u32);
        let image = a / pow_u64(p, k as u32) % m;
        let target = x.index_padded(0, known).unwrap();
        let mut d = (image + m - target) % m;
        if d == 0 {
            continue;
        }
        let mut v = 0;
        while d.is_multiple_of(u64::from(p)) {
            d /= u64::from(p);
            v += 1;
        }
        worst = worst.max(NormValue::Pow(v));
    }
    worst
}

#[test]
fn solver_and_oracle_against_integer_shift() {
    let (p, n) = (2, 8);
    let ctx = PrecisionContext::zp(p, n).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    for len in 3..=6 {
        for seed in 0..8 {
            let orbit = random_pseudo_orbit(&f, NormValue::Pow(2), len, seed).unwrap();
            let best = (0..ctx.residue_count()).map(|a| shift_error(p, n, a, &orbit.points)).min().unwrap();
            let oracle = brute_force_shadow(&f, &orbit.points).unwrap();
            assert_eq!(oracle.best_error, best, "len {len} seed {seed}");
            let solved = solve_shadowing(&f, &fam, &orbit).unwrap();
            assert!(solved.bound_ok && solved.step_identity_ok && solved.orbit_check_ok);
            assert!(best <= solved.achieved_bound);
            let a = solved.start_point.index_padded(0, n as i32).unwrap();
            assert!(shift_error(p, n, a, &orbit.points) <= solved.achieved_bound);
        }
    }
}

#[test]
fn pseudo_orbits_respect_delta() {
    let ctx = PrecisionContext::zp(3, 8).unwrap();
    let f = shift_zp(ctx);
    for seed in 0..20 {
        let orbit = random_pseudo_orbit(&f, NormValue::Pow(3), 30, seed).unwrap();
        assert_eq!(orbit.points.len(), 31);
        let check = verify_pseudo_orbit(&f, &orbit.points, NormValue::Pow(3)).unwrap();
        assert!(check.ok && check.max_step <= NormValue::Pow(3));
        for w in orbit.points.windows(2) {
            assert!(f.eval(&w[0]).unwrap().dist(&w[1]) <= NormValue::Pow(3));
        }
    }
    let again = random_pseudo_orbit(&f, NormValue::Pow(3), 30, 4).unwrap();
    assert_eq!(again.points, random_pseudo_orbit(&f, NormValue::Pow(3), 30, 4).unwrap().points);
}

#[test]
fn a_true_orbit_is_shadowed_exactly() {
    let ctx = PrecisionContext::zp(3, 9).unwrap();
    let f = shift_zp(ctx);
    let fam = shift_right_inverses(&ctx).unwrap();
    let mut points = vec![ctx.int(4321)];
    for _ in 0..4 {
        let next = f.eval(points.last().unwrap()).unwrap().truncate(ctx.cap());
        points.push(next);
    }
    let orbit = PseudoOrbit::new(&f, points, NormValue::Pow(3)).unwrap();
    let solved = solve_shadowing(&f, &fam, &orbit).unwrap();
    assert!(solved.achieved_bound <= NormValue::Pow(4));
    assert!(brute_force_shadow(&f, &orbit.points).unwrap().best_error.is_zero());
}

#[test]
fn furno_map_shadowing() {
    let ctx = PrecisionContext::zp(2, 8).unwrap();
    let (f, fam) = parse_map_with_family("furno(digit_twist, k=2)", &ctx).unwrap();
    assert_eq!(fam.len(), 4);
    assert!(fam.right_inverse_failure(&f).unwrap().is_none());
    for seed in 0..10 {
        let orbit = random_pseudo_orbit(&f, NormValue::Pow(3), 20, seed).unwrap();
        let solved = solve_shadowing(&f, &fam, &orbit).unwrap();
        assert!(solved.bound_ok, "seed {seed}: {}", solved.achieved_bound);
        assert!(solved.step_identity_ok);
    }
}

#[test]
fn maps_without_a_family_are_rejected() {
    let ctx = PrecisionContext::zp(3, 6).unwrap();
    assert!(parse_map_with_family("affine(v=3, w=1)", &ctx).is_err());
}

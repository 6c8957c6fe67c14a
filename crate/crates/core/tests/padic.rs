use padyn::padic::{ball_union_radius, pow_u64};
use padyn::{NormValue, PAdic, PrecisionContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Integer oracles on ℤ/p^n, independent of the digit representation.

fn val(p: u64, mut x: u64, n: u32) -> Option<i32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p) && v < n as i32 {
        x /= p;
        v += 1;
    }
    Some(v)
}

fn residue(p: u32, n: u32, x: u64) -> PAdic {
    PAdic::from_i64(p, x as i64, n as i32)
}

#[test]
fn arithmetic_matches_modular_integers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, n) in [(2u32, 12u32), (3, 8), (5, 6), (7, 5)] {
        let m = pow_u64(p, n);
        for _ in 0..2000 {
            let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
            let (x, y) = (residue(p, n, a), residue(p, n, b));
            let n_i = n as i32;
            assert_eq!((x + y).index_padded(0, n_i), Some((a + b) % m));
            assert_eq!((x - y).index_padded(0, n_i), Some((a + m - b) % m));
            let prod = (u128::from(a) * u128::from(b) % u128::from(m)) as u64;
            assert_eq!((x * y).index_padded(0, n_i), Some(prod));
            let d = (a + m - b) % m;
            let want = val(u64::from(p), d, n).map_or(NormValue::Zero, NormValue::Pow);
            assert_eq!(x.dist(&y), want, "p={p} a={a} b={b}");
        }
    }
}

#[test]
fn product_precision_tracks_valuations() {
    // 9·(unit known mod 3^4) is known mod 3^6.
    let x = PAdic::from_i64(3, 9, 8);
    let y = PAdic::from_i64(3, 5, 4);
    let z = x * y;
    assert_eq!(z.prec(), 6);
    assert_eq!(z.index_padded(0, 6), Some(45));
    // zero to precision times anything stays zero, with precision raised by v(other)
    let w = PAdic::zero(3, 3) * PAdic::from_i64(3, 3, 10);
    assert!(w.is_zero());
    assert_eq!(w.prec(), 4);
}

#[test]
fn digits_and_text_round_trip() {
    let x = PAdic::from_digits(5, -2, &[3, 0, 4, 1]).unwrap();
    assert_eq!(x.valuation(), Some(-2));
    assert_eq!(x.prec(), 2);
    assert_eq!(x.digits(), vec![3, 0, 4, 1]);
    assert_eq!(x.digit(0), Some(4));
    let back: PAdic = x.to_text().parse().unwrap();
    assert_eq!(back, x);
    assert!(PAdic::from_digits(5, 0, &[5]).is_err());
    assert!(PAdic::from_digits(6, 0, &[1]).is_err());
    assert!(PAdic::parse("p:3;u:0;d:1,x").is_err());
}

#[test]
fn qp_window_residues_are_distinct_and_fractional() {
    let ctx = PrecisionContext::qp(2, 6, -2, 3).unwrap();
    assert_eq!(ctx.floor(), -2);
    let count = ctx.residue_count();
    let all: Vec<PAdic> = ctx.residues().unwrap().collect();
    assert_eq!(all.len() as u64, count);
    for (i, x) in all.iter().enumerate() {
        assert_eq!(ctx.index_padded(x), Some(i as u64));
    }
    let half = ctx.make(-1, &[1, 0, 0]).unwrap();
    assert_eq!(half.norm(), NormValue::Pow(-1));
    assert_eq!((half + half).norm(), NormValue::Pow(0));
}

#[test]
fn balls_partition_residues() {
    let ctx = PrecisionContext::zp(3, 5).unwrap();
    let center = ctx.int(7);
    for k in 0..=5 {
        let ball = ctx.enumerate_ball(&center, NormValue::Pow(k)).unwrap();
        assert_eq!(ball.len() as u64, pow_u64(3, (5 - k) as u32));
        assert!(ball.iter().all(|y| y.dist(&center) <= NormValue::Pow(k)));
    }
    // a ball of radius 3^-2 is a union of balls of radius 3^-2 and no coarser
    let set: Vec<bool> = (0..ctx.residue_count()).map(|i| i % 9 == 4).collect();
    assert_eq!(ball_union_radius(&ctx, &set), Some(NormValue::Pow(2)));
}

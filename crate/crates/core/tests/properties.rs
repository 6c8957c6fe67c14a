use padyn::dynamics::parse_map;
use padyn::padic::pow_u64;
use padyn::{NormValue, PAdic, PrecisionContext};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

/// A value with random valuation, digits and precision.
fn padic() -> impl Strategy<Value = PAdic> {
    prime().prop_flat_map(|p| {
        (Just(p), -3i32..4, prop::collection::vec(0..p, 1..12)).prop_map(|(p, u, d)| PAdic::from_digits(p, u, &d).unwrap())
    })
}

fn triple() -> impl Strategy<Value = (PAdic, PAdic, PAdic)> {
    prime().prop_flat_map(|p| {
        let one = move || (-3i32..4, prop::collection::vec(0..p, 1..12)).prop_map(move |(u, d)| PAdic::from_digits(p, u, &d).unwrap());
        (one(), one(), one())
    })
}

proptest! {
    #[test]
    fn ultrametric_inequality((x, y, _) in triple()) {
        let s = x + y;
        prop_assert!(s.norm() <= x.norm().max(y.norm()));
        if x.norm() != y.norm() && !x.is_zero() && !y.is_zero() {
            prop_assert_eq!(s.norm(), x.norm().max(y.norm()));
        }
    }

    #[test]
    fn norm_is_multiplicative((x, y, _) in triple()) {
        let z = x * y;
        match (x.valuation(), y.valuation()) {
            (Some(a), Some(b)) => prop_assert_eq!(z.valuation(), Some(a + b)),
            _ => prop_assert!(z.is_zero()),
        }
    }

    #[test]
    fn translation_is_an_isometry((x, y, z) in triple()) {
        let d = x.dist(&y);
        let moved = (x + z).dist(&(y + z));
        // translation can only lose precision, never separate known digits
        if (x + z).prec().min((y + z).prec()) >= x.prec().min(y.prec()) {
            prop_assert_eq!(moved, d);
        } else {
            prop_assert!(moved <= d);
        }
    }

    #[test]
    fn truncation_is_sound(x in padic(), y in padic(), cut in -2i32..8) {
        prop_assume!(x.prime() == y.prime());
        let exact = x + y;
        let coarse = x.truncate(cut) + y;
        prop_assert!(coarse.prec() <= exact.prec());
        prop_assert!(coarse.eq_mod(&exact, coarse.prec()));
    }

    #[test]
    fn text_round_trip(x in padic()) {
        let back: PAdic = x.to_text().parse().unwrap();
        prop_assert_eq!(back, x);
        prop_assert_eq!(back.prec(), x.prec());
    }

    #[test]
    fn norm_value_round_trip(k in -20i32..20) {
        let v = NormValue::Pow(k);
        prop_assert_eq!(NormValue::parse(&v.to_string()).unwrap(), v);
    }

    #[test]
    fn balls_partition_the_residues(p in prime(), n in 1u32..5, k in 0i32..5, seed in any::<u64>()) {
        prop_assume!(k as u32 <= n);
        let ctx = PrecisionContext::zp(p, n).unwrap();
        let center = ctx.residue(seed % ctx.residue_count());
        let ball = ctx.enumerate_ball(&center, NormValue::Pow(k)).unwrap();
        prop_assert_eq!(ball.len() as u64, pow_u64(p, n - k as u32));
        let inside = (0..ctx.residue_count()).filter(|&i| ctx.residue(i).dist(&center) <= NormValue::Pow(k)).count();
        prop_assert_eq!(inside, ball.len());
    }

    #[test]
    fn map_spec_round_trip(v in 1i64..4, w in 0i64..9, twist in any::<bool>()) {
        let ctx = PrecisionContext::zp(3, 5).unwrap();
        let inner = format!("affine(v={}, w={w})", 3i64.pow(v as u32));
        let spec = if twist { format!("compose(digit_twist, {inner})") } else { inner };
        let f = parse_map(&spec, &ctx).unwrap();
        let g = parse_map(&f.tag.to_string(), &ctx).unwrap();
        prop_assert_eq!(&f.tag, &g.tag);
        prop_assert!(f.sup_distance(&g).unwrap().is_zero());
    }
}

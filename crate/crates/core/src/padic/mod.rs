//! Truncated p-adic arithmetic.

mod context;
mod norm;
mod value;

pub use context::{PrecisionContext, Space, DEFAULT_BUDGET};
pub use norm::NormValue;
pub use value::{capacity, is_prime, pow_u64, PAdic};

use std::collections::HashSet;

/// Largest `ρ = p^-n0` (with `n0 <= cap - 2`) such that the residue set is a
/// union of balls of radius `ρ`, i.e. membership depends only on the digits
/// below `n0`. Indices are residue indices of `ctx`.
pub fn ball_union_radius(ctx: &PrecisionContext, set: &[bool]) -> Option<NormValue> {
    let width = ctx.width();
    if !set.iter().any(|&b| b) {
        return None;
    }
    for level in 0..=width.saturating_sub(2) {
        let modulus = pow_u64(ctx.prime, level);
        let mut seen: Vec<u8> = vec![0; modulus as usize];
        for (i, &inside) in set.iter().enumerate() {
            let slot = &mut seen[(i as u64 % modulus) as usize];
            *slot |= if inside { 1 } else { 2 };
        }
        if seen.iter().all(|&s| s != 3) {
            return Some(NormValue::Pow(ctx.floor() + level as i32));
        }
    }
    None
}

/// Distinct values among `xs` compared modulo `p^prec`.
pub fn distinct_mod(xs: &[PAdic], floor: i32, prec: i32) -> usize {
    xs.iter().filter_map(|x| x.index_padded(floor, prec)).collect::<HashSet<_>>().len()
}

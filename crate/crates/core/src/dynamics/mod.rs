//! Maps, perturbations and right-inverse families.

pub mod catalog;
pub mod family;
pub mod map;
pub mod parse;
pub mod perturbation;

pub use catalog::{
    affine, builtin_map, constant, digit_perm, digit_swap, digit_twist, example2_phi, rho_open, shift_zp, Params, CATALOG,
};
pub use family::{
    furno_compose, image_set, locally_scaling_inverses, qp_example_inverses, shift_right_inverses, RightInverseFamily,
};
pub use map::{DynamicMap, MapTag};
pub use parse::{parse_map, parse_map_with_family, parse_perturbation, parse_perturbation_seeded, parse_spec};
pub use perturbation::{make_lipschitz_perturbation, perturb, LipschitzPerturbation, PerturbationKind};

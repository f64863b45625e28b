//! Randomized property tests over the public surface.

use proptest::prelude::*;

use seqdesign::actions::{Action, Label};
use seqdesign::finfield::FieldSpec;
use seqdesign::rhospace::{rho_to_x, x_to_rho};
use seqdesign::sequencer::{dfs_sequence, is_sequencing, standardize, SearchMode};

const FIELD_ORDERS: [u64; 12] = [3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64];

fn field_and_codes() -> impl Strategy<Value = (u64, u64, u64, u64)> {
    prop::sample::select(&FIELD_ORDERS[..]).prop_flat_map(|q| {
        (Just(q), 0..q, 0..q, 0..q)
    })
}

/// A sharp action paired with a shuffled copy of its domain.
fn action_and_shuffled_domain() -> impl Strategy<Value = (Action, Vec<Label>)> {
    prop::sample::select(vec![
        ("affine", 5u64),
        ("affine", 8),
        ("affine", 9),
        ("affine", 13),
        ("pgl2", 4),
        ("pgl2", 7),
        ("pgl2", 8),
        ("cyclic", 6),
        ("cyclic", 9),
        ("alt", 6),
        ("sym", 5),
    ])
    .prop_flat_map(|(kind, q)| {
        let action = match kind {
            "affine" => Action::affine(FieldSpec::new(q).unwrap()).unwrap(),
            "pgl2" => Action::pgl2(FieldSpec::new(q).unwrap()).unwrap(),
            "cyclic" => Action::cyclic(q as usize).unwrap(),
            "alt" => Action::alt(q as usize).unwrap(),
            _ => Action::sym(q as usize).unwrap(),
        };
        let domain: Vec<Label> = (0..action.n() as Label).collect();
        (Just(action), Just(domain).prop_shuffle())
    })
}

proptest! {
    #[test]
    fn field_axioms_hold((q, a, b, c) in field_and_codes()) {
        let f = FieldSpec::new(q).unwrap();
        let (a, b, c) = (f.element(a), f.element(b), f.element(c));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(a, a), f.zero());
        if a != f.zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.inv(f.inv(a).unwrap()).unwrap(), a);
        }
        prop_assert_eq!(f.pow(a, q), a);
    }

    /// The invariant of a window is solvable back to its last entry, and
    /// windowed values of distinct tuples avoid the reference labels.
    #[test]
    fn invariant_inverts_in_the_last_argument((action, domain) in action_and_shuffled_domain()) {
        let k = action.k();
        let prefix = &domain[..k];
        for &z in &domain[k..] {
            let window: Vec<Label> = prefix.iter().copied().chain([z]).collect();
            let value = action.rho(&window);
            prop_assert!(!action.reference().contains(&value));
            prop_assert_eq!(action.solve_rho(prefix, value), z);
        }
        // extension: completing with a prefix entry lands on its reference label
        for (j, &x) in prefix.iter().enumerate() {
            let window: Vec<Label> = prefix.iter().copied().chain([x]).collect();
            prop_assert_eq!(action.rho(&window), action.reference()[j]);
        }
    }

    /// Any enumeration sequences the alternating action exactly at even
    /// degree.
    #[test]
    fn alternating_enumerations(n in prop::sample::select(&[4usize, 5, 6, 7, 8][..]),
                                seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<Label> = (0..n as Label).collect();
        order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let action = Action::alt(n).unwrap();
        let valid = is_sequencing(&action, &order).unwrap().valid;
        prop_assert_eq!(valid, n % 2 == 0);
    }

    /// Group translates of a sequencing are sequencings, standardize

    /// recovers the standard form, and the value chain round-trips.
    #[test]
    fn orbit_translates_standardize_back(
        (kind, q) in prop::sample::select(vec![("affine", 7u64), ("affine", 9), ("pgl2", 8)]),
        idx in any::<prop::sample::Index>(),
    ) {
        let action = match kind {
            "affine" => Action::affine(FieldSpec::new(q).unwrap()).unwrap(),
            _ => Action::pgl2(FieldSpec::new(q).unwrap()).unwrap(),
        };
        let base = dfs_sequence(&action, SearchMode::FindFirst).first.unwrap();
        let elements = action.elements();
        let g = &elements[idx.index(elements.len())];
        let moved = g.apply_slice(base.order());
        prop_assert!(is_sequencing(&action, &moved).unwrap().valid);
        let restandardized = standardize(&action, &moved).unwrap();
        prop_assert_eq!(restandardized.order(), base.order());
        // the invariant chain is unchanged by the translation and
        // reconstructs the standard form
        let values = x_to_rho(&action, &moved);
        let base_values = x_to_rho(&action, base.order());
        prop_assert_eq!(values.values(), base_values.values());
        let rebuilt = rho_to_x(&action, values.values()).unwrap();
        prop_assert_eq!(rebuilt.order(), base.order());
    }
}

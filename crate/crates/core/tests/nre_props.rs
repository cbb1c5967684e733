use proptest::prelude::*;

use nomre::nominal::{transpose, Name};
use nomre::nre::{
    alpha_eq, apply_perm_expr, check_wellformed, classify, free_names, parse, render, Alphabet, Diagnostic, Nre,
    NreClass,
};
use nomre::random::{random_nre, rng};

const CLASSES: [NreClass; 4] = [NreClass::B, NreClass::P, NreClass::U, NreClass::UP];

fn expr() -> impl Strategy<Value = Nre> {
    (any::<u64>(), 0usize..4, 1usize..14).prop_map(|(seed, c, size)| random_nre(&mut rng(seed), CLASSES[c], 3, size))
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(e in expr()) {
        let back = parse(&render(&e), &Alphabet::SingleChars).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn renaming_bound_names_is_alpha_equivalent(e in expr()) {
        let fresh = Name::user("q");
        for n in ["n", "m", "l"] {
            let r = apply_perm_expr(&transpose(&Name::user(n), &fresh), &e);
            prop_assert!(alpha_eq(&e, &r));
            prop_assert_eq!(classify(&r), classify(&e));
            prop_assert!(check_wellformed(&r).is_ok());
        }
    }

    #[test]
    fn generated_expressions_are_closed(e in expr()) {
        prop_assert!(free_names(&e).is_empty());
        prop_assert!(e.binder_depth() <= 3);
    }

    #[test]
    fn classes_grow_under_constructors(a in expr(), b in expr()) {
        let ca = classify(&a);
        for c in [Nre::sum(a.clone(), b.clone()), Nre::concat(a.clone(), b.clone()), Nre::star(a.clone())] {
            prop_assert!(ca.leq(classify(&c)));
        }
    }
}

#[test]
fn class_examples() {
    let p = |s: &str| parse(s, &Alphabet::SingleChars).unwrap();
    assert_eq!(classify(&p("ab<$n._$n*>")), NreClass::U);
    assert_eq!(classify(&p("<$m.(<$n.$n>$m)*>")), NreClass::P);
    assert_eq!(
        classify(&p("ab<$n.(_$n<$m.(<$l.($m+$l)*d>$m+<$l.($m+$l)*d>)*>)*>")),
        NreClass::UP
    );
    assert_eq!(classify(&p("<$n.$n<$n.$n>$n>")), NreClass::B);
}

#[test]
fn diagnostics_for_ill_formed_expressions() {
    let p = |s: &str| parse(s, &Alphabet::SingleChars).unwrap();
    let d = check_wellformed(&p("_$n")).diagnostics;
    assert!(d.iter().any(|x| matches!(x, Diagnostic::UnderlineNotLocal { .. })));
    let d = check_wellformed(&p("<$n.$n>$m")).diagnostics;
    assert!(d.iter().any(|x| matches!(x, Diagnostic::Scope { .. })));
    assert!(!alpha_eq(&p("<$n.<$m.$n>>"), &p("<$n.<$m.$m>>")));
    assert!(alpha_eq(&p("<$n.<$m.$n>>"), &p("<$m.<$n.$m>>")));
}

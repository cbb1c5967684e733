mod common;

use nomre::cda::{accept, class_of, equiv_bounded, validate};
use nomre::compiler::compile;
use nomre::langcalc::{derivation_report, language_member};
use nomre::nre::{check_wellformed, classify, NreClass};

use common::*;

#[test]
fn word_lists_hold_for_both_semantics() {
    for name in NAMED {
        let e = named(name);
        let a = compile(&e).unwrap();
        for w in words(&format!("{name}.accept")) {
            assert!(accept(&a, &w).unwrap(), "{name}: automaton rejects {w:?}");
            assert!(language_member(&e, &w).unwrap(), "{name}: calculus rejects {w:?}");
        }
        for w in words(&format!("{name}.reject")) {
            assert!(!accept(&a, &w).unwrap(), "{name}: automaton accepts {w:?}");
            assert!(!language_member(&e, &w).unwrap(), "{name}: calculus accepts {w:?}");
        }
    }
}

#[test]
fn corpus_expressions_are_well_formed() {
    for (name, e) in all_exprs() {
        assert!(check_wellformed(&e).is_ok(), "{name}");
    }
    assert_eq!(classify(&named("lses")), NreClass::U);
    assert_eq!(classify(&named("lonet")), NreClass::U);
    assert_eq!(classify(&named("lths")), NreClass::UP);
}

#[test]
fn golden_derivations() {
    for name in ["refresh", "mixed"] {
        let got = derivation_report(&named(name), 1).unwrap();
        assert_eq!(got, read(&format!("golden/{name}.derive")), "{name}");
    }
}

#[test]
fn hand_built_automata_match_their_expressions() {
    let hand = hand_built();
    assert!(hand.len() >= 10);
    for (_, a) in &hand {
        assert!(validate(a).is_valid());
        class_of(a).unwrap();
    }
    for name in ["lses", "lonet", "successive"] {
        let (_, a) = hand.iter().find(|(n, _)| n == name).unwrap();
        let b = compile(&named(name)).unwrap();
        assert_eq!(equiv_bounded(a, &b, &pool(3), 5).unwrap(), None, "{name}");
    }
}

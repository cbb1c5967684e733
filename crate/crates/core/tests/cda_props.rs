use proptest::prelude::*;

use nomre::cda::{
    accept, class_of, enumerate, equiv_bounded, from_json, step, to_dot, to_json, trim, union, validate, Cda, CdaClass,
    Configuration, Label,
};
use nomre::extractor::determinize_layers;
use nomre::nominal::{apply_perm_word, perm_from_lists, ExtantChronicle, Name};
use nomre::random::{random_cda, rng};

fn automaton() -> impl Strategy<Value = Cda> {
    (any::<u64>(), 2usize..7, 0usize..3, 3usize..14).prop_map(|(seed, s, r, t)| random_cda(&mut rng(seed), s, r, t))
}

fn pool() -> Vec<Name> {
    ["x", "y", "z"].iter().map(|s| Name::user(s)).collect()
}

fn lses() -> Cda {
    from_json(include_str!("../../../corpus/automata/lses.json")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(a in automaton()) {
        prop_assert_eq!(from_json(&to_json(&a)).unwrap(), a);
    }

    #[test]
    fn enumeration_agrees_with_acceptance(a in automaton()) {
        for w in enumerate(&a, &pool(), 3).unwrap() {
            prop_assert!(accept(&a, &w).unwrap());
        }
    }

    #[test]
    fn accepted_words_are_closed_under_permutations(a in automaton(), shuffle in Just(pool()).prop_shuffle()) {
        let pi = perm_from_lists(&pool(), &shuffle).unwrap();
        for w in enumerate(&a, &pool(), 3).unwrap() {
            prop_assert!(accept(&a, &apply_perm_word(&pi, &w)).unwrap());
        }
    }

    #[test]
    fn trimming_keeps_the_language(a in automaton()) {
        let t = trim(&a);
        prop_assert!(validate(&t).is_valid());
        prop_assert_eq!(equiv_bounded(&a, &t, &pool(), 3).unwrap(), None);
    }

    #[test]
    fn union_accepts_either(a in automaton(), b in automaton()) {
        let u = union(&a, &b);
        prop_assert!(validate(&u).is_valid());
        let lu = enumerate(&u, &pool(), 3).unwrap();
        for w in enumerate(&a, &pool(), 3).unwrap().union(&enumerate(&b, &pool(), 3).unwrap()) {
            prop_assert!(lu.contains(w));
        }
        for w in &lu {
            prop_assert!(accept(&a, w).unwrap() || accept(&b, w).unwrap());
        }
    }

    #[test]
    fn layered_determinization_keeps_the_language(a in automaton()) {
        let d = determinize_layers(&a).unwrap();
        prop_assert!(validate(&d).is_valid());
        prop_assert_eq!(equiv_bounded(&a, &d, &pool(), 3).unwrap(), None);
    }

    #[test]
    fn dot_lists_every_state(a in automaton()) {
        let dot = to_dot(&a);
        for s in &a.states {
            let node = format!("\"{}\" [label", s.id);
            prop_assert!(dot.contains(&node));
        }
        prop_assert_eq!(dot.matches("->").count(), a.transitions.len());
    }
}

#[test]
fn validation_rejects_bad_layers() {
    let mut a = Cda::new("q0", 0);
    let q1 = a.add_state("q1", 0, true);
    a.add_transition(0, Label::Star, q1);
    let r = validate(&a);
    assert!(!r.is_valid());
    assert!(r.to_string().contains("|q′| = |q| + 1"));
    let mut b = Cda::new("q0", 0);
    b.add_transition(0, Label::Reg(1), 0);
    assert!(!validate(&b).is_valid());
}

#[test]
fn lses_hand_built() {
    let a = lses();
    assert_eq!(a.states.len(), 5);
    let c = class_of(&a).unwrap();
    assert_eq!(c.class, CdaClass::Ca);
    assert!(c.deterministic);
    let w = |s: &str| nomre::nominal::parse_word(s).unwrap();
    assert!(accept(&a, &w("a b $n1 $n2 $n3")).unwrap());
    assert!(!accept(&a, &w("a b $n1 $n1")).unwrap());
    let dot = to_dot(&a);
    assert_eq!(dot.matches("subgraph").count(), 2);
}

#[test]
fn single_steps() {
    let a = lses();
    let w = nomre::nominal::parse_word("a b $x").unwrap();
    let c0 = Configuration {
        state: 0,
        pos: 0,
        extant: ExtantChronicle::empty(),
    };
    let c1 = step(&a, &c0, &w).unwrap();
    assert_eq!(c1.len(), 1);
    assert_eq!((c1[0].state, c1[0].pos), (1, 1));
    let c2 = step(&a, &c1[0], &w).unwrap();
    let c3 = step(&a, &c2[0], &w).unwrap();
    assert!(c3.iter().all(|c| c.state == 3 && c.extant.len() == 1));
}

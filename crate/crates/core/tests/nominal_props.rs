use std::collections::BTreeSet;

use proptest::prelude::*;

use nomre::nominal::{
    apply_perm_word, canonical_fresh, parse_word, perm_from_lists, transpose, word_names, Chronicle, ExtantChronicle,
    Name, Perm, Sym,
};

fn name() -> impl Strategy<Value = Name> {
    prop_oneof![
        "[a-e]".prop_map(|s| Name::user(&s)),
        (0u32..4).prop_map(Name::Fresh),
        (0u32..3).prop_map(Name::Placeholder),
    ]
}

fn distinct(len: usize) -> impl Strategy<Value = Vec<Name>> {
    proptest::collection::btree_set(name(), len).prop_map(|s| s.into_iter().collect())
}

/// Two repetition-free lists of the same length.
fn list_pair() -> impl Strategy<Value = (Vec<Name>, Vec<Name>)> {
    (0usize..5).prop_flat_map(|k| (distinct(k), distinct(k).prop_shuffle()))
}

fn perm() -> impl Strategy<Value = Perm> {
    list_pair().prop_map(|(n, m)| perm_from_lists(&n, &m).unwrap())
}

fn universe(ps: &[&Perm], extra: &[Name]) -> BTreeSet<Name> {
    let mut u: BTreeSet<Name> = extra.iter().cloned().collect();
    for p in ps {
        u.extend(p.support().cloned());
    }
    u.insert(Name::user("zz"));
    u
}

proptest! {
    #[test]
    fn lists_determine_images((n, m) in list_pair()) {
        let p = perm_from_lists(&n, &m).unwrap();
        prop_assert_eq!(p.apply_all(&n), m);
    }

    #[test]
    fn from_lists_is_a_bijection_on_the_union((n, m) in list_pair()) {
        let p = perm_from_lists(&n, &m).unwrap();
        let u: BTreeSet<Name> = n.iter().chain(m.iter()).cloned().collect();
        let img: BTreeSet<Name> = u.iter().map(|x| p.apply(x)).collect();
        prop_assert_eq!(img, u);
    }

    #[test]
    fn inverse_cancels(p in perm(), x in name()) {
        prop_assert_eq!(p.inverse().apply(&p.apply(&x)), x.clone());
        prop_assert!(p.compose(&p.inverse()).is_identity());
    }

    #[test]
    fn composition_applies_right_first(p in perm(), q in perm(), r in perm()) {
        for x in universe(&[&p, &q, &r], &[]) {
            prop_assert_eq!(p.compose(&q).apply(&x), p.apply(&q.apply(&x)));
        }
        prop_assert_eq!(p.compose(&q).compose(&r), p.compose(&q.compose(&r)));
    }

    #[test]
    fn transposition_is_an_involution(a in name(), b in name(), x in name()) {
        let t = transpose(&a, &b);
        prop_assert_eq!(t.apply(&t.apply(&x)), x);
        prop_assert_eq!(t.apply(&a), b);
    }

    #[test]
    fn canonical_fresh_avoids_and_is_least(avoid in proptest::collection::btree_set(name(), 0..8)) {
        let f = canonical_fresh(&avoid);
        prop_assert!(!avoid.contains(&f));
        let Name::Fresh(i) = f else { panic!("not a reserved name") };
        for j in 0..i {
            prop_assert!(avoid.contains(&Name::Fresh(j)));
        }
    }

    #[test]
    fn word_action_preserves_letters_and_equalities(p in perm(), toks in proptest::collection::vec(0usize..5, 0..8)) {
        let pool = ["$a", "$b", "$c", "x", "y"];
        let text: Vec<&str> = toks.iter().map(|&i| pool[i]).collect();
        let w = parse_word(&text.join(" ")).unwrap();
        let v = apply_perm_word(&p, &w);
        prop_assert_eq!(v.len(), w.len());
        for i in 0..w.len() {
            prop_assert_eq!(matches!(w[i], Sym::Letter(_)), matches!(v[i], Sym::Letter(_)));
            if matches!(w[i], Sym::Letter(_)) {
                prop_assert_eq!(&w[i], &v[i]);
            }
            for j in 0..w.len() {
                prop_assert_eq!(w[i] == w[j], v[i] == v[j]);
            }
        }
        prop_assert_eq!(word_names(&v).len(), word_names(&w).len());
    }

    #[test]
    fn extant_action_commutes_with_hcv(p in perm(), cs in distinct(3)) {
        let e = ExtantChronicle::natural(&cs).unwrap().extend(&[Name::user("h")]);
        prop_assert_eq!(e.apply_perm(&p).hcv(), p.apply_all(&e.hcv()));
        prop_assert_eq!(e.apply_perm(&p).len(), e.len());
    }
}

#[test]
fn chronicles_require_cv_in_history() {
    let (a, b) = (Name::user("a"), Name::user("b"));
    assert!(Chronicle::new(vec![a.clone()], b.clone()).is_err());
    assert_eq!(Chronicle::new(vec![a.clone(), b.clone()], b.clone()).unwrap().cv(), &b);
    assert!(ExtantChronicle::natural(&[a.clone(), a]).is_err());
}

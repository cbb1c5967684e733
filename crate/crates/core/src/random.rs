//! Seeded generators of expressions and automata for property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cda::{Cda, Label};
use crate::nominal::{Letter, Name};
use crate::nre::{check_wellformed, classify, Nre, NreClass};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const BINDERS: [&str; 3] = ["n", "m", "l"];
const LETTERS: [&str; 2] = ["a", "b"];

struct ExprGen<'a> {
    rng: &'a mut ChaCha8Rng,
    class: NreClass,
    max_depth: usize,
}

impl ExprGen<'_> {
    fn leaf(&mut self, scope: &[Name]) -> Nre {
        let underline = matches!(self.class, NreClass::U | NreClass::UP);
        let roll = self.rng.gen_range(0..10);
        match roll {
            0 => Nre::One,
            1 if self.rng.gen_bool(0.3) => Nre::Zero,
            2..=4 if !scope.is_empty() => Nre::Name(scope.choose(self.rng).unwrap().clone()),
            5 | 6 if underline && !scope.is_empty() => Nre::Under(scope.choose(self.rng).unwrap().clone()),
            _ => Nre::letter(LETTERS.choose(self.rng).unwrap()),
        }
    }

    fn expr(&mut self, scope: &mut Vec<Name>, depth: usize, budget: usize) -> Nre {
        if budget <= 1 {
            return self.leaf(scope);
        }
        let roll = self.rng.gen_range(0..10);
        match roll {
            0 | 1 => self.leaf(scope),
            2 => {
                let k = self.rng.gen_range(1..budget);
                let l = self.expr(scope, depth, k);
                let r = self.expr(scope, depth, budget - k);
                Nre::sum(l, r)
            }
            3 | 4 => {
                let k = self.rng.gen_range(1..budget);
                let l = self.expr(scope, depth, k);
                let r = self.expr(scope, depth, budget - k);
                Nre::concat(l, r)
            }
            5 => Nre::star(self.expr(scope, depth, budget - 1)),
            _ if depth < self.max_depth => {
                let bind = Name::user(BINDERS.choose(self.rng).unwrap());
                let permute = matches!(self.class, NreClass::P | NreClass::UP);
                let close = if permute && !scope.is_empty() && self.rng.gen_bool(0.5) {
                    scope.choose(self.rng).unwrap().clone()
                } else {
                    bind.clone()
                };
                scope.push(bind.clone());
                let body = self.expr(scope, depth + 1, budget - 1);
                scope.pop();
                Nre::binder(bind, body, close)
            }
            _ => self.leaf(scope),
        }
    }
}

/// A closed, well-formed expression of exactly the given class, with binder
/// depth at most `max_depth` and roughly `size` constructors. The size is
/// raised when the class cannot be reached with it.
pub fn random_nre(rng: &mut ChaCha8Rng, class: NreClass, max_depth: usize, size: usize) -> Nre {
    let mut size = size.max(1);
    for attempt in 1.. {
        if attempt % 1000 == 0 {
            size += 1;
        }
        let mut g = ExprGen {
            rng: &mut *rng,
            class,
            max_depth,
        };
        let e = g.expr(&mut Vec::new(), 0, size);
        if classify(&e) == class && check_wellformed(&e).is_ok() {
            return e;
        }
    }
    unreachable!()
}

/// A random valid automaton with at most `states` states and `max_regs`
/// registers.
pub fn random_cda(rng: &mut ChaCha8Rng, states: usize, max_regs: usize, transitions: usize) -> Cda {
    let mut a = Cda::new("q0", 0);
    for k in 1..states.max(1) {
        let regs = rng.gen_range(0..=max_regs);
        let is_final = regs == 0 && rng.gen_bool(0.4);
        a.add_state(&format!("q{k}"), regs, is_final);
    }
    if !a.states.iter().any(|s| s.is_final) {
        a.states[0].is_final = rng.gen_bool(0.5);
    }
    for _ in 0..transitions {
        let from = rng.gen_range(0..a.states.len());
        let r = a.states[from].regs;
        let label = match rng.gen_range(0..6) {
            0 => Label::Eps,
            1 => Label::Letter(Letter::new(LETTERS.choose(rng).unwrap())),
            2 if r > 0 => Label::Reg(rng.gen_range(1..=r)),
            3 if r > 0 => Label::Under(rng.gen_range(1..=r)),
            4 if r < max_regs => Label::Star,
            5 if r > 0 => Label::Close(rng.gen_range(1..=r)),
            _ => Label::Letter(Letter::new(LETTERS.choose(rng).unwrap())),
        };
        let want = (r as isize + label.delta()) as usize;
        let targets: Vec<usize> = (0..a.states.len()).filter(|&q| a.states[q].regs == want).collect();
        if let Some(&to) = targets.choose(rng) {
            a.add_transition(from, label, to);
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cda::validate;

    #[test]
    fn generated_expressions_have_the_requested_class() {
        let mut r = rng(7);
        for class in [NreClass::B, NreClass::P, NreClass::U, NreClass::UP] {
            for _ in 0..20 {
                let e = random_nre(&mut r, class, 3, 10);
                assert_eq!(classify(&e), class);
                assert!(e.binder_depth() <= 3);
                assert!(check_wellformed(&e).is_ok());
            }
        }
    }

    #[test]
    fn generated_automata_are_valid() {
        let mut r = rng(11);
        for _ in 0..50 {
            assert!(validate(&random_cda(&mut r, 6, 2, 12)).is_valid());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_nre(&mut rng(3), NreClass::UP, 3, 10);
        let b = random_nre(&mut rng(3), NreClass::UP, 3, 10);
        assert_eq!(a, b);
    }
}

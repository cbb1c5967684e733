#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use nomre::cda::{from_json, Cda};
use nomre::nominal::{parse_word, Name, Word};
use nomre::nre::{parse, Alphabet, Nre};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn read(name: &str) -> String {
    fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn expr(text: &str) -> Nre {
    parse(text.trim(), &Alphabet::SingleChars).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// The named corpus languages, each with accept and reject lists.
pub const NAMED: [&str; 7] = ["lses", "lonet", "lths", "successive", "nmn", "refresh", "mixed"];

pub fn named(name: &str) -> Nre {
    expr(&read(&format!("{name}.nre")))
}

/// Named expressions followed by the lines of `extra.nre`.
pub fn all_exprs() -> Vec<(String, Nre)> {
    let mut out: Vec<(String, Nre)> = NAMED.iter().map(|n| (n.to_string(), named(n))).collect();
    for line in read("extra.nre").lines().filter(|l| !l.trim().is_empty()) {
        out.push((line.to_string(), expr(line)));
    }
    out
}

/// Words one per line; `ε` is the empty word.
pub fn words(file: &str) -> Vec<Word> {
    read(file)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            if l.trim() == "ε" {
                vec![]
            } else {
                parse_word(l).unwrap()
            }
        })
        .collect()
}

pub fn hand_built() -> Vec<(String, Cda)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus_dir().join("automata"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, from_json(&fs::read_to_string(p).unwrap()).unwrap())
        })
        .collect()
}

pub fn pool(k: usize) -> Vec<Name> {
    ["x", "y", "z", "w", "v"][..k].iter().map(|s| Name::user(s)).collect()
}

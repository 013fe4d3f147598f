//! Agreement of the stemmer with the frozen reference vectors. Any
//! disagreement must be listed in the divergences fixture, and overall
//! agreement must stay at or above 99.9%.

use std::collections::HashMap;
use std::path::Path;

use tweetsift::pipeline::stem_token;

fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(path).expect("fixture readable")
}

fn parse_pairs(contents: &str) -> Vec<(String, String)> {
    contents
        .lines()
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(|line| {
            let (word, stem) = line.split_once('\t').expect("word<TAB>stem");
            (word.to_string(), stem.to_string())
        })
        .collect()
}

#[test]
fn agreement_with_reference_vectors_is_at_least_99_9_percent() {
    let pairs = parse_pairs(&fixture("porter_pairs.tsv"));
    assert!(pairs.len() > 23_000, "fixture should hold ~23k pairs, got {}", pairs.len());

    let documented: HashMap<String, String> = fixture("porter_divergences.tsv")
        .lines()
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(|line| {
            let mut cells = line.split('\t');
            let word = cells.next().expect("word").to_string();
            let ours = cells.next().expect("our_stem").to_string();
            (word, ours)
        })
        .collect();

    let mut mismatches = Vec::new();
    for (word, expected) in &pairs {
        let ours = stem_token(word);
        if &ours != expected {
            mismatches.push((word.clone(), ours, expected.clone()));
        }
    }

    let agreement = (pairs.len() - mismatches.len()) as f64 / pairs.len() as f64;
    assert!(
        agreement >= 0.999,
        "agreement {:.4}% below 99.9%; first mismatches: {:?}",
        agreement * 100.0,
        &mismatches[..mismatches.len().min(10)]
    );
    for (word, ours, expected) in &mismatches {
        assert_eq!(
            documented.get(word),
            Some(ours),
            "undocumented divergence: {word:?} ours={ours:?} reference={expected:?}"
        );
    }
}

#[test]
fn stated_examples() {
    assert_eq!(stem_token("waiting"), "wait");
    assert_eq!(stem_token("waited"), "wait");
    assert_eq!(stem_token("cases"), "case");
}

//! Equivalence of the sparse TF-IDF path with an independent dense
//! brute-force oracle on random corpora, plus the structural properties
//! of vocabularies and sparse vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tweetsift::features::{
    build_vocabulary, count_vector, fit_tfidf, SparseVector, Vocabulary,
};
use tweetsift::pipeline::TokenSequence;

/// Dense oracle: enumerate n-grams by hand, count, weight, normalize.
/// Shares no code with the sparse implementation.
fn dense_oracle(
    corpus: &[Vec<String>],
    doc: &[String],
    nmin: usize,
    nmax: usize,
    min_df: u32,
) -> (Vec<String>, Vec<f64>) {
    let grams_of = |tokens: &[String]| -> Vec<String> {
        let mut grams = Vec::new();
        for n in nmin..=nmax {
            for start in 0..tokens.len().saturating_sub(n - 1) {
                grams.push(tokens[start..start + n].join(" "));
            }
        }
        grams
    };

    let mut df: std::collections::BTreeMap<String, u32> = std::collections::BTreeMap::new();
    for tokens in corpus {
        let mut grams = grams_of(tokens);
        grams.sort();
        grams.dedup();
        for gram in grams {
            *df.entry(gram).or_insert(0) += 1;
        }
    }
    let terms: Vec<String> =
        df.iter().filter(|&(_, &count)| count >= min_df).map(|(term, _)| term.clone()).collect();

    let n = corpus.len() as f64;
    let mut dense = vec![0.0f64; terms.len()];
    let doc_grams = grams_of(doc);
    for (i, term) in terms.iter().enumerate() {
        let count = doc_grams.iter().filter(|g| *g == term).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df[term] as f64)).ln() + 1.0;
        dense[i] = count * idf;
    }
    let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut dense {
            *v /= norm;
        }
    }
    (terms, dense)
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let alphabet = ["a", "b", "c", "d", "e", "f"];
    let docs = rng.random_range(1..=10);
    (0..docs)
        .map(|_| {
            let len = rng.random_range(0..=8);
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())].to_string()).collect()
        })
        .collect()
}

#[test]
fn sparse_transform_matches_dense_oracle_on_100_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let corpus = random_corpus(&mut rng);
        let nmin = rng.random_range(1..=2);
        let nmax = rng.random_range(nmin..=3);
        let min_df = rng.random_range(1..=2);

        let sequences: Vec<TokenSequence> =
            corpus.iter().map(|t| TokenSequence::new(t.clone())).collect();
        let model = fit_tfidf(&sequences, nmin, nmax, min_df).unwrap();

        for (d, doc) in corpus.iter().enumerate() {
            let sparse = model.transform(&sequences[d]);
            let (terms, dense) = dense_oracle(&corpus, doc, nmin, nmax, min_df);
            assert_eq!(model.vocab().terms(), &terms[..], "case {case}: vocabulary differs");
            let sparse_dense = sparse.to_dense();
            assert_eq!(sparse_dense.len(), dense.len());
            for (i, (s, o)) in sparse_dense.iter().zip(&dense).enumerate() {
                assert!(
                    (s - o).abs() < 1e-12,
                    "case {case} doc {d} term {i} ({}): sparse {s} vs oracle {o}",
                    terms[i]
                );
            }
        }
    }
}

#[test]
fn vocabulary_fitting_is_deterministic() {
    let corpus: Vec<TokenSequence> = vec![
        TokenSequence::from(vec!["b", "a", "c", "a"]),
        TokenSequence::from(vec!["c", "b", "d"]),
        TokenSequence::from(vec!["a", "d"]),
    ];
    let first = build_vocabulary(&corpus, 1, 3, 1).unwrap();
    for _ in 0..5 {
        let again = build_vocabulary(&corpus, 1, 3, 1).unwrap();
        assert_eq!(again, first);
    }
}

#[test]
fn tfidf_and_count_nonzero_sets_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let corpus = random_corpus(&mut rng);
        if corpus.is_empty() {
            continue;
        }
        let sequences: Vec<TokenSequence> =
            corpus.iter().map(|t| TokenSequence::new(t.clone())).collect();
        let model = fit_tfidf(&sequences, 1, 2, 1).unwrap();
        for seq in &sequences {
            let counts = count_vector(seq, model.vocab());
            let weighted = model.transform(seq);
            let count_indices: Vec<usize> = counts.entries().iter().map(|&(i, _)| i).collect();
            let tfidf_indices: Vec<usize> = weighted.entries().iter().map(|&(i, _)| i).collect();
            assert_eq!(count_indices, tfidf_indices);
        }
    }
}

#[test]
fn sparse_dot_products_match_dense_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let dim = rng.random_range(1..=30);
        let mut make = |rng: &mut ChaCha8Rng| {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for i in 0..dim {
                if rng.random_range(0..3) == 0 {
                    entries.push((i, rng.random_range(-100..=100) as f64 / 8.0));
                }
            }
            SparseVector::new(dim, entries)
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        let dense_dot: f64 =
            a.to_dense().iter().zip(b.to_dense().iter()).map(|(x, y)| x * y).sum();
        assert!((a.dot(&b) - dense_dot).abs() < 1e-12);
        assert_eq!(a.dot(&b), b.dot(&a));
    }
}

#[test]
fn vocabulary_dump_is_sorted_by_index() {
    let corpus = vec![
        TokenSequence::from(vec!["gamma", "alpha"]),
        TokenSequence::from(vec!["beta", "alpha"]),
    ];
    let vocab: Vocabulary = build_vocabulary(&corpus, 1, 1, 1).unwrap();
    let mut dump = Vec::new();
    vocab.write_dump(&mut dump).unwrap();
    let dump = String::from_utf8(dump).unwrap();
    assert_eq!(dump, "0\talpha\t2\n1\tbeta\t1\n2\tgamma\t1\n");
}

use dwe::corpus::{ParsedSentence, Token};
use rand::Rng;

/// Dense `rows x cols` table with roughly `density` of the cells set to a
/// positive value, returned row-major.
pub fn sparse_table<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(density) { rng.gen_range(0.1..5.0) } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn triplets(table: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    table
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(move |(c, &v)| (r, c, v))
        })
        .collect()
}

const WORDS: [&str; 12] = [
    "dog", "cat", "chase", "see", "big", "red", "house", "the", "of", "run", "fast", "tree",
];
const RELATIONS: [&str; 10] = [
    "nsubj", "obj", "iobj", "amod", "det", "obl", "advmod", "conj", "ccomp", "xcomp",
];

/// Random labeled tree of `n` tokens: token `i > 1` attaches to a random
/// earlier token, then positions are shuffled.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> ParsedSentence {
    let mut heads = vec![0usize; n];
    for (i, h) in heads.iter_mut().enumerate().skip(1) {
        *h = rng.gen_range(0..i) + 1;
    }
    // Random relabeling of positions keeps the tree shape but mixes order.
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut tokens: Vec<Token> = Vec::with_capacity(n);
    let mut slots: Vec<Option<Token>> = vec![None; n];
    for node in 0..n {
        let index = perm[node] + 1;
        let head = if node == 0 { 0 } else { perm[heads[node] - 1] + 1 };
        let rel = if node == 0 { "root" } else { RELATIONS[rng.gen_range(0..RELATIONS.len())] };
        let word = WORDS[rng.gen_range(0..WORDS.len())];
        slots[index - 1] = Some(Token::new(index, word, "X", head, rel));
    }
    tokens.extend(slots.into_iter().map(Option::unwrap));
    ParsedSentence::new("rand", tokens)
}

pub fn vocabulary() -> dwe::corpus::Vocabulary {
    let counts: dwe::corpus::TokenCounts = WORDS.iter().map(|w| (*w, 5u64)).collect();
    dwe::corpus::build_vocab(&counts, 100, 1, &dwe::corpus::Stopwords::english()).unwrap()
}

/// Random tree whose token `i` is the word `w{i}`, so every (target,
/// context) pair of a sentence comes from one position pair.
pub fn unique_tree<R: Rng>(rng: &mut R, n: usize) -> ParsedSentence {
    let mut s = random_tree(rng, n);
    for t in &mut s.tokens {
        t.surface = format!("w{}", t.index);
    }
    s
}

pub fn unique_vocabulary(n: usize) -> dwe::corpus::Vocabulary {
    let counts: dwe::corpus::TokenCounts = (1..=n).map(|i| (format!("w{i}"), 5u64)).collect();
    dwe::corpus::build_vocab(&counts, n, 1, &dwe::corpus::Stopwords::english()).unwrap()
}

pub fn vocabulary_of(words: &[&str]) -> dwe::corpus::Vocabulary {
    let counts: dwe::corpus::TokenCounts = words.iter().map(|w| (*w, 1u64)).collect();
    dwe::corpus::build_vocab(&counts, words.len(), 1, &dwe::corpus::Stopwords::english()).unwrap()
}

//! Seeded generator of dependency-parsed, labeled topic corpora.
//!
//! Stands in for a parsed news-classification corpus when none is available.
//! Documents are short (a headline-like clause plus two or three sentences)
//! and carry topic signal through semantic clusters of nouns, verbs and
//! adjectives. Heads select their dependents from their own cluster more
//! often than chance (verbs pick objects, nouns pick modifiers), so syntactic
//! neighbors are semantically tied while linear neighbors may cross phrases.
//! Class signal is diluted by shared general vocabulary, off-topic clusters
//! and generic modifiers.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_conllu, write_labels, Labels, ParsedSentence, Stopwords, Token};
use crate::error::Result;
use crate::pipeline::Paths;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub docs_per_class: usize,
    /// Topic clusters owned by each class.
    pub clusters_per_class: usize,
    /// Clusters shared by all classes.
    pub general_clusters: usize,
    pub nouns_per_cluster: usize,
    pub verbs_per_cluster: usize,
    pub adjectives_per_cluster: usize,
    /// Probability that a document topic is drawn from its own class.
    pub purity: f64,
    /// Probability that a dependent follows its head's cluster.
    pub agreement: f64,
    /// Fraction of each class held out for testing.
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Sized like a 10K-document, 4-class news subset.
    fn default() -> Self {
        SyntheticSpec {
            n_classes: 4,
            docs_per_class: 2500,
            clusters_per_class: 8,
            general_clusters: 6,
            nouns_per_cluster: 40,
            verbs_per_cluster: 16,
            adjectives_per_cluster: 16,
            purity: 0.9,
            agreement: 0.6,
            test_fraction: 0.2,
            seed: 20_240_901,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub sentences: Vec<ParsedSentence>,
    pub labels: Labels,
    /// Document ids held out for testing.
    pub test_docs: Vec<String>,
}

impl SyntheticCorpus {
    pub fn is_test(&self, doc_id: &str) -> bool {
        self.test_docs.binary_search_by(|d| d.as_str().cmp(doc_id)).is_ok()
    }

    /// Writes `train.conllu`, `train.labels`, `test.conllu` and `test.labels`
    /// into `dir`; the returned paths use `dir/work` as workdir.
    pub fn write_split(&self, dir: &Path) -> Result<Paths> {
        fs::create_dir_all(dir)?;
        let (test, train): (Vec<ParsedSentence>, Vec<ParsedSentence>) =
            self.sentences.iter().cloned().partition(|s| self.is_test(&s.doc_id));
        let paths = Paths {
            train_corpus: dir.join("train.conllu"),
            train_labels: dir.join("train.labels"),
            test_corpus: dir.join("test.conllu"),
            test_labels: dir.join("test.labels"),
            stopwords: None,
            workdir: dir.join("work"),
        };
        for (sentences, corpus, labels_path) in [
            (&train, &paths.train_corpus, &paths.train_labels),
            (&test, &paths.test_corpus, &paths.test_labels),
        ] {
            write_conllu(BufWriter::new(fs::File::create(corpus)?), sentences)?;
            let mut labels = Labels::default();
            for s in sentences {
                if let Some(c) = self.labels.get(&s.doc_id) {
                    labels.insert(s.doc_id.clone(), c);
                }
            }
            write_labels(BufWriter::new(fs::File::create(labels_path)?), &labels)?;
        }
        Ok(paths)
    }
}

struct Cluster {
    nouns: Vec<String>,
    verbs: Vec<String>,
    adjectives: Vec<String>,
}

struct Lexicon {
    /// `clusters[class * clusters_per_class + k]` then general clusters.
    clusters: Vec<Cluster>,
    n_topic: usize,
    generic_adjectives: Vec<String>,
    adverbs: Vec<String>,
    places: Vec<String>,
    reporting: Vec<String>,
}

const ONSETS: [&str; 18] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "gl",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 5] = ["", "", "n", "r", "s"];

fn fresh_word(rng: &mut ChaCha8Rng, used: &mut std::collections::HashSet<String>, stop: &Stopwords) -> String {
    loop {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        if !stop.contains(&w) && used.insert(w.clone()) {
            return w;
        }
    }
}

fn words(n: usize, rng: &mut ChaCha8Rng, used: &mut std::collections::HashSet<String>, stop: &Stopwords) -> Vec<String> {
    (0..n).map(|_| fresh_word(rng, used, stop)).collect()
}

/// Zipf-like rank sampling: P(rank r) proportional to 1 / (r + 1).
fn zipf<'a, R: Rng>(rng: &mut R, items: &'a [String]) -> &'a str {
    let h: f64 = (1..=items.len()).map(|r| 1.0 / r as f64).sum();
    let mut u = rng.gen::<f64>() * h;
    for (r, item) in items.iter().enumerate() {
        u -= 1.0 / (r + 1) as f64;
        if u <= 0.0 {
            return item;
        }
    }
    items.last().unwrap()
}

/// A node of the tree under construction; linearized in order.
struct Node {
    word: String,
    upos: &'static str,
    deprel: &'static str,
    left: Vec<Node>,
    right: Vec<Node>,
}

impl Node {
    fn new(word: impl Into<String>, upos: &'static str, deprel: &'static str) -> Self {
        Node {
            word: word.into(),
            upos,
            deprel,
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    fn linearize(self, head: usize, out: &mut Vec<Token>, next: &mut usize) {
        // The head's index is known up front from the size of its left part.
        let Node { word, upos, deprel, left, right } = self;
        let my_index = *next + left.iter().map(Node::size).sum::<usize>();
        for child in left {
            child.linearize(my_index, out, next);
        }
        out.push(Token::new(my_index, &word, upos, head, deprel));
        *next = my_index + 1;
        for child in right {
            child.linearize(my_index, out, next);
        }
    }

    fn size(&self) -> usize {
        1 + self.left.iter().map(Node::size).sum::<usize>() + self.right.iter().map(Node::size).sum::<usize>()
    }
}

struct Generator<'a> {
    spec: &'a SyntheticSpec,
    lex: Lexicon,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn general_cluster(&mut self) -> usize {
        self.lex.n_topic + self.rng.gen_range(0..self.spec.general_clusters)
    }

    fn doc_topics(&mut self, class: usize) -> Vec<usize> {
        let k = self.spec.clusters_per_class;
        (0..2)
            .map(|_| {
                let owner = if self.rng.gen_bool(self.spec.purity) {
                    class
                } else {
                    self.rng.gen_range(0..self.spec.n_classes)
                };
                owner * k + self.rng.gen_range(0..k)
            })
            .collect()
    }

    /// Cluster of a dependent: the head's cluster with `agreement`, else a
    /// document topic or a general cluster.
    fn follow(&mut self, head: usize, topics: &[usize]) -> usize {
        if self.rng.gen_bool(self.spec.agreement) {
            head
        } else if self.rng.gen_bool(0.5) {
            *topics.choose(&mut self.rng).unwrap()
        } else {
            self.general_cluster()
        }
    }

    fn noun(&mut self, cluster: usize) -> String {
        zipf(&mut self.rng, &self.lex.clusters[cluster].nouns).to_string()
    }

    fn verb(&mut self, cluster: usize) -> String {
        zipf(&mut self.rng, &self.lex.clusters[cluster].verbs).to_string()
    }

    fn pick(&mut self, list: fn(&Lexicon) -> &Vec<String>) -> String {
        zipf(&mut self.rng, list(&self.lex)).to_string()
    }

    /// Noun phrase headed by a noun of `cluster`.
    fn noun_phrase(&mut self, cluster: usize, deprel: &'static str, topics: &[usize], depth: usize) -> Node {
        let mut np = Node::new(self.noun(cluster), "NOUN", deprel);
        if self.rng.gen_bool(0.7) {
            let det = if self.rng.gen_bool(0.6) { "the" } else { "a" };
            np.left.push(Node::new(det, "DET", "det"));
        }
        let n_adj = [0, 0, 1, 1, 1, 2].choose(&mut self.rng).copied().unwrap();
        for _ in 0..n_adj {
            let adj = if self.rng.gen_bool(self.spec.agreement * 0.8) {
                zipf(&mut self.rng, &self.lex.clusters[cluster].adjectives).to_string()
            } else {
                self.pick(|l| &l.generic_adjectives)
            };
            np.left.push(Node::new(adj, "ADJ", "amod"));
        }
        if depth < 2 && self.rng.gen_bool(0.35) {
            let c = self.follow(cluster, topics);
            let mut nmod = self.noun_phrase(c, "nmod", topics, depth + 1);
            nmod.left.insert(0, Node::new("of", "ADP", "case"));
            np.right.push(nmod);
        }
        if depth == 0 && self.rng.gen_bool(0.15) {
            let c = self.follow(cluster, topics);
            let mut conj = Node::new(self.noun(c), "NOUN", "conj");
            conj.left.push(Node::new("and", "CCONJ", "cc"));
            np.right.push(conj);
        }
        np
    }

    fn clause(&mut self, topics: &[usize], deprel: &'static str, depth: usize) -> Node {
        let cluster = if self.rng.gen_bool(0.75) {
            *topics.choose(&mut self.rng).unwrap()
        } else {
            self.general_cluster()
        };
        let mut verb = Node::new(self.verb(cluster), "VERB", deprel);
        let subj_c = self.follow(cluster, topics);
        verb.left.push(self.noun_phrase(subj_c, "nsubj", topics, 0));
        if self.rng.gen_bool(0.2) {
            verb.left.push(Node::new("will", "AUX", "aux"));
        }
        if self.rng.gen_bool(0.85) {
            let obj_c = self.follow(cluster, topics);
            verb.right.push(self.noun_phrase(obj_c, "obj", topics, 0));
        }
        if self.rng.gen_bool(0.5) {
            let place = self.pick(|l| &l.places);
            let mut obl = Node::new(place, "NOUN", "obl");
            let case = ["in", "on", "after", "at"].choose(&mut self.rng).copied().unwrap();
            obl.left.push(Node::new(case, "ADP", "case"));
            if self.rng.gen_bool(0.5) {
                obl.left.push(Node::new("the", "DET", "det"));
            }
            verb.right.push(obl);
        }
        if self.rng.gen_bool(0.3) {
            let adv = self.pick(|l| &l.adverbs);
            verb.right.push(Node::new(adv, "ADV", "advmod"));
        }
        if depth == 0 && self.rng.gen_bool(0.1) {
            let mut xcomp = Node::new(self.verb(cluster), "VERB", "xcomp");
            xcomp.left.push(Node::new("to", "PART", "mark"));
            let c = self.follow(cluster, topics);
            xcomp.right.push(self.noun_phrase(c, "obj", topics, 1));
            verb.right.push(xcomp);
        }
        verb
    }

    fn sentence(&mut self, topics: &[usize]) -> Node {
        let mut root = if self.rng.gen_bool(0.25) {
            // "<subject> said that <clause>"
            let mut say = Node::new(self.pick(|l| &l.reporting), "VERB", "root");
            let c = *topics.choose(&mut self.rng).unwrap();
            say.left.push(self.noun_phrase(c, "nsubj", topics, 1));
            let mut comp = self.clause(topics, "ccomp", 1);
            comp.left.insert(0, Node::new("that", "SCONJ", "mark"));
            say.right.push(comp);
            say
        } else {
            self.clause(topics, "root", 0)
        };
        root.right.push(Node::new(".", "PUNCT", "punct"));
        root
    }

    fn headline(&mut self, topics: &[usize]) -> Node {
        let c = topics[0];
        let mut verb = Node::new(self.verb(c), "VERB", "root");
        verb.left.push(Node::new(self.noun(c), "NOUN", "nsubj"));
        let c2 = self.follow(c, topics);
        verb.right.push(Node::new(self.noun(c2), "NOUN", "obj"));
        verb
    }
}

fn to_sentence(doc_id: &str, root: Node) -> ParsedSentence {
    let mut tokens = Vec::new();
    let mut next = 1;
    root.linearize(0, &mut tokens, &mut next);
    debug_assert!(tokens.iter().enumerate().all(|(i, t)| t.index == i + 1));
    ParsedSentence::new(doc_id, tokens)
}

impl SyntheticSpec {
    pub fn generate(&self) -> SyntheticCorpus {
        let stop = Stopwords::english();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut used = std::collections::HashSet::new();
        let n_topic = self.n_classes * self.clusters_per_class;
        let clusters = (0..n_topic + self.general_clusters)
            .map(|_| Cluster {
                nouns: words(self.nouns_per_cluster, &mut rng, &mut used, &stop),
                verbs: words(self.verbs_per_cluster, &mut rng, &mut used, &stop),
                adjectives: words(self.adjectives_per_cluster, &mut rng, &mut used, &stop),
            })
            .collect();
        let lex = Lexicon {
            clusters,
            n_topic,
            generic_adjectives: words(30, &mut rng, &mut used, &stop),
            adverbs: words(20, &mut rng, &mut used, &stop),
            places: words(40, &mut rng, &mut used, &stop),
            reporting: words(6, &mut rng, &mut used, &stop),
        };
        let mut g = Generator { spec: self, lex, rng };

        let mut sentences = Vec::new();
        let mut labels = Labels::default();
        let mut test_docs = Vec::new();
        let n_test = (self.docs_per_class as f64 * self.test_fraction).round() as usize;
        for i in 0..self.docs_per_class {
            for class in 0..self.n_classes {
                let doc_id = format!("d{:06}", i * self.n_classes + class);
                let topics = g.doc_topics(class);
                let headline = g.headline(&topics);
                sentences.push(to_sentence(&doc_id, headline));
                for _ in 0..g.rng.gen_range(2..=3) {
                    let s = g.sentence(&topics);
                    sentences.push(to_sentence(&doc_id, s));
                }
                labels.insert(doc_id.clone(), class);
                if i >= self.docs_per_class - n_test {
                    test_docs.push(doc_id);
                }
            }
        }
        test_docs.sort();
        SyntheticCorpus {
            sentences,
            labels,
            test_docs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_tree;

    fn tiny() -> SyntheticSpec {
        SyntheticSpec {
            docs_per_class: 20,
            ..Default::default()
        }
    }

    #[test]
    fn trees_are_valid_and_projective_ids() {
        let c = tiny().generate();
        assert_eq!(c.labels.len(), 80);
        assert_eq!(c.test_docs.len(), 16);
        for s in &c.sentences {
            assert_eq!(validate_tree(s), Ok(()), "{s:?}");
        }
    }

    #[test]
    fn deterministic() {
        let a = tiny().generate();
        let b = tiny().generate();
        assert_eq!(a.sentences, b.sentences);
    }
}

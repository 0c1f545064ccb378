//! Parsed, labeled corpora: CoNLL-U ingestion, tree validation, labels and
//! vocabulary construction.

mod conllu;
mod labels;
mod tree;
mod vocab;

pub use conllu::{parse_conllu, write_conllu, IngestReport};
pub use labels::{assemble_documents, read_labels, write_labels, Labels};
pub use tree::{validate_tree, TreeDefect};
pub use vocab::{build_vocab, is_punctuation, Stopwords, TokenCounts, Vocabulary};

/// One word of a dependency-parsed sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    /// Lowercased word form.
    pub surface: String,
    pub upos: String,
    /// Index of the head token, 0 for the root.
    pub head: usize,
    /// Base relation label, subtype stripped.
    pub deprel: String,
}

impl Token {
    pub fn new(index: usize, surface: &str, upos: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            surface: surface.to_lowercase(),
            upos: upos.to_string(),
            head,
            deprel: base_relation(deprel).to_string(),
        }
    }
}

/// `nsubj:pass` -> `nsubj`.
pub fn base_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParsedSentence {
    pub doc_id: String,
    pub tokens: Vec<Token>,
}

impl ParsedSentence {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        ParsedSentence {
            doc_id: doc_id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at 1-based `index`.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// Undirected adjacency lists over 0-based token positions.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.tokens.len()];
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.head > 0 && tok.head <= self.tokens.len() {
                adj[pos].push(tok.head - 1);
                adj[tok.head - 1].push(pos);
            }
        }
        adj
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDocument {
    pub doc_id: String,
    pub class_id: usize,
    pub sentences: Vec<ParsedSentence>,
}

impl LabeledDocument {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }
}

/// Hand corpus used across tests and the CLI smoke run: "dogs chase cats".
pub fn dogs_chase_cats(doc_id: &str) -> ParsedSentence {
    ParsedSentence::new(
        doc_id,
        vec![
            Token::new(1, "dogs", "NOUN", 2, "nsubj"),
            Token::new(2, "chase", "VERB", 0, "root"),
            Token::new(3, "cats", "NOUN", 2, "obj"),
        ],
    )
}

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::tree::{validate_tree, TreeDefect};
use super::{ParsedSentence, Token};
use crate::error::{Error, Result};

/// Counts gathered while reading a CoNLL-U stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub sentences_read: usize,
    pub sentences_accepted: usize,
    pub multiword_ranges_skipped: usize,
    pub empty_nodes_skipped: usize,
    /// Dropped sentences by defect.
    pub invalid: BTreeMap<String, usize>,
}

impl IngestReport {
    pub fn invalid_total(&self) -> usize {
        self.invalid.values().sum()
    }

    fn drop_sentence(&mut self, defect: TreeDefect) {
        *self.invalid.entry(defect.to_string()).or_default() += 1;
    }
}

struct Block {
    doc_id: String,
    tokens: Vec<Token>,
}

/// Reads CoNLL-U sentences. Sentences that are not well-formed trees are
/// dropped and counted in the report; malformed records are errors.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<(Vec<ParsedSentence>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut sentences = Vec::new();
    let mut doc_id = String::new();
    let mut block: Option<Block> = None;

    let mut finish = |block: Option<Block>, report: &mut IngestReport| {
        if let Some(b) = block {
            if b.tokens.is_empty() {
                return;
            }
            report.sentences_read += 1;
            let s = ParsedSentence::new(b.doc_id, b.tokens);
            match validate_tree(&s) {
                Ok(()) => {
                    report.sentences_accepted += 1;
                    sentences.push(s);
                }
                Err(defect) => report.drop_sentence(defect),
            }
        }
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            finish(block.take(), &mut report);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("newdoc id") {
                doc_id = id.trim_start_matches([' ', '=']).trim().to_string();
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Record {
                line: lineno,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') {
            report.multiword_ranges_skipped += 1;
            continue;
        }
        if cols[0].contains('.') {
            report.empty_nodes_skipped += 1;
            continue;
        }
        let index = parse_index(cols[0], "id", lineno)?;
        let head = parse_index(cols[6], "head", lineno)?;
        if cols[7].is_empty() || cols[7] == "_" {
            return Err(Error::Record {
                line: lineno,
                message: "missing dependency relation".into(),
            });
        }
        let b = block.get_or_insert_with(|| Block {
            doc_id: doc_id.clone(),
            tokens: Vec::new(),
        });
        b.tokens.push(Token::new(index, cols[1], cols[3], head, cols[7]));
    }
    finish(block.take(), &mut report);
    Ok((sentences, report))
}

fn parse_index(field: &str, what: &str, line: usize) -> Result<usize> {
    field.parse().map_err(|_| Error::Record {
        line,
        message: format!("non-integer {what} `{field}`"),
    })
}

/// Writes sentences as CoNLL-U, emitting a `newdoc` comment whenever the
/// document id changes. Columns not modeled by [`Token`] are written as `_`.
pub fn write_conllu<W: Write>(mut out: W, sentences: &[ParsedSentence]) -> Result<()> {
    let mut current: Option<&str> = None;
    for s in sentences {
        if current != Some(s.doc_id.as_str()) {
            writeln!(out, "# newdoc id = {}", s.doc_id)?;
            current = Some(s.doc_id.as_str());
        }
        for t in &s.tokens {
            writeln!(
                out,
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index, t.surface, t.upos, t.head, t.deprel
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOGS: &str = "1\tdogs\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
                        2\tchase\t_\tVERB\t_\t_\t0\troot\t_\t_\n\
                        3\tcats\t_\tNOUN\t_\t_\t2\tobj\t_\t_\n";

    #[test]
    fn one_block() {
        let (s, report) = parse_conllu(DOGS.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 3);
        let root: Vec<_> = s[0].tokens.iter().filter(|t| t.head == 0).collect();
        assert_eq!(root.len(), 1);
        assert_eq!(root[0].index, 2);
        assert_eq!(report.sentences_accepted, 1);
    }

    #[test]
    fn empty_stream() {
        let (s, report) = parse_conllu("".as_bytes()).unwrap();
        assert!(s.is_empty());
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn self_loop_is_dropped() {
        let text = "1\tdogs\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
                    2\tchase\t_\tVERB\t_\t_\t2\troot\t_\t_\n\
                    3\tcats\t_\tNOUN\t_\t_\t2\tobj\t_\t_\n\n";
        let (s, report) = parse_conllu(format!("{text}{DOGS}").as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(report.invalid_total(), 1);
        assert_eq!(report.invalid["self loop"], 1);
    }

    #[test]
    fn lowercases_strips_subtypes_and_skips_ranges() {
        let text = "# newdoc id = doc7\n# sent_id = 1\n\
                    1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n\
                    2\tCat\tcat\tNOUN\t_\t_\t4\tnsubj:pass\t_\t_\n\
                    3-4\twasn't\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    3\twas\tbe\tAUX\t_\t_\t4\taux:pass\t_\t_\n\
                    4\tSeen\tsee\tVERB\t_\t_\t0\troot\t_\t_\n\
                    4.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n";
        let (s, report) = parse_conllu(text.as_bytes()).unwrap();
        assert_eq!(s[0].doc_id, "doc7");
        assert_eq!(s[0].tokens[1].surface, "cat");
        assert_eq!(s[0].tokens[1].deprel, "nsubj");
        assert_eq!(s[0].tokens[2].deprel, "aux");
        assert_eq!(report.multiword_ranges_skipped, 1);
        assert_eq!(report.empty_nodes_skipped, 1);
    }

    #[test]
    fn malformed_records_report_line() {
        let bad_cols = "1\tdogs\tNOUN\n";
        match parse_conllu(bad_cols.as_bytes()) {
            Err(Error::Record { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let bad_head = "# c\n1\tdogs\t_\tNOUN\t_\t_\tx\tnsubj\t_\t_\n";
        match parse_conllu(bad_head.as_bytes()) {
            Err(Error::Record { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("head"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_read() {
        let (s, _) = parse_conllu(DOGS.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_conllu(&mut buf, &s).unwrap();
        let (again, _) = parse_conllu(buf.as_slice()).unwrap();
        assert_eq!(s, again);
    }
}

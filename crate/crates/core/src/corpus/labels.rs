use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{LabeledDocument, ParsedSentence};
use crate::error::{Error, Result};

/// `doc_id -> class_id` table read from a `doc_id<TAB>class_id` file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    order: Vec<String>,
    classes: HashMap<String, usize>,
    n_classes: usize,
}

impl Labels {
    pub fn insert(&mut self, doc_id: impl Into<String>, class_id: usize) {
        let doc_id = doc_id.into();
        if self.classes.insert(doc_id.clone(), class_id).is_none() {
            self.order.push(doc_id);
        }
        self.n_classes = self.n_classes.max(class_id + 1);
    }

    pub fn get(&self, doc_id: &str) -> Option<usize> {
        self.classes.get(doc_id).copied()
    }

    /// One more than the largest class id seen.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.order.iter().map(|d| (d.as_str(), self.classes[d]))
    }
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<Labels> {
    let mut labels = Labels::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(doc), Some(class), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Record {
                line: i + 1,
                message: "expected `doc_id<TAB>class_id`".into(),
            });
        };
        let class: usize = class.trim().parse().map_err(|_| Error::Record {
            line: i + 1,
            message: format!("non-integer class id `{class}`"),
        })?;
        labels.insert(doc.trim(), class);
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(mut out: W, labels: &Labels) -> Result<()> {
    for (doc, class) in labels.iter() {
        writeln!(out, "{doc}\t{class}")?;
    }
    Ok(())
}

/// Groups sentences into labeled documents, in order of first appearance.
/// Every document must have a label.
pub fn assemble_documents(
    sentences: Vec<ParsedSentence>,
    labels: &Labels,
) -> Result<Vec<LabeledDocument>> {
    let mut docs: Vec<LabeledDocument> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for s in sentences {
        let i = match slot.get(&s.doc_id) {
            Some(&i) => i,
            None => {
                let class_id = labels.get(&s.doc_id).ok_or_else(|| {
                    Error::config(format!("document `{}` has no label", s.doc_id))
                })?;
                slot.insert(s.doc_id.clone(), docs.len());
                docs.push(LabeledDocument {
                    doc_id: s.doc_id.clone(),
                    class_id,
                    sentences: Vec::new(),
                });
                docs.len() - 1
            }
        };
        docs[i].sentences.push(s);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dogs_chase_cats;

    #[test]
    fn reads_and_groups() {
        let labels = read_labels("a\t1\nb\t0\n\n".as_bytes()).unwrap();
        assert_eq!(labels.n_classes(), 2);
        let docs = assemble_documents(
            vec![dogs_chase_cats("a"), dogs_chase_cats("b"), dogs_chase_cats("a")],
            &labels,
        )
        .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_id, "a");
        assert_eq!(docs[0].class_id, 1);
        assert_eq!(docs[0].sentences.len(), 2);
        let mut out = Vec::new();
        write_labels(&mut out, &labels).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a\t1\nb\t0\n");
    }

    #[test]
    fn unlabeled_document_is_an_error() {
        let labels = read_labels("a\t0\n".as_bytes()).unwrap();
        assert!(assemble_documents(vec![dogs_chase_cats("z")], &labels).is_err());
        assert!(read_labels("a\tx\n".as_bytes()).is_err());
    }
}

use std::fmt;

use super::ParsedSentence;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeDefect {
    Empty,
    /// Token indices are not 1..=len in order.
    BadIndex,
    NoRoot,
    MultipleRoots,
    /// The head-0 token is not labeled `root`, or a `root` label sits elsewhere.
    RootLabel,
    HeadOutOfRange,
    SelfLoop,
    Cycle,
}

impl fmt::Display for TreeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TreeDefect::Empty => "empty sentence",
            TreeDefect::BadIndex => "non-sequential token index",
            TreeDefect::NoRoot => "no root",
            TreeDefect::MultipleRoots => "multiple roots",
            TreeDefect::RootLabel => "root label mismatch",
            TreeDefect::HeadOutOfRange => "head out of range",
            TreeDefect::SelfLoop => "self loop",
            TreeDefect::Cycle => "cycle",
        };
        f.write_str(s)
    }
}

/// Checks that the head graph is a single tree rooted at one `root` token.
pub fn validate_tree(s: &ParsedSentence) -> Result<(), TreeDefect> {
    let n = s.tokens.len();
    if n == 0 {
        return Err(TreeDefect::Empty);
    }
    let mut roots = 0;
    for (pos, tok) in s.tokens.iter().enumerate() {
        if tok.index != pos + 1 {
            return Err(TreeDefect::BadIndex);
        }
        if tok.head > n {
            return Err(TreeDefect::HeadOutOfRange);
        }
        if tok.head == tok.index {
            return Err(TreeDefect::SelfLoop);
        }
        if tok.head == 0 {
            roots += 1;
        }
    }
    match roots {
        0 => return Err(TreeDefect::NoRoot),
        1 => {}
        _ => return Err(TreeDefect::MultipleRoots),
    }
    if s
        .tokens
        .iter()
        .any(|t| (t.head == 0) != (t.deprel == "root"))
    {
        return Err(TreeDefect::RootLabel);
    }
    // Every walk to the root must finish within n steps.
    for tok in &s.tokens {
        let mut cur = tok.head;
        let mut steps = 0;
        while cur != 0 {
            steps += 1;
            if steps > n {
                return Err(TreeDefect::Cycle);
            }
            cur = s.tokens[cur - 1].head;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dogs_chase_cats, Token};

    #[test]
    fn hand_sentence_is_a_tree() {
        assert_eq!(validate_tree(&dogs_chase_cats("d")), Ok(()));
    }

    #[test]
    fn two_roots() {
        let s = ParsedSentence::new(
            "d",
            vec![Token::new(1, "a", "X", 0, "root"), Token::new(2, "b", "X", 0, "root")],
        );
        assert_eq!(validate_tree(&s), Err(TreeDefect::MultipleRoots));
        assert_eq!(TreeDefect::MultipleRoots.to_string(), "multiple roots");
    }

    #[test]
    fn two_cycle_beside_root() {
        let s = ParsedSentence::new(
            "d",
            vec![
                Token::new(1, "a", "X", 2, "dep"),
                Token::new(2, "b", "X", 1, "dep"),
                Token::new(3, "c", "X", 0, "root"),
            ],
        );
        assert_eq!(validate_tree(&s), Err(TreeDefect::Cycle));
        assert_eq!(TreeDefect::Cycle.to_string(), "cycle");
    }

    #[test]
    fn other_defects() {
        let self_loop = ParsedSentence::new(
            "d",
            vec![Token::new(1, "a", "X", 0, "root"), Token::new(2, "b", "X", 2, "obj")],
        );
        assert_eq!(validate_tree(&self_loop), Err(TreeDefect::SelfLoop));
        let out_of_range = ParsedSentence::new(
            "d",
            vec![Token::new(1, "a", "X", 0, "root"), Token::new(2, "b", "X", 7, "obj")],
        );
        assert_eq!(validate_tree(&out_of_range), Err(TreeDefect::HeadOutOfRange));
        let mislabeled = ParsedSentence::new(
            "d",
            vec![Token::new(1, "a", "X", 0, "nsubj"), Token::new(2, "b", "X", 1, "obj")],
        );
        assert_eq!(validate_tree(&mislabeled), Err(TreeDefect::RootLabel));
        assert_eq!(validate_tree(&ParsedSentence::default()), Err(TreeDefect::Empty));
    }
}

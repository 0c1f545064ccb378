use crate::cooccur::WordClassMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassSpecificWord {
    pub word: usize,
    /// Class with the highest occurrence probability for the word.
    pub best_class: usize,
    pub statistic: f64,
}

/// Chi-square statistic of the `2 x n` table (this word, all other tokens)
/// by class. Cells with zero expected count are skipped.
pub fn chi_square_statistic(word_counts: &[u64], class_totals: &[u64]) -> f64 {
    let n: u64 = class_totals.iter().sum();
    let r1: u64 = word_counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let (n, r1) = (n as f64, r1 as f64);
    let r2 = n - r1;
    let mut stat = 0.0;
    for (&o1, &t) in word_counts.iter().zip(class_totals) {
        let t = t as f64;
        let o1 = o1 as f64;
        let o2 = t - o1;
        for (o, e) in [(o1, r1 * t / n), (o2, r2 * t / n)] {
            if e > 0.0 {
                stat += (o - e).powi(2) / e;
            }
        }
    }
    stat
}

/// Top `top_k` words by chi-square statistic (ties by word id).
pub fn chi_square_select(w: &WordClassMatrix, top_k: usize) -> Vec<ClassSpecificWord> {
    if top_k == 0 {
        return Vec::new();
    }
    let totals = w.class_totals();
    let mut scored: Vec<ClassSpecificWord> = (0..w.n_words())
        .filter(|&i| w.row(i).iter().any(|&c| c > 0))
        .map(|i| {
            let row = w.row(i);
            // p_ij is row-normalized, so the argmax of counts is the argmax of p.
            let best_class = row
                .iter()
                .enumerate()
                .fold(0, |best, (j, &c)| if c > row[best] { j } else { best });
            ClassSpecificWord {
                word: i,
                best_class,
                statistic: chi_square_statistic(row, &totals),
            }
        })
        .collect();
    scored.sort_by(|a, b| b.statistic.total_cmp(&a.statistic).then(a.word.cmp(&b.word)));
    scored.truncate(top_k);
    scored
}

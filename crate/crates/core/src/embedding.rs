use std::io::{BufRead, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::svd::SvdResult;

/// Dense word vectors; row `i` belongs to vocabulary id `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    words: Vec<String>,
    vectors: DMatrix<f64>,
}

/// `E = U diag(sigma)`.
pub fn embed(r: &SvdResult) -> DMatrix<f64> {
    let mut e = r.u.clone();
    for (j, s) in r.sigma.iter().enumerate() {
        e.column_mut(j).scale_mut(*s);
    }
    e
}

impl EmbeddingMatrix {
    pub fn new(words: Vec<String>, vectors: DMatrix<f64>) -> Result<Self> {
        if words.len() != vectors.nrows() {
            return Err(Error::Dimension(format!(
                "{} words for {} embedding rows",
                words.len(),
                vectors.nrows()
            )));
        }
        Ok(EmbeddingMatrix { words, vectors })
    }

    pub fn from_svd(vocab: &Vocabulary, r: &SvdResult) -> Result<Self> {
        Self::new(vocab.words().to_vec(), embed(r))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn row(&self, id: usize) -> DVector<f64> {
        self.vectors.row(id).transpose()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    /// `count dim` header, then `word v1 ... vd` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim())?;
        for (i, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            for v in self.vectors.row(i).iter() {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Empty("embedding file".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Record {
                line: 1,
                message: "expected `count dim` header".into(),
            })?;
        let [count, dim] = dims[..] else {
            return Err(Error::Record {
                line: 1,
                message: "expected `count dim` header".into(),
            });
        };
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Record {
                line: i + 2,
                message: m.into(),
            };
            let mut fields = line.split(' ');
            let word = fields.next().ok_or_else(|| bad("missing word"))?;
            let before = data.len();
            for f in fields {
                data.push(f.parse::<f64>().map_err(|_| bad("non-numeric component"))?);
            }
            if data.len() - before != dim {
                return Err(bad("wrong number of components"));
            }
            words.push(word.to_string());
        }
        if words.len() != count {
            return Err(Error::Dimension(format!("header says {count} rows, found {}", words.len())));
        }
        Self::new(words, DMatrix::from_row_slice(count, dim, &data))
    }

    /// Little-endian `u64 rows, u64 dim`, then row-major `f32` values.
    /// Words go to a separate one-per-line sidecar.
    pub fn write_binary<W: Write, S: Write>(&self, mut out: W, mut sidecar: S) -> Result<()> {
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&(self.dim() as u64).to_le_bytes())?;
        for i in 0..self.len() {
            for v in self.vectors.row(i).iter() {
                out.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        for w in &self.words {
            writeln!(sidecar, "{w}")?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read, S: BufRead>(mut input: R, sidecar: S) -> Result<Self> {
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let rows = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let dim = u64::from_le_bytes(b8) as usize;
        let mut data = Vec::with_capacity(rows * dim);
        let mut b4 = [0u8; 4];
        for _ in 0..rows * dim {
            input.read_exact(&mut b4)?;
            data.push(f32::from_le_bytes(b4) as f64);
        }
        let words = sidecar.lines().collect::<std::io::Result<Vec<_>>>()?;
        Self::new(words, DMatrix::from_row_slice(rows, dim, &data))
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_text(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }
}

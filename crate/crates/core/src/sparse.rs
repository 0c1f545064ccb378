//! Compressed sparse row matrices and their on-disk format.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic   b"DWEM"
//! version u32 (1)
//! kind    u32 (0 = co-occurrence, 1 = PPMI, 2 = class-extended PPMI)
//! nrows   u64
//! ncols   u64
//! nnz     u64
//! total   f64   sum of all stored values
//! nnz x { row u32, col u32, value f64 }   row-major order
//! ```

use std::io::{BufRead, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DWEM";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum MatrixKind {
    Cooccurrence = 0,
    Ppmi = 1,
    ClassExtended = 2,
}

impl MatrixKind {
    fn from_u32(v: u32) -> Option<Self> {
        match v {
            0 => Some(MatrixKind::Cooccurrence),
            1 => Some(MatrixKind::Ppmi),
            2 => Some(MatrixKind::ClassExtended),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from triplets; duplicates are summed, zeros are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows {
                return Err(Error::OutOfRange { id: r, size: nrows });
            }
            if c >= ncols {
                return Err(Error::OutOfRange { id: c, size: ncols });
            }
        }
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut m = CsrMatrix::zeros(nrows, ncols);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *m.values.last_mut().unwrap() += v;
            } else {
                m.indices.push(c);
                m.values.push(v);
                m.indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            m.indptr[r + 1] += m.indptr[r];
        }
        Ok(m.retain(|v| v != 0.0))
    }

    /// Rows given as sorted `(col, value)` lists.
    pub(crate) fn from_sorted_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut m = CsrMatrix::zeros(rows.len(), ncols);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                debug_assert!(c < ncols);
                m.indices.push(c);
                m.values.push(v);
            }
            m.indptr[r + 1] = m.indices.len();
        }
        m
    }

    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        let rows = (0..d.nrows())
            .map(|r| {
                (0..d.ncols())
                    .filter(|&c| d[(r, c)] != 0.0)
                    .map(|c| (c, d[(r, c)]))
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(d.ncols(), rows)
    }

    /// New matrix with only the entries whose value satisfies `keep`.
    pub fn retain(&self, keep: impl Fn(f64) -> bool) -> Self {
        let rows = (0..self.nrows)
            .map(|r| self.row(r).filter(|&(_, v)| keep(v)).collect())
            .collect();
        Self::from_sorted_rows(self.ncols, rows)
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] = f(r, self.indices[k], self.values[k]);
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.ncols];
        for (_, c, v) in self.triplets() {
            sums[c] += v;
        }
        sums
    }

    pub fn sum(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    /// `self * b` for dense `b` with `ncols` rows.
    pub fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.ncols);
        let k = b.ncols();
        let mut out = DMatrix::zeros(self.nrows, k);
        for j in 0..k {
            let bj = b.column(j);
            let mut oj = out.column_mut(j);
            for r in 0..self.nrows {
                let mut acc = 0.0;
                for (c, v) in self.row(r) {
                    acc += v * bj[c];
                }
                oj[r] = acc;
            }
        }
        out
    }

    /// `selfᵀ * b` for dense `b` with `nrows` rows.
    pub fn tr_mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.nrows);
        let k = b.ncols();
        let mut out = DMatrix::zeros(self.ncols, k);
        for j in 0..k {
            let bj = b.column(j);
            let mut oj = out.column_mut(j);
            for r in 0..self.nrows {
                let x = bj[r];
                if x == 0.0 {
                    continue;
                }
                for (c, v) in self.row(r) {
                    oj[c] += v * x;
                }
            }
        }
        out
    }

    pub fn write_binary<W: Write>(&self, mut out: W, kind: MatrixKind) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(kind as u32).to_le_bytes())?;
        out.write_all(&(self.nrows as u64).to_le_bytes())?;
        out.write_all(&(self.ncols as u64).to_le_bytes())?;
        out.write_all(&(self.nnz() as u64).to_le_bytes())?;
        out.write_all(&self.sum().to_le_bytes())?;
        for (r, c, v) in self.triplets() {
            out.write_all(&(r as u32).to_le_bytes())?;
            out.write_all(&(c as u32).to_le_bytes())?;
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R, origin: &Path) -> Result<(Self, MatrixKind)> {
        let bad = |m: &str| Error::format(origin, m);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        if read_u32(&mut input)? != VERSION {
            return Err(bad("unsupported version"));
        }
        let kind = MatrixKind::from_u32(read_u32(&mut input)?).ok_or_else(|| bad("unknown kind"))?;
        let nrows = read_u64(&mut input)? as usize;
        let ncols = read_u64(&mut input)? as usize;
        let nnz = read_u64(&mut input)? as usize;
        let total = read_f64(&mut input)?;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        let mut last = None;
        for _ in 0..nnz {
            let r = read_u32(&mut input)? as usize;
            let c = read_u32(&mut input)? as usize;
            let v = read_f64(&mut input)?;
            if r >= nrows || c >= ncols {
                return Err(bad("entry outside the declared shape"));
            }
            if last.is_some_and(|l| l >= (r, c)) {
                return Err(bad("entries not in row-major order"));
            }
            last = Some((r, c));
            rows[r].push((c, v));
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(bad("trailing bytes"));
        }
        let m = Self::from_sorted_rows(ncols, rows);
        if m.sum().to_bits() != total.to_bits() {
            return Err(bad("stored total does not match entries"));
        }
        Ok((m, kind))
    }

    pub fn save(&self, path: &Path, kind: MatrixKind) -> Result<()> {
        let mut buf = Vec::with_capacity(44 + 16 * self.nnz());
        self.write_binary(&mut buf, kind)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, MatrixKind)> {
        let bytes = std::fs::read(path)?;
        Self::read_binary(bytes.as_slice(), path)
    }

    /// `row col value` lines for debugging.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r} {c} {v}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut shape = None;
        let mut triplets = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let bad = || Error::Record {
                line: i + 1,
                message: "malformed triple".into(),
            };
            let fields: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
            if line.starts_with('#') {
                let dims: Vec<usize> = fields.iter().filter_map(|f| f.parse().ok()).collect();
                if dims.len() != 3 {
                    return Err(bad());
                }
                shape = Some((dims[0], dims[1]));
                continue;
            }
            if fields.len() != 3 {
                return Err(bad());
            }
            let r = fields[0].parse().map_err(|_| bad())?;
            let c = fields[1].parse().map_err(|_| bad())?;
            let v = fields[2].parse().map_err(|_| bad())?;
            triplets.push((r, c, v));
        }
        let (nrows, ncols) = shape.ok_or_else(|| Error::config("missing `# nrows ncols nnz` header"))?;
        Self::from_triplets(nrows, ncols, triplets)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

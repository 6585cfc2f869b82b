//! Dense real tensors and the multilinear-form algebra used everywhere else.
//!
//! Storage is a flat row-major buffer with the last index fastest, so
//! contracting all leading modes leaves contiguous blocks.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense tensor of order `d >= 1` over `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// One mode of a [`ModeAssignment`]: a concrete vector or a hole.
#[derive(Clone, Debug)]
pub enum ModeEntry {
    Vector(Vec<f64>),
    Hole,
}

/// Per-mode assignment for partial contraction. Holes mark the modes that
/// survive into the output.
#[derive(Clone, Debug)]
pub struct ModeAssignment {
    entries: Vec<ModeEntry>,
}

impl ModeAssignment {
    pub fn new(entries: Vec<ModeEntry>) -> Self {
        Self { entries }
    }

    /// Assignment with holes at the given mode positions and the supplied
    /// concrete vectors filling the remaining modes in order.
    pub fn with_holes(order: usize, holes: &[usize], vectors: &[Vec<f64>]) -> Result<Self> {
        if holes.iter().any(|&h| h >= order) {
            return Err(Error::Parameter(format!(
                "hole index out of range for order {order}"
            )));
        }
        let mut entries = Vec::with_capacity(order);
        let mut it = vectors.iter();
        for mode in 0..order {
            if holes.contains(&mode) {
                entries.push(ModeEntry::Hole);
            } else {
                let v = it.next().ok_or_else(|| {
                    Error::Parameter("not enough concrete vectors for assignment".into())
                })?;
                entries.push(ModeEntry::Vector(v.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ModeEntry] {
        &self.entries
    }

    pub fn hole_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, ModeEntry::Hole))
            .count()
    }
}

impl DenseTensor {
    /// Builds a tensor from shape and row-major data.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Parameter("tensor order must be at least 1".into()));
        }
        if shape.iter().any(|&n| n == 0) {
            return Err(Error::Parameter("all dimensions must be >= 1".into()));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::IncompatibleShapes(format!(
                "data length {} does not match shape product {}",
                data.len(),
                len
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len: usize = shape.iter().product();
        Self::new(shape, vec![0.0; len])
    }

    /// Outer product of the given vectors, so `form(outer(xs), xs) = prod |x_k|^2`.
    pub fn outer(factors: &[Vec<f64>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parameter("outer product needs >= 1 factor".into()));
        }
        let shape: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let mut t = Self::zeros(shape)?;
        let mut idx = vec![0usize; factors.len()];
        for flat in 0..t.data.len() {
            let mut p = 1.0;
            for (k, &i) in idx.iter().enumerate() {
                p *= factors[k][i];
            }
            t.data[flat] = p;
            Self::advance(&mut idx, &t.shape);
        }
        Ok(t)
    }

    /// Adds `weight * x_1 ⊗ ... ⊗ x_d` in place.
    pub fn add_rank_one(&mut self, weight: f64, factors: &[Vec<f64>]) -> Result<()> {
        self.check_factor_dims(factors)?;
        let shape = self.shape.clone();
        let mut idx = vec![0usize; shape.len()];
        for flat in 0..self.data.len() {
            let mut p = weight;
            for (k, &i) in idx.iter().enumerate() {
                p *= factors[k][i];
            }
            self.data[flat] += p;
            Self::advance(&mut idx, &shape);
        }
        Ok(())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn advance(idx: &mut [usize], shape: &[usize]) {
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                return;
            }
            idx[k] = 0;
        }
    }

    fn check_factor_dims(&self, xs: &[Vec<f64>]) -> Result<()> {
        if xs.len() != self.order() {
            return Err(Error::IncompatibleShapes(format!(
                "{} vectors supplied for order-{} tensor",
                xs.len(),
                self.order()
            )));
        }
        for (mode, x) in xs.iter().enumerate() {
            if x.len() != self.shape[mode] {
                return Err(Error::ShapeMismatch {
                    mode,
                    expected: self.shape[mode],
                    got: x.len(),
                });
            }
        }
        Ok(())
    }

    /// Permutes the modes, returning a new tensor with `shape[k] = old_shape[perm[k]]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.order() {
            return Err(Error::Parameter("permutation length mismatch".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::Parameter("invalid mode permutation".into()));
            }
            seen[p] = true;
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut out = Self::zeros(new_shape.clone())?;
        let old_strides = strides(&self.shape);
        let mut idx = vec![0usize; perm.len()];
        for flat in 0..out.data.len() {
            let mut old_flat = 0;
            for (k, &i) in idx.iter().enumerate() {
                old_flat += i * old_strides[perm[k]];
            }
            out.data[flat] = self.data[old_flat];
            Self::advance(&mut idx, &new_shape);
        }
        Ok(out)
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Full multilinear form `<T, x_1 ⊗ ... ⊗ x_d>`.
pub fn multilinear_form(t: &DenseTensor, xs: &[Vec<f64>]) -> Result<f64> {
    t.check_factor_dims(xs)?;
    // Contract the leading mode repeatedly; inner blocks stay contiguous.
    let mut cur = t.data.to_vec();
    let mut block: usize = t.shape.iter().skip(1).product();
    for (mode, x) in xs.iter().enumerate() {
        let n = t.shape[mode];
        let mut next = vec![0.0; block];
        for (i, &w) in x.iter().enumerate().take(n) {
            let off = i * block;
            for j in 0..block {
                next[j] += w * cur[off + j];
            }
        }
        cur = next;
        if mode + 1 < t.order() {
            block /= t.shape[mode + 1];
        }
    }
    debug_assert_eq!(cur.len(), 1);
    Ok(cur[0])
}

/// Contracts every non-hole mode, returning a tensor whose order equals the
/// number of holes (1 or 2).
pub fn partial_contract(t: &DenseTensor, assign: &ModeAssignment) -> Result<DenseTensor> {
    if assign.entries.len() != t.order() {
        return Err(Error::IncompatibleShapes(format!(
            "assignment covers {} modes for order-{} tensor",
            assign.entries.len(),
            t.order()
        )));
    }
    let holes: Vec<usize> = assign
        .entries
        .iter()
        .enumerate()
        .filter_map(|(k, e)| matches!(e, ModeEntry::Hole).then_some(k))
        .collect();
    match holes.len() {
        0 => return Err(Error::NoHoles),
        1 | 2 => {}
        n => {
            return Err(Error::Unsupported(format!(
                "partial contraction supports at most 2 holes, got {n}"
            )))
        }
    }
    for (mode, e) in assign.entries.iter().enumerate() {
        if let ModeEntry::Vector(v) = e {
            if v.len() != t.shape[mode] {
                return Err(Error::ShapeMismatch {
                    mode,
                    expected: t.shape[mode],
                    got: v.len(),
                });
            }
        }
    }

    let out_shape: Vec<usize> = holes.iter().map(|&h| t.shape[h]).collect();
    let out_strides = strides(&out_shape);
    let mut out = DenseTensor::zeros(out_shape)?;
    let mut idx = vec![0usize; t.order()];
    for flat in 0..t.data.len() {
        let mut w = 1.0;
        for (mode, e) in assign.entries.iter().enumerate() {
            if let ModeEntry::Vector(v) = e {
                w *= v[idx[mode]];
            }
        }
        let mut o = 0;
        for (pos, &h) in holes.iter().enumerate() {
            o += idx[h] * out_strides[pos];
        }
        out.data[o] += w * t.data[flat];
        DenseTensor::advance(&mut idx, &t.shape);
    }
    Ok(out)
}

/// Frobenius inner product of two same-shape tensors.
pub fn frobenius_inner(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape != b.shape {
        return Err(Error::IncompatibleShapes(format!(
            "{:?} vs {:?}",
            a.shape, b.shape
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

/// Writes the text format: first line `d n_1 ... n_d`, then the row-major
/// values in scientific notation with 17 significant digits.
pub fn write_tensor<W: Write>(w: &mut W, t: &DenseTensor) -> Result<()> {
    write!(w, "{}", t.order())?;
    for n in t.shape() {
        write!(w, " {n}")?;
    }
    writeln!(w)?;
    for (i, v) in t.data.iter().enumerate() {
        if i > 0 && i % 8 == 0 {
            writeln!(w)?;
        } else if i > 0 {
            write!(w, " ")?;
        }
        write!(w, "{v:.16e}")?;
    }
    writeln!(w)?;
    Ok(())
}

/// Reads the text format written by [`write_tensor`].
pub fn read_tensor<R: BufRead>(r: &mut R) -> Result<DenseTensor> {
    let mut header = String::new();
    loop {
        header.clear();
        if r.read_line(&mut header)? == 0 {
            return Err(Error::Parse("empty tensor file".into()));
        }
        if !header.trim().is_empty() {
            break;
        }
    }
    let mut it = header.split_whitespace();
    let d: usize = it
        .next()
        .ok_or_else(|| Error::Parse("missing order".into()))?
        .parse()
        .map_err(|_| Error::Parse("order is not an integer".into()))?;
    let shape: Vec<usize> = it
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad dimension token {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if shape.len() != d {
        return Err(Error::Parse(format!(
            "header declares order {d} but lists {} dimensions",
            shape.len()
        )));
    }
    let len: usize = shape.iter().product();
    let mut data = Vec::with_capacity(len);
    let mut line = String::new();
    while data.len() < len {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Parse(format!(
                "expected {len} values, found {}",
                data.len()
            )));
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad value token {tok:?}")))?;
            data.push(v);
        }
    }
    if data.len() != len {
        return Err(Error::Parse(format!(
            "expected {len} values, found {}",
            data.len()
        )));
    }
    DenseTensor::new(shape, data)
}

pub fn write_tensor_to_path(path: &std::path::Path, t: &DenseTensor) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_tensor(&mut w, t)
}

pub fn read_tensor_from_path(path: &std::path::Path) -> Result<DenseTensor> {
    let f = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(f);
    read_tensor(&mut r)
}

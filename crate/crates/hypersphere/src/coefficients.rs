//! Coefficient vectors over the spherical-harmonic basis: the image type of
//! every operator in the crate.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::basis::{harmonic_dimension, space_dimension, HarmonicIndex};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::scalar::Real;

/// Coefficients indexed by (l, k) for all degrees l <= degree, stored
/// degree-major. Always carries exactly `space_dimension(d, degree)`
/// finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T> {
    dim_d: usize,
    degree: usize,
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CoefficientVector<T> {
    /// All-zero vector.
    pub fn zeros(dim_d: usize, degree: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(degree + 1);
        let mut total = 0usize;
        for l in 0..=degree {
            offsets.push(total);
            total += harmonic_dimension(dim_d, l)?;
        }
        Ok(CoefficientVector {
            dim_d,
            degree,
            offsets,
            values: vec![T::zero(); total],
        })
    }

    /// Wraps a dense degree-major value slice.
    pub fn from_values(dim_d: usize, degree: usize, values: Vec<T>) -> Result<Self> {
        let expected = space_dimension(dim_d, degree)?;
        if values.len() != expected {
            return Err(Error::Format(format!(
                "coefficient vector needs {expected} entries for degree {degree}, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("coefficient values must be finite".into()));
        }
        let mut cv = Self::zeros(dim_d, degree)?;
        cv.values = values;
        Ok(cv)
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn position(&self, index: HarmonicIndex) -> usize {
        assert!(
            index.degree <= self.degree,
            "degree {} out of range 0..={}",
            index.degree,
            self.degree
        );
        let offset = self.offsets[index.degree];
        let width = if index.degree < self.degree {
            self.offsets[index.degree + 1] - offset
        } else {
            self.values.len() - offset
        };
        assert!(
            index.k >= 1 && index.k <= width,
            "k = {} out of range 1..={width} at degree {}",
            index.k,
            index.degree
        );
        offset + index.k - 1
    }

    pub fn get(&self, index: HarmonicIndex) -> T {
        self.values[self.position(index)]
    }

    pub fn set(&mut self, index: HarmonicIndex, value: T) {
        assert!(value.is_finite(), "coefficient values must be finite");
        let pos = self.position(index);
        self.values[pos] = value;
    }

    /// Iterates `(index, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (HarmonicIndex, T)> + '_ {
        (0..=self.degree).flat_map(move |l| {
            (1..=self.block_width(l)).map(move |k| {
                let idx = HarmonicIndex::new(l, k);
                (idx, self.get(idx))
            })
        })
    }

    /// Applies `f` to every coefficient, producing a vector of the same
    /// shape.
    pub fn map_indexed(&self, mut f: impl FnMut(HarmonicIndex, T) -> T) -> Result<Self> {
        let mut out = self.clone();
        for l in 0..=self.degree {
            let width = self.block_width(l);
            for k in 1..=width {
                let idx = HarmonicIndex::new(l, k);
                let v = f(idx, self.get(idx));
                if !v.is_finite() {
                    return Err(Error::Format(
                        "coefficient transform produced a non-finite value".into(),
                    ));
                }
                out.set(idx, v);
            }
        }
        Ok(out)
    }

    fn block_width(&self, l: usize) -> usize {
        let offset = self.offsets[l];
        if l < self.degree {
            self.offsets[l + 1] - offset
        } else {
            self.values.len() - offset
        }
    }

    /// Restriction to degrees <= `degree`.
    pub fn truncated(&self, degree: usize) -> Result<Self> {
        assert!(degree <= self.degree);
        let end = if degree < self.degree {
            self.offsets[degree + 1]
        } else {
            self.values.len()
        };
        Self::from_values(self.dim_d, degree, self.values[..end].to_vec())
    }

    /// Zero-padded extension to a (possibly) larger degree.
    pub fn padded(&self, degree: usize) -> Result<Self> {
        assert!(degree >= self.degree);
        let mut out = Self::zeros(self.dim_d, degree)?;
        out.values[..self.values.len()].copy_from_slice(&self.values);
        Ok(out)
    }

    /// Euclidean norm of the coefficients; by Parseval this is the L2 norm
    /// of the synthesized polynomial.
    pub fn l2_norm(&self) -> T {
        let mut acc = KahanSum::new();
        for &v in &self.values {
            acc.add(v * v);
        }
        acc.value().max(T::zero()).sqrt()
    }

    /// Number of exactly-zero coefficients.
    pub fn sparsity(&self) -> usize {
        self.values.iter().filter(|v| **v == T::zero()).count()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

/// Infinity norm of the difference, comparing on the common zero-padded
/// degree so vectors of different output degrees can be compared.
pub fn max_abs_diff<T: Real>(
    a: &CoefficientVector<T>,
    b: &CoefficientVector<T>,
) -> Result<T> {
    assert_eq!(a.dim_d(), b.dim_d(), "dimension mismatch");
    let degree = a.degree().max(b.degree());
    let pa = a.padded(degree)?;
    let pb = b.padded(degree)?;
    Ok(pa
        .values()
        .iter()
        .zip(pb.values())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}

/// Coefficientwise sum on the common padded degree.
pub fn add<T: Real>(
    a: &CoefficientVector<T>,
    b: &CoefficientVector<T>,
) -> Result<CoefficientVector<T>> {
    assert_eq!(a.dim_d(), b.dim_d(), "dimension mismatch");
    let degree = a.degree().max(b.degree());
    let pa = a.padded(degree)?;
    let pb = b.padded(degree)?;
    let values = pa
        .values()
        .iter()
        .zip(pb.values())
        .map(|(&x, &y)| x + y)
        .collect();
    CoefficientVector::from_values(a.dim_d(), degree, values)
}

/// Coefficientwise difference on the common padded degree.
pub fn sub<T: Real>(
    a: &CoefficientVector<T>,
    b: &CoefficientVector<T>,
) -> Result<CoefficientVector<T>> {
    assert_eq!(a.dim_d(), b.dim_d(), "dimension mismatch");
    let degree = a.degree().max(b.degree());
    let pa = a.padded(degree)?;
    let pb = b.padded(degree)?;
    let values = pa
        .values()
        .iter()
        .zip(pb.values())
        .map(|(&x, &y)| x - y)
        .collect();
    CoefficientVector::from_values(a.dim_d(), degree, values)
}

impl<T: Real> CoefficientVector<T> {
    /// Writes the CSV form `l,k,value` with 17-significant-digit decimals.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "l,k,value")?;
        for l in 0..=self.degree {
            let width = self.block_width(l);
            for k in 1..=width {
                let v = self.get(HarmonicIndex::new(l, k));
                writeln!(out, "{l},{k},{:.16e}", v.as_f64())?;
            }
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    /// Reads the CSV form back. The row set must cover every index of some
    /// degree exactly once; d = 2 is assumed for the index layout.
    pub fn read_csv(input: impl std::io::Read) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || (i == 0 && trimmed == "l,k,value") {
                continue;
            }
            let parts: Vec<&str> = trimmed.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Format(format!("bad CSV row: {trimmed}")));
            }
            let l: usize = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad degree in row: {trimmed}")))?;
            let k: usize = parts[1]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad order in row: {trimmed}")))?;
            let v: f64 = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad value in row: {trimmed}")))?;
            rows.push((l, k, v));
        }
        let degree = rows
            .iter()
            .map(|&(l, _, _)| l)
            .max()
            .ok_or_else(|| Error::Format("empty coefficient file".into()))?;
        let mut cv = Self::zeros(2, degree)?;
        let mut seen = vec![false; cv.len()];
        for (l, k, v) in rows {
            let idx = HarmonicIndex::new(l, k);
            let pos = cv.position(idx);
            if seen[pos] {
                return Err(Error::Format(format!("duplicate index ({l}, {k})")));
            }
            seen[pos] = true;
            cv.set(idx, T::of(v));
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Format("missing coefficient rows".into()));
        }
        Ok(cv)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }
}

//! Linear-time solver for `(kI + ΨᵀΨ)x = b`, with `Ψ` lower-triangular ones.
//!
//! `ΨᵀΨ` is dense, but its inverse `Ψ⁻¹Ψ⁻ᵀ` is the tridiagonal matrix with
//! rows `(1, −1)`, `(−1, 2, −1)`, …, `(−1, 2)`. Hence
//! `x = (kΨ⁻¹Ψ⁻ᵀ + I)⁻¹ Ψ⁻¹Ψ⁻ᵀ b`, and the bracketed matrix has a bidiagonal
//! Cholesky factor. `Ψ⁻¹` and `Ψ⁻ᵀ` are first differences.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandedError {
    #[error("k must be positive and finite, got {0}")]
    InvalidK(f64),
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("rhs has length {found}, factor expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Bidiagonal Cholesky factor `L` of `kΨ⁻¹Ψ⁻ᵀ + I`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedFactor {
    k: f64,
    /// `ℓ_ii`, all positive.
    diag: Vec<f64>,
    /// `ℓ_{i+1,i}`.
    sub: Vec<f64>,
}

/// Factors `kΨ⁻¹Ψ⁻ᵀ + I` for horizon `t`.
pub fn factor(k: f64, t: usize) -> Result<BandedFactor, BandedError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(BandedError::InvalidK(k));
    }
    if t == 0 {
        return Err(BandedError::EmptyHorizon);
    }
    let mut diag = Vec::with_capacity(t);
    let mut sub = Vec::with_capacity(t - 1);
    diag.push((k + 1.0).sqrt());
    for i in 1..t {
        let l = -k / diag[i - 1];
        sub.push(l);
        diag.push((2.0 * k + 1.0 - l * l).sqrt());
    }
    Ok(BandedFactor { k, diag, sub })
}

impl BandedFactor {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn subdiagonal(&self) -> &[f64] {
        &self.sub
    }

    /// Solves `(kI + ΨᵀΨ)x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, BandedError> {
        let mut out = vec![0.0; b.len()];
        self.solve_into(b, &mut out)?;
        Ok(out)
    }

    /// Allocation-free [`solve`](Self::solve); `out` must have length `T`.
    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) -> Result<(), BandedError> {
        let n = self.horizon();
        for len in [b.len(), out.len()] {
            if len != n {
                return Err(BandedError::LengthMismatch { expected: n, found: len });
            }
        }
        // w = Ψ⁻ᵀb (backward difference), then z = Ψ⁻¹w (forward difference),
        // fused and followed by forward substitution with L
        let w = |i: usize| if i + 1 < n { b[i] - b[i + 1] } else { b[i] };
        let mut prev_w = 0.0;
        let mut prev = 0.0;
        for i in 0..n {
            let wi = w(i);
            let zi = wi - prev_w;
            prev_w = wi;
            let acc = if i == 0 { zi } else { zi - self.sub[i - 1] * prev };
            prev = acc / self.diag[i];
            out[i] = prev;
        }
        // backward substitution with Lᵀ
        for i in (0..n).rev() {
            let mut acc = out[i];
            if i + 1 < n {
                acc -= self.sub[i] * out[i + 1];
            }
            out[i] = acc / self.diag[i];
        }
        Ok(())
    }
}

/// Solves `(kI + ΨᵀΨ)x = b` without keeping the factor.
pub fn solve(factor: &BandedFactor, b: &[f64]) -> Result<Vec<f64>, BandedError> {
    factor.solve(b)
}

/// `Ψp`: running sum.
pub fn cumsum(p: &[f64], out: &mut [f64]) {
    let mut acc = 0.0;
    for (o, &v) in out.iter_mut().zip(p) {
        acc += v;
        *o = acc;
    }
}

/// `Ψᵀp`: reverse running sum.
pub fn rev_cumsum(p: &[f64], out: &mut [f64]) {
    let mut acc = 0.0;
    for (o, &v) in out.iter_mut().zip(p).rev() {
        acc += v;
        *o = acc;
    }
}

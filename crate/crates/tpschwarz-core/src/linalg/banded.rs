use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

/// Pivot breakdown during banded elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BandedError {
    /// No usable pivot in the given elimination column.
    Singular { column: usize },
}

impl core::fmt::Display for BandedError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BandedError::Singular { column } => {
                write!(f, "banded factorization broke down in column {column}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BandedError {}

/// Band matrix in compact storage: row `i`, slot `s` holds the entry in
/// column `i + s - kl`, with `kl` sub- and `ku` superdiagonals.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    mm: usize,
    data: Vec<f64>,
}

impl Banded {
    /// Zero matrix with the given bandwidths (clamped to `n - 1`).
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0, "empty banded matrix");
        let kl = kl.min(n - 1);
        let ku = ku.min(n - 1);
        let mm = kl + ku + 1;
        Self { n, kl, ku, mm, data: vec![0.0; n * mm] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let s = (j + self.kl).checked_sub(i)?;
        if s >= self.mm {
            return None;
        }
        Some(i * self.mm + s)
    }

    /// Writes an in-band entry; out-of-band positions are rejected.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] += v;
    }

    /// Entry at (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for j in lo..=hi {
                s += self.data[i * self.mm + (j + self.kl - i)] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    ///
    /// Compact band elimination: rows are left-shifted as leading entries
    /// are eliminated so the upper factor stays in `mm` slots per row and
    /// the multipliers occupy `kl` slots per column.
    pub fn factor(mut self) -> Result<BandedLu, BandedError> {
        let n = self.n;
        let kl = self.kl;
        let mm = self.mm;
        let a = &mut self.data;

        // Realign the top kl rows so slot 0 is the leading in-band column.
        for i in 0..kl {
            let shift = kl - i;
            for s in shift..mm {
                a[i * mm + s - shift] = a[i * mm + s];
            }
            for s in mm - shift..mm {
                a[i * mm + s] = 0.0;
            }
        }

        let mut low = vec![0.0; n * kl.max(1)];
        let mut indx = vec![0usize; n];
        let mut sign = 1.0;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = fmath::abs(a[k * mm]);
            for j in k + 1..=last {
                if fmath::abs(a[j * mm]) > best {
                    best = fmath::abs(a[j * mm]);
                    piv = j;
                }
            }
            indx[k] = piv;
            if best < 1e-300 {
                return Err(BandedError::Singular { column: k });
            }
            if piv != k {
                sign = -sign;
                for s in 0..mm {
                    a.swap(k * mm + s, piv * mm + s);
                }
            }
            for i in k + 1..=last {
                let mult = a[i * mm] / a[k * mm];
                low[k * kl.max(1) + (i - k - 1)] = mult;
                for s in 1..mm {
                    a[i * mm + s - 1] = a[i * mm + s] - mult * a[k * mm + s];
                }
                a[i * mm + mm - 1] = 0.0;
            }
        }
        Ok(BandedLu { n, kl, mm, upper: self.data, low, indx, sign })
    }
}

/// Factored band matrix; `upper` row `i`, slot `s` holds U[i][i+s].
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    mm: usize,
    upper: Vec<f64>,
    low: Vec<f64>,
    indx: Vec<usize>,
    sign: f64,
}

impl BandedLu {
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.kl;
        let mm = self.mm;
        let stride = kl.max(1);
        for k in 0..n {
            let piv = self.indx[k];
            if piv != k {
                b.swap(k, piv);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.low[k * stride + (i - k - 1)] * b[k];
            }
        }
        let mut l = 1;
        for i in (0..n).rev() {
            let mut dum = b[i];
            for s in 1..l {
                dum -= self.upper[i * mm + s] * b[i + s];
            }
            b[i] = dum / self.upper[i * mm];
            if l < mm {
                l += 1;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Determinant of the factored matrix (pivot product times the
    /// permutation parity).
    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.n {
            d *= self.upper[i * self.mm];
        }
        d
    }
}

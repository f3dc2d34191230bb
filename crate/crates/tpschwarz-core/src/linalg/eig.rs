use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::fmath;

/// Failure of the QR iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EigenError {
    /// The QR iteration exceeded its global step budget (500 per dimension)
    /// without deflating every eigenvalue.
    NonConvergence { iterations: usize },
}

impl core::fmt::Display for EigenError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EigenError::NonConvergence { iterations } => {
                write!(f, "QR iteration failed to converge after {iterations} steps")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EigenError {}

/// All eigenvalues of a real square matrix.
///
/// Pipeline: similarity balancing (Parlett-Reinsch), Householder reduction
/// to upper Hessenberg form, then Francis double-shift QR with exceptional
/// shifts every ten stalled steps. Eigenvalues only, no vectors. The global
/// iteration budget is 500 steps per matrix dimension; exhausting it is
/// reported as an error, never as a silent partial result.
pub fn eigenvalues(mut m: DenseMatrix) -> Result<Vec<Complex64>, EigenError> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(m.get(0, 0), 0.0)]);
    }
    balance(&mut m);
    hessenberg(&mut m);
    hqr(m)
}

/// Largest eigenvalue modulus of a real square matrix.
pub fn spectral_radius(m: DenseMatrix) -> Result<f64, EigenError> {
    let eig = eigenvalues(m)?;
    let mut r = 0.0;
    for z in eig {
        let a = fmath::hypot(z.re, z.im);
        if a > r {
            r = a;
        }
    }
    Ok(r)
}

/// Parlett-Reinsch balancing: diagonal similarity scaling by powers of two
/// so row and column norms match. Exact in floating point (radix scaling)
/// and a no-op on already balanced matrices.
fn balance(m: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = m.dim();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += fmath::abs(m.get(j, i));
                    r += fmath::abs(m.get(i, j));
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let mut cc = c;
                let s = c + r;
                let mut g = r / RADIX;
                while cc < g {
                    f *= RADIX;
                    cc *= sqrdx;
                }
                g = r * RADIX;
                while cc > g {
                    f /= RADIX;
                    cc /= sqrdx;
                }
                if (cc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        *m.at_mut(i, j) *= ginv;
                    }
                    for j in 0..n {
                        *m.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (eigenvalues only, so
/// the orthogonal factor is not accumulated).
fn hessenberg(m: &mut DenseMatrix) {
    let n = m.dim();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for k in 1..n - 1 {
        let mut scale = 0.0;
        for i in k..n {
            scale += fmath::abs(m.get(i, k - 1));
        }
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (k..n).rev() {
            ort[i] = m.get(i, k - 1) / scale;
            h += ort[i] * ort[i];
        }
        let mut g = fmath::sqrt(h);
        if ort[k] > 0.0 {
            g = -g;
        }
        h -= ort[k] * g;
        ort[k] -= g;
        // Apply I - ort ort^T / h from the left, then from the right.
        for j in k..n {
            let mut f = 0.0;
            for i in (k..n).rev() {
                f += ort[i] * m.get(i, j);
            }
            f /= h;
            for i in k..n {
                *m.at_mut(i, j) -= f * ort[i];
            }
        }
        for i in 0..n {
            let mut f = 0.0;
            for j in (k..n).rev() {
                f += ort[j] * m.get(i, j);
            }
            f /= h;
            for j in k..n {
                *m.at_mut(i, j) -= f * ort[j];
            }
        }
        m.set(k, k - 1, scale * g);
        for i in k + 1..n {
            m.set(i, k - 1, 0.0);
        }
    }
}

#[inline]
fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        fmath::abs(a)
    } else {
        -fmath::abs(a)
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// Classic hqr scheme. Variables keep the customary one-based indexing of
/// the reference formulation; the `a!` macro maps them onto the flat
/// zero-based storage. Deflation resets the per-block stall counter; an
/// exceptional shift fires every ten stalled steps.
fn hqr(mut m: DenseMatrix) -> Result<Vec<Complex64>, EigenError> {
    let n = m.dim();
    let budget = 500 * n;
    let eps = f64::EPSILON;
    let d = m.as_mut_slice();

    macro_rules! a {
        ($i:expr, $j:expr) => {
            d[(($i - 1) as usize) * n + (($j - 1) as usize)]
        };
    }

    let ni = n as isize;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=ni {
        for j in (i - 1).max(1)..=ni {
            anorm += fmath::abs(a![i, j]);
        }
    }
    if anorm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }

    let mut total_steps = 0usize;
    let mut nn = ni;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // Search for a negligible subdiagonal entry.
            let mut l = 1;
            let mut ll = nn;
            while ll >= 2 {
                let mut s = fmath::abs(a![ll - 1, ll - 1]) + fmath::abs(a![ll, ll]);
                if s == 0.0 {
                    s = anorm;
                }
                if fmath::abs(a![ll, ll - 1]) <= eps * s {
                    a![ll, ll - 1] = 0.0;
                    l = ll;
                    break;
                }
                ll -= 1;
            }
            let mut x = a![nn, nn];
            if l == nn {
                // One real eigenvalue deflated.
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a![nn - 1, nn - 1];
            let mut w = a![nn, nn - 1] * a![nn - 1, nn];
            if l == nn - 1 {
                // A 2x2 block deflated: real pair or conjugate pair.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = fmath::sqrt(fmath::abs(q));
                x += t;
                if q >= 0.0 {
                    let z = p + sign_of(z, p);
                    wr[(nn - 1) as usize] = x + z;
                    wr[nn as usize] = wr[(nn - 1) as usize];
                    if z != 0.0 {
                        wr[nn as usize] = x - w / z;
                    }
                    wi[(nn - 1) as usize] = 0.0;
                    wi[nn as usize] = 0.0;
                } else {
                    wr[(nn - 1) as usize] = x + p;
                    wr[nn as usize] = x + p;
                    wi[nn as usize] = z;
                    wi[(nn - 1) as usize] = -z;
                }
                nn -= 2;
                break;
            }
            // No deflation: run one double-shift QR step.
            if total_steps >= budget {
                return Err(EigenError::NonConvergence { iterations: total_steps });
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift to break symmetric stalls.
                t += x;
                for i in 1..=nn {
                    a![i, i] -= x;
                }
                let s = fmath::abs(a![nn, nn - 1]) + fmath::abs(a![nn - 1, nn - 2]);
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_steps += 1;

            // Find two consecutive small subdiagonals to start the sweep.
            let mut p = 0.0;
            let mut q = 0.0;
            let mut r = 0.0;
            let mut mm = nn - 2;
            while mm >= l {
                let z = a![mm, mm];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a![mm + 1, mm] + a![mm, mm + 1];
                q = a![mm + 1, mm + 1] - z - rr - ss;
                r = a![mm + 2, mm + 1];
                let s = fmath::abs(p) + fmath::abs(q) + fmath::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = fmath::abs(a![mm, mm - 1]) * (fmath::abs(q) + fmath::abs(r));
                let v = fmath::abs(p)
                    * (fmath::abs(a![mm - 1, mm - 1]) + fmath::abs(z) + fmath::abs(a![mm + 1, mm + 1]));
                if u <= eps * v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nn {
                a![i, i - 2] = 0.0;
                if i != mm + 2 {
                    a![i, i - 3] = 0.0;
                }
            }
            // Chase the bulge down the active block.
            for k in mm..=nn - 1 {
                if k != mm {
                    p = a![k, k - 1];
                    q = a![k + 1, k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a![k + 2, k - 1];
                    }
                    x = fmath::abs(p) + fmath::abs(q) + fmath::abs(r);
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of(fmath::sqrt(p * p + q * q + r * r), p);
                if s == 0.0 {
                    continue;
                }
                if k == mm {
                    if l != mm {
                        a![k, k - 1] = -a![k, k - 1];
                    }
                } else {
                    a![k, k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = a![k, j] + q * a![k + 1, j];
                    if k != nn - 1 {
                        pp += r * a![k + 2, j];
                        a![k + 2, j] -= pp * z;
                    }
                    a![k + 1, j] -= pp * y;
                    a![k, j] -= pp * x;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * a![i, k] + y * a![i, k + 1];
                    if k != nn - 1 {
                        pp += z * a![i, k + 2];
                        a![i, k + 2] -= pp * r;
                    }
                    a![i, k + 1] -= pp * q;
                    a![i, k] -= pp;
                }
            }
        }
    }

    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Greedy multiset comparison: every expected eigenvalue must have a
    /// distinct computed partner within `tol`.
    fn assert_spectra_match(computed: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(computed.len(), expected.len());
        let mut pool: Vec<Complex64> = computed.to_vec();
        for e in expected {
            let (idx, dist) = pool
                .iter()
                .enumerate()
                .map(|(i, c)| (i, (c - e).norm_sqr().sqrt()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("pool exhausted");
            assert!(
                dist <= tol,
                "eigenvalue {e} unmatched; nearest computed at distance {dist:.3e}"
            );
            pool.swap_remove(idx);
        }
    }

    #[test]
    fn dim_one_returns_the_entry() {
        let m = DenseMatrix::from_row_major(1, vec![-3.5]);
        assert_eq!(eigenvalues(m).unwrap(), vec![Complex64::new(-3.5, 0.0)]);
    }

    #[test]
    fn symmetric_2x2_has_real_pair() {
        let m = DenseMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]);
        let e = eigenvalues(m).unwrap();
        assert_spectra_match(&e, &[Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)], 1e-14);
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let m = DenseMatrix::from_row_major(2, vec![0.0, 1.0, -1.0, 0.0]);
        let e = eigenvalues(m).unwrap();
        assert_spectra_match(&e, &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)], 1e-14);
    }

    #[test]
    fn companion_matrix_recovers_polynomial_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3), companion form.
        let m = DenseMatrix::from_row_major(
            3,
            vec![6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let e = eigenvalues(m).unwrap();
        let expected = [1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0));
        assert_spectra_match(&e, &expected, 1e-10);
    }

    #[test]
    fn zero_matrix_yields_zero_spectrum() {
        let e = eigenvalues(DenseMatrix::zeros(5)).unwrap();
        for z in e {
            assert_eq!(z, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn tridiagonal_laplacian_spectrum_matches_closed_form() {
        // tridiag(-1, 2, -1) of dimension 10: eigenvalues 4 sin^2(k pi / 22).
        let n = 10;
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let expected: Vec<Complex64> = (1..=n)
            .map(|k| {
                let s = (k as f64 * core::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
                Complex64::new(4.0 * s * s, 0.0)
            })
            .collect();
        let e = eigenvalues(m).unwrap();
        assert_spectra_match(&e, &expected, 1e-12);
    }

    #[test]
    fn repeated_eigenvalue_of_jordan_block_is_found() {
        let m = DenseMatrix::from_row_major(2, vec![1.0, 1.0, 0.0, 1.0]);
        let e = eigenvalues(m).unwrap();
        // A defective pair is only determined to about sqrt(eps).
        assert_spectra_match(&e, &[Complex64::new(1.0, 0.0); 2], 1e-7);
    }

    #[test]
    fn similarity_transform_preserves_known_spectrum() {
        // Q D Q^T for a Householder Q and diagonal D with spread magnitudes.
        let n = 12;
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 - 4.0) * 0.37 + 0.01).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vn2: f64 = v.iter().map(|x| x * x).sum();
        let mut m = DenseMatrix::zeros(n);
        // (I - 2 v v^T / |v|^2) D (I - 2 v v^T / |v|^2)
        let mut q = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                *q.at_mut(i, j) -= 2.0 * v[i] * v[j] / vn2;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q.get(i, k) * diag[k] * q.get(k, j);
                }
                m.set(i, j, s);
            }
        }
        let e = eigenvalues(m).unwrap();
        let expected: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        assert_spectra_match(&e, &expected, 1e-10);
    }

    #[test]
    fn badly_scaled_matrix_is_balanced_first() {
        // Same spectrum as [[1, 1], [1, 1]] (0 and 2) but scaled by 1e8
        // off the diagonal in one direction.
        let m = DenseMatrix::from_row_major(2, vec![1.0, 1e8, 1e-8, 1.0]);
        let e = eigenvalues(m).unwrap();
        assert_spectra_match(&e, &[Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)], 1e-8);
    }
}

//! Dense linear algebra kernels: symmetric eigendecomposition and LU-based
//! linear solves with a condition estimate.
//!
//! Everything here is O(n^3) dense and targets the problem sizes this crate
//! works at (n up to a couple thousand). The eigensolver is the classical
//! Householder tridiagonalization followed by implicit-shift QL, ported from
//! the EISPACK `tred2`/`tql2` pair.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum QL iterations per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 64;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues ascend; `vectors` holds the matching eigenvectors as columns,
/// orthonormal to machine precision.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub eigenvalues: Vec<T>,
    pub vectors: Array2<T>,
}

/// Full eigendecomposition of a symmetric matrix.
///
/// The input is taken as-is; symmetry is the caller's contract. Column `j`
/// of the result satisfies `a v_j = lambda_j v_j` up to roundoff.
pub fn symmetric_eigen<T: Scalar>(a: &Array2<T>) -> Result<SymmetricEigen<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "symmetric_eigen input (square)",
            expected: n,
            got: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            eigenvalues: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        });
    }

    // v is row-major n x n, mutated in place into the eigenvector matrix.
    let mut v: Vec<T> = a.iter().copied().collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];

    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    sort_ascending(n, &mut v, &mut d);

    let vectors = Array2::from_shape_vec((n, n), v).expect("square buffer");
    Ok(SymmetricEigen {
        eigenvalues: d,
        vectors,
    })
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulation of the orthogonal transformations (EISPACK tred2).
fn tred2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let idx = |r: usize, c: usize| r * n + c;

    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            // Householder vector.
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = T::zero();
            }

            // Apply similarity transformation to remaining rows/columns.
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] = v[idx(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] = v[idx(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// eigenvector accumulation (EISPACK tql2).
fn tql2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    let idx = |r: usize, c: usize| r * n + c;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::EigenNoConvergence { index: l });
                }

                // Form shift.
                let mut g = d[l];
                let two = T::cast(2.0);
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // Implicit QL transformation.
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * h;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Selection sort of eigenvalues ascending, swapping eigenvector columns
/// along. O(n^2) swaps are negligible next to the decomposition itself.
fn sort_ascending<T: Scalar>(n: usize, v: &mut [T], d: &mut [T]) {
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in (i + 1)..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                v.swap(row * n + i, row * n + k);
            }
        }
    }
}

/// LU factorization with partial pivoting of a square matrix, kept as the
/// packed factors plus the row permutation.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    n: usize,
    /// Packed L (unit lower, below diagonal) and U (upper, including diagonal).
    lu: Vec<T>,
    /// pivot[k] = row swapped into position k at step k.
    pivot: Vec<usize>,
}

/// Factor a square matrix. Fails on an exactly zero pivot.
pub fn lu_factor<T: Scalar>(a: &Array2<T>) -> Result<LuFactors<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "lu_factor input (square)",
            expected: n,
            got: a.ncols(),
        });
    }
    let mut lu: Vec<T> = a.iter().copied().collect();
    let mut pivot = vec![0usize; n];

    for k in 0..n {
        // Partial pivot on column k.
        let mut p = k;
        let mut pmax = lu[k * n + k].abs();
        for i in (k + 1)..n {
            let m = lu[i * n + k].abs();
            if m > pmax {
                pmax = m;
                p = i;
            }
        }
        pivot[k] = p;
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let akk = lu[k * n + k];
        if akk == T::zero() {
            return Err(Error::SingularSystem { col: k });
        }
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let row_k = &head[k * n + k + 1..k * n + n];
        for i in (k + 1)..n {
            let row_i = &mut tail[(i - k - 1) * n..(i - k - 1) * n + n];
            let m = row_i[k] / akk;
            row_i[k] = m;
            if m != T::zero() {
                for (x, &y) in row_i[k + 1..n].iter_mut().zip(row_k.iter()) {
                    *x -= m * y;
                }
            }
        }
    }
    Ok(LuFactors { n, lu, pivot })
}

impl<T: Scalar> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &Array1<T>) -> Result<Array1<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "lu solve rhs",
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<T> = b.iter().copied().collect();
        for k in 0..n {
            x.swap(k, self.pivot[k]);
        }
        // Forward substitution with unit lower factor.
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut acc = x[i];
            for (j, &l) in row.iter().enumerate() {
                acc -= l * x[j];
            }
            x[i] = acc;
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        Ok(Array1::from_vec(x))
    }

    /// Solve `A^T x = b`, reusing the same factors.
    pub fn solve_transpose(&self, b: &Array1<T>) -> Result<Array1<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "lu transpose solve rhs",
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<T> = b.iter().copied().collect();
        // A^T = U^T L^T P, so solve U^T y = b, then L^T z = y, then apply P^T.
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[j * n + i] * x[j];
            }
            x[i] = acc;
        }
        for k in (0..n).rev() {
            x.swap(k, self.pivot[k]);
        }
        Ok(Array1::from_vec(x))
    }

    /// Estimate the 1-norm condition number using Hager's power method on
    /// `A^{-1}` with the already-computed factors.
    pub fn condition_estimate_1norm(&self, a_norm1: T) -> T {
        let n = self.n;
        if n == 0 {
            return T::one();
        }
        let inv_n = T::one() / T::cast_usize(n);
        let mut x = Array1::from_elem(n, inv_n);
        let mut inv_norm = T::zero();
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return T::infinity(),
            };
            inv_norm = y.iter().map(|v| v.abs()).sum();
            let xi = y.mapv(|v| {
                if v >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                }
            });
            let z = match self.solve_transpose(&xi) {
                Ok(z) => z,
                Err(_) => return T::infinity(),
            };
            let (mut j_max, mut z_max) = (0usize, T::zero());
            for (j, &zj) in z.iter().enumerate() {
                if zj.abs() > z_max {
                    z_max = zj.abs();
                    j_max = j;
                }
            }
            let zt_x: T = z.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum();
            if z_max <= zt_x {
                break;
            }
            x.fill(T::zero());
            x[j_max] = T::one();
        }
        a_norm1 * inv_norm
    }
}

/// Solve a symmetric positive-definite system by Cholesky factorization.
/// Fails with the offending column index when a pivot is not positive,
/// which is how rank deficiency of a normal-equations system surfaces.
pub fn cholesky_solve<T: Scalar>(a: &Array2<T>, b: &Array1<T>) -> Result<Array1<T>, usize> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "cholesky needs a square matrix");
    assert_eq!(b.len(), n, "rhs length mismatch");
    let mut max_diag = T::zero();
    for j in 0..n {
        max_diag = max_diag.max(a[[j, j]].abs());
    }
    let pivot_floor = max_diag * T::epsilon() * T::cast_usize(n.max(1)) * T::cast(8.0);
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > pivot_floor) {
            return Err(j);
        }
        let diag = diag.sqrt();
        l[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / diag;
        }
    }
    // L y = b, then L^T x = y.
    let mut x: Vec<T> = b.iter().copied().collect();
    for i in 0..n {
        let mut acc = x[i];
        for k in 0..i {
            acc -= l[i * n + k] * x[k];
        }
        x[i] = acc / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in (i + 1)..n {
            acc -= l[k * n + i] * x[k];
        }
        x[i] = acc / l[i * n + i];
    }
    Ok(Array1::from_vec(x))
}

/// Matrix 1-norm (max absolute column sum).
pub fn norm_1<T: Scalar>(a: &Array2<T>) -> T {
    let mut best = T::zero();
    for j in 0..a.ncols() {
        let s: T = a.column(j).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Matrix infinity-norm (max absolute row sum).
pub fn norm_inf<T: Scalar>(a: &Array2<T>) -> T {
    let mut best = T::zero();
    for row in a.rows() {
        let s: T = row.iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Euclidean norm of a vector.
pub fn norm_2<T: Scalar>(v: &Array1<T>) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

//! Dense kernels for the tiny systems that show up pointwise: symmetric
//! eigenproblems up to a few dozen unknowns and small least-squares fits.

use crate::real::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// `a` is row-major `n x n` and is overwritten. Returns eigenvalues in
/// descending order and the matching eigenvectors as rows.
pub fn symmetric_eigen<T: Real>(a: &mut [T], n: usize) -> (Vec<T>, Vec<Vec<T>>) {
    assert_eq!(a.len(), n * n);
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[i * n + i] * a[i * n + i];
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    (values, vectors)
}

/// Least-squares solution of `A x = b` for a row-major `rows x cols`
/// matrix via Householder QR. Returns `None` when `A` is numerically
/// rank deficient.
pub fn least_squares<T: Real>(a: &[T], rows: usize, cols: usize, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if rows < cols {
        return None;
    }
    let mut r = a.to_vec();
    let mut y = b.to_vec();
    let mut scale = T::zero();
    for &x in a {
        scale = scale.max(x.abs());
    }
    if scale == T::zero() {
        return None;
    }
    for k in 0..cols {
        let mut alpha = T::zero();
        for i in k..rows {
            alpha += r[i * cols + k] * r[i * cols + k];
        }
        alpha = alpha.sqrt();
        if alpha <= T::c(1e3) * T::epsilon() * scale {
            return None;
        }
        if r[k * cols + k] > T::zero() {
            alpha = -alpha;
        }
        let mut v: Vec<T> = (k..rows).map(|i| r[i * cols + k]).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..cols {
            let s: T = (k..rows).map(|i| v[i - k] * r[i * cols + j]).sum();
            let f = T::c(2.0) * s / vnorm2;
            for i in k..rows {
                r[i * cols + j] -= f * v[i - k];
            }
        }
        let s: T = (k..rows).map(|i| v[i - k] * y[i]).sum();
        let f = T::c(2.0) * s / vnorm2;
        for i in k..rows {
            y[i] -= f * v[i - k];
        }
    }
    let mut x = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let mut s = y[k];
        for j in (k + 1)..cols {
            s -= r[k * cols + j] * x[j];
        }
        x[k] = s / r[k * cols + k];
    }
    Some(x)
}

/// Orthonormalizes `vectors` in place (modified Gram-Schmidt); vectors that
/// collapse below `tol` are dropped.
pub fn gram_schmidt<T: Real>(vectors: &mut Vec<Vec<T>>, tol: T) {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for v in vectors.drain(..) {
        let mut w = v;
        for q in &out {
            let p = dot(&w, q);
            for (wi, &qi) in w.iter_mut().zip(q) {
                *wi -= p * qi;
            }
        }
        let nw = norm(&w);
        if nw > tol {
            for wi in w.iter_mut() {
                *wi /= nw;
            }
            out.push(w);
        }
    }
    *vectors = out;
}

/// Ordinary least-squares line `y = intercept + slope * x`, with the
/// coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

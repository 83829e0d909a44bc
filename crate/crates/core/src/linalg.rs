//! Allocation-free dense helpers for the small L×L systems of the online
//! updates. Matrices are row-major slices of length `n * n`.

/// Solves `a x = b` for symmetric positive-definite `a` by Cholesky.
///
/// `a` is overwritten by its lower factor and `b` by the solution. Returns
/// `false` when `a` is not numerically positive definite.
pub fn spd_solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    if n == 1 {
        if !(a[0] > 0.0) {
            return false;
        }
        b[0] /= a[0];
        return true;
    }
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// `x' A^{-1} x` for SPD `A`, using `scratch` (length `n * n + n`).
pub fn inverse_quadratic_form(a: &[f64], x: &[f64], n: usize, scratch: &mut [f64]) -> Option<f64> {
    let (m, v) = scratch.split_at_mut(n * n);
    m.copy_from_slice(a);
    v[..n].copy_from_slice(x);
    if !spd_solve_in_place(m, &mut v[..n], n) {
        return None;
    }
    Some(dot(x, &v[..n]))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out += w * v v'`.
#[inline]
pub fn add_outer(out: &mut [f64], v: &[f64], w: f64) {
    let n = v.len();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] += w * v[i] * v[j];
        }
    }
}

/// Checks symmetry and positive definiteness of a row-major matrix.
pub fn is_spd(a: &[f64], n: usize) -> bool {
    if a.len() != n * n {
        return false;
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                return false;
            }
        }
    }
    let mut m = a.to_vec();
    let mut b = vec![0.0; n];
    spd_solve_in_place(&mut m, &mut b, n)
}

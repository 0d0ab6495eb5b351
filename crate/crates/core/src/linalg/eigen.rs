//! Hermitian eigensolver: Householder reduction to real symmetric tridiagonal
//! form followed by the implicit QL iteration (after the EISPACK `tql2`
//! routine, by way of JAMA).

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Reduces a Hermitian matrix to real symmetric tridiagonal form.
///
/// Returns `(diag, offdiag, basis)` with `basis† · a · basis` tridiagonal,
/// `offdiag[i]` the real entry at `(i + 1, i)`. The basis is only accumulated
/// when `want_basis` is set.
fn tridiagonalize(
    a: &ComplexMatrix,
    want_basis: bool,
) -> (Vec<f64>, Vec<f64>, Option<ComplexMatrix>) {
    let n = a.dim();
    let mut w = a.clone();
    let mut q = want_basis.then(|| ComplexMatrix::identity(n));
    let zero = Complex64::new(0.0, 0.0);

    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let xnorm = (k + 1..n).map(|i| w[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| w[(i, k)].norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let x0 = w[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;

        let v = &mut v[..m];
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = w[(k + 1 + j, k)];
        }
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vj in v.iter_mut() {
            *vj /= vnorm;
        }

        // trailing block B <- H B H with H = I - 2 v v†
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &w.row(k + 1 + i)[k + 1..];
            *pi = row.iter().zip(v.iter()).map(|(b, vj)| b * vj).sum();
        }
        let kk: Complex64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = kk.re;
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi -= vi * kk;
        }
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                w[(k + 1 + i, k + 1 + j)] -= upd * 2.0;
            }
        }
        w[(k + 1, k)] = alpha;
        w[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            w[(i, k)] = zero;
            w[(k, i)] = zero;
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let s: Complex64 = (0..m).map(|j| q[(r, k + 1 + j)] * v[j]).sum();
                for j in 0..m {
                    q[(r, k + 1 + j)] -= s * v[j].conj() * 2.0;
                }
            }
        }
    }

    // Rotate the complex subdiagonal onto the positive reals.
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut delta = Complex64::new(1.0, 0.0);
    for i in 0..n.saturating_sub(1) {
        let b = w[(i + 1, i)];
        let r = b.norm();
        off[i] = r;
        if r > 0.0 {
            delta *= b / r;
        }
        if let Some(q) = q.as_mut() {
            for row in 0..n {
                q[(row, i + 1)] *= delta;
            }
        }
    }
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and is overwritten with ascending eigenvalues. `e`
/// holds the subdiagonal (`e[i]` couples `i` and `i + 1`). When `z` is given it
/// must be an `n × n` row-major matrix; it is multiplied on the right by the
/// eigenvector rotations and its columns are permuted with the eigenvalues.
pub fn tridiagonal_ql(d: &mut [f64], e: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(e.len() + 1, n.max(1));
    if let Some(z) = z.as_ref() {
        assert_eq!(z.len(), n * n);
    }
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
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
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_SWEEPS {
                    return Err(Error::numerical(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zi1 = z[k * n + i + 1];
                            let zi = z[k * n + i];
                            z[k * n + i + 1] = s * zi + c * zi1;
                            z[k * n + i] = c * zi - s * zi1;
                        }
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
        e[l] = 0.0;
    }

    // selection sort keeps eigenvector columns paired with eigenvalues
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(z) = z.as_deref_mut() {
                for row in 0..n {
                    z.swap(row * n + i, row * n + k);
                }
            }
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn eigvalsh(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let (mut d, e, _) = tridiagonalize(a, false);
    tridiagonal_ql(&mut d, &e, None)?;
    Ok(d)
}

/// Eigenvalues (ascending) and unitary eigenvector matrix (columns).
pub fn eigh(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    let (mut d, e, q) = tridiagonalize(a, true);
    let q = q.expect("basis requested");
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &e, Some(&mut z))?;
    // vectors = q · z with z real
    let mut vecs = ComplexMatrix::zeros(n);
    for r in 0..n {
        let qrow = q.row(r);
        for c in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += qrow[k] * z[k * n + c];
            }
            vecs[(r, c)] = acc;
        }
    }
    Ok((d, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize) -> ComplexMatrix {
        // deterministic, dense, Hermitian
        let raw = ComplexMatrix::from_fn(n, |i, j| {
            let t = (i * 7 + j * 13) as f64;
            c((t * 0.37).sin(), (t * 0.91).cos())
        });
        raw.hermitian_part()
    }

    fn check_decomposition(a: &ComplexMatrix) {
        let n = a.dim();
        let (vals, vecs) = eigh(a).unwrap();
        let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for k in 0..n {
            let v = vecs.column(k);
            let av = a.mul_vec(&v);
            let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * vals[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * n as f64 * scale, "residual {res}");
        }
        let gram = vecs.adjoint().matmul(&vecs);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
        let recon = vecs.matmul(&ComplexMatrix::from_diagonal(&vals)).matmul(&vecs.adjoint());
        assert!(recon.max_abs_diff(a) <= 1e-9 * scale);
        let only = eigvalsh(a).unwrap();
        for (x, y) in only.iter().zip(&vals) {
            assert!((x - y).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn identity_spectrum() {
        let (vals, _) = eigh(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_spectra() {
        let z = ComplexMatrix::from_diagonal(&[1.0, -1.0]);
        assert_eq!(eigvalsh(&z).unwrap(), vec![-1.0, 1.0]);
        let y = ComplexMatrix::from_vec(vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let vals = eigvalsh(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_hermitian_decompositions() {
        for n in [1, 2, 3, 5, 8, 17, 40] {
            check_decomposition(&test_matrix(n));
        }
    }

    #[test]
    fn degenerate_and_block_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[2.0, -1.0, 2.0, 0.0, 2.0]);
        check_decomposition(&a);
        let mut b = ComplexMatrix::zeros(4);
        b[(0, 1)] = c(0.0, 1.0);
        b[(1, 0)] = c(0.0, -1.0);
        b[(2, 3)] = c(3.0, 0.0);
        b[(3, 2)] = c(3.0, 0.0);
        check_decomposition(&b);
    }

    #[test]
    fn tridiagonal_hermite_jacobi_matrix() {
        // Jacobi matrix of the Hermite weight: nodes of H_3 are 0, ±sqrt(3/2)
        let mut d = vec![0.0; 3];
        let e = vec![(0.5f64).sqrt(), 1.0];
        tridiagonal_ql(&mut d, &e, None).unwrap();
        let r = 1.5f64.sqrt();
        assert!((d[0] + r).abs() < 1e-14 && d[1].abs() < 1e-14 && (d[2] - r).abs() < 1e-14);
    }
}

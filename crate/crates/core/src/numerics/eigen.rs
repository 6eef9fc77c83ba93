//! Symmetric eigendecomposition by Householder tridiagonalization followed by
//! the implicit QL algorithm, and the generalized problem `K φ = λ M φ`
//! reduced to standard form through the Cholesky factor of `M`.

use super::SymMatrix;
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with matching eigenvectors.
///
/// `vectors[k]` is the eigenvector for `values[k]`. Each vector has its
/// largest-magnitude component positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates pairs from the largest eigenvalue down.
    pub fn descending(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.values
            .iter()
            .zip(&self.vectors)
            .rev()
            .map(|(&v, vec)| (v, vec.as_slice()))
    }
}

/// Standard symmetric eigenproblem `A v = λ v`.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenPairs> {
    let n = a.n();
    let mut v = a.to_rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|r| v[r][k]).collect();
            sign_normalize(&mut col);
            col
        })
        .collect();
    Ok(EigenPairs { values, vectors })
}

/// Generalized problem `K φ = λ M φ` with `M` positive definite.
///
/// Eigenvectors are M-orthonormal: `φᵢᵀ M φⱼ = δᵢⱼ`.
pub fn generalized_sym_eig(k: &SymMatrix, m: &SymMatrix) -> Result<EigenPairs> {
    let n = k.n();
    if m.n() != n {
        return Err(Error::validation(format!(
            "stiffness is {n}x{n} but mass is {0}x{0}",
            m.n()
        )));
    }
    let l = cholesky(m)?;

    // C = L⁻¹ K L⁻ᵀ, formed column by column: first Y = L⁻¹ K, then C = L⁻¹ Yᵀ.
    let mut y = vec![vec![0.0; n]; n];
    for col in 0..n {
        let kcol: Vec<f64> = (0..n).map(|r| k.get(r, col)).collect();
        let sol = forward_substitute(&l, &kcol);
        for r in 0..n {
            y[r][col] = sol[r];
        }
    }
    let mut c = vec![0.0; n * n];
    for col in 0..n {
        // column `col` of C = L⁻¹ (row `col` of Y)ᵀ
        let sol = forward_substitute(&l, &y[col]);
        for r in 0..n {
            c[r * n + col] = sol[r];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = avg;
            c[j * n + i] = avg;
        }
    }
    let standard = sym_eig(&SymMatrix { n, data: c })?;

    let vectors = standard
        .vectors
        .iter()
        .map(|yv| {
            let mut phi = backward_substitute_transpose(&l, yv);
            sign_normalize(&mut phi);
            phi
        })
        .collect();
    Ok(EigenPairs {
        values: standard.values,
        vectors,
    })
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky(a: &SymMatrix) -> Result<Vec<Vec<f64>>> {
    let n = a.n();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut diag = a.get(j, j);
        for p in 0..j {
            diag -= l[j][p] * l[j][p];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::numeric(format!(
                "matrix is not positive definite (pivot {j} = {diag:e})"
            )));
        }
        let ljj = diag.sqrt();
        l[j][j] = ljj;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            l[i][j] = s / ljj;
        }
    }
    Ok(l)
}

/// Flips `v` so that its largest-magnitude entry is positive. The first
/// index wins among equal magnitudes.
pub fn sign_normalize(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn forward_substitute(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i][p] * x[p];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Solves `Lᵀ x = b`.
fn backward_substitute_transpose(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in (i + 1)..n {
            s -= l[p][i] * x[p];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal, and `v` the accumulated transform.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
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
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal matrix left by
/// [`tridiagonalize`]. Eigenvalues end up in `d`, eigenvectors in the
/// columns of `v`.
fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::numeric(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
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
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
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
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot, norm, Rng};

    fn random_symmetric(n: usize, rng: &mut Rng) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.add_symmetric(i, j, rng.uniform_in(-1.0, 1.0));
            }
        }
        m
    }

    fn random_spd(n: usize, rng: &mut Rng) -> SymMatrix {
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
            .collect();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|p| b[i][p] * b[j][p]).sum();
                m.add_symmetric(i, j, s + if i == j { n as f64 * 0.1 } else { 0.0 });
            }
        }
        m
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&e.vectors[i], &e.vectors[j]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two_roots() {
        // λ² − 4λ + 3 = 0
        let a = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_axis_aligned() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[5.0, 2.0, 9.0])).unwrap();
        assert_eq!(e.values, vec![2.0, 5.0, 9.0]);
        assert_eq!(e.vectors[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(e.vectors[1], vec![1.0, 0.0, 0.0]);
        assert_eq!(e.vectors[2], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn one_by_one() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[-3.5])).unwrap();
        assert_eq!(e.values, vec![-3.5]);
        assert_eq!(e.vectors, vec![vec![1.0]]);
    }

    #[test]
    fn random_residuals_and_trace() {
        let mut rng = Rng::new(11);
        for n in [2, 3, 7, 20, 60] {
            let a = random_symmetric(n, &mut rng);
            let e = sym_eig(&a).unwrap();
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (lam, v) in e.values.iter().zip(&e.vectors) {
                let av = a.mul_vec(v);
                let res: Vec<f64> = av.iter().zip(v).map(|(x, y)| x - lam * y).collect();
                assert!(norm(&res) / norm(&av) <= 1e-10, "n={n} residual {}", norm(&res));
            }
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(&e.vectors[i], &e.vectors[j]) - expect).abs() < 1e-10);
                }
            }
            let tr = a.trace();
            let sum: f64 = e.values.iter().sum();
            assert!((sum - tr).abs() <= 1e-9 * tr.abs().max(1.0));
        }
    }

    #[test]
    fn generalized_identity_pair() {
        let i2 = SymMatrix::identity(2);
        let e = generalized_sym_eig(&i2, &i2).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn generalized_two_dof_chain() {
        let k = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let e = generalized_sym_eig(&k, &SymMatrix::identity(2)).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((e.values[0] - (3.0 - s5) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (3.0 + s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_homogeneity() {
        let mut rng = Rng::new(3);
        let k = random_spd(6, &mut rng);
        let m = random_spd(6, &mut rng);
        let base = generalized_sym_eig(&k, &m).unwrap();
        let scaled = generalized_sym_eig(&k.scaled(3.0), &m).unwrap();
        for (a, b) in base.values.iter().zip(&scaled.values) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs());
        }
        for (a, b) in base.vectors.iter().zip(&scaled.vectors) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generalized_m_orthonormal() {
        let mut rng = Rng::new(5);
        let k = random_spd(12, &mut rng);
        let m = random_spd(12, &mut rng);
        let e = generalized_sym_eig(&k, &m).unwrap();
        for i in 0..12 {
            let mi = m.mul_vec(&e.vectors[i]);
            for j in 0..12 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&e.vectors[j], &mi) - expect).abs() < 1e-10);
            }
            let kphi = k.mul_vec(&e.vectors[i]);
            let res: Vec<f64> = kphi
                .iter()
                .zip(&mi)
                .map(|(a, b)| a - e.values[i] * b)
                .collect();
            assert!(norm(&res) <= 1e-8 * norm(&kphi));
        }
    }

    #[test]
    fn generalized_errors() {
        let k = SymMatrix::identity(2);
        let not_pd = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(generalized_sym_eig(&k, &not_pd), Err(Error::Numeric(_))));
        assert!(matches!(
            generalized_sym_eig(&k, &SymMatrix::identity(3)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.2, -0.9, 0.1];
        sign_normalize(&mut v);
        assert_eq!(v, vec![-0.2, 0.9, -0.1]);
    }
}

//! Dense helpers for the small matrices that show up here: boolean
//! products, Perron eigenpairs, exact determinants and stationary solves.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type BoolMatrix = Vec<Vec<bool>>;

pub fn bool_mul(a: &BoolMatrix, b: &BoolMatrix) -> BoolMatrix {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    out[i][j] |= b[k][j];
                }
            }
        }
    }
    out
}

pub fn all_positive(a: &BoolMatrix) -> bool {
    a.iter().all(|row| row.iter().all(|&x| x))
}

/// Natural log of an arbitrary-precision integer. `ln(0)` is `-inf`.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Product `lo * (lo+1) * ... * hi` by binary splitting.
fn range_product(lo: u64, hi: u64) -> BigUint {
    if lo > hi {
        return BigUint::one();
    }
    if hi - lo < 16 {
        let mut acc = BigUint::one();
        for v in lo..=hi {
            acc *= v;
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

pub fn factorial(n: u64) -> BigUint {
    range_product(2, n)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = sign * &a[n - 1][n - 1];
    if d.is_negative() && d.abs().is_zero() {
        BigInt::zero()
    } else {
        d
    }
}

/// Leading eigenvalue with right and left eigenvectors of a nonnegative
/// irreducible matrix. Iterates on `A + I` so periodic matrices converge too.
pub fn perron(a: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<f64>) {
    let n = a.len();
    let shifted: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[i][j] + if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let iterate = |transpose: bool| -> (f64, Vec<f64>) {
        let mut v = vec![1.0 / n as f64; n];
        let mut lambda = 0.0;
        for _ in 0..100_000 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    let c = if transpose { shifted[j][i] } else { shifted[i][j] };
                    w[i] += c * v[j];
                }
            }
            let norm: f64 = w.iter().sum();
            for x in w.iter_mut() {
                *x /= norm;
            }
            let diff: f64 = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).sum();
            v = w;
            lambda = norm;
            if diff < 1e-16 {
                break;
            }
        }
        (lambda - 1.0, v)
    };
    let (lambda, right) = iterate(false);
    let (_, left) = iterate(true);
    (lambda, right, left)
}

/// Solves `pi P = pi`, `sum pi = 1` by Gaussian elimination with partial
/// pivoting. Returns `None` if the system is singular.
pub fn stationary(p: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = p.len();
    // rows: (P^T - I) pi = 0, last row replaced by sum = 1
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        m[n - 1][j] = 1.0;
    }
    m[n - 1][n] = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Integer matrix power applied to the all-ones vector: counts of paths.
pub fn count_paths(adj: &BoolMatrix, steps: usize) -> BigUint {
    let n = adj.len();
    let mut v = vec![BigUint::one(); n];
    for _ in 0..steps {
        let mut w = vec![BigUint::zero(); n];
        for i in 0..n {
            for j in 0..n {
                if adj[i][j] {
                    w[i] += &v[j];
                }
            }
        }
        v = w;
    }
    v.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_hand_determinants() {
        let m =
            |rows: &[&[i64]]| -> Vec<Vec<BigInt>> { rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect() };
        assert_eq!(det_bareiss(&m(&[&[2, 1], &[1, 1]])), BigInt::from(1));
        assert_eq!(det_bareiss(&m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(det_bareiss(&m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])), BigInt::from(-3));
        assert_eq!(det_bareiss(&m(&[&[1, 2], &[2, 4]])), BigInt::from(0));
    }

    #[test]
    fn golden_perron() {
        let (l, r, _) = perron(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((l - phi).abs() < 1e-12);
        assert!((r[0] / r[1] - phi).abs() < 1e-9);
    }

    #[test]
    fn big_ln_large() {
        let x = BigUint::one() << 5000usize;
        assert!((big_ln(&x) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(big_ln(&factorial(5)), 120f64.ln());
    }
}

//! Small dense symmetric eigen-decomposition (cyclic Jacobi).

use crate::scalar::Real;

/// Eigen-decomposition of a symmetric `n × n` matrix stored row-major.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as the
/// columns of a row-major `n × n` matrix.
pub fn sym_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let diag: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
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
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_and_2x2() {
        let (l, _) = sym_eigen(&[3.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(l, vec![3.0, 1.0]);
        let (l, v) = sym_eigen(&[2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((l[0] - 3.0).abs() < 1e-14 && (l[1] - 1.0).abs() < 1e-14);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn reconstructs(vals in proptest::collection::vec(-5.0f64..5.0, 25)) {
            let n = 5;
            let mut a = vec![0.0; 25];
            for i in 0..n { for j in 0..n { a[i*n+j] = vals[i*n+j] + vals[j*n+i]; } }
            let (l, v) = sym_eigen(&a, n);
            for i in 0..n {
                for j in 0..n {
                    let r: f64 = (0..n).map(|k| v[i*n+k] * l[k] * v[j*n+k]).sum();
                    prop_assert!((r - a[i*n+j]).abs() < 1e-10);
                }
            }
            for w in l.windows(2) { prop_assert!(w[0] >= w[1]); }
        }
    }
}

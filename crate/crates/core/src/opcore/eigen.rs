//! Implicit QL for symmetric tridiagonal matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `offdiag`, in ascending order. When `first_row` is set the
/// first component of each normalized eigenvector is returned alongside.
pub(crate) fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64], first_row: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    assert!(n >= 1 && offdiag.len() + 1 == n, "offdiag must have one entry fewer than diag");
    let mut d = diag.to_vec();
    let mut e: Vec<f64> = offdiag.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut z: Option<Vec<f64>> = first_row.then(|| {
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        z
    });

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::numeric("opcore", format!("QL iteration did not converge for eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let first = z.map(|z| order.iter().map(|&i| z[i]).collect());
    Ok((values, first))
}

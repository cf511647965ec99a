//! Householder QR least squares.

/// Columns whose diagonal of R falls below this fraction of the original
/// column norm are treated as linearly dependent on earlier columns.
const RANK_TOLERANCE: f64 = 1e-10;

/// Outcome of a least-squares solve that hit a rank-deficient design.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDeficiency {
    /// Indices of columns lying in the span of the columns before them.
    pub dependent_columns: Vec<usize>,
}

/// Minimizes ‖A·β − y‖² for a row-major `n × p` matrix with `n ≥ p`.
///
/// The factorization works on a column-major copy; the normal equations are
/// never formed.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, RankDeficiency> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    assert!(n >= p, "least_squares needs at least as many rows as columns");
    assert_eq!(y.len(), n);

    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut rhs = y.to_vec();
    let mut dependent = Vec::new();
    // pivot row; only advances on independent columns
    let mut r = 0;

    for k in 0..p {
        let alpha = {
            let tail = &cols[k][r..];
            let s = norm(tail);
            if tail[0] > 0.0 {
                -s
            } else {
                s
            }
        };
        if alpha.abs() <= RANK_TOLERANCE * norms[k] || norms[k] == 0.0 {
            dependent.push(k);
            continue;
        }
        // H = I - 2 v vᵀ / (vᵀv) with v = x - alpha e1
        let mut v: Vec<f64> = cols[k][r..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        if vtv > 0.0 {
            for col in cols.iter_mut().skip(k) {
                reflect(&v, vtv, &mut col[r..]);
            }
            reflect(&v, vtv, &mut rhs[r..]);
        }
        r += 1;
    }
    if !dependent.is_empty() {
        return Err(RankDeficiency {
            dependent_columns: dependent,
        });
    }

    // back substitution on the upper triangle
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..p {
            acc -= cols[j][i] * beta[j];
        }
        beta[i] = acc / cols[i][i];
    }
    Ok(beta)
}

fn reflect(v: &[f64], vtv: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vtv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

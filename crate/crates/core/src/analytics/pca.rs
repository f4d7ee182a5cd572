use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

/// Principal components of a square data matrix whose rows are observations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pca {
    /// Unit eigenvectors of the covariance, one per component, by descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Row scores on every component.
    pub scores: Vec<Vec<f64>>,
}

impl Pca {
    /// First two scores per row.
    pub fn plane(&self) -> Vec<(f64, f64)> {
        self.scores
            .iter()
            .map(|r| (r.first().copied().unwrap_or(0.0), r.get(1).copied().unwrap_or(0.0)))
            .collect()
    }
}

/// Column-centers `rows` and eigen-decomposes its covariance.
///
/// Each component's sign is fixed so that its largest-magnitude entry is
/// positive; near-zero eigenvalues from rounding are clamped to 0.
pub fn pca(rows: &[Vec<f64>]) -> Pca {
    let m = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if m == 0 || d == 0 {
        return Pca {
            components: Vec::new(),
            explained_variance: Vec::new(),
            scores: vec![Vec::new(); m],
        };
    }
    let mut x = DMatrix::from_fn(m, d, |i, j| rows[i][j]);
    for j in 0..d {
        let mean = x.column(j).mean();
        for i in 0..m {
            x[(i, j)] -= mean;
        }
    }
    let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
    let cov = (x.transpose() * &x) / denom;
    let eigen = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(d);
    let mut explained_variance = Vec::with_capacity(d);
    for &k in &order {
        let mut v: Vec<f64> = eigen.eigenvectors.column(k).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map_or(1.0, |(_, x)| x);
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_variance.push(eigen.eigenvalues[k].max(0.0));
    }
    let scores = (0..m)
        .map(|i| {
            components
                .iter()
                .map(|c| (0..d).map(|j| x[(i, j)] * c[j]).sum())
                .collect()
        })
        .collect();
    Pca {
        components,
        explained_variance,
        scores,
    }
}

//! Fixed-size 4x4 helpers for proposal covariances.


pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn is_symmetric(m: &Mat4, tol: f64) -> bool {
    (0..4).all(|i| (0..i).all(|j| (m[i][j] - m[j][i]).abs() <= tol * (1.0 + m[i][j].abs())))
}

/// Lower-triangular `L` with `L L^T = m`, or `None` if `m` is not
/// positive definite.
pub fn cholesky(m: &Mat4) -> Option<Mat4> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// `L z` for lower-triangular `L`.
pub fn lower_mul(l: &Mat4, z: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..=i).map(|k| l[i][k] * z[k]).sum();
    }
    out
}

pub fn scale_add_ridge(m: &Mat4, scale: f64, ridge: f64) -> Mat4 {
    let mut out = *m;
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += ridge;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Running mean and covariance (Welford), with the `n - 1` divisor.
#[derive(Debug, Clone, Default)]
pub struct RunningCovariance {
    n: usize,
    mean: Vec4,
    /// Sum of outer products of deviations.
    m2: Mat4,
}

impl RunningCovariance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: &Vec4) {
        self.n += 1;
        let n = self.n as f64;
        let mut delta = [0.0; 4];
        for i in 0..4 {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..4 {
            let after = x[i] - self.mean[i];
            for j in 0..4 {
                self.m2[i][j] += after * delta[j];
            }
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> Vec4 {
        self.mean
    }

    /// Sample covariance; all zeros with fewer than two points.
    pub fn covariance(&self) -> Mat4 {
        if self.n < 2 {
            return [[0.0; 4]; 4];
        }
        let d = (self.n - 1) as f64;
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                // Average the two triangles so the result is exactly symmetric.
                c[i][j] = 0.5 * (self.m2[i][j] + self.m2[j][i]) / d;
            }
        }
        c
    }
}

/// Two-pass sample covariance of `rows`, `n - 1` divisor.
pub fn batch_covariance(rows: &[Vec4]) -> Mat4 {
    let n = rows.len();
    if n < 2 {
        return [[0.0; 4]; 4];
    }
    let mut mean = [0.0; 4];
    for r in rows {
        for i in 0..4 {
            mean[i] += r[i];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut c = [[0.0; 4]; 4];
    for r in rows {
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn cholesky_reconstructs() {
        let m = [
            [4.0, 2.0, 0.4, 0.0],
            [2.0, 5.0, 1.0, 0.3],
            [0.4, 1.0, 3.0, -0.5],
            [0.0, 0.3, -0.5, 2.0],
        ];
        let l = cholesky(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = (0..4).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - m[i][j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[[0.0; 4]; 4]).is_none());
        assert!(is_symmetric(&m, 0.0));
    }

    #[test]
    fn running_matches_batch() {
        let rows: Vec<Vec4> = (0..50)
            .map(|i| {
                let t = i as f64;
                [t.sin(), 1e3 + t.cos(), t * 0.1, (t * 0.37).sin() * 1e-3]
            })
            .collect();
        let mut rc = RunningCovariance::new();
        for r in &rows {
            rc.push(r);
        }
        let a = rc.covariance();
        let b = batch_covariance(&rows);
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-12);
            }
        }
        assert_eq!(RunningCovariance::new().covariance(), [[0.0; 4]; 4]);
    }
}

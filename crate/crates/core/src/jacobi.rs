//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Rotations act on rows only. The matching column update is implied by
//! symmetry: each row carries a stamp of the last rotation that touched it,
//! and entry `(i, j)` is read from whichever of rows `i`, `j` is newer. A row
//! is brought up to date just before it is rotated. This keeps every inner
//! loop contiguous, which matters for the 2001 x 2001 oracle matrices.
//!
//! A pair is rotated while `|a_pq| > REL_TOL * sqrt(|a_pp a_qq|)`. Measuring
//! against the diagonal rather than the whole matrix keeps small eigenvalues
//! of positive definite input accurate to relative precision.

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal entries are negligible below this fraction of `sqrt(|a_pp a_qq|)`.
pub const REL_TOL: f64 = 1e-15;
const BLOCK: usize = 32;

/// Row-major square symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// From row-major data; rejects non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = SymMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if a != b {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
        self.data[j * self.n + i] = x;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Eigenpairs sorted by ascending eigenvalue.
///
/// `vectors[r]` is the unit eigenvector for `values[r]`, with its first
/// nonzero component made positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl Eigen {
    /// `max |v_r . v_s - delta_rs|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (r, vr) in self.vectors.iter().enumerate() {
            for (s, vs) in self.vectors.iter().enumerate().skip(r) {
                let dot: f64 = vr.iter().zip(vs).map(|(a, b)| a * b).sum();
                let target = if r == s { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `max |sum_r v_r[i] v_r[j] - delta_ij|`, the completeness counterpart.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.values.len();
        let mut worst = 0.0_f64;
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc.iter_mut().for_each(|x| *x = 0.0);
            for v in &self.vectors {
                let vi = v[i];
                for (a, &vj) in acc.iter_mut().zip(v) {
                    *a += vi * vj;
                }
            }
            for (j, &a) in acc.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a - target).abs());
            }
        }
        worst
    }

    /// `max_r ||A v_r - lambda_r v_r|| / ||A||_F`.
    pub fn residual(&self, a: &SymMatrix) -> f64 {
        let n = a.dim();
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let mut sq = 0.0;
            for i in 0..n {
                let row = &a.data[i * n..(i + 1) * n];
                let av: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
                sq += (av - lambda * v[i]).powi(2);
            }
            worst = worst.max(sq.sqrt() / scale);
        }
        worst
    }
}

struct Work {
    n: usize,
    a: Vec<f64>,
    v: Vec<f64>,
    stamp: Vec<u64>,
    now: u64,
}

impl Work {
    fn sync_row(&mut self, p: usize) {
        let n = self.n;
        let sp = self.stamp[p];
        for j in 0..n {
            if self.stamp[j] > sp {
                self.a[p * n + j] = self.a[j * n + p];
            }
        }
    }

    fn sync_all(&mut self) {
        // Newest rows first, so each row copies from already-current rows.
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.stamp[i]));
        for &p in &order {
            self.sync_row(p);
        }
        self.now += 1;
        self.stamp.iter_mut().for_each(|s| *s = self.now);
    }

    fn entry(&self, p: usize, q: usize) -> f64 {
        let n = self.n;
        if self.stamp[q] > self.stamp[p] {
            self.a[q * n + p]
        } else {
            self.a[p * n + q]
        }
    }

    /// `(off-diagonal norm, full norm)`; rows must be synced.
    fn norms(&self) -> (f64, f64) {
        let n = self.n;
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = self.a[i * n + j];
                if i == j {
                    diag += x * x;
                } else {
                    off += x * x;
                }
            }
        }
        (off.sqrt(), (off + diag).sqrt())
    }

    fn rotate(&mut self, p: usize, q: usize, apq: f64) {
        self.sync_row(p);
        self.sync_row(q);
        let n = self.n;
        let app = self.a[p * n + p];
        let aqq = self.a[q * n + q];
        let theta = (aqq - app) / (2.0 * apq);
        let t = if theta == 0.0 {
            1.0
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        rotate_rows(&mut self.a, n, p, q, c, s);
        self.a[p * n + p] = app - t * apq;
        self.a[q * n + q] = aqq + t * apq;
        self.a[p * n + q] = 0.0;
        self.a[q * n + p] = 0.0;
        self.now += 1;
        self.stamp[p] = self.now;
        self.stamp[q] = self.now;
        rotate_rows(&mut self.v, n, p, q, c, s);
    }
}

/// `p' = c p - s q`, `q' = s p + c q` on rows `p < q`.
fn rotate_rows(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = m.split_at_mut(q * n);
    let rp = &mut lo[p * n..(p + 1) * n];
    let rq = &mut hi[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Full eigendecomposition; the input is not modified.
pub fn jacobi_eigen(matrix: &SymMatrix) -> Result<Eigen> {
    let n = matrix.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if matrix.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut w = Work {
        n,
        a: matrix.data.clone(),
        v,
        stamp: vec![0; n],
        now: 0,
    };

    let mut sweeps = 0;
    loop {
        let mut rotations = 0usize;
        let mut p0 = 0;
        while p0 + 1 < n {
            let p1 = (p0 + BLOCK).min(n - 1);
            for q in p0 + 1..n {
                for p in p0..p1.min(q) {
                    let apq = w.entry(p, q);
                    let scale = w.a[p * n + p].abs().sqrt() * w.a[q * n + q].abs().sqrt();
                    if apq != 0.0 && apq.abs() > REL_TOL * scale {
                        w.rotate(p, q, apq);
                        rotations += 1;
                    }
                }
            }
            p0 = p1;
        }
        w.sync_all();
        if rotations == 0 {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            let (off, norm) = w.norms();
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off / norm,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.a[i * n + i].total_cmp(&w.a[j * n + j]));
    let values = order.iter().map(|&i| w.a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut row = w.v[i * n..(i + 1) * n].to_vec();
            if row.iter().find(|x| **x != 0.0).is_some_and(|&x| x < 0.0) {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            row
        })
        .collect();
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

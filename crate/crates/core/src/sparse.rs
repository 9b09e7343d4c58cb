//! Sparse helpers on top of `nalgebra_sparse`: block extraction, products
//! into slices, and an LDL^T factorization for symmetric quasi-definite
//! matrices (SPD blocks on the diagonal with opposite signs).  No pivoting is
//! needed for that class, so a fill-reducing ordering plus the classical
//! up-looking elimination is enough.

use std::collections::VecDeque;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::CoreError;

pub type Csr = CsrMatrix<f64>;

/// `y = a x`
pub fn mul_into(a: &Csr, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(a.ncols(), x.len());
    debug_assert_eq!(a.nrows(), y.len());
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for p in off[i]..off[i + 1] {
            s += vals[p] * x[cols[p]];
        }
        *yi = s;
    }
}

/// `y += alpha * a x`
pub fn mul_add(a: &Csr, alpha: f64, x: &[f64], y: &mut [f64]) {
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for p in off[i]..off[i + 1] {
            s += vals[p] * x[cols[p]];
        }
        *yi += alpha * s;
    }
}

pub fn mul(a: &Csr, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    mul_into(a, x, &mut y);
    y
}

/// `a^T y`
pub fn mul_t(a: &Csr, y: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; a.ncols()];
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (i, &yi) in y.iter().enumerate() {
        for p in off[i]..off[i + 1] {
            x[cols[p]] += vals[p] * yi;
        }
    }
    x
}

pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Csr {
    let mut coo = CooMatrix::new(nrows, ncols);
    for &(i, j, v) in trip {
        coo.push(i, j, v);
    }
    CsrMatrix::from(&coo)
}

/// Sub-matrix `a[rows, cols]`; `cols` given as a lookup from old column to new.
pub fn extract(a: &Csr, rows: &[usize], col_map: &[Option<usize>], ncols: usize) -> Csr {
    let mut trip = Vec::new();
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (ni, &i) in rows.iter().enumerate() {
        for p in off[i]..off[i + 1] {
            if let Some(nj) = col_map[cols[p]] {
                if vals[p] != 0.0 {
                    trip.push((ni, nj, vals[p]));
                }
            }
        }
    }
    from_triplets(rows.len(), ncols, &trip)
}

pub fn index_map(n: usize, keep: &[usize]) -> Vec<Option<usize>> {
    let mut m = vec![None; n];
    for (new, &old) in keep.iter().enumerate() {
        m[old] = Some(new);
    }
    m
}

pub fn to_dense(a: &Csr) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplet_iter() {
        m[(i, j)] += *v;
    }
    m
}

pub fn max_abs(a: &Csr) -> f64 {
    a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`, started
/// from a pseudo-peripheral vertex of every connected component.
pub fn rcm(a: &Csr) -> Vec<usize> {
    let n = a.nrows();
    let adj = |i: usize| &a.col_indices()[a.row_offsets()[i]..a.row_offsets()[i + 1]];
    let degree: Vec<usize> = (0..n).map(|i| adj(i).len()).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_last = |start: usize, seen: &mut Vec<bool>| -> (usize, usize) {
        let mut q = VecDeque::from([(start, 0usize)]);
        seen[start] = true;
        let mut last = (start, 0);
        let mut touched = vec![start];
        while let Some((v, lvl)) = q.pop_front() {
            if lvl > last.1 || (lvl == last.1 && degree[v] < degree[last.0]) {
                last = (v, lvl);
            }
            for &w in adj(v) {
                if !seen[w] {
                    seen[w] = true;
                    touched.push(w);
                    q.push_back((w, lvl + 1));
                }
            }
        }
        for t in touched {
            seen[t] = false;
        }
        last
    };
    let mut scratch = vec![false; n];
    for root in 0..n {
        if placed[root] {
            continue;
        }
        let mut start = root;
        let mut ecc = 0;
        for _ in 0..4 {
            let (far, e) = bfs_last(start, &mut scratch);
            if e <= ecc && start != root {
                break;
            }
            ecc = e;
            start = far;
        }
        let mut q = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj(v).iter().copied().filter(|&w| !placed[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                placed[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// `P A P^T = L D L^T` with unit lower-triangular `L` stored by columns.
#[derive(Clone, Debug)]
pub struct Ldl {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Factorizes a symmetric matrix given in full (both triangles) storage.
    pub fn factor(a: &Csr) -> Result<Self, CoreError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(CoreError::Solver("LDL^T of a non-square matrix".into()));
        }
        let perm = rcm(a);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // upper triangle of the permuted matrix, by columns: column k lists (i <= k, value)
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (old_i, old_j, &v) in a.triplet_iter() {
            let (i, j) = (iperm[old_i], iperm[old_j]);
            if i <= j {
                cols[j].push((i, v));
            }
        }
        // symbolic: elimination tree and column counts
        let none = usize::MAX;
        let mut parent = vec![none; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &(i0, _) in &cols[k] {
                let mut i = i0;
                while i < k && flag[i] != k {
                    if parent[i] == none {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|x| *x = 0);
        flag.iter_mut().for_each(|x| *x = none);
        let scale = max_abs(a).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for &(i0, v) in &cols[k] {
                y[i0] += v;
                let mut len = 0;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let p2 = lp[i] + lnz[i];
                for p in lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if !(d[k].abs() > 1e-14 * scale) {
                return Err(CoreError::Solver(format!("zero pivot {} at step {k} of LDL^T", d[k])));
            }
        }
        Ok(Ldl { n, perm, lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Number of negative pivots (the inertia of a quasi-definite matrix).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        debug_assert_eq!(b.len(), self.n);
        work.clear();
        work.extend(self.perm.iter().map(|&p| b[p]));
        let x = work.as_mut_slice();
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for j in 0..self.n {
            x[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let mut work = Vec::with_capacity(self.n);
        self.solve_in_place(&mut x, &mut work);
        x
    }
}

/// `|a x - b| / |b|`, the residual report for solver checks.
pub fn relative_residual(a: &Csr, x: &[f64], b: &[f64]) -> f64 {
    let ax = mul(a, x);
    let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

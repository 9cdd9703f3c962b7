//! Symmetric sparse matrices and a profile (skyline) LDL^T direct solver
//! with reverse Cuthill-McKee reordering. All systems this crate produces
//! are symmetric positive definite; the factorization fails loudly if a
//! pivot is not.

use crate::error::{Error, Result};

/// Symmetric matrix in CSR form (both triangles stored, rows sorted).
#[derive(Debug, Clone)]
pub struct SymCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl SymCsr {
    /// Build from (row, col, value) triplets, summing duplicates. Triplets
    /// should cover both symmetric halves (assembly emits them that way).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut entries: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        let mut cursor = counts.clone();
        for &(r, c, v) in triplets {
            entries[cursor[r]] = (c, v);
            cursor[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let slice = &mut entries[counts[i]..counts[i + 1]];
            slice.sort_unstable_by_key(|e| e.0);
            let mut j = 0;
            while j < slice.len() {
                let c = slice[j].0;
                let mut v = 0.0;
                while j < slice.len() && slice[j].0 == c {
                    v += slice[j].1;
                    j += 1;
                }
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        SymCsr {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.val[k] * y[self.col[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// `x^T A x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `ca * a + cb * b` with pattern union.
    pub fn add_scaled(a: &SymCsr, ca: f64, b: &SymCsr, cb: f64) -> SymCsr {
        assert_eq!(a.n, b.n);
        let mut row_ptr = Vec::with_capacity(a.n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for i in 0..a.n {
            let (mut ka, ea) = (a.row_ptr[i], a.row_ptr[i + 1]);
            let (mut kb, eb) = (b.row_ptr[i], b.row_ptr[i + 1]);
            while ka < ea || kb < eb {
                let canext = if ka < ea { a.col[ka] } else { usize::MAX };
                let cbnext = if kb < eb { b.col[kb] } else { usize::MAX };
                if canext < cbnext {
                    col.push(canext);
                    val.push(ca * a.val[ka]);
                    ka += 1;
                } else if cbnext < canext {
                    col.push(cbnext);
                    val.push(cb * b.val[kb]);
                    kb += 1;
                } else {
                    col.push(canext);
                    val.push(ca * a.val[ka] + cb * b.val[kb]);
                    ka += 1;
                    kb += 1;
                }
            }
            row_ptr.push(col.len());
        }
        SymCsr {
            n: a.n,
            row_ptr,
            col,
            val,
        }
    }

    /// Restrict to the index set `keep` (returns the submatrix and the kept
    /// original indices in order).
    pub fn restrict(&self, keep: &[bool]) -> (SymCsr, Vec<usize>) {
        assert_eq!(keep.len(), self.n);
        let kept: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let mut pos = vec![usize::MAX; self.n];
        for (p, &i) in kept.iter().enumerate() {
            pos[i] = p;
        }
        let mut row_ptr = vec![0usize];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for &i in &kept {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k];
                if keep[j] {
                    col.push(pos[j]);
                    val.push(self.val[k]);
                }
            }
            row_ptr.push(col.len());
        }
        (
            SymCsr {
                n: kept.len(),
                row_ptr,
                col,
                val,
            },
            kept,
        )
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm_order(a: &SymCsr) -> Vec<usize> {
    let n = a.n;
    if n == 0 {
        return Vec::new();
    }
    let degree = |i: usize| a.row_ptr[i + 1] - a.row_ptr[i];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    // BFS from a pseudo-peripheral start in each connected component.
    let bfs_far = |start: usize, visited: &[bool]| -> usize {
        let mut seen = visited.to_vec();
        let mut frontier = vec![start];
        seen[start] = true;
        let mut last = start;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &u in &frontier {
                for k in a.row_ptr[u]..a.row_ptr[u + 1] {
                    let v = a.col[k];
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if let Some(&u) = next.last() {
                last = u;
            }
            frontier = next;
        }
        last
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let far = bfs_far(bfs_far(seed, &visited), &visited);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(far);
        visited[far] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = (a.row_ptr[u]..a.row_ptr[u + 1])
                .map(|k| a.col[k])
                .filter(|&v| !visited[v])
                .collect();
            nbrs.sort_unstable_by_key(|&v| (degree(v), v));
            for v in nbrs {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Profile LDL^T factorization after RCM reordering.
#[derive(Debug, Clone)]
pub struct SkylineFactor {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// First column of each (permuted) row's profile.
    col_start: Vec<usize>,
    /// Offset of row i's strictly-lower entries in `low`.
    ptr: Vec<usize>,
    low: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineFactor {
    /// Factor an SPD matrix. Fails with a solver error on a nonpositive
    /// pivot.
    pub fn new(a: &SymCsr) -> Result<Self> {
        let n = a.n;
        let perm = rcm_order(a);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // Profile: for permuted row i, the smallest permuted column index
        // among entries at or below the diagonal.
        let mut col_start = vec![0usize; n];
        for i in 0..n {
            let old = perm[i];
            let mut cs = i;
            for k in a.row_ptr[old]..a.row_ptr[old + 1] {
                let j = iperm[a.col[k]];
                if j < cs {
                    cs = j;
                }
            }
            col_start[i] = cs;
        }
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + (i - col_start[i]);
        }
        let mut low = vec![0.0f64; ptr[n]];
        let mut diag = vec![0.0f64; n];

        // Scatter A into the profile.
        for i in 0..n {
            let old = perm[i];
            for k in a.row_ptr[old]..a.row_ptr[old + 1] {
                let j = iperm[a.col[k]];
                if j == i {
                    diag[i] = a.val[k];
                } else if j < i {
                    low[ptr[i] + (j - col_start[i])] = a.val[k];
                }
            }
        }

        // Row-oriented LDL^T within the profile.
        for i in 0..n {
            let cs_i = col_start[i];
            for j in cs_i..i {
                let cs_j = col_start[j];
                let lo = cs_i.max(cs_j);
                let mut sum = low[ptr[i] + (j - cs_i)];
                for k in lo..j {
                    sum -= low[ptr[i] + (k - cs_i)] * low[ptr[j] + (k - cs_j)] * diag[k];
                }
                low[ptr[i] + (j - cs_i)] = sum / diag[j];
            }
            let mut d = diag[i];
            for k in cs_i..i {
                let l = low[ptr[i] + (k - cs_i)];
                d -= l * l * diag[k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::solver(format!(
                    "nonpositive pivot {d:.3e} at row {i} of {n}: matrix not positive definite"
                )));
            }
            diag[i] = d;
        }

        Ok(SkylineFactor {
            n,
            perm,
            col_start,
            ptr,
            low,
            diag,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // Forward: L y = b.
        for i in 0..n {
            let cs = self.col_start[i];
            let base = self.ptr[i];
            let mut acc = y[i];
            for k in cs..i {
                acc -= self.low[base + (k - cs)] * y[k];
            }
            y[i] = acc;
        }
        // Diagonal.
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        // Backward: L^T x = y.
        for i in (0..n).rev() {
            let cs = self.col_start[i];
            let base = self.ptr[i];
            let xi = y[i];
            for k in cs..i {
                y[k] -= self.low[base + (k - cs)] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

//! Sparse left-looking LU factorization of a simplex basis with
//! product-form eta updates.

use super::field::Field;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NONE: usize = usize::MAX;

/// Sparse column as (row, value) pairs.
pub type SparseCol<F> = Vec<(usize, F)>;

pub struct Factor<F: Field> {
    m: usize,
    /// L column per step (rows other than the pivot, already divided by the pivot).
    l: Vec<SparseCol<F>>,
    /// U column per step: off-diagonal (step, value) pairs.
    u: Vec<Vec<(usize, F)>>,
    diag: Vec<F>,
    /// Pivot row of each step.
    prow: Vec<usize>,
    /// Basis position factorized at each step.
    qpos: Vec<usize>,
    etas: Vec<(usize, SparseCol<F>, F)>,
    base_nnz: usize,
    eta_nnz: usize,
}

#[derive(Debug)]
pub struct Singular {
    /// Basis positions that could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot.
    pub rows: Vec<usize>,
}

impl<F: Field> Factor<F> {
    /// Factorizes the basis whose columns are `cols[pos]`.
    pub fn new(m: usize, cols: &[SparseCol<F>], pivot_tol: &F) -> Result<Self, Singular> {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols[p].len(), p));
        let mut f = Factor {
            m,
            l: Vec::with_capacity(m),
            u: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
            prow: Vec::with_capacity(m),
            qpos: Vec::with_capacity(m),
            etas: Vec::new(),
            base_nnz: 0,
            eta_nnz: 0,
        };
        let mut pinv = vec![NONE; m];
        let mut work: Vec<F> = vec![F::zero(); m];
        let mut mark = vec![false; m];
        let mut failed = Vec::new();
        for &pos in &order {
            let mut pattern: Vec<usize> = Vec::new();
            let mut heap = BinaryHeap::new();
            for (r, v) in &cols[pos] {
                if !mark[*r] {
                    mark[*r] = true;
                    pattern.push(*r);
                    if pinv[*r] != NONE {
                        heap.push(Reverse(pinv[*r]));
                    }
                }
                work[*r] = work[*r].plus(v);
            }
            while let Some(Reverse(t)) = heap.pop() {
                let xr = work[f.prow[t]].clone();
                if xr.is_zero_exact() {
                    continue;
                }
                for (r, lv) in &f.l[t] {
                    if !mark[*r] {
                        mark[*r] = true;
                        pattern.push(*r);
                        if pinv[*r] != NONE {
                            heap.push(Reverse(pinv[*r]));
                        }
                    }
                    work[*r].sub_mul(lv, &xr);
                }
            }
            let mut best: Option<(usize, F)> = None;
            for &r in &pattern {
                if pinv[r] == NONE {
                    let a = work[r].magnitude();
                    if a > *pivot_tol {
                        let better = match &best {
                            None => true,
                            Some((br, bv)) => {
                                if F::EXACT {
                                    r < *br
                                } else {
                                    a > *bv || (a == *bv && r < *br)
                                }
                            }
                        };
                        if better {
                            best = Some((r, a));
                        }
                    }
                }
            }
            let Some((pr, _)) = best else {
                for &r in &pattern {
                    work[r] = F::zero();
                    mark[r] = false;
                }
                failed.push(pos);
                continue;
            };
            let step = f.prow.len();
            let piv = work[pr].clone();
            let mut ucol = Vec::new();
            let mut lcol = Vec::new();
            for &r in &pattern {
                let v = std::mem::replace(&mut work[r], F::zero());
                mark[r] = false;
                if r == pr || v.is_zero_exact() {
                    continue;
                }
                if pinv[r] != NONE {
                    ucol.push((pinv[r], v));
                } else {
                    lcol.push((r, v.over(&piv)));
                }
            }
            pinv[pr] = step;
            f.prow.push(pr);
            f.qpos.push(pos);
            f.diag.push(piv);
            f.u.push(ucol);
            f.l.push(lcol);
        }
        if !failed.is_empty() {
            let rows = (0..m).filter(|&r| pinv[r] == NONE).collect();
            return Err(Singular {
                positions: failed,
                rows,
            });
        }
        f.base_nnz = m + f.l.iter().chain(&f.u).map(|c| c.len()).sum::<usize>();
        Ok(f)
    }

    /// True once the eta file costs more to apply than the factors.
    pub fn stale(&self) -> bool {
        self.eta_nnz > 3 * self.base_nnz
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Solves B z = a for a dense right-hand side indexed by rows; the
    /// result is indexed by basis position.
    pub fn ftran(&self, a: &mut Vec<F>) {
        let m = self.m;
        let mut w = vec![F::zero(); m];
        for t in 0..m {
            let wt = std::mem::replace(&mut a[self.prow[t]], F::zero());
            if wt.is_zero_exact() {
                continue;
            }
            for (r, lv) in &self.l[t] {
                a[*r].sub_mul(lv, &wt);
            }
            w[t] = wt;
        }
        for k in (0..m).rev() {
            if w[k].is_zero_exact() {
                continue;
            }
            let vk = w[k].over(&self.diag[k]);
            for (t, uv) in &self.u[k] {
                w[*t].sub_mul(uv, &vk);
            }
            w[k] = vk;
        }
        for k in 0..m {
            a[self.qpos[k]] = std::mem::replace(&mut w[k], F::zero());
        }
        for (r, col, piv) in &self.etas {
            let zr = a[*r].over(piv);
            if !zr.is_zero_exact() {
                for (i, v) in col {
                    a[*i].sub_mul(v, &zr);
                }
            }
            a[*r] = zr;
        }
    }

    /// Solves yᵀ B = cᵀ for c indexed by basis position; the result is
    /// indexed by rows.
    pub fn btran(&self, c: &mut Vec<F>) {
        let m = self.m;
        for (r, col, piv) in self.etas.iter().rev() {
            let mut s = c[*r].clone();
            for (i, v) in col {
                s.sub_mul(v, &c[*i]);
            }
            c[*r] = s.over(piv);
        }
        let mut g: Vec<F> = Vec::with_capacity(m);
        for k in 0..m {
            let mut s = c[self.qpos[k]].clone();
            for (t, uv) in &self.u[k] {
                s.sub_mul(uv, &g[*t]);
            }
            g.push(s.over(&self.diag[k]));
        }
        let y = c;
        for v in y.iter_mut() {
            *v = F::zero();
        }
        for t in (0..m).rev() {
            let mut s = std::mem::replace(&mut g[t], F::zero());
            for (i, lv) in &self.l[t] {
                s.sub_mul(lv, &y[*i]);
            }
            y[self.prow[t]] = s;
        }
    }

    /// Records the replacement of basis position `r` by a column whose
    /// FTRAN image is `alpha` (dense, by position).
    pub fn update(&mut self, r: usize, alpha: &[F]) {
        let piv = alpha[r].clone();
        let col: SparseCol<F> = alpha
            .iter()
            .enumerate()
            .filter(|(i, v)| *i != r && !v.is_zero_exact())
            .map(|(i, v)| (i, v.clone()))
            .collect();
        self.eta_nnz += col.len() + 1;
        self.etas.push((r, col, piv));
    }
}

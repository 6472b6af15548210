//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a slack column `n + i` with coefficient one, so the
//! system is `A x + s = b`. Phase one minimizes the sum of bound
//! violations of the basic variables; phase two the true costs. Harris'
//! two-pass ratio test with Dantzig pricing, switching to Bland's rule
//! after a long run of degenerate pivots.

use super::field::Field;
use super::lu::{Factor, SparseCol};
use std::time::Instant;

const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 1000;
const PERTURB_AFTER: usize = 50;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Perturbation {
    None,
    Active,
    Removed,
}

pub(crate) struct LpData<F> {
    pub m: usize,
    pub n: usize,
    pub cols: Vec<SparseCol<F>>,
    /// Minimization costs of the structural columns.
    pub cost: Vec<F>,
    pub rhs: Vec<F>,
}

impl<F: Field> LpData<F> {
    fn column(&self, j: usize) -> SparseCol<F> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, F::one())]
        }
    }

    fn dot(&self, j: usize, y: &[F]) -> F {
        if j < self.n {
            let mut s = F::zero();
            for (r, v) in &self.cols[j] {
                s = s.plus(&v.times(&y[*r]));
            }
            s
        } else {
            y[j - self.n].clone()
        }
    }

    fn cost_of(&self, j: usize) -> F {
        if j < self.n {
            self.cost[j].clone()
        } else {
            F::zero()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarStat {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Clone, Debug)]
pub(crate) struct Basis {
    pub head: Vec<usize>,
    pub stat: Vec<VarStat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
    Numerical,
}

#[derive(Clone, Debug)]
pub(crate) struct Tols<F> {
    pub feas: F,
    pub opt: F,
    pub pivot: F,
}

impl Tols<f64> {
    pub fn float() -> Self {
        Tols {
            feas: 1e-9,
            opt: 1e-9,
            pivot: 1e-9,
        }
    }
}

impl<F: Field> Tols<F> {
    pub fn exact() -> Self {
        Tols {
            feas: F::zero(),
            opt: F::zero(),
            pivot: F::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct LpLimits {
    pub max_iterations: Option<usize>,
    pub deadline: Option<Instant>,
}

pub(crate) struct LpOutcome<F> {
    pub status: LpStatus,
    /// Values of structural then slack columns.
    pub x: Vec<F>,
    pub objective: F,
    /// Row duals of the minimization problem.
    pub duals: Vec<F>,
    pub basis: Basis,
    pub iterations: usize,
}

struct State<'a, F: Field> {
    lp: &'a LpData<F>,
    lo: Vec<Option<F>>,
    up: Vec<Option<F>>,
    tols: &'a Tols<F>,
    x: Vec<F>,
    head: Vec<usize>,
    stat: Vec<VarStat>,
    factor: Option<Factor<F>>,
}

impl<'a, F: Field> State<'a, F> {
    fn place(&mut self, j: usize, pref: VarStat) {
        let (s, v) = match (&self.lo[j], &self.up[j]) {
            (Some(l), Some(u)) => {
                if pref == VarStat::AtUpper {
                    (VarStat::AtUpper, u.clone())
                } else {
                    (VarStat::AtLower, l.clone())
                }
            }
            (Some(l), None) => (VarStat::AtLower, l.clone()),
            (None, Some(u)) => (VarStat::AtUpper, u.clone()),
            (None, None) => (VarStat::Free, F::zero()),
        };
        self.stat[j] = s;
        self.x[j] = v;
    }

    fn refactor(&mut self) -> bool {
        let m = self.lp.m;
        for _attempt in 0..3 {
            let cols: Vec<SparseCol<F>> = self.head.iter().map(|&j| self.lp.column(j)).collect();
            match Factor::new(m, &cols, &self.tols.pivot) {
                Ok(f) => {
                    self.factor = Some(f);
                    return true;
                }
                Err(s) => {
                    for (pos, row) in s.positions.iter().zip(&s.rows) {
                        let out = self.head[*pos];
                        self.place(out, VarStat::AtLower);
                        let slack = self.lp.n + row;
                        self.head[*pos] = slack;
                        self.stat[slack] = VarStat::Basic;
                    }
                }
            }
        }
        false
    }

    fn compute_basics(&mut self) {
        let lp = self.lp;
        let mut r = lp.rhs.clone();
        for j in 0..lp.n + lp.m {
            if self.stat[j] == VarStat::Basic || self.x[j].is_zero_exact() {
                continue;
            }
            if j < lp.n {
                for (i, v) in &lp.cols[j] {
                    r[*i].sub_mul(v, &self.x[j]);
                }
            } else {
                let i = j - lp.n;
                r[i] = r[i].minus(&self.x[j]);
            }
        }
        self.factor.as_ref().unwrap().ftran(&mut r);
        for (pos, v) in r.into_iter().enumerate() {
            self.x[self.head[pos]] = v;
        }
    }

    /// Phase-one cost of the basic variable at each position, or `None`
    /// when the basis is primal feasible.
    fn infeasibility_costs(&self, slack: &F) -> Option<Vec<F>> {
        let mut any = false;
        let c: Vec<F> = self
            .head
            .iter()
            .map(|&j| {
                let xv = &self.x[j];
                if let Some(l) = &self.lo[j] {
                    if *xv < l.minus(slack) {
                        any = true;
                        return F::one().negate();
                    }
                }
                if let Some(u) = &self.up[j] {
                    if *xv > u.plus(slack) {
                        any = true;
                        return F::one();
                    }
                }
                F::zero()
            })
            .collect();
        any.then_some(c)
    }

    /// Triangular crash from the slack basis: each row violated at the
    /// starting point swaps its slack for the sparsest structural column
    /// with no entry in an earlier pivot row, so the basis stays triangular.
    fn crash(&mut self) {
        let lp = self.lp;
        let (m, n) = (lp.m, lp.n);
        let mut act = vec![F::zero(); m];
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for j in 0..n {
            for (i, v) in &lp.cols[j] {
                rows[*i].push(j);
                if !self.x[j].is_zero_exact() {
                    act[*i] = act[*i].plus(&v.times(&self.x[j]));
                }
            }
        }
        let mut taken = vec![false; m];
        for i in 0..m {
            let s = lp.rhs[i].minus(&act[i]);
            let sl = n + i;
            let low = self.lo[sl].as_ref().is_some_and(|l| s < l.minus(&self.tols.feas));
            let high = self.up[sl].as_ref().is_some_and(|u| s > u.plus(&self.tols.feas));
            if !(low || high) {
                continue;
            }
            let mut best: Option<(usize, usize)> = None;
            for &j in &rows[i] {
                if self.stat[j] == VarStat::Basic {
                    continue;
                }
                if let (Some(l), Some(u)) = (&self.lo[j], &self.up[j]) {
                    if l == u {
                        continue;
                    }
                }
                let len = lp.cols[j].len();
                if best.is_some_and(|(_, bl)| len >= bl) {
                    continue;
                }
                if lp.cols[j].iter().any(|(r, _)| taken[*r]) {
                    continue;
                }
                best = Some((j, len));
            }
            if let Some((j, _)) = best {
                taken[i] = true;
                self.head[i] = j;
                self.stat[j] = VarStat::Basic;
                self.place(sl, if low { VarStat::AtLower } else { VarStat::AtUpper });
            }
        }
    }

    fn replace_nonbasics(&mut self) {
        for j in 0..self.stat.len() {
            if self.stat[j] != VarStat::Basic {
                let s = self.stat[j];
                self.place(j, s);
            }
        }
    }

    /// Widens every non-fixed bound by a small pseudo-random amount to
    /// break ties between degenerate pivots.
    fn perturb(&mut self) {
        let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
        for j in 0..self.lo.len() {
            if let (Some(l), Some(u)) = (&self.lo[j], &self.up[j]) {
                if l == u {
                    continue;
                }
            }
            h ^= h << 13;
            h ^= h >> 7;
            h ^= h << 17;
            let r = 0.5 + (h % 1024) as f64 / 2048.0;
            if let Some(l) = &self.lo[j] {
                let e = 1e-6 * (1.0 + l.to_f64().abs()) * r;
                self.lo[j] = Some(l.minus(&F::from_f64(e)));
            }
            if let Some(u) = &self.up[j] {
                let e = 1e-6 * (1.0 + u.to_f64().abs()) * r;
                self.up[j] = Some(u.plus(&F::from_f64(e)));
            }
        }
        self.replace_nonbasics();
        self.compute_basics();
    }

    fn duals(&self) -> Vec<F> {
        let mut c: Vec<F> = self.head.iter().map(|&j| self.lp.cost_of(j)).collect();
        self.factor.as_ref().unwrap().btran(&mut c);
        c
    }
}

pub(crate) fn solve<F: Field>(
    lp: &LpData<F>,
    lo: &[Option<F>],
    up: &[Option<F>],
    warm: Option<&Basis>,
    tols: &Tols<F>,
    limits: &LpLimits,
) -> LpOutcome<F> {
    let (m, n) = (lp.m, lp.n);
    let total = n + m;
    let mut st = State {
        lp,
        lo: lo.to_vec(),
        up: up.to_vec(),
        tols,
        x: vec![F::zero(); total],
        head: Vec::new(),
        stat: vec![VarStat::AtLower; total],
        factor: None,
    };
    let usable = warm.filter(|b| {
        b.head.len() == m
            && b.stat.len() == total
            && b.head.iter().all(|&j| j < total && b.stat[j] == VarStat::Basic)
            && b.stat.iter().filter(|s| **s == VarStat::Basic).count() == m
    });
    match usable {
        Some(b) => {
            st.head = b.head.clone();
            for j in 0..total {
                if b.stat[j] == VarStat::Basic {
                    st.stat[j] = VarStat::Basic;
                } else {
                    st.place(j, b.stat[j]);
                }
            }
        }
        None => {
            st.head = (n..total).collect();
            for j in 0..n {
                st.place(j, VarStat::AtLower);
            }
            for j in n..total {
                st.stat[j] = VarStat::Basic;
            }
            st.crash();
        }
    }

    let mut iterations = 0usize;
    let finish = |st: &State<F>, status: LpStatus, iterations: usize| {
        let objective = (0..n).fold(F::zero(), |s, j| s.plus(&lp.cost[j].times(&st.x[j])));
        let duals = if status == LpStatus::Optimal {
            st.duals()
        } else {
            vec![F::zero(); m]
        };
        LpOutcome {
            status,
            x: st.x.clone(),
            objective,
            duals,
            basis: Basis {
                head: st.head.clone(),
                stat: st.stat.clone(),
            },
            iterations,
        }
    };

    if !st.refactor() {
        return finish(&st, LpStatus::Numerical, 0);
    }
    st.compute_basics();
    let mut degenerate = 0usize;
    let mut rechecks = 0usize;
    let mut perturbation = Perturbation::None;
    let mut alpha: Vec<F> = vec![F::zero(); m];

    loop {
        if let Some(maxit) = limits.max_iterations {
            if iterations >= maxit {
                return finish(&st, LpStatus::IterationLimit, iterations);
            }
        }
        if iterations % 64 == 0 {
            if let Some(dl) = limits.deadline {
                if Instant::now() >= dl {
                    return finish(&st, LpStatus::TimeLimit, iterations);
                }
            }
        }
        let f = st.factor.as_ref().unwrap();
        if f.eta_count() >= REFACTOR_EVERY || f.stale() {
            if !st.refactor() {
                return finish(&st, LpStatus::Numerical, iterations);
            }
            st.compute_basics();
        }
        let bland = degenerate >= BLAND_AFTER;
        let phase1 = st.infeasibility_costs(&tols.feas);
        let y = match &phase1 {
            Some(c) => {
                let mut c = c.clone();
                st.factor.as_ref().unwrap().btran(&mut c);
                c
            }
            None => st.duals(),
        };

        // pricing
        let mut enter: Option<(usize, bool, F)> = None;
        for j in 0..total {
            let s = st.stat[j];
            if s == VarStat::Basic {
                continue;
            }
            if let (Some(l), Some(u)) = (&st.lo[j], &st.up[j]) {
                if l == u {
                    continue;
                }
            }
            let c = if phase1.is_some() { F::zero() } else { lp.cost_of(j) };
            let dj = c.minus(&lp.dot(j, &y));
            let up_ok = matches!(s, VarStat::AtLower | VarStat::Free) && dj < tols.opt.negate();
            let down_ok = matches!(s, VarStat::AtUpper | VarStat::Free) && dj > tols.opt;
            if !(up_ok || down_ok) {
                continue;
            }
            let mag = dj.magnitude();
            let better = match &enter {
                None => true,
                Some((_, _, best)) => !bland && mag > *best,
            };
            if better {
                enter = Some((j, up_ok, mag));
                if bland {
                    break;
                }
            }
        }

        let Some((q, increase, _)) = enter else {
            if phase1.is_some() {
                return finish(&st, LpStatus::Infeasible, iterations);
            }
            if perturbation == Perturbation::Active {
                st.lo = lo.to_vec();
                st.up = up.to_vec();
                st.replace_nonbasics();
                st.compute_basics();
                perturbation = Perturbation::Removed;
                degenerate = 0;
                continue;
            }
            if !F::EXACT && rechecks < 3 {
                rechecks += 1;
                if !st.refactor() {
                    return finish(&st, LpStatus::Numerical, iterations);
                }
                st.compute_basics();
                if st.infeasibility_costs(&tols.feas).is_some() {
                    continue;
                }
            }
            return finish(&st, LpStatus::Optimal, iterations);
        };

        for v in alpha.iter_mut() {
            *v = F::zero();
        }
        for (r, v) in lp.column(q) {
            alpha[r] = v;
        }
        st.factor.as_ref().unwrap().ftran(&mut alpha);

        // ratio test
        let feas = if bland { F::zero() } else { tols.feas.clone() };
        let in_phase1 = phase1.is_some();
        let mut cands: Vec<(usize, F, F, bool)> = Vec::new();
        let mut relaxed_min: Option<F> = None;
        for (pos, a) in alpha.iter().enumerate() {
            if a.magnitude() <= tols.pivot {
                continue;
            }
            let rate = if increase { a.negate() } else { a.clone() };
            let v = st.head[pos];
            let xv = &st.x[v];
            let (bound, to_upper) = if rate > F::zero() {
                match (&st.lo[v], &st.up[v]) {
                    (Some(l), _) if in_phase1 && *xv < l.minus(&tols.feas) => (Some(l), false),
                    (_, Some(u)) if !(in_phase1 && *xv > u.plus(&tols.feas)) => (Some(u), true),
                    _ => (None, false),
                }
            } else {
                match (&st.lo[v], &st.up[v]) {
                    (_, Some(u)) if in_phase1 && *xv > u.plus(&tols.feas) => (Some(u), true),
                    (Some(l), _) if !(in_phase1 && *xv < l.minus(&tols.feas)) => (Some(l), false),
                    _ => (None, false),
                }
            };
            let Some(b) = bound else { continue };
            let gap = b.minus(xv);
            let ratio = gap.over(&rate);
            let relaxed = if rate > F::zero() {
                gap.plus(&feas).over(&rate)
            } else {
                gap.minus(&feas).over(&rate)
            };
            if relaxed_min.as_ref().is_none_or(|r| relaxed < *r) {
                relaxed_min = Some(relaxed);
            }
            cands.push((pos, ratio, a.magnitude(), to_upper));
        }
        let mut leave: Option<(usize, F, bool)> = None;
        if let Some(hmax) = &relaxed_min {
            let mut best: Option<(usize, F, F, bool)> = None;
            for (pos, ratio, mag, to_upper) in cands {
                if ratio > *hmax {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bp, br, bm, _)) => {
                        if bland {
                            ratio < *br || (ratio == *br && st.head[pos] < st.head[*bp])
                        } else {
                            mag > *bm
                        }
                    }
                };
                if better {
                    best = Some((pos, ratio, mag, to_upper));
                }
            }
            if let Some((pos, ratio, _, to_upper)) = best {
                let theta = if ratio < F::zero() { F::zero() } else { ratio };
                leave = Some((pos, theta, to_upper));
            }
        }
        let range = match (&st.lo[q], &st.up[q]) {
            (Some(l), Some(u)) => Some(u.minus(l)),
            _ => None,
        };
        let flip = match (&range, &leave) {
            (Some(r), Some((_, t, _))) => r <= t,
            (Some(_), None) => true,
            _ => false,
        };
        if !flip && leave.is_none() {
            if in_phase1 {
                return finish(&st, LpStatus::Numerical, iterations);
            }
            return finish(&st, LpStatus::Unbounded, iterations);
        }
        let theta = if flip {
            range.clone().unwrap()
        } else {
            leave.as_ref().unwrap().1.clone()
        };
        iterations += 1;
        if theta.magnitude() <= tols.feas {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        if !F::EXACT && perturbation == Perturbation::None && degenerate >= PERTURB_AFTER {
            st.perturb();
            perturbation = Perturbation::Active;
            degenerate = 0;
            continue;
        }
        if !theta.is_zero_exact() {
            let step = if increase { theta.clone() } else { theta.negate() };
            st.x[q] = st.x[q].plus(&step);
            for (pos, a) in alpha.iter().enumerate() {
                if !a.is_zero_exact() {
                    let v = st.head[pos];
                    st.x[v].sub_mul(a, &step);
                }
            }
        }
        if flip {
            st.place(q, if increase { VarStat::AtUpper } else { VarStat::AtLower });
        } else {
            let (pos, _, to_upper) = leave.unwrap();
            let out = st.head[pos];
            st.place(out, if to_upper { VarStat::AtUpper } else { VarStat::AtLower });
            st.head[pos] = q;
            st.stat[q] = VarStat::Basic;
            st.factor.as_mut().unwrap().update(pos, &alpha);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio, Rational};

    fn lp_f(rows: &[(&[f64], f64)], cost: &[f64]) -> LpData<f64> {
        let n = cost.len();
        let mut cols = vec![Vec::new(); n];
        for (i, (a, _)) in rows.iter().enumerate() {
            for (j, v) in a.iter().enumerate() {
                if *v != 0.0 {
                    cols[j].push((i, *v));
                }
            }
        }
        LpData {
            m: rows.len(),
            n,
            cols,
            cost: cost.to_vec(),
            rhs: rows.iter().map(|r| r.1).collect(),
        }
    }

    #[test]
    fn small_lp_float() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (8/5, 6/5)
        let lp = lp_f(&[(&[1.0, 2.0], 4.0), (&[3.0, 1.0], 6.0)], &[-1.0, -1.0]);
        let lo = vec![Some(0.0), Some(0.0), Some(0.0), Some(0.0)];
        let up = vec![None, None, None, None];
        let out = solve(&lp, &lo, &up, None, &Tols::float(), &LpLimits::default());
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 2.8).abs() < 1e-9);
        assert!((out.x[0] - 1.6).abs() < 1e-9);
    }

    #[test]
    fn small_lp_exact_with_equality_and_bounds() {
        // min x + 2y s.t. x + y = 3 (slack fixed), x <= 2 -> x = 2, y = 1
        let lp = LpData {
            m: 1,
            n: 2,
            cols: vec![vec![(0, int(1))], vec![(0, int(1))]],
            cost: vec![int(1), int(2)],
            rhs: vec![int(3)],
        };
        let lo = vec![Some(int(0)), Some(int(0)), Some(int(0))];
        let up = vec![Some(int(2)), None, Some(int(0))];
        let out = solve(&lp, &lo, &up, None, &Tols::<Rational>::exact(), &LpLimits::default());
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective, int(4));
        assert_eq!(out.x[0], int(2));
        assert_eq!(out.duals[0], int(2));
        let again = solve(&lp, &lo, &up, Some(&out.basis), &Tols::<Rational>::exact(), &LpLimits::default());
        assert_eq!(again.iterations, 0);
        assert_eq!(again.objective, int(4));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x >= 3 (slack <= 0) with x <= 1
        let lp = LpData {
            m: 1,
            n: 1,
            cols: vec![vec![(0, int(1))]],
            cost: vec![int(1)],
            rhs: vec![int(3)],
        };
        let lo = vec![Some(int(0)), None];
        let up = vec![Some(int(1)), Some(int(0))];
        let out = solve(&lp, &lo, &up, None, &Tols::<Rational>::exact(), &LpLimits::default());
        assert_eq!(out.status, LpStatus::Infeasible);
        let lp2 = LpData {
            m: 1,
            n: 2,
            cols: vec![vec![(0, int(1))], vec![(0, int(-1))]],
            cost: vec![int(-1), int(0)],
            rhs: vec![int(0)],
        };
        let lo2 = vec![Some(int(0)), Some(int(0)), Some(int(0))];
        let up2 = vec![None, None, Some(int(0))];
        let out = solve(&lp2, &lo2, &up2, None, &Tols::<Rational>::exact(), &LpLimits::default());
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn fractional_optimum_exact() {
        // max x + y s.t. 2x + y <= 3, x + 3y <= 4 -> (1, 1) value 2; then 3x+y<=5/2
        let lp = LpData {
            m: 2,
            n: 2,
            cols: vec![vec![(0, int(3)), (1, int(1))], vec![(0, int(1)), (1, int(3))]],
            cost: vec![int(-1), int(-1)],
            rhs: vec![ratio(5, 2), int(4)],
        };
        let lo = vec![Some(int(0)); 4];
        let up = vec![None; 4];
        let out = solve(&lp, &lo, &up, None, &Tols::<Rational>::exact(), &LpLimits::default());
        assert_eq!(out.status, LpStatus::Optimal);
        // 3x + y = 5/2, x + 3y = 4 -> x = 7/16, y = 19/16
        assert_eq!(out.x[0], ratio(7, 16));
        assert_eq!(out.objective, ratio(-26, 16));
    }
}

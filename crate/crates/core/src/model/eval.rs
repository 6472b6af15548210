//! Combinatorial evaluation oracles.
//!
//! All routines are exact. The inner machinery is generic over the integer
//! type backing the rationals so that enumeration-heavy callers can use
//! `Ratio<i128>` when the data is small, falling back to big rationals.

use super::{
    CostVector, EvaluationReport, Pairing, ProblemInstance, SelectionSolution, SolutionRole,
    UncertaintySet, Witness, WitnessKind,
};
use crate::error::{Error, Result};
use crate::model::BudgetMode;
use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub(crate) trait Int:
    Clone + Integer + Signed + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Int for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Magnitudes above this are not converted to the fixed-width fast path.
const SMALL_LIMIT: i128 = 1 << 40;

impl Int for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128().filter(|v| v.abs() < SMALL_LIMIT)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

pub(crate) type Q<I> = Ratio<I>;

pub(crate) fn conv<I: Int>(r: &Rational) -> Option<Q<I>> {
    Some(Q::new_raw(I::from_big(r.numer())?, I::from_big(r.denom())?))
}

pub(crate) fn back<I: Int>(q: &Q<I>) -> Rational {
    Rational::new(q.numer().to_big(), q.denom().to_big())
}

fn qn<I: Int>(k: usize) -> Q<I> {
    Q::from_integer(I::from_usize(k).expect("count fits"))
}

fn pos<I: Int>(v: Q<I>) -> Q<I> {
    if v.is_positive() {
        v
    } else {
        Q::zero()
    }
}

fn conv_vec<I: Int>(v: &CostVector) -> Option<Vec<Q<I>>> {
    v.entries().iter().map(conv).collect()
}

/// Instance data converted to a concrete rational type.
pub(crate) struct Prepared<I: Int> {
    pub pairing: Pairing,
    pub n: usize,
    pub p: usize,
    pub kept_min: usize,
    pub first: Vec<Q<I>>,
    pub scenarios: Vec<Vec<Q<I>>>,
    pub scenario_opt: Vec<Q<I>>,
    pub lower: Vec<Q<I>>,
    pub dev: Vec<Q<I>>,
    pub gamma: Q<I>,
    pub mode: Option<BudgetMode>,
    /// Sorted π candidates for the recoverable continuous-budget sweep.
    pi_grid: Vec<Q<I>>,
}

impl<I: Int> Prepared<I> {
    pub fn new(inst: &ProblemInstance) -> Result<Option<Self>> {
        let pairing = inst.pairing()?;
        Ok(Self::convert(inst, pairing))
    }

    fn convert(inst: &ProblemInstance, pairing: Pairing) -> Option<Self> {
        let first = match &inst.first_stage_costs {
            Some(c) => conv_vec(c)?,
            None => Vec::new(),
        };
        let (mut scenarios, mut lower, mut dev, mut gamma, mut mode) =
            (Vec::new(), Vec::new(), Vec::new(), Q::zero(), None);
        match &inst.uncertainty {
            UncertaintySet::Discrete { scenarios: s } => {
                scenarios = s.iter().map(conv_vec).collect::<Option<Vec<_>>>()?;
            }
            UncertaintySet::Interval { lower: l, deviation: d } => {
                lower = conv_vec(l)?;
                dev = conv_vec(d)?;
            }
            UncertaintySet::Budgeted {
                lower: l,
                deviation: d,
                gamma: g,
                mode: m,
            } => {
                lower = conv_vec(l)?;
                dev = conv_vec(d)?;
                gamma = conv(g)?;
                mode = Some(*m);
            }
        }
        let scenario_opt = if pairing == Pairing::RegretDiscrete {
            scenarios.iter().map(|c| nominal(c, inst.p).1).collect()
        } else {
            Vec::new()
        };
        let kept_min = inst.kept_min().unwrap_or(0);
        let pi_grid = if pairing == Pairing::RecoverableContinuousBudgeted {
            pi_candidates(inst.n, inst.p, kept_min)
        } else {
            Vec::new()
        };
        Some(Prepared {
            pairing,
            n: inst.n,
            p: inst.p,
            kept_min,
            first,
            scenarios,
            scenario_opt,
            lower,
            dev,
            gamma,
            mode,
            pi_grid,
        })
    }

    fn first_dot(&self, x: &[bool]) -> Q<I> {
        dot(&self.first, x)
    }
}

pub(crate) fn dot<I: Int>(c: &[Q<I>], x: &[bool]) -> Q<I> {
    let mut s = Q::zero();
    for (v, &b) in c.iter().zip(x) {
        if b {
            s = s + v;
        }
    }
    s
}

fn sorted_by_cost<I: Int>(c: &[Q<I>], items: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = items.collect();
    v.sort_by(|&a, &b| c[a].cmp(&c[b]).then(a.cmp(&b)));
    v
}

fn sum_at<I: Int>(c: &[Q<I>], idx: &[usize]) -> Q<I> {
    idx.iter().fold(Q::zero(), |acc, &i| acc + &c[i])
}

/// p cheapest items, ties by index.
pub(crate) fn nominal<I: Int>(c: &[Q<I>], p: usize) -> (Vec<usize>, Q<I>) {
    let mut order = sorted_by_cost(c, 0..c.len());
    order.truncate(p);
    let v = sum_at(c, &order);
    order.sort_unstable();
    (order, v)
}

/// Cheapest p − Σx items outside supp(x).
pub(crate) fn completion<I: Int>(x: &[bool], c: &[Q<I>], p: usize) -> (Vec<usize>, Q<I>) {
    let r = p - x.iter().filter(|&&b| b).count();
    let mut order = sorted_by_cost(c, (0..c.len()).filter(|&i| !x[i]));
    order.truncate(r);
    let v = sum_at(c, &order);
    order.sort_unstable();
    (order, v)
}

/// Exchange sweep over the number k of kept items.
pub(crate) fn recovery<I: Int>(
    x: &[bool],
    c: &[Q<I>],
    p: usize,
    kept_min: usize,
) -> (Vec<usize>, Q<I>) {
    let inside = sorted_by_cost(c, (0..c.len()).filter(|&i| x[i]));
    let outside = sorted_by_cost(c, (0..c.len()).filter(|&i| !x[i]));
    let prefix = |v: &[usize]| {
        let mut out = Vec::with_capacity(v.len() + 1);
        out.push(Q::<I>::zero());
        for &i in v {
            let last = out.last().unwrap().clone();
            out.push(last + &c[i]);
        }
        out
    };
    let pi = prefix(&inside);
    let po = prefix(&outside);
    let mut best: Option<(usize, Q<I>)> = None;
    for k in kept_min..=p {
        if k > inside.len() || p - k > outside.len() {
            continue;
        }
        let v = pi[k].clone() + &po[p - k];
        if best.as_ref().map_or(true, |(_, b)| v < *b) {
            best = Some((k, v));
        }
    }
    let (k, v) = best.expect("recovery problem is feasible");
    let mut y: Vec<usize> = inside[..k].iter().chain(&outside[..p - k]).copied().collect();
    y.sort_unstable();
    (y, v)
}

/// Sum of the γ largest weights with fractional top-up; returns the δ pattern.
fn top_gamma<I: Int>(w: &mut [(usize, Q<I>)], gamma: &Q<I>) -> (Q<I>, Vec<(usize, Q<I>)>) {
    w.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let full = gamma.floor();
    let frac = gamma.clone() - &full;
    let full = full.to_integer().to_usize().unwrap_or(usize::MAX);
    let mut total = Q::zero();
    let mut delta = Vec::new();
    for (rank, (i, v)) in w.iter().enumerate() {
        if rank < full {
            total = total + v;
            delta.push((*i, Q::one()));
        } else {
            if rank == full && frac.is_positive() {
                total = total + frac.clone() * v;
                delta.push((*i, frac.clone()));
            }
            break;
        }
    }
    (total, delta)
}

/// Top-γ sum only (integral γ), no allocation of the pattern.
fn top_gamma_value<I: Int>(w: &mut [Q<I>], gamma_int: usize) -> Q<I> {
    if gamma_int == 0 {
        return Q::zero();
    }
    if gamma_int >= w.len() {
        return w.iter().fold(Q::zero(), |a, v| a + v);
    }
    w.select_nth_unstable_by(gamma_int - 1, |a, b| b.cmp(a));
    w[..gamma_int].iter().fold(Q::zero(), |a, v| a + v)
}

fn breakpoints<I: Int>(lower: &[Q<I>], dev: &[Q<I>], items: impl Iterator<Item = usize>) -> Vec<Q<I>> {
    let mut s = Vec::new();
    for i in items {
        s.push(lower[i].clone());
        s.push(lower[i].clone() + &dev[i]);
    }
    s
}

fn sort_dedup<I: Int>(mut v: Vec<Q<I>>) -> Vec<Q<I>> {
    v.sort();
    v.dedup();
    v
}

/// Maximizes a concave piecewise-linear function along a line whose
/// breakpoints (other than the budget switch) are `points`. `eval` returns
/// `(value, used)`; the budget switch occurs where `used` crosses `gamma`.
fn concave_line_max<I: Int>(
    points: &[Q<I>],
    eval: impl Fn(&Q<I>) -> (Q<I>, Q<I>),
    gamma: &Q<I>,
) -> (Q<I>, Q<I>) {
    let vals: Vec<(Q<I>, Q<I>)> = points.iter().map(&eval).collect();
    let mut best: Option<(Q<I>, Q<I>)> = None;
    let mut consider = |v: Q<I>, s: Q<I>| {
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, s));
        }
    };
    for j in 0..points.len() {
        consider(vals[j].0.clone(), points[j].clone());
        if j + 1 < points.len() {
            let (s0, s1) = (&vals[j].1, &vals[j + 1].1);
            if s0 < gamma && gamma < s1 {
                let t = points[j].clone()
                    + (gamma.clone() - s0) * (points[j + 1].clone() - &points[j])
                        / (s1.clone() - s0);
                let v = eval(&t).0;
                consider(v, t);
            }
        }
    }
    best.expect("at least one point")
}

/// Allocates a deviation budget over items in index order.
fn allocate_amounts<I: Int>(caps: &[Q<I>], gamma: &Q<I>) -> Vec<Q<I>> {
    let mut left = gamma.clone();
    caps.iter()
        .map(|c| {
            let take = if *c < left { c.clone() } else { left.clone() };
            left = left.clone() - &take;
            take
        })
        .collect()
}

/// Two-stage, item-budgeted (binary δ): returns (second-stage worst value, δ items).
fn two_stage_db<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    p: usize,
    want: bool,
) -> (Q<I>, Vec<(usize, Q<I>)>) {
    let n = x.len();
    let r = qn::<I>(p - x.iter().filter(|&&b| b).count());
    let rest: Vec<usize> = (0..n).filter(|&i| !x[i]).collect();
    let mut s = breakpoints(lower, dev, 0..n);
    s.push(Q::zero());
    let s = sort_dedup(s);
    let g_int = gamma.floor().to_integer().to_usize().unwrap_or(usize::MAX);
    let mut best: Option<(Q<I>, Q<I>)> = None;
    let mut w = Vec::with_capacity(rest.len());
    for alpha in &s {
        let mut val = r.clone() * alpha;
        w.clear();
        for &i in &rest {
            let over = pos(alpha.clone() - &lower[i]);
            let wi = if over < dev[i] { over.clone() } else { dev[i].clone() };
            val = val - over;
            w.push(wi);
        }
        val = val + top_gamma_value(&mut w, g_int);
        if best.as_ref().map_or(true, |(b, _)| val > *b) {
            best = Some((val, alpha.clone()));
        }
    }
    let (val, alpha) = best.expect("non-empty breakpoint set");
    if !want {
        return (val, Vec::new());
    }
    let mut wi: Vec<(usize, Q<I>)> = rest
        .iter()
        .map(|&i| {
            let over = pos(alpha.clone() - &lower[i]);
            (i, if over < dev[i] { over } else { dev[i].clone() })
        })
        .filter(|(_, v)| v.is_positive())
        .collect();
    let (_, delta) = top_gamma(&mut wi, gamma);
    (val, delta)
}

/// Two-stage, variable budget: returns (second-stage worst value, δ amounts).
fn two_stage_cb<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    p: usize,
    want: bool,
) -> (Q<I>, Vec<Q<I>>) {
    let n = x.len();
    let r = qn::<I>(p - x.iter().filter(|&&b| b).count());
    let rest: Vec<usize> = (0..n).filter(|&i| !x[i]).collect();
    let mut pts = breakpoints(lower, dev, rest.iter().copied());
    pts.push(Q::zero());
    let pts = sort_dedup(pts);
    let eval = |alpha: &Q<I>| {
        let mut val = r.clone() * alpha;
        let mut used = Q::zero();
        for &i in &rest {
            let over = pos(alpha.clone() - &lower[i]);
            used = used + if over < dev[i] { over.clone() } else { dev[i].clone() };
            val = val - over;
        }
        let extra = if used < *gamma { used.clone() } else { gamma.clone() };
        (val + extra, used)
    };
    let (val, alpha) = concave_line_max(&pts, eval, gamma);
    if !want {
        return (val, Vec::new());
    }
    let caps: Vec<Q<I>> = (0..n)
        .map(|i| {
            if x[i] {
                Q::zero()
            } else {
                let over = pos(alpha.clone() - &lower[i]);
                if over < dev[i] {
                    over
                } else {
                    dev[i].clone()
                }
            }
        })
        .collect();
    (val, allocate_amounts(&caps, gamma))
}

/// Recoverable, item-budgeted (binary δ), enumerating dual pairs (α, β).
fn recoverable_db<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    p: usize,
    k: usize,
    want: bool,
) -> (Q<I>, Vec<(usize, Q<I>)>) {
    let n = x.len();
    let mut a = breakpoints(lower, dev, 0..n);
    a.push(Q::zero());
    let a = sort_dedup(a);
    let (pq, kq) = (qn::<I>(p), qn::<I>(k));
    let g_int = gamma.floor().to_integer().to_usize().unwrap_or(usize::MAX);
    let mut best: Option<(Q<I>, Q<I>, Q<I>)> = None;
    let mut w = Vec::with_capacity(n);
    let zero = Q::<I>::zero();
    for (ai, alpha) in a.iter().enumerate() {
        let base = pq.clone() * alpha;
        for bi in ai..a.len() {
            let beta = if bi == ai {
                zero.clone()
            } else {
                a[bi].clone() - alpha
            };
            let mut val = base.clone() + kq.clone() * &beta;
            w.clear();
            for i in 0..n {
                let ai_val = if x[i] {
                    alpha.clone() + &beta
                } else {
                    alpha.clone()
                };
                let over = pos(ai_val - &lower[i]);
                w.push(if over < dev[i] { over.clone() } else { dev[i].clone() });
                val = val - over;
            }
            val = val + top_gamma_value(&mut w, g_int);
            if best.as_ref().map_or(true, |(b, _, _)| val > *b) {
                best = Some((val, alpha.clone(), beta));
            }
        }
    }
    let (val, alpha, beta) = best.expect("non-empty pair set");
    if !want {
        return (val, Vec::new());
    }
    let mut wi: Vec<(usize, Q<I>)> = (0..n)
        .map(|i| {
            let ai_val = if x[i] { alpha.clone() + &beta } else { alpha.clone() };
            let over = pos(ai_val - &lower[i]);
            (i, if over < dev[i] { over } else { dev[i].clone() })
        })
        .filter(|(_, v)| v.is_positive())
        .collect();
    let (_, delta) = top_gamma(&mut wi, gamma);
    (val, delta)
}

/// π values at which the fill structure of the recoverable variable-budget
/// primal can change: solutions of aπ + b(1−π) = T in [0,1].
fn pi_candidates<I: Int>(n: usize, p: usize, k: usize) -> Vec<Q<I>> {
    let mut out = vec![Q::zero(), Q::one()];
    for t in [k, p] {
        for a in 0..=n {
            for b in 0..=n {
                if a == b {
                    continue;
                }
                let num = t as i64 - b as i64;
                let den = a as i64 - b as i64;
                if (num == 0) || (num.signum() == den.signum() && num.abs() < den.abs()) {
                    out.push(Q::new(
                        I::from_i64(num).unwrap(),
                        I::from_i64(den).unwrap(),
                    ));
                }
            }
        }
    }
    sort_dedup(out)
}

#[derive(Clone)]
struct Piece<I: Int> {
    slope: Q<I>,
    short: bool,
    item: usize,
}

fn pieces<I: Int>(lower: &[Q<I>], dev: &[Q<I>], items: impl Iterator<Item = usize>) -> Vec<Piece<I>> {
    let mut v = Vec::new();
    for i in items {
        v.push(Piece {
            slope: lower[i].clone(),
            short: true,
            item: i,
        });
        v.push(Piece {
            slope: lower[i].clone() + &dev[i],
            short: false,
            item: i,
        });
    }
    v.sort_by(|a, b| {
        a.slope
            .cmp(&b.slope)
            .then(b.short.cmp(&a.short))
            .then(a.item.cmp(&b.item))
    });
    v
}

/// Primal value Γπ + greedy fill for a fixed π.
fn recoverable_cb_at<I: Int>(
    inside: &[Piece<I>],
    outside: &[Piece<I>],
    pi: &Q<I>,
    gamma: &Q<I>,
    p: usize,
    k: usize,
) -> Q<I> {
    let one_minus = Q::<I>::one() - pi;
    let len = |pc: &Piece<I>| if pc.short { pi.clone() } else { one_minus.clone() };
    let mut cost = gamma.clone() * pi;
    let mut need = qn::<I>(k);
    let mut ii = 0;
    let mut rem_i = inside.first().map(len).unwrap_or_else(Q::zero);
    while need.is_positive() && ii < inside.len() {
        let take = if rem_i < need { rem_i.clone() } else { need.clone() };
        cost = cost + take.clone() * &inside[ii].slope;
        need = need - &take;
        rem_i = rem_i - take;
        if !rem_i.is_positive() {
            ii += 1;
            rem_i = inside.get(ii).map(len).unwrap_or_else(Q::zero);
        }
    }
    let mut need = qn::<I>(p - k);
    let mut oi = 0;
    let mut rem_o = outside.first().map(len).unwrap_or_else(Q::zero);
    while need.is_positive() && (ii < inside.len() || oi < outside.len()) {
        let use_inside = match (inside.get(ii), outside.get(oi)) {
            (Some(a), Some(b)) => a.slope <= b.slope,
            (Some(_), None) => true,
            _ => false,
        };
        let (rem, slope) = if use_inside {
            (&mut rem_i, &inside[ii].slope)
        } else {
            (&mut rem_o, &outside[oi].slope)
        };
        let take = if *rem < need { rem.clone() } else { need.clone() };
        cost = cost + take.clone() * slope;
        need = need - &take;
        *rem = rem.clone() - take;
        if !rem.is_positive() {
            if use_inside {
                ii += 1;
                rem_i = inside.get(ii).map(len).unwrap_or_else(Q::zero);
            } else {
                oi += 1;
                rem_o = outside.get(oi).map(len).unwrap_or_else(Q::zero);
            }
        }
    }
    cost
}

/// Recoverable, variable budget: min over π of the convex primal value.
fn recoverable_cb_value<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    p: usize,
    k: usize,
    grid: &[Q<I>],
) -> Q<I> {
    let n = x.len();
    let inside = pieces(lower, dev, (0..n).filter(|&i| x[i]));
    let outside = pieces(lower, dev, (0..n).filter(|&i| !x[i]));
    let f = |j: usize| recoverable_cb_at(&inside, &outside, &grid[j], gamma, p, k);
    let (mut lo, mut hi) = (0usize, grid.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if f(mid + 1) < f(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    f(lo)
}

/// Recoverable, variable budget, via the dual: max over (α, β ≥ 0) of a
/// concave function, searching every line of its breakpoint arrangement.
/// Returns (value, α, β).
fn recoverable_cb_dual<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    p: usize,
    k: usize,
) -> (Q<I>, Q<I>, Q<I>) {
    let n = x.len();
    let (pq, kq) = (qn::<I>(p), qn::<I>(k));
    let g = |alpha: &Q<I>, beta: &Q<I>| {
        let mut val = pq.clone() * alpha + kq.clone() * beta;
        let mut used = Q::<I>::zero();
        for i in 0..n {
            let a = if x[i] { alpha.clone() + beta } else { alpha.clone() };
            let over = pos(a - &lower[i]);
            used = used + if over < dev[i] { over.clone() } else { dev[i].clone() };
            val = val - over;
        }
        let extra = if used < *gamma { used.clone() } else { gamma.clone() };
        (val + extra, used)
    };
    let t_in = sort_dedup(breakpoints(lower, dev, (0..n).filter(|&i| x[i])));
    let t_out = sort_dedup(breakpoints(lower, dev, (0..n).filter(|&i| !x[i])));
    let zero = Q::<I>::zero();
    let mut best: Option<(Q<I>, Q<I>, Q<I>)> = None;
    let mut consider = |v: Q<I>, a: Q<I>, b: Q<I>| {
        if best.as_ref().map_or(true, |(bv, _, _)| v > *bv) {
            best = Some((v, a, b));
        }
    };
    // β = 0
    let mut pts: Vec<Q<I>> = t_in.iter().chain(&t_out).cloned().collect();
    pts.push(zero.clone());
    let pts = sort_dedup(pts);
    let (v, s) = concave_line_max(&pts, |s| g(s, &zero), gamma);
    consider(v, s, zero.clone());
    // α = t
    for t in &t_out {
        let mut pts = vec![zero.clone()];
        pts.extend(t_in.iter().filter(|c| *c > t).map(|c| c.clone() - t));
        let pts = sort_dedup(pts);
        let (v, s) = concave_line_max(&pts, |s| g(t, s), gamma);
        consider(v, t.clone(), s);
    }
    // α + β = t
    for t in &t_in {
        let mut pts = vec![t.clone()];
        pts.extend(t_out.iter().filter(|c| *c < t).cloned());
        let pts = sort_dedup(pts);
        let (v, s) = concave_line_max(&pts, |s| g(s, &(t.clone() - s)), gamma);
        let beta = t.clone() - &s;
        consider(v, s, beta);
    }
    best.expect("at least one line")
}

fn minmax_budgeted<I: Int>(
    x: &[bool],
    lower: &[Q<I>],
    dev: &[Q<I>],
    gamma: &Q<I>,
    mode: BudgetMode,
    want: bool,
) -> (Q<I>, Option<RawKind<I>>) {
    let n = x.len();
    let base = dot(lower, x);
    match mode {
        BudgetMode::ContinuousItems | BudgetMode::DiscreteItems => {
            let mut w: Vec<(usize, Q<I>)> =
                (0..n).filter(|&i| x[i]).map(|i| (i, dev[i].clone())).collect();
            let (top, delta) = top_gamma(&mut w, gamma);
            let kind = want.then(|| {
                let mut pattern = vec![Q::zero(); n];
                for (i, v) in delta {
                    pattern[i] = v;
                }
                RawKind::Pattern(pattern)
            });
            (base + top, kind)
        }
        BudgetMode::VariableBudget => {
            let total = dot(dev, x);
            let extra = if total < *gamma { total } else { gamma.clone() };
            let kind = want.then(|| {
                let caps: Vec<Q<I>> = (0..n)
                    .map(|i| if x[i] { dev[i].clone() } else { Q::zero() })
                    .collect();
                RawKind::Amounts(allocate_amounts(&caps, gamma))
            });
            (base + extra, kind)
        }
    }
}

pub(crate) enum RawKind<I: Int> {
    Scenario(usize),
    RegretWorstCase,
    UpperBounds,
    Pattern(Vec<Q<I>>),
    Amounts(Vec<Q<I>>),
}

pub(crate) struct RawWitness<I: Int> {
    kind: RawKind<I>,
    realized: Vec<Q<I>>,
}

fn argmax_first<I: Int>(vals: impl Iterator<Item = Q<I>>) -> (usize, Q<I>) {
    let mut best: Option<(usize, Q<I>)> = None;
    for (j, v) in vals.enumerate() {
        if best.as_ref().map_or(true, |(_, b)| v > *b) {
            best = Some((j, v));
        }
    }
    best.expect("non-empty")
}

fn realize_pattern<I: Int>(lower: &[Q<I>], dev: &[Q<I>], delta: &[(usize, Q<I>)]) -> Vec<Q<I>> {
    let mut c = lower.to_vec();
    for (i, v) in delta {
        c[*i] = c[*i].clone() + dev[*i].clone() * v;
    }
    c
}

fn pattern_vec<I: Int>(n: usize, delta: &[(usize, Q<I>)]) -> Vec<Q<I>> {
    let mut out = vec![Q::zero(); n];
    for (i, v) in delta {
        out[*i] = v.clone();
    }
    out
}

/// Robust value of `x`, optionally with a witness scenario.
pub(crate) fn evaluate_prepared<I: Int>(
    prep: &Prepared<I>,
    x: &[bool],
    want: bool,
) -> (Q<I>, Option<RawWitness<I>>) {
    let p = prep.p;
    match prep.pairing {
        Pairing::MinMaxDiscrete => {
            let (j, v) = argmax_first(prep.scenarios.iter().map(|c| dot(c, x)));
            let w = want.then(|| RawWitness {
                kind: RawKind::Scenario(j),
                realized: prep.scenarios[j].clone(),
            });
            (v, w)
        }
        Pairing::RegretDiscrete => {
            let (j, v) = argmax_first(
                prep.scenarios
                    .iter()
                    .zip(&prep.scenario_opt)
                    .map(|(c, o)| dot(c, x) - o),
            );
            let w = want.then(|| RawWitness {
                kind: RawKind::Scenario(j),
                realized: prep.scenarios[j].clone(),
            });
            (v, w)
        }
        Pairing::TwoStageDiscrete => {
            let (j, v) = argmax_first(prep.scenarios.iter().map(|c| completion(x, c, p).1));
            let w = want.then(|| RawWitness {
                kind: RawKind::Scenario(j),
                realized: prep.scenarios[j].clone(),
            });
            (prep.first_dot(x) + v, w)
        }
        Pairing::RecoverableDiscrete => {
            let (j, v) = argmax_first(
                prep.scenarios
                    .iter()
                    .map(|c| recovery(x, c, p, prep.kept_min).1),
            );
            let w = want.then(|| RawWitness {
                kind: RawKind::Scenario(j),
                realized: prep.scenarios[j].clone(),
            });
            (prep.first_dot(x) + v, w)
        }
        Pairing::MinMaxInterval => {
            let upper: Vec<Q<I>> = prep
                .lower
                .iter()
                .zip(&prep.dev)
                .map(|(l, d)| l.clone() + d)
                .collect();
            let v = dot(&upper, x);
            let w = want.then(|| RawWitness {
                kind: RawKind::UpperBounds,
                realized: upper,
            });
            (v, w)
        }
        Pairing::RegretInterval => {
            let rwc: Vec<Q<I>> = (0..prep.n)
                .map(|i| {
                    if x[i] {
                        prep.lower[i].clone() + &prep.dev[i]
                    } else {
                        prep.lower[i].clone()
                    }
                })
                .collect();
            let v = dot(&rwc, x) - nominal(&rwc, p).1;
            let w = want.then(|| RawWitness {
                kind: RawKind::RegretWorstCase,
                realized: rwc,
            });
            (v, w)
        }
        Pairing::MinMaxBudgeted => {
            let mode = prep.mode.expect("budgeted");
            let (v, kind) = minmax_budgeted(x, &prep.lower, &prep.dev, &prep.gamma, mode, want);
            let w = kind.map(|kind| {
                let realized = match &kind {
                    RawKind::Pattern(d) => prep
                        .lower
                        .iter()
                        .zip(&prep.dev)
                        .zip(d)
                        .map(|((l, dv), f)| l.clone() + dv.clone() * f)
                        .collect(),
                    RawKind::Amounts(a) => {
                        prep.lower.iter().zip(a).map(|(l, v)| l.clone() + v).collect()
                    }
                    _ => unreachable!(),
                };
                RawWitness { kind, realized }
            });
            (v, w)
        }
        Pairing::TwoStageDiscreteBudgeted => {
            let (v, delta) = two_stage_db(x, &prep.lower, &prep.dev, &prep.gamma, p, want);
            let w = want.then(|| RawWitness {
                realized: realize_pattern(&prep.lower, &prep.dev, &delta),
                kind: RawKind::Pattern(pattern_vec(prep.n, &delta)),
            });
            (prep.first_dot(x) + v, w)
        }
        Pairing::TwoStageContinuousBudgeted => {
            let (v, amounts) = two_stage_cb(x, &prep.lower, &prep.dev, &prep.gamma, p, want);
            let w = want.then(|| RawWitness {
                realized: prep
                    .lower
                    .iter()
                    .zip(&amounts)
                    .map(|(l, a)| l.clone() + a)
                    .collect(),
                kind: RawKind::Amounts(amounts),
            });
            (prep.first_dot(x) + v, w)
        }
        Pairing::RecoverableDiscreteBudgeted => {
            let (v, delta) = recoverable_db(
                x,
                &prep.lower,
                &prep.dev,
                &prep.gamma,
                p,
                prep.kept_min,
                want,
            );
            let w = want.then(|| RawWitness {
                realized: realize_pattern(&prep.lower, &prep.dev, &delta),
                kind: RawKind::Pattern(pattern_vec(prep.n, &delta)),
            });
            (prep.first_dot(x) + v, w)
        }
        Pairing::RecoverableContinuousBudgeted => {
            let (lower, dev, gamma) = (&prep.lower, &prep.dev, &prep.gamma);
            if !want {
                let v = recoverable_cb_value(x, lower, dev, gamma, p, prep.kept_min, &prep.pi_grid);
                return (prep.first_dot(x) + v, None);
            }
            let (v, alpha, beta) = recoverable_cb_dual(x, lower, dev, gamma, p, prep.kept_min);
            let caps: Vec<Q<I>> = (0..prep.n)
                .map(|i| {
                    let a = if x[i] { alpha.clone() + &beta } else { alpha.clone() };
                    let over = pos(a - &lower[i]);
                    if over < dev[i] {
                        over
                    } else {
                        dev[i].clone()
                    }
                })
                .collect();
            let amounts = allocate_amounts(&caps, gamma);
            let w = RawWitness {
                realized: lower.iter().zip(&amounts).map(|(l, a)| l.clone() + a).collect(),
                kind: RawKind::Amounts(amounts),
            };
            (prep.first_dot(x) + v, Some(w))
        }
    }
}

/// Inner value of `x` against a single realized cost vector.
pub(crate) fn value_under_prepared<I: Int>(prep: &Prepared<I>, x: &[bool], c: &[Q<I>]) -> Q<I> {
    let p = prep.p;
    match prep.pairing.criterion() {
        super::Criterion::MinMax => dot(c, x),
        super::Criterion::MinMaxRegret => dot(c, x) - nominal(c, p).1,
        super::Criterion::TwoStage => prep.first_dot(x) + completion(x, c, p).1,
        super::Criterion::Recoverable => prep.first_dot(x) + recovery(x, c, p, prep.kept_min).1,
    }
}

pub(crate) fn second_stage_of<I: Int>(prep: &Prepared<I>, x: &[bool], c: &[Q<I>]) -> Option<Vec<usize>> {
    match prep.pairing.criterion() {
        super::Criterion::TwoStage => Some(completion(x, c, prep.p).0),
        super::Criterion::Recoverable => Some(recovery(x, c, prep.p, prep.kept_min).0),
        _ => None,
    }
}

/// Recoverable variable-budget value through the convex π sweep, for cross-checks.
#[cfg(test)]
pub(crate) fn recoverable_cb_sweep(
    x: &[bool],
    lower: &[Rational],
    dev: &[Rational],
    gamma: &Rational,
    p: usize,
    k: usize,
) -> Rational {
    let l: Vec<Q<BigInt>> = lower.to_vec();
    let d: Vec<Q<BigInt>> = dev.to_vec();
    let grid = pi_candidates::<BigInt>(x.len(), p, k);
    recoverable_cb_value(x, &l, &d, gamma, p, k, &grid)
}

fn check_solution(x: &SelectionSolution, inst: &ProblemInstance) -> Result<()> {
    let expected = match inst.criterion {
        super::Criterion::TwoStage => SolutionRole::PartialFirstStage,
        _ => SolutionRole::Full,
    };
    if x.role != expected {
        return Err(Error::Cardinality(format!(
            "{} expects a {:?} solution, got {:?}",
            inst.criterion.name(),
            expected,
            x.role
        )));
    }
    x.check(inst.n, inst.p)
}

fn prepared_big(inst: &ProblemInstance) -> Result<Prepared<BigInt>> {
    Ok(Prepared::<BigInt>::new(inst)?.expect("big rationals always convert"))
}

/// Exact robust value of `x`, without building a witness.
pub fn robust_value(x: &SelectionSolution, inst: &ProblemInstance) -> Result<Rational> {
    check_solution(x, inst)?;
    if let Some(prep) = Prepared::<i128>::new(inst)? {
        return Ok(back(&evaluate_prepared(&prep, &x.chosen, false).0));
    }
    let prep = prepared_big(inst)?;
    Ok(evaluate_prepared(&prep, &x.chosen, false).0)
}

/// Exact robust value of `x` with the maximizing scenario and best response.
pub fn evaluate_robust(x: &SelectionSolution, inst: &ProblemInstance) -> Result<EvaluationReport> {
    check_solution(x, inst)?;
    let prep = prepared_big(inst)?;
    let (objective, raw) = evaluate_prepared(&prep, &x.chosen, true);
    let raw = raw.expect("witness requested");
    let second_stage = second_stage_of(&prep, &x.chosen, &raw.realized).map(|y| {
        let role = match inst.criterion {
            super::Criterion::Recoverable => SolutionRole::Full,
            _ => SolutionRole::PartialFirstStage,
        };
        SelectionSolution::from_indices(inst.n, &y, role)
    });
    let kind = match raw.kind {
        RawKind::Scenario(j) => WitnessKind::Scenario(j),
        RawKind::RegretWorstCase => WitnessKind::RegretWorstCase,
        RawKind::UpperBounds => WitnessKind::UpperBounds,
        RawKind::Pattern(v) => WitnessKind::DeviationPattern(v),
        RawKind::Amounts(v) => WitnessKind::DeviationAmounts(v),
    };
    let realized = CostVector::new(raw.realized)?;
    Ok(EvaluationReport {
        objective,
        witness: Witness { kind, realized },
        second_stage,
    })
}

/// Inner objective of `x` when the adversary plays `realized`.
pub fn value_under(
    x: &SelectionSolution,
    inst: &ProblemInstance,
    realized: &CostVector,
) -> Result<Rational> {
    check_solution(x, inst)?;
    if realized.len() != inst.n {
        return Err(Error::LengthMismatch {
            expected: inst.n,
            found: realized.len(),
        });
    }
    let prep = prepared_big(inst)?;
    Ok(value_under_prepared(&prep, &x.chosen, realized.entries()))
}

/// The p cheapest items (ties by lowest index) and their total cost.
pub fn solve_nominal_selection(costs: &CostVector, p: usize) -> Result<(SelectionSolution, Rational)> {
    let n = costs.len();
    if p < 1 || p > n {
        return Err(Error::Parameter(format!("p = {p} outside [1, {n}]")));
    }
    let (idx, v) = nominal(costs.entries(), p);
    Ok((SelectionSolution::full(n, &idx), v))
}

/// c^rwc(x): chosen items at their upper bound, the rest at the lower bound.
pub fn worst_case_regret_scenario(
    x: &SelectionSolution,
    lower: &CostVector,
    deviation: &CostVector,
) -> Result<CostVector> {
    let n = x.len();
    for v in [lower, deviation] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    CostVector::new(
        (0..n)
            .map(|i| {
                if x.chosen[i] {
                    lower.get(i) + deviation.get(i)
                } else {
                    lower.get(i).clone()
                }
            })
            .collect(),
    )
}

/// Cheapest completion y of a partial solution to exactly p items.
pub fn second_stage_completion(
    x: &SelectionSolution,
    c: &CostVector,
    p: usize,
) -> Result<(SelectionSolution, Rational)> {
    let n = x.len();
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: c.len(),
        });
    }
    if x.count() > p || p > n {
        return Err(Error::Cardinality(format!(
            "partial solution selects {} items, p = {p}",
            x.count()
        )));
    }
    let (idx, v) = completion(&x.chosen, c.entries(), p);
    Ok((SelectionSolution::partial(n, &idx), v))
}

/// Cheapest y with Σy = p keeping at least `kept_min` items of x.
pub fn recovery_best_response(
    x: &SelectionSolution,
    c: &CostVector,
    p: usize,
    kept_min: usize,
) -> Result<(SelectionSolution, Rational)> {
    let n = x.len();
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: c.len(),
        });
    }
    if kept_min > p {
        return Err(Error::Parameter(format!("kept_min = {kept_min} exceeds p = {p}")));
    }
    if x.count() != p {
        return Err(Error::Cardinality(format!(
            "recovery needs a full solution with {p} items, got {}",
            x.count()
        )));
    }
    let (idx, v) = recovery(&x.chosen, c.entries(), p, kept_min);
    Ok((SelectionSolution::full(n, &idx), v))
}

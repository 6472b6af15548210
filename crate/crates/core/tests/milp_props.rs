use proptest::prelude::*;
use robsel_core::milp::{solve_lp_exact, solve_milp, MilpModel, Relation, Sense, SolveStatus, SolverConfig};
use robsel_core::rational::{self, int, Rational};

#[derive(Clone, Debug)]
struct Spec {
    sense: Sense,
    obj: Vec<i64>,
    rows: Vec<(Vec<i64>, u8, i64)>,
    /// Continuous variable bounded by [0, 5] appended when set.
    cont: Option<i64>,
}

fn spec() -> impl Strategy<Value = Spec> {
    (1usize..=12, 1usize..=4).prop_flat_map(|(nb, m)| {
        let coef = proptest::collection::vec(-6i64..=9, nb + 1).prop_map(move |mut c| {
            if c[..nb].iter().all(|&a| a == 0) {
                c[0] = 1;
            }
            c
        });
        let row = (coef, 0u8..3, -4i64..=25);
        (
            proptest::sample::select(vec![Sense::Minimize, Sense::Maximize]),
            proptest::collection::vec(-10i64..=10, nb),
            proptest::collection::vec(row, m),
            proptest::option::of(-5i64..=5),
        )
            .prop_map(|(sense, obj, rows, cont)| Spec { sense, obj, rows, cont })
    })
}

fn build(s: &Spec) -> MilpModel {
    let mut m = MilpModel::new(s.sense);
    let xs: Vec<usize> = (0..s.obj.len()).map(|i| m.add_binary(format!("x[{i}]"))).collect();
    for (&v, &c) in xs.iter().zip(&s.obj) {
        m.add_objective_term(v, int(c));
    }
    let y = s.cont.map(|c| {
        let y = m.add_continuous("y", Some(rational::zero()), Some(int(5)));
        m.add_objective_term(y, int(c));
        y
    });
    for (k, (coef, rel, rhs)) in s.rows.iter().enumerate() {
        let mut terms: Vec<(usize, Rational)> = xs.iter().zip(coef).map(|(&v, &a)| (v, int(a))).collect();
        if let Some(y) = y {
            terms.push((y, int(coef[xs.len()])));
        }
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][*rel as usize];
        m.add_constraint(format!("r[{k}]"), terms, rel, int(*rhs));
    }
    m
}

/// Exhaustive optimum; the continuous part is an LP in one variable.
fn enumerate(s: &Spec) -> Option<Rational> {
    let nb = s.obj.len();
    let mut best: Option<Rational> = None;
    for mask in 0u32..1 << nb {
        let x: Vec<i64> = (0..nb).map(|i| (mask >> i & 1) as i64).collect();
        let base: i64 = x.iter().zip(&s.obj).map(|(a, b)| a * b).sum();
        // Feasible interval of y.
        let (mut lo, mut hi) = if s.cont.is_some() {
            (rational::zero(), int(5))
        } else {
            (rational::zero(), rational::zero())
        };
        let mut ok = true;
        for (coef, rel, rhs) in &s.rows {
            let ax: i64 = x.iter().zip(coef).map(|(a, b)| a * b).sum();
            let a = if s.cont.is_some() { coef[nb] } else { 0 };
            let r = int(rhs - ax);
            // a·y (rel) r
            let (le, ge) = match rel {
                0 => (true, false),
                1 => (false, true),
                _ => (true, true),
            };
            if a == 0 {
                let z = rational::zero();
                if (le && z > r) || (ge && z < r) {
                    ok = false;
                }
                continue;
            }
            let t = &r / int(a);
            let (upper, lower) = if a > 0 { (le, ge) } else { (ge, le) };
            if upper {
                hi = hi.min(t.clone());
            }
            if lower {
                lo = lo.max(t);
            }
        }
        if !ok || lo > hi {
            continue;
        }
        let c = s.cont.unwrap_or(0);
        let pick_hi = (c > 0) == (s.sense == Sense::Maximize);
        let yv = if pick_hi { hi } else { lo };
        let v = int(base) + int(c) * yv;
        let better = match &best {
            None => true,
            Some(b) => match s.sense {
                Sense::Minimize => &v < b,
                Sense::Maximize => &v > b,
            },
        };
        if better {
            best = Some(v);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn milp_matches_enumeration(s in spec()) {
        let m = build(&s);
        let cfg = SolverConfig::default();
        let r = solve_milp(&m, &cfg).unwrap();
        match enumerate(&s) {
            None => prop_assert_eq!(r.status, SolveStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(r.status, SolveStatus::Optimal);
                let obj = r.objective.clone().unwrap();
                prop_assert!(rational::to_f64(&(&obj - &v)).abs() <= 1e-6, "{} vs {}", obj, v);
                let a = r.assignment.clone().unwrap();
                prop_assert_eq!(m.objective_value(&a), obj.clone());
                for c in &m.constraints {
                    let lhs = rational::sum(&c.coeffs.iter().map(|(v, k)| k * &a[*v]).collect::<Vec<_>>());
                    let ok = match c.relation {
                        Relation::Le => lhs <= c.rhs,
                        Relation::Ge => lhs >= c.rhs,
                        Relation::Eq => lhs == c.rhs,
                    };
                    prop_assert!(ok, "row {} violated", c.name);
                }
                let lp = solve_lp_exact(&m).unwrap();
                prop_assert_eq!(lp.status, SolveStatus::Optimal);
                let bound = lp.objective.unwrap();
                match s.sense {
                    Sense::Minimize => prop_assert!(bound <= obj),
                    Sense::Maximize => prop_assert!(bound >= obj),
                }
            }
        }
        let again = solve_milp(&m, &cfg).unwrap();
        prop_assert_eq!(again.status, r.status);
        prop_assert_eq!(again.objective, r.objective);
        prop_assert_eq!(again.assignment, r.assignment);
        prop_assert_eq!(again.nodes, r.nodes);
    }
}

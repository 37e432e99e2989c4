use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use ineq::additive::derive_additive;
use ineq::blackboard::Blackboard;
use ineq::check::check_trace;
use ineq::comparison::{Comparison, Rel, TermId};
use ineq::fm;
use ineq::functions::{congruence_close, run_min, Library};
use ineq::multiplicative::preprocess_signs;
use ineq::parse::parse_problem;
use ineq::proof::{Fact, Step};
use ineq::rat::{rat, ratq, Rat};
use ineq::solver::{solve, suggest_splits, Config, Verdict};
use ineq::term::{canonize, compare, eval_expr, evaluate, Expr, STerm, Term};
use ineq::trace::write_trace;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(|v| Expr::Var(v.into())),
        (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Expr::Num(ratq(p, q))),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..5).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Mul),
            (inner.clone(), -2i64..=3).prop_map(|(b, e)| Expr::Pow(Box::new(b), e)),
            inner.clone().prop_map(|a| Expr::App("abs".into(), vec![a])),
            inner.clone().prop_map(|a| Expr::App("f".into(), vec![a])),
            prop::collection::vec(inner, 2..4).prop_map(|xs| Expr::App("min".into(), xs)),
        ]
    })
}

/// Permute sums and products and regroup them into nested binary nodes.
fn scramble(e: &Expr, rng: &mut StdRng) -> Expr {
    match e {
        Expr::Add(xs) | Expr::Mul(xs) => {
            let mut ys: Vec<Expr> = xs.iter().map(|x| scramble(x, rng)).collect();
            ys.shuffle(rng);
            let add = matches!(e, Expr::Add(_));
            let node = |v: Vec<Expr>| if add { Expr::Add(v) } else { Expr::Mul(v) };
            while ys.len() > 2 && rng.gen_bool(0.5) {
                let i = rng.gen_range(0..ys.len() - 1);
                let pair = vec![ys.remove(i), ys.remove(i)];
                ys.insert(i, node(pair));
            }
            node(ys)
        }
        Expr::Pow(b, n) => Expr::Pow(Box::new(scramble(b, rng)), *n),
        Expr::App(f, xs) => Expr::App(f.clone(), xs.iter().map(|x| scramble(x, rng)).collect()),
        x => x.clone(),
    }
}

fn funcs(f: &str, args: &[Rat]) -> Option<Rat> {
    (f == "f" && args.len() == 1).then(|| &args[0] * &args[0] - rat(2) * &args[0] + ratq(1, 3))
}

fn point(rng: &mut StdRng) -> BTreeMap<String, Rat> {
    ["x", "y", "z", "w"]
        .iter()
        .map(|v| {
            (
                v.to_string(),
                ratq(rng.gen_range(-30..=30), rng.gen_range(1..=6)),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonize_is_idempotent(e in expr()) {
        if let Ok(c) = canonize(&e) {
            prop_assert_eq!(canonize(&c.to_expr()).ok(), Some(c));
        }
    }

    #[test]
    fn canonize_ignores_order_and_grouping(e in expr(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        if let Ok(c) = canonize(&e) {
            prop_assert_eq!(canonize(&scramble(&e, &mut rng)).ok(), Some(c));
        }
    }

    #[test]
    fn scalar_law(e in expr(), p in -7i64..=7, q in 1i64..=5) {
        prop_assume!(p != 0);
        let k = ratq(p, q);
        if let Ok(c) = canonize(&e) {
            let s = canonize(&Expr::Mul(vec![Expr::Num(k.clone()), e.clone()])).unwrap();
            if c.coeff.is_zero() {
                prop_assert!(s.coeff.is_zero());
            } else {
                prop_assert_eq!(s.coeff, &c.coeff * &k);
                prop_assert_eq!(s.term, c.term);
            }
        }
    }

    #[test]
    fn canonize_preserves_value(e in expr(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        if let Ok(c) = canonize(&e) {
            for _ in 0..4 {
                let pt = point(&mut rng);
                let env = |v: &str| pt.get(v).cloned();
                if let Some(raw) = eval_expr(&e, &env, &funcs) {
                    prop_assert_eq!(evaluate(&c, &env, &funcs), Some(raw));
                }
            }
        }
    }

    #[test]
    fn term_order_is_total(es in prop::collection::vec(expr(), 1..7)) {
        let ts: Vec<Term> = es.iter().filter_map(|e| canonize(e).ok()).map(|s| s.term).collect();
        for a in &ts {
            for b in &ts {
                prop_assert_eq!(compare(a, b), compare(b, a).reverse());
                prop_assert_eq!(compare(a, b) == Ordering::Equal, a == b);
                for c in &ts {
                    if compare(a, b) == Ordering::Less && compare(b, c) == Ordering::Less {
                        prop_assert_eq!(compare(a, c), Ordering::Less);
                    }
                }
            }
        }
    }

    #[test]
    fn problems_print_and_reparse(hs in prop::collection::vec((expr(), expr()), 1..4), rel in 0usize..6) {
        let rels = ["<", "<=", "=", ">=", ">", "!="];
        let mut text = String::new();
        for (a, b) in &hs {
            text.push_str(&format!("hyp {a} {} {b}\n", rels[rel]));
        }
        text.push_str(&format!("conclude {} < {}\n", hs[0].1, hs[0].0));
        let p = parse_problem(&text).unwrap();
        prop_assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
    }
}

// ---- blackboard ----

/// Random comparisons `a t_i + b t_j rel 0` among `n` registered terms.
fn comparisons(n: usize) -> impl Strategy<Value = Vec<Comparison>> {
    let one = (1..n, 0..n, 1i64..=5, any::<bool>(), -5i64..=5, 0usize..5).prop_filter_map(
        "distinct",
        |(i, j, a, neg, b, r)| {
            if i == j {
                return None;
            }
            let a = if neg { -a } else { a };
            let rel = [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq][r];
            let rel = if a < 0 { rel.flip() } else { rel };
            Some(if b == 0 {
                Comparison::sign(i, rel)
            } else {
                Comparison::new(i, rel, ratq(-b, a), j)
            })
        },
    );
    prop::collection::vec(one, 1..7)
}

fn vars(n: usize) -> Blackboard {
    let mut bb = Blackboard::new();
    for v in 1..n {
        bb.register(&Term::Var(format!("x{v}")));
    }
    bb
}

fn hyp() -> Step {
    Step::new("input", "hyp", vec![], Fact::absurd())
}

/// Points at which every value of `inputs` holds, with term values computed
/// from the variables.
fn sample_points(
    bb: &Blackboard,
    inputs: &[Comparison],
    rng: &mut StdRng,
    want: usize,
) -> Vec<Vec<Rat>> {
    let mut out = Vec::new();
    for _ in 0..20_000 {
        if out.len() == want {
            break;
        }
        let mut env: BTreeMap<String, Rat> = BTreeMap::new();
        for t in 1..bb.num_terms() {
            if let Term::Var(v) = bb.term(t) {
                env.insert(
                    v.clone(),
                    ratq(rng.gen_range(-40..=40), rng.gen_range(1..=8)),
                );
            }
        }
        let vals: Option<Vec<Rat>> = (0..bb.num_terms())
            .map(|t| {
                if t == 0 {
                    return Some(rat(1));
                }
                let e = |v: &str| env.get(v).cloned();
                evaluate(&STerm::of(bb.term(t).clone()), &e, &funcs)
            })
            .collect();
        let Some(vals) = vals else { continue };
        if inputs.iter().all(|c| c.holds(&|t: TermId| vals[t].clone())) {
            out.push(vals);
        }
    }
    out
}

fn all_facts(bb: &Blackboard) -> Vec<Comparison> {
    bb.comparisons()
        .into_iter()
        .chain(bb.disequalities())
        .map(|(c, _)| c)
        .collect()
}

fn assert_sound(bb: &Blackboard, inputs: &[Comparison], seed: u64) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    for vals in sample_points(bb, inputs, &mut rng, 100) {
        prop_assert!(
            !bb.has_contradiction(),
            "contradiction with a satisfying point"
        );
        for c in all_facts(bb) {
            prop_assert!(
                c.holds(&|t: TermId| vals[t].clone()),
                "{} fails at {:?}",
                c,
                vals
            );
        }
    }
    Ok(())
}

const GRID: std::ops::RangeInclusive<i64> = -12..=12;

fn grid() -> impl Iterator<Item = Rat> {
    GRID.map(|k| ratq(k, 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn pair_storage_is_bounded(cs in comparisons(4)) {
        let mut bb = vars(4);
        for c in &cs {
            bb.assert_cmp(c, hyp());
            if bb.has_contradiction() {
                break;
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    let rels: Vec<Rel> = bb.pair_facts(i, j).iter().map(|(c, _)| c.rel).collect();
                    let eqs = rels.iter().filter(|r| **r == Rel::Eq).count();
                    prop_assert!(rels.len() <= 2 && (eqs == 0 || rels.len() == 1), "{:?}", rels);
                }
            }
        }
    }

    #[test]
    fn assertion_is_monotone(cs in comparisons(4)) {
        let mut bb = vars(4);
        let ranges = |bb: &Blackboard| -> Vec<Vec<bool>> {
            let mut out = Vec::new();
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        for dir in [Rel::Le, Rel::Ge] {
                            let r = bb.implied_range(i, j, dir);
                            out.push(grid().map(|c| r.contains(&c)).collect());
                        }
                    }
                }
            }
            out
        };
        let mut was_contradiction = false;
        for c in &cs {
            let before = ranges(&bb);
            bb.assert_cmp(c, hyp());
            if was_contradiction {
                prop_assert!(bb.has_contradiction());
            }
            was_contradiction = bb.has_contradiction();
            if !was_contradiction {
                for (a, b) in before.iter().zip(ranges(&bb)) {
                    prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
                }
            }
        }
    }

    #[test]
    fn implied_ranges_are_sound(cs in comparisons(4), seed in any::<u64>()) {
        let mut bb = vars(4);
        for c in &cs {
            bb.assert_cmp(c, hyp());
        }
        prop_assume!(!bb.has_contradiction());
        let facts = all_facts(&bb);
        let mut rng = StdRng::seed_from_u64(seed);
        for vals in sample_points(&bb, &facts, &mut rng, 30) {
            for i in 0..4 {
                for j in 0..4 {
                    if i == j {
                        continue;
                    }
                    for dir in [Rel::Le, Rel::Ge] {
                        let r = bb.implied_range(i, j, dir);
                        for c in grid().filter(|c| r.contains(c)) {
                            prop_assert!(dir.holds(&vals[i], &(&c * &vals[j])), "t{} {} {}*t{}", i, dir, c, j);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn additive_facts_are_sound(cs in comparisons(4), seed in any::<u64>()) {
        let mut bb = vars(4);
        for c in &cs {
            bb.assert_cmp(c, hyp());
        }
        derive_additive(&mut bb, &fm::Config::default());
        assert_sound(&bb, &cs, seed)?;
    }

    #[test]
    fn sign_facts_are_sound(signs in prop::collection::vec((0usize..3, 0usize..5), 1..4), monos in prop::collection::vec(prop::collection::vec((0usize..3, -2i64..=3), 1..4), 1..4), seed in any::<u64>()) {
        let names = ["x", "y", "z"];
        let mut bb = vars(1);
        for m in &monos {
            let e = Expr::Mul(m.iter().map(|(v, k)| Expr::Pow(Box::new(Expr::Var(names[*v].into())), *k)).collect());
            if let Ok(s) = canonize(&e) {
                if !s.is_constant() {
                    bb.register(&s.term);
                }
            }
        }
        let mut inputs = Vec::new();
        for (v, r) in &signs {
            let Some(t) = bb.lookup(&Term::Var(names[*v].into())) else { continue };
            let c = Comparison::sign(t, [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Ne][*r]);
            bb.assert_cmp(&c, hyp());
            inputs.push(c);
        }
        preprocess_signs(&mut bb);
        assert_sound(&bb, &inputs, seed)?;
    }

    #[test]
    fn function_facts_are_sound(cs in comparisons(3), a in -3i64..=3, b in -3i64..=3, seed in any::<u64>()) {
        let mut bb = vars(3);
        let arg = |k: i64| Expr::Add(vec![Expr::Var("x1".into()), Expr::Mul(vec![Expr::num(k), Expr::Var("x2".into())])]);
        for e in [Expr::App("abs".into(), vec![arg(a)]), Expr::App("min".into(), vec![arg(a), arg(b)])] {
            if let Ok(s) = canonize(&e) {
                if !s.is_constant() {
                    bb.register(&s.term);
                }
            }
        }
        for c in &cs {
            bb.assert_cmp(c, hyp());
        }
        let mut lib = Library::new();
        for _ in 0..2 {
            lib.run(&mut bb);
            run_min(&mut bb);
            derive_additive(&mut bb, &fm::Config::default());
        }
        assert_sound(&bb, &cs, seed)?;
    }
}

#[test]
fn congruence_reaches_a_fixpoint() {
    let mut bb = Blackboard::new();
    let fx = canonize(&ineq::parse::parse_expr("f(x + 1) + f(y)").unwrap()).unwrap();
    bb.register(&fx.term);
    let y = bb.lookup(&Term::Var("y".into())).unwrap();
    let xp1 = bb.register(
        &canonize(&ineq::parse::parse_expr("x + 1").unwrap())
            .unwrap()
            .term,
    );
    bb.assert_cmp(&Comparison::new(xp1, Rel::Eq, rat(1), y), hyp());
    derive_additive(&mut bb, &fm::Config::default());
    assert!(congruence_close(&mut bb) > 0);
    assert_eq!(congruence_close(&mut bb), 0);
}

// ---- driver ----

fn problem() -> impl Strategy<Value = String> {
    let atom = prop::sample::select(vec![
        "x", "y", "z", "x*y", "y*z", "x*z", "x^2", "x*y*z", "1",
    ]);
    let term = (-3i64..=3, atom).prop_map(|(c, a)| format!("{c}*{a}"));
    let side = prop::collection::vec(term, 1..3).prop_map(|ts| ts.join(" + "));
    let rel = prop::sample::select(vec!["<", "<=", ">", ">="]);
    let cmp = (side.clone(), rel.clone(), side).prop_map(|(a, r, b)| format!("{a} {r} {b}"));
    (prop::collection::vec(cmp.clone(), 1..4), cmp).prop_map(|(hs, c)| {
        let mut s: String = hs.iter().map(|h| format!("hyp {h}\n")).collect();
        s.push_str(&format!("conclude {c}\n"));
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn proofs_are_sound_and_checkable(text in problem(), seed in any::<u64>()) {
        let p = parse_problem(&text).unwrap();
        let cfg = Config { split_depth: 1, max_rounds: 6, ..Config::default() };
        let r = solve(&p, &cfg);
        prop_assert!(r.stats.splits <= 4);
        if r.verdict != Verdict::Proved {
            return Ok(());
        }
        let t = write_trace(&r).expect("proved runs have traces");
        prop_assert!(check_trace(&p, &t).is_ok(), "{:?}", check_trace(&p, &t));
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..2000 {
            let pt = point(&mut rng);
            let env = |v: &str| pt.get(v).cloned();
            let ev = |e: &Expr| eval_expr(e, &env, &funcs);
            if p.hyps.iter().all(|h| h.holds(&ev) == Some(true)) {
                prop_assert_eq!(p.conclusion.as_ref().unwrap().holds(&ev), Some(true), "counterexample {:?}", pt);
            }
        }
    }

    #[test]
    fn split_candidates_cover(
        atoms in prop::collection::vec(prop::sample::select(vec!["x*y", "y*z", "x*y*z", "x^2*y", "abs(x - y)", "min(x, y)", "min(x, 2*z)"]), 1..4),
        signs in prop::collection::vec((prop::sample::select(vec!["x", "y", "z"]), 0usize..3), 0..3),
    ) {
        let mut bb = Blackboard::new();
        for a in &atoms {
            bb.register(&canonize(&ineq::parse::parse_expr(a).unwrap()).unwrap().term);
        }
        for (v, r) in &signs {
            if let Some(t) = bb.lookup(&Term::Var(v.to_string())) {
                bb.assert_cmp(&Comparison::sign(t, [Rel::Lt, Rel::Gt, Rel::Eq][*r]), hyp());
            }
        }
        for s in suggest_splits(&bb) {
            let mut rels: Vec<Rel> = s.cases.iter().map(|c| c.rel).collect();
            rels.sort_by_key(|r| [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt, Rel::Ne].iter().position(|x| x == r));
            let same = s.cases.windows(2).all(|w| (w[0].lhs, &w[0].coeff, w[0].rhs) == (w[1].lhs, &w[1].coeff, w[1].rhs));
            prop_assert!(same);
            prop_assert!(rels == [Rel::Lt, Rel::Eq, Rel::Gt] || rels == [Rel::Le, Rel::Ge], "{:?}", rels);
        }
    }
}

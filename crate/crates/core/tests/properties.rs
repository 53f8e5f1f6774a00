// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use proptest::prelude::*;

use fidelium::algebra::builtin::{diamond, h3, two};
use fidelium::eval::Frame;
use fidelium::universe::HfSet;
use fidelium::{Algebra, EvalContext, Formula, NameId, RuleSet, Term, Universe};

fn algebra(k: usize) -> Algebra {
    match k % 3 {
        0 => two(),
        1 => h3(),
        _ => diamond(),
    }
}

fn sampled(k: usize, seed: u64) -> EvalContext {
    let alg = Arc::new(algebra(k));
    let un = Universe::sample(alg.clone(), seed, 20, 2, 2);
    EvalContext::with_default_policy(Frame::Bare(alg), un, RuleSet::HV).unwrap()
}

fn nth(ctx: &EvalContext, i: usize) -> NameId {
    let n = ctx.universe().len();
    ctx.universe().ids().nth(i % n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equality_is_symmetric_and_reflexive(k in 0usize..3, seed in any::<u64>(), i in 0usize..20, j in 0usize..20) {
        let mut ctx = sampled(k, seed);
        let (u, v) = (nth(&ctx, i), nth(&ctx, j));
        prop_assert_eq!(ctx.equality(u, v).unwrap(), ctx.equality(v, u).unwrap());
        prop_assert_eq!(ctx.equality(u, u).unwrap(), ctx.algebra().top());
    }

    #[test]
    fn membership_respects_equality(k in 0usize..3, seed in any::<u64>(), i in 0usize..20, j in 0usize..20, l in 0usize..20) {
        let mut ctx = sampled(k, seed);
        let (u, v, w) = (nth(&ctx, i), nth(&ctx, j), nth(&ctx, l));
        let alg = ctx.algebra().clone();
        let eq = ctx.equality(u, v).unwrap();
        let (mu, mv) = (ctx.membership(u, w).unwrap(), ctx.membership(v, w).unwrap());
        prop_assert!(alg.leq(alg.meet(eq, mu), mv));
        let (wu, wv) = (ctx.membership(w, u).unwrap(), ctx.membership(w, v).unwrap());
        prop_assert!(alg.leq(alg.meet(eq, wu), wv));
    }

    #[test]
    fn negation_free_formulas_pass_the_leibniz_audit(k in 0usize..3, seed in any::<u64>(), t in 0usize..4, i in 0usize..20) {
        let templates = ["x in p", "exists y in x. y = p", "forall y in p. y in x", "x = p -> p in x"];
        let mut ctx = sampled(k, seed);
        let (p, x) = (nth(&ctx, i), nth(&ctx, i + 1));
        let f = Formula::parse(templates[t]).unwrap().subst("p", &Term::Name(p)).subst("x", &Term::Name(x));
        prop_assert!(ctx.audit_sentence(&f).unwrap().passed());
    }

    #[test]
    fn hats_are_crisp(k in 0usize..3, a in 0usize..16, b in 0usize..16) {
        let sets = HfSet::all_up_to_rank(3);
        let alg = Arc::new(algebra(k));
        let mut un = Universe::new(alg.clone());
        let (u, v) = (un.hat(&sets[a]), un.hat(&sets[b]));
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(alg.clone()), un, RuleSet::HV).unwrap();
        let crisp = |e| e == alg.top() || e == alg.least();
        prop_assert!(crisp(ctx.membership(u, v).unwrap()));
        prop_assert!(crisp(ctx.equality(u, v).unwrap()));
    }
}

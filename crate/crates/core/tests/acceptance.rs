// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always appear in `cargo test` output.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fidelium::algebra::builtin::{diamond, h3, two};
use fidelium::eval::Frame;
use fidelium::fidel::FidelKind;
use fidelium::prop::{self, Logic, ValidityOptions};
use fidelium::universe::HfSet;
use fidelium::zf::{self, Axiom, CheckOptions, MixingVerdict};
use fidelium::{Algebra, Elem, EvalContext, FidelStructure, Formula, NameId, NegationPolicy, RuleSet, Term, Universe};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(file)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["fidelium"];
    argv.extend_from_slice(args);
    let code = fidelium::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned() + &String::from_utf8_lossy(&err))
}

// ---------------------------------------------------------------------------
// 1. H3 tables

fn criterion_1() -> Outcome {
    // Reference tables, written out by hand.
    let expected_imp = [
        ("0", "0", "1"),
        ("0", "1/2", "1"),
        ("0", "1", "1"),
        ("1/2", "0", "0"),
        ("1/2", "1/2", "1"),
        ("1/2", "1", "1"),
        ("1", "0", "0"),
        ("1", "1/2", "1/2"),
        ("1", "1", "1"),
    ];
    let expected_neg = [("0", "1"), ("1/2", "1/2"), ("1", "0")];
    let file = data("h3.json");
    let loaded = Algebra::from_json(&std::fs::read_to_string(&file).map_err(e)?).map_err(e)?;
    for alg in [&loaded, &h3()] {
        let el = |n: &str| alg.elem(n).ok_or_else(|| format!("missing element {n}"));
        for &(a, b, c) in &expected_imp {
            let got = alg.implies(el(a)?, el(b)?);
            ensure(got == el(c)?, || format!("{a} -> {b} = {}, expected {c}", alg.name(got)))?;
        }
        for &(a, c) in &expected_neg {
            let got = alg.negation(el(a)?).ok_or("no negation table")?;
            ensure(got == el(c)?, || format!("~{a} = {}, expected {c}", alg.name(got)))?;
        }
    }
    let (code, text) = run_cli(&["algebra", "check", file.to_str().unwrap()]);
    ensure(code == 0, || format!("CLI exit {code}"))?;
    for row in ["  1/2 |   0   1   1", "    1 |   0 1/2   1", "~1/2 = 1/2"] {
        ensure(text.contains(row), || format!("CLI output lacks `{row}`:\n{text}"))?;
    }
    Ok("9 implication and 3 negation entries match, file and builtin".into())
}

// ---------------------------------------------------------------------------
// 2. Leibniz counterexample over H3 with table negation

fn criterion_2() -> Outcome {
    let r = zf::h3_leibniz().map_err(e)?;
    let got = [&r.eq_uv, &r.psi_u, &r.psi_v, &r.neg_psi_u, &r.neg_psi_v, &r.implication];
    ensure(got == ["1/2", "1/2", "1", "1/2", "0", "0"], || format!("values {got:?}"))?;
    ensure(r.violated, || "no Leibniz violation reported".into())?;

    // Same instance from the shipped fragment and an explicit negation table.
    let (code, text) = run_cli(&[
        "eval",
        "--algebra",
        "h3",
        "--fragment",
        data("leibniz.frag").to_str().unwrap(),
        "--ruleset",
        "hv",
        "--policy",
        "table",
        "--table",
        data("h3_unary_table.json").to_str().unwrap(),
        "--formula",
        "~(w in u)",
    ]);
    ensure(code == 1, || format!("audit should fail (exit 1), got {code}:\n{text}"))?;
    ensure(text.contains("⟦u≈v⟧ = 1/2 ≰ (1/2 → 0) = 0"), || format!("audit line missing:\n{text}"))?;

    let (code, text) = run_cli(&["zf", "repro", "h3-leibniz"]);
    ensure(code == 0, || format!("repro exit {code}"))?;
    for line in ["⟦u≈v⟧ = 1/2", "⟦ψ(u)⟧ = 1/2", "⟦ψ(v)⟧ = 1", "⟦¬ψ(u)⟧ = 1/2", "⟦¬ψ(v)⟧ = 0", "(1/2 → 0) = 0"] {
        ensure(text.contains(line), || format!("repro output lacks `{line}`"))?;
    }
    Ok("⟦u≈v⟧=½ ⟦ψ(u)⟧=½ ⟦ψ(v)⟧=1 ⟦¬ψ(u)⟧=½ ⟦¬ψ(v)⟧=0; ½ ≰ (½→0)=0 reported".into())
}

// ---------------------------------------------------------------------------
// 3, 4. Propositional sweeps

/// Every instance of the schema with metavariables drawn from `{p, q}`.
fn instances(id: &str) -> Vec<Formula> {
    let s = prop::schema(id).expect("shipped schema");
    let metas: Vec<String> = s.pattern.props().into_iter().collect();
    let atoms = [Formula::prop("p"), Formula::prop("q")];
    (0..1usize << metas.len())
        .map(|mask| {
            let sub: HashMap<String, Formula> =
                metas.iter().enumerate().map(|(i, m)| (m.clone(), atoms[(mask >> i) & 1].clone())).collect();
            s.pattern.instantiate(&sub)
        })
        .collect()
}

struct Sweep {
    checked: usize,
    modes: Vec<String>,
}

fn sweep(logic: Logic, ids: &[&str], max_size: usize, sizes: &[usize]) -> Result<Sweep, String> {
    let mut checked = 0;
    let mut modes = Vec::new();
    for id in ids {
        for f in instances(id) {
            let r = prop::prop_validity(&f, logic, ValidityOptions::with_max_size(max_size)).map_err(e)?;
            if let Some(c) = &r.countermodel {
                return Err(format!("{id} instance {f} fails in {}", c.structure));
            }
            for c in r.coverage.iter().filter(|c| sizes.contains(&c.size)) {
                let m = format!("|A|={} {}", c.size, c.mode);
                if !modes.contains(&m) {
                    modes.push(m);
                }
            }
            checked += 1;
        }
    }
    Ok(Sweep { checked, modes })
}

fn explosion_countermodel(logic: Logic, max_size: usize) -> Result<String, String> {
    let f = Formula::parse("p -> (~p -> q)").map_err(e)?;
    let r = prop::prop_validity(&f, logic, ValidityOptions::with_max_size(max_size)).map_err(e)?;
    r.countermodel.map(|c| c.structure).ok_or_else(|| format!("explosion valid in {logic}"))
}

fn criterion_3() -> Outcome {
    let ids = Logic::N4.axioms();
    ensure(ids.len() == 12, || format!("N4 has {} schemas", ids.len()))?;
    let s = sweep(Logic::N4, &ids, 3, &[1, 2, 3])?;
    ensure(s.modes.iter().all(|m| m.contains("all-structures")), || format!("non-exhaustive coverage: {:?}", s.modes))?;
    // The explosion schema of N3 is an N4 formula with N4 countermodels.
    let exp = prop::schema("N3-EXP").ok_or("no N3-EXP schema")?;
    let f = exp.pattern.instantiate(&HashMap::from([("A".into(), Formula::prop("p")), ("B".into(), Formula::prop("q"))]));
    let r = prop::prop_validity(&f, Logic::N4, ValidityOptions::with_max_size(3)).map_err(e)?;
    let cm = r.countermodel.ok_or("N3 explosion is N4-valid")?;
    Ok(format!("{} instances valid ({}); explosion fails in {}", s.checked, s.modes.join(", "), cm.structure))
}

fn criterion_4() -> Outcome {
    let c1 = sweep(Logic::C1, &Logic::C1.axioms()[8..], 4, &[2, 4])?;
    let cw = sweep(Logic::COmega, &Logic::COmega.axioms()[8..], 4, &[2, 4])?;
    let m1 = explosion_countermodel(Logic::C1, 4)?;
    let mw = explosion_countermodel(Logic::COmega, 4)?;
    Ok(format!(
        "C1-C5: {} instances ({}); C1/C2 in Cω: {} instances ({}); explosion fails in {m1} and {mw}",
        c1.checked,
        c1.modes.join(", "),
        cw.checked,
        cw.modes.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 5. Witness identities

fn witness_checks(ctx: &mut EvalContext, separations: &[&str]) -> Result<usize, String> {
    let mut checked = 0;
    let mut axioms = vec![Axiom::Pairing, Axiom::Union, Axiom::Powerset, Axiom::EmptySet];
    for s in separations {
        axioms.push(Axiom::Separation(Formula::parse(s).map_err(e)?));
    }
    let snapshot: Vec<NameId> = ctx.universe().ids().collect();
    for ax in &axioms {
        let opts = CheckOptions { instances: Some(snapshot.clone()), ..CheckOptions::default() };
        let r = zf::check_axiom(ctx, ax, &opts).map_err(e)?;
        ensure(r.holds, || format!("{}: {:?}", r.axiom, r.failures.iter().map(ToString::to_string).collect::<Vec<_>>()))?;
        checked += r.checked;
    }
    Ok(checked)
}

fn criterion_5() -> Outcome {
    let seps = ["x in x", "exists y in x. y = y", "forall y in x. y in x"];
    let alg2 = Arc::new(two());
    let un = Universe::enumerate(alg2.clone(), 2, 2, 1000).map_err(e)?;
    let n2 = un.len();
    ensure(n2 <= 40, || format!("{n2} names over 2"))?;
    let mut ctx = EvalContext::new(Frame::Bare(alg2), un, RuleSet::BV2, NegationPolicy::Complement).map_err(e)?;
    let c2 = witness_checks(&mut ctx, &[seps[0], seps[1], seps[2], "~(x in x)"])?;

    let alg3 = Arc::new(h3());
    let s = FidelStructure::saturate(alg3.clone(), FidelKind::N4).map_err(e)?;
    let un = Universe::sample(alg3, 5, 40, 2, 2);
    let n3 = un.len();
    let mut ctx = EvalContext::new(Frame::Fidel(s), un, RuleSet::N4, NegationPolicy::Swap(vec![])).map_err(e)?;
    let c3 = witness_checks(&mut ctx, &[seps[0], seps[1], seps[2], "~(x in x)", "~(x = x)"])?;
    Ok(format!("2 with complement: {n2} names, {c2} relations; saturated N3 with swap: {n3} names, {c3} relations"))
}

// ---------------------------------------------------------------------------
// 6. Mixing lemma

fn mixing_ctx(alg: Algebra, rank: usize, dom: usize) -> Result<EvalContext, String> {
    let alg = Arc::new(alg);
    let un = Universe::enumerate(alg.clone(), rank, dom, 1000).map_err(e)?;
    EvalContext::with_default_policy(Frame::Bare(alg), un, RuleSet::HV).map_err(e)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut accepted = 0;
    let mut attempts = 0;
    let mut ctxs = [mixing_ctx(two(), 2, 2)?, mixing_ctx(diamond(), 1, 1)?];
    while accepted < 500 {
        attempts += 1;
        ensure(attempts < 100_000, || format!("only {accepted} instances met the hypothesis"))?;
        let ctx = &mut ctxs[attempts % 2];
        let ids: Vec<NameId> = ctx.universe().ids().collect();
        let elems: Vec<Elem> = ctx.algebra().elements().collect();
        let k = rng.gen_range(1..=3);
        let parts: Vec<(Elem, NameId)> =
            (0..k).map(|_| (*elems.choose(&mut rng).unwrap(), *ids.choose(&mut rng).unwrap())).collect();
        match zf::check_mixing_lemma(ctx, &parts).map_err(e)? {
            MixingVerdict::HypothesisNotMet { .. } => {}
            MixingVerdict::Holds { .. } => accepted += 1,
            MixingVerdict::Violated { i, weight, eq } => {
                return Err(format!("part {i}: weight {weight} exceeds ⟦u_i≈u⟧ = {eq}"));
            }
        }
    }
    // Exhaustive: |A| = 2, at most two parts, rank ≤ 1.
    let mut ctx = mixing_ctx(two(), 1, 1)?;
    let ids: Vec<NameId> = ctx.universe().ids().collect();
    let singles: Vec<(Elem, NameId)> =
        ctx.algebra().elements().flat_map(|a| ids.iter().map(move |&u| (a, u))).collect();
    let mut exhaustive = 0;
    let mut met = 0;
    let mut cases: Vec<Vec<(Elem, NameId)>> = singles.iter().map(|&p| vec![p]).collect();
    cases.extend(singles.iter().flat_map(|&p| singles.iter().map(move |&q| vec![p, q])));
    for parts in cases {
        exhaustive += 1;
        match zf::check_mixing_lemma(&mut ctx, &parts).map_err(e)? {
            MixingVerdict::Violated { i, weight, eq } => return Err(format!("exhaustive: part {i} {weight} vs {eq}")),
            MixingVerdict::Holds { .. } => met += 1,
            MixingVerdict::HypothesisNotMet { .. } => {}
        }
    }
    Ok(format!("500 random instances hold ({attempts} drawn); exhaustive {exhaustive} cases, {met} meeting the hypothesis"))
}

// ---------------------------------------------------------------------------
// 7. Maximum principle

fn criterion_7() -> Outcome {
    let templates = ["x = p", "x in p", "p in x", "exists y in x. y = p", "forall y in x. y in p"];
    let mut cases = 0;
    let mut seed = 0u64;
    while cases < 20 {
        ensure(seed < 10_000, || format!("only {cases} cases satisfied the hypothesis"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        seed += 1;
        let alg = Arc::new(two());
        let un = Universe::sample(alg.clone(), seed, 12, 2, 2);
        let ids: Vec<NameId> = un.ids().collect();
        let p = *ids.choose(&mut rng).unwrap();
        let t = templates.choose(&mut rng).unwrap();
        let psi = Formula::parse(t).map_err(e)?.subst("p", &Term::Name(p));
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(alg), un, RuleSet::HV).map_err(e)?;
        let mut ex = ctx.algebra().least();
        for &x in &ids {
            let v = ctx.eval_with(&psi, "x", x).map_err(e)?;
            ex = ctx.algebra().join(ex, v);
        }
        if ex != ctx.algebra().top() {
            continue;
        }
        let u = zf::maximum_principle_witness(&mut ctx, &psi).map_err(e)?;
        let v = ctx.eval_with(&psi, "x", u).map_err(e)?;
        ensure(v == ctx.algebra().top(), || format!("seed {seed}: ⟦ψ(u)⟧ = {}", ctx.name(v)))?;
        cases += 1;
    }
    Ok(format!("20 cases with ⟦∃xψ⟧ = 1 (seeds 0..{seed}), each witness has ⟦ψ(u)⟧ = 1"))
}

// ---------------------------------------------------------------------------
// 8. Hat embedding

fn criterion_8() -> Outcome {
    let sets = HfSet::all_up_to_rank(3);
    ensure(sets.len() == 16, || format!("{} sets of rank ≤ 3", sets.len()))?;
    let mut checked = 0;
    for alg in [two(), h3()] {
        let alg = Arc::new(alg);
        let mut un = Universe::new(alg.clone());
        let hats: Vec<NameId> = sets.iter().map(|s| un.hat(s)).collect();
        let mut ctx = EvalContext::with_default_policy(Frame::Bare(alg.clone()), un, RuleSet::HV).map_err(e)?;
        let top = alg.top();
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                let mem = ctx.membership(hats[i], hats[j]).map_err(e)? == top;
                let eq = ctx.equality(hats[i], hats[j]).map_err(e)? == top;
                ensure(mem == b.contains(a), || format!("{a} ∈ {b}: {} vs {mem}", b.contains(a)))?;
                ensure(eq == (a == b), || format!("{a} = {b}: {} vs {eq}", a == b))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} ordered pairs over 2 and H3"))
}

// ---------------------------------------------------------------------------
// 9. Paraconsistency over 2

fn criterion_9() -> Outcome {
    let r = zf::standard_demo(RuleSet::BV2).map_err(e)?;
    ensure(r.policy == "constant-top", || format!("policy {}", r.policy))?;
    ensure(r.alpha_value == "1" && r.not_alpha_value.as_deref() == Some("1"), || format!("{r:?}"))?;
    ensure(r.beta_value == "0", || format!("⟦u∈∅̂⟧ = {}", r.beta_value))?;
    let audit = r.leibniz.as_ref().ok_or("no Leibniz audit")?;
    ensure(audit.passed(), || format!("{} audit violations", audit.violations.len()))?;

    // Recomputed from scratch.
    let alg = Arc::new(two());
    let mut un = Universe::new(alg.clone());
    let empty = un.hat(&HfSet::empty());
    let u = un.hat(&HfSet::numeral(1));
    let mut ctx = EvalContext::new(Frame::Bare(alg.clone()), un, RuleSet::BV2, NegationPolicy::ConstantTop).map_err(e)?;
    let uu = Formula::eq(Term::Name(u), Term::Name(u));
    let a = ctx.eval(&uu).map_err(e)?;
    let na = ctx.eval(&Formula::not(uu.clone())).map_err(e)?;
    let b = ctx.eval(&Formula::mem(Term::Name(u), Term::Name(empty))).map_err(e)?;
    ensure((a, na, b) == (alg.top(), alg.top(), alg.least()), || "recomputed values differ".into())?;
    let audit = ctx.audit_sentence(&Formula::not(uu)).map_err(e)?;
    ensure(audit.passed(), || "recomputed audit fails".into())?;
    Ok(format!("⟦u≈u⟧ = ⟦¬(u≈u)⟧ = 1, ⟦u∈∅̂⟧ = 0, audit {} instances clean", audit.checked))
}

// ---------------------------------------------------------------------------
// 10. Cores

fn criterion_10() -> Outcome {
    let alg = Arc::new(two());
    let un = Universe::enumerate(alg.clone(), 2, 2, 1000).map_err(e)?;
    let ids: Vec<NameId> = un.ids().collect();
    let mut ctx = EvalContext::with_default_policy(Frame::Bare(alg.clone()), un, RuleSet::BV2).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let owners: Vec<NameId> = ids.choose_multiple(&mut rng, 10).copied().collect();
    let mut sizes = Vec::new();
    for u in owners {
        let core = zf::compute_core(&mut ctx, u).map_err(e)?;
        let check = zf::check_core(&mut ctx, &core).map_err(e)?;
        ensure(check.passed(), || format!("{}: {:?}", ctx.universe().structural(u), check.failures))?;
        // Corollary, recomputed: ⟦x∈u⟧ = max over core y of ⟦x≈y⟧ (0 for an empty core).
        for &x in &ids {
            let mut best = alg.least();
            for &y in &core.members {
                best = alg.join(best, ctx.equality(x, y).map_err(e)?);
            }
            let m = ctx.membership(x, u).map_err(e)?;
            ensure(best == m, || format!("x = {}: ⟦x∈u⟧ = {}", ctx.universe().structural(x), alg.name(m)))?;
        }
        sizes.push(core.members.len());
    }
    Ok(format!("10 owners, core sizes {sizes:?}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("H3 implication and negation tables", criterion_1, Duration::from_secs(1)),
        ("Leibniz counterexample over H3", criterion_2, Duration::from_secs(1)),
        ("N4 soundness sweep, |A| ≤ 3", criterion_3, Duration::from_secs(300)),
        ("C1 and Cω sweeps, |A| ∈ {2,4}", criterion_4, Duration::from_secs(600)),
        ("witness identities over 2 and saturated N3", criterion_5, Duration::from_secs(120)),
        ("mixing lemma", criterion_6, Duration::from_secs(600)),
        ("maximum principle", criterion_7, Duration::from_secs(600)),
        ("hat embedding, rank ≤ 3", criterion_8, Duration::from_secs(60)),
        ("paraconsistency over 2", criterion_9, Duration::from_secs(60)),
        ("core invariants", criterion_10, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f, limit)) in criteria.iter().enumerate() {
        let n = k + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let res = match res {
            Ok(detail) if took > *limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match res {
            Ok(detail) => println!("PASS criterion {n:>2}: {name} [{took:.2?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2}: {name} [{took:.2?}] {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

//! Acceptance checks. Runs without the libtest harness so that each
//! criterion prints exactly one PASS or FAIL line.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;
use std::time::{Duration, Instant};
use templar::backends::{Backend, Builtin, Fault, FaultSet};
use templar::bundled;
use templar::difftest::{campaign, measure_reachability, DiffOptions, Verdict};
use templar::extract::{extract_template, ExtractionConfig};
use templar::gen::{apply_filled_holes, generate, is_definitely_false, run_template, static_generate, Falsity, GenConfig, Optimizations};
use templar::lang::{print, BinOp, Expr, HoleNode, Ident};
use templar::randprog::{random_program, RandConfig};
use templar::template::{exec_entry, fill, ChoiceStream, Executor, Identifiers, StreamKey, Template, DEFAULT_STEP_BUDGET};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn builtin(s: &str) -> Builtin {
    Builtin::new(s.parse().unwrap())
}

fn semantics_oracle() -> Check {
    let backends: Vec<Builtin> = ["ref", "vm", "tiered:1:1", "tiered:10:1", "tiered:500:1"].iter().map(|s| builtin(s)).collect();
    let programs: Vec<_> = {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        (0..10_000).map(|_| random_program(&mut rng, &RandConfig::default())).collect()
    };
    let longest = programs.iter().map(|p| p.stmts.len()).max().unwrap();
    if longest > 30 {
        return Err(format!("generator produced {longest} statements"));
    }
    let bad: Vec<String> = programs
        .par_iter()
        .filter_map(|p| {
            let expect = common::naive_trace(p, 100);
            for b in &backends {
                match b.trace(p, 100, DEFAULT_STEP_BUDGET) {
                    Ok(t) if t == expect => {}
                    Ok(_) => return Some(format!("{} differs on\n{}", b.name(), print(p))),
                    Err(e) => return Some(format!("{} failed ({e}) on\n{}", b.name(), print(p))),
                }
            }
            None
        })
        .collect();
    match bad.first() {
        None => Ok(format!("{} programs x {} backends x 100 iterations, 0 mismatches", programs.len(), backends.len())),
        Some(first) => Err(format!("{} mismatching programs; first: {first}", bad.len())),
    }
}

fn neutrality() -> Check {
    let templates = bundled::all();
    if templates.len() < 10 || bundled::get("sum_compare").is_none() {
        return Err("need at least 10 bundled templates including sum_compare".into());
    }
    for (id, t) in &templates {
        let mut first: Option<Vec<String>> = None;
        for opt in Optimizations::subsets() {
            let cfg = GenConfig { optimizations: opt, ..GenConfig::desk() };
            let texts: Vec<String> = generate(t, &cfg).map_err(|e| format!("{id}: {e}"))?.programs.into_iter().map(|g| g.text).collect();
            match &first {
                None => first = Some(texts),
                Some(f) if *f == texts => {}
                Some(_) => return Err(format!("{id}: corpus under {opt:?} differs from no optimizations")),
            }
        }
    }
    Ok(format!("{} templates x 8 subsets, n=50, identical", templates.len()))
}

fn hot_fill_speedup() -> Check {
    let t = bundled::get("bench50").unwrap().template().unwrap();
    if t.hole_count() != 50 {
        return Err(format!("benchmark has {} holes", t.hole_count()));
    }
    let cfg = |optimizations| GenConfig {
        n: 1,
        max_iterations: 100_000,
        optimizations,
        per_program_timeout: Duration::from_secs(3600),
        overall_timeout: Duration::from_secs(3600),
        ..GenConfig::default()
    };
    let time = |c: &GenConfig| {
        let started = Instant::now();
        let corpus = generate(&t, c).expect("benchmark generates");
        let d = started.elapsed();
        (d, corpus.programs[0].text.clone())
    };
    let (mut none, mut hot) = (Vec::new(), Vec::new());
    for _ in 0..5 {
        let (a, ta) = time(&cfg(Optimizations::NONE));
        let (b, tb) = time(&cfg(Optimizations { hot_fill: true, ..Optimizations::NONE }));
        if ta != tb {
            return Err("hot filling changed the program".into());
        }
        none.push(a);
        hot.push(b);
    }
    none.sort();
    hot.sort();
    let speedup = 1.0 - hot[2].as_secs_f64() / none[2].as_secs_f64();
    let detail = format!("median {:.3}s without, {:.3}s with hot filling, {:.1}% faster (need 30%)", none[2].as_secs_f64(), hot[2].as_secs_f64(), speedup * 100.0);
    if speedup >= 0.30 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reachability() -> Check {
    let cfg = GenConfig::desk();
    let mut programs = 0;
    for (id, t) in bundled::all() {
        let corpus = generate(&t, &cfg).map_err(|e| format!("{id}: {e}"))?;
        for g in &corpus.programs {
            let r = measure_reachability(&t, &g.fills, cfg.max_iterations, cfg.step_budget).map_err(|e| format!("{id}#{}: {e}", g.index))?;
            if r.reached != r.filled {
                return Err(format!("{id}#{}: reachability {}/{}", g.index, r.reached, r.filled));
            }
            programs += 1;
        }
    }
    let t = bundled::get("dead_branch").unwrap().template().unwrap();
    let corpus = static_generate(&t, &cfg).map_err(|e| e.to_string())?;
    let (mut reached, mut filled) = (0, 0);
    for g in &corpus.programs {
        let r = measure_reachability(&t, &g.fills, cfg.max_iterations, cfg.step_budget).map_err(|e| e.to_string())?;
        reached += r.reached;
        filled += r.filled;
    }
    let fraction = reached as f64 / filled as f64;
    let detail = format!("{programs} execution-based programs at 1.0; static dead_branch at {fraction:.3}");
    if fraction < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn harness_validity() -> Check {
    let templates = bundled::all();
    let fine: Vec<Builtin> = ["ref", "vm", "tiered:100:1"].iter().map(|s| builtin(s)).collect();
    let dyns: Vec<&dyn Backend> = fine.iter().map(|b| b as &dyn Backend).collect();
    let clean = campaign(&templates, &GenConfig::desk(), &dyns, DiffOptions::new(2000));
    if !clean.summary.errors.is_empty() {
        return Err(format!("generation errors: {:?}", clean.summary.errors));
    }
    if !clean.reports.is_empty() {
        return Err(format!("fault-free campaign reported {}: {}", clean.reports.len(), clean.reports[0].to_json_line()));
    }
    let mut found = Vec::new();
    let per_template = 200 / templates.len();
    for fault in [Fault::FoldLtSwap, Fault::SatAddFold, Fault::NeqSelfTrue] {
        let faulty = [builtin("ref"), builtin("vm"), Builtin::with_faults("tiered:100:1".parse().unwrap(), FaultSet::only(fault))];
        let dyns: Vec<&dyn Backend> = faulty.iter().map(|b| b as &dyn Backend).collect();
        let cfg = GenConfig { n: per_template, ..GenConfig::desk() };
        let r = campaign(&templates, &cfg, &dyns, DiffOptions::new(2000));
        let divergences = r.reports.iter().filter(|b| matches!(b.verdict, Verdict::Divergence { .. })).count();
        if r.summary.programs > 200 || divergences == 0 {
            return Err(format!("{fault}: {divergences} divergences in {} programs", r.summary.programs));
        }
        found.push(format!("{fault} {divergences}/{}", r.summary.programs));
    }
    Ok(format!("clean campaign: {} programs, 0 reports; {}", clean.summary.programs, found.join(", ")))
}

fn key(seed: u64, program: u64, addr: u32) -> StreamKey {
    StreamKey { seed, program, addr: templar::lang::HoleAddr(addr) }
}

fn hole_semantics() -> Check {
    // Single fill: a hole inside a loop contributes one value ten times.
    let t = Template::parse("var acc = 0; var i = 0; l: acc = acc + intVal(1, 1000000).eval(); i = i + 1; if (i < 10) l; halt;").unwrap();
    for g in 1..=500 {
        let (mem, fills) = exec_entry(&t, 7, g, DEFAULT_STEP_BUDGET).map_err(|e| e.to_string())?;
        let [(_, Expr::Num(v))] = fills.iter().collect::<Vec<_>>()[..] else {
            return Err(format!("index {g}: fills {fills:?}"));
        };
        if mem[0] != 10 * v {
            return Err(format!("index {g}: acc={} but fill {v}", mem[0]));
        }
    }

    // Candidate membership, exhaustive below 10^4 candidates.
    let xy = vec![Ident::new("x"), Ident::new("y"), Ident::new("z")];
    let mut nodes: Vec<(HoleNode, Vec<Ident>)> = vec![
        (HoleNode::logic(HoleNode::relation(HoleNode::int_id(), HoleNode::int_id()), HoleNode::relation(HoleNode::int_id(), HoleNode::IntVal { min: 0, max: 3 })), xy.clone()),
        (HoleNode::arithmetic(HoleNode::IntVal { min: -5, max: 5 }, HoleNode::Alt(vec![HoleNode::int_id(), HoleNode::IntVal { min: 7, max: 9 }])), xy.clone()),
        (HoleNode::relation(HoleNode::IntId { names: vec![Ident::new("y")] }, HoleNode::Exp(Expr::Num(4))).with_ops(&[BinOp::Lt, BinOp::Ne]), xy.clone()),
    ];
    for (_, t) in bundled::all() {
        let vars = common::sorted_vars(t.program());
        for (_, n) in common::hole_roots(t.program()) {
            nodes.push((n, vars.clone()));
        }
    }
    let mut exhaustive = 0;
    for (n, vars) in &nodes {
        let count = common::candidate_count(n, vars.len());
        let idents = Identifiers::new(vars.clone());
        let set: HashSet<Expr> = if count <= 10_000 { common::enumerate(n, vars).into_iter().collect() } else { HashSet::new() };
        let mut seen = HashSet::new();
        let draws = if count <= 10_000 { (count as u64 * 20).max(2000) } else { 2000 };
        for g in 0..draws {
            let e = fill(n, &mut ChoiceStream::new(key(3, g, 11)), &idents).map_err(|e| e.to_string())?;
            let member = if count <= 10_000 { set.contains(&e) } else { common::admits(n, &e, vars) };
            if !member {
                return Err(format!("{e} is not a candidate of {n}"));
            }
            seen.insert(e);
        }
        if count <= 10_000 {
            exhaustive += 1;
            if count <= 200 && seen.len() != set.len() {
                return Err(format!("{n}: drew {} of {} candidates", seen.len(), set.len()));
            }
        }
    }

    // IntVal range containment.
    let ranges = [(i32::MIN as i64, i32::MAX as i64), (i64::MIN, i64::MAX), (-3, 7), (5, 5), (i64::MAX - 2, i64::MAX), (i64::MIN, i64::MIN + 1)];
    for (min, max) in ranges {
        let node = HoleNode::IntVal { min, max };
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for g in 0..100_000u64 {
            let Expr::Num(v) = fill(&node, &mut ChoiceStream::new(key(9, g, 0)), &Identifiers::default()).unwrap() else { unreachable!() };
            if v < min || v > max {
                return Err(format!("{v} outside [{min}, {max}]"));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if (max as i128 - min as i128) <= 10 && (lo, hi) != (min, max) {
            return Err(format!("[{min}, {max}] only covered [{lo}, {hi}]"));
        }
    }

    // Run independence: interleaved executors match isolated runs.
    let t = bundled::get("sum_compare").unwrap().template().unwrap();
    let cfg = GenConfig { optimizations: Optimizations::NONE, ..GenConfig::desk() };
    let isolated: Vec<_> = (1..=20).map(|g| run_template(&t, g, &cfg).unwrap().fills).collect();
    let reversed: Vec<_> = (1..=20).rev().map(|g| run_template(&t, g, &cfg).unwrap().fills).collect();
    if isolated.iter().rev().ne(reversed.iter()) {
        return Err("fills depend on the order program indices run in".into());
    }
    let mut exs: Vec<Executor> = (1..=20).map(|g| Executor::new(&t, cfg.seed, g, DEFAULT_STEP_BUDGET)).collect();
    let mut merged = vec![templar::template::HoleFillMap::new(); 20];
    for _ in 0..50 {
        for (ex, h) in exs.iter_mut().zip(merged.iter_mut()) {
            for (a, e) in ex.exec_entry().map_err(|e| e.to_string())? {
                h.entry(a).or_insert(e);
            }
        }
    }
    for (g, (m, iso)) in merged.iter().zip(&isolated).enumerate() {
        if m.iter().any(|(a, e)| iso.get(a).is_some_and(|x| x != e)) {
            return Err(format!("index {} shares state with another index", g + 1));
        }
    }
    if isolated.iter().collect::<HashSet<_>>().len() < 2 {
        return Err("all indices filled identically".into());
    }
    Ok(format!("single fill x500, {} holes membership-checked ({exhaustive} exhaustively), {} ranges x 1e5 draws, 20 indices independent", nodes.len(), ranges.len()))
}

fn pruning_soundness() -> Check {
    let leaves: Vec<Expr> = vec![Expr::var("x"), Expr::var("y"), Expr::Num(-1), Expr::Num(0), Expr::Num(1), Expr::Num(2)];
    let mut shallow = leaves.clone();
    for op in BinOp::ALL {
        for l in &leaves {
            for r in &leaves {
                shallow.push(Expr::bin(op, l.clone(), r.clone()));
            }
        }
    }
    let mut values: Vec<i64> = (-2..=2).collect();
    values.extend([i64::MIN, i64::MIN + 1, i64::MAX - 1, i64::MAX]);
    let satisfiable = |e: &Expr| {
        values.iter().any(|&x| values.iter().any(|&y| common::eval(e, &|n| if n == "x" { x } else { y }) != 0))
    };
    let check = |e: &Expr| -> Result<bool, String> {
        let flagged = is_definitely_false(e) == Falsity::DefinitelyFalse;
        if flagged && satisfiable(e) {
            return Err(format!("`{e}` flagged definitely false but is satisfiable"));
        }
        Ok(flagged)
    };
    let mut total = 0u64;
    let mut flagged = 0u64;
    for e in &shallow {
        total += 1;
        flagged += check(e)? as u64;
    }
    let deep: Result<Vec<(u64, u64)>, String> = BinOp::ALL
        .par_iter()
        .map(|&op| {
            let (mut t, mut f) = (0, 0);
            for l in &shallow {
                for r in &shallow {
                    t += 1;
                    f += check(&Expr::bin(op, l.clone(), r.clone()))? as u64;
                }
            }
            Ok((t, f))
        })
        .collect();
    for (t, f) in deep? {
        total += t;
        flagged += f;
    }
    Ok(format!("{total} expressions, {flagged} flagged definitely false, all unsatisfiable"))
}

fn extraction_inverse() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    for i in 0..1000 {
        let p = random_program(&mut rng, &RandConfig::default());
        let input_vars = p.decls.iter().filter(|_| rng.gen_bool(0.5)).map(|d| d.name.clone()).collect();
        let max_hole_depth = if rng.gen_bool(0.5) { None } else { Some(rng.gen_range(1..=4)) };
        let cfg = ExtractionConfig { input_vars, max_hole_depth };
        let x = extract_template(&p, &cfg).map_err(|e| format!("program {i}: {e}"))?;
        let vars = common::sorted_vars(x.template.program());
        for (addr, node) in common::hole_roots(x.template.program()) {
            let original = &x.originals[&templar::lang::HoleAddr(addr)];
            if !common::admits(&node, original, &vars) {
                return Err(format!("program {i}: hole {node} does not admit {original}"));
            }
        }
        let back = print(&apply_filled_holes(&x.template, &x.originals));
        if back != print(&p) {
            return Err(format!("program {i} did not round-trip:\n{}\n---\n{back}", print(&p)));
        }
    }
    Ok("1000 programs extracted and refilled byte-for-byte".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("semantics oracle", semantics_oracle),
        ("optimization neutrality", neutrality),
        ("hot filling speedup", hot_fill_speedup),
        ("reachability", reachability),
        ("harness validity", harness_validity),
        ("hole semantics", hole_semantics),
        ("pruning soundness", pruning_soundness),
        ("extraction inverse fill", extraction_inverse),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({secs:.1}s) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

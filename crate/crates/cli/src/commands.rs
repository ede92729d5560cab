use std::fmt::Write as _;
use std::path::Path;

use minsky::algebra::{
    builtin, direct_product, enumerate_extensions, eval_identity, eval_quasi_identity, rees_matrix_semigroup,
    rees_quotient, separating_quotient_search, split_system_semigroup, AlgebraError, FiniteSemigroup, PartialGroup,
    ReesMatrix,
};
use minsky::conway::{compile_conway, trajectory, ConwayError, ConwayOptions, Correspondence};
use minsky::identity::{
    is_isoterm, parse_identities, parse_letters, show_zimin, balanced_condition_with_budget,
    periodic_condition_with_budget, zimin, Identity, IdentityError,
};
use minsky::machine::{
    attach_depth_glasses, compile_k_to_2, equivalent_configs, parse_configuration, parse_machine, run,
    Configuration, Equivalence, MachineError, MinskyMachine, RunOutcome,
};
use minsky::presentation::{emit, EmitOptions, Presentation, Variant, Word};
use minsky::rewrite::{
    decide_equal, divisor_set, rewrite_confluent, RewriteError, Strategy, Verdict,
};
use minsky::trace::Gen;
use num_bigint::BigUint;

use crate::report::{CmdResult, Fail, Report, Status};
use crate::{Cli, Command};

pub fn dispatch(cli: &Cli, r: &mut Report) -> CmdResult {
    match &cli.command {
        Command::Parse { machine, out } => {
            let m = load_machine(r, machine)?;
            describe(r, &m);
            r.artifact(m.to_string(), out.output.as_deref());
            Ok(())
        }
        Command::Run { machine, config, fuel, trace, out } => {
            let m = load_machine(r, machine)?;
            let c = config_arg(config)?;
            r.set("fuel", fuel);
            let outcome = run(&m, &c, *fuel).map_err(machine_fail)?;
            let t = outcome.trace();
            match &outcome {
                RunOutcome::Halted(end, _) => {
                    r.set("outcome", "halted");
                    r.set("final", end);
                }
                RunOutcome::Stuck(t) => {
                    r.set("outcome", "stuck");
                    r.set("final", t.last());
                }
                RunOutcome::OutOfFuel(t) => {
                    r.set("outcome", "out-of-fuel");
                    r.set("final", t.last());
                    r.fail(Status::FuelExhausted);
                }
            }
            r.set("steps", t.len());
            r.set("fuel_spent", t.len());
            if *trace {
                let text: String = t.configurations().map(|c| format!("{c}\n")).collect();
                r.artifact(text, out.output.as_deref());
            }
            Ok(())
        }
        Command::Equiv { machine, from, to, fuel, out } => {
            let m = load_machine(r, machine)?;
            let (a, b) = (config_arg(from)?, config_arg(to)?);
            m.check_configuration(&a).map_err(machine_fail)?;
            m.check_configuration(&b).map_err(machine_fail)?;
            r.set("fuel", fuel);
            r.set("deterministic", m.is_deterministic());
            match equivalent_configs(&m, &a, &b, *fuel) {
                Equivalence::Equivalent(t) => {
                    r.set("verdict", "equivalent");
                    r.set("trace_length", t.len());
                    r.artifact(format!("{t}\n"), out.output.as_deref());
                }
                Equivalence::NotEquivalent => r.set("verdict", "not-equivalent"),
                Equivalence::Unknown => {
                    r.set("verdict", "unknown");
                    r.fail(Status::FuelExhausted);
                }
            }
            Ok(())
        }
        Command::Compile2 { machine, check, fuel, out } => {
            let m = load_machine(r, machine)?;
            let c = compile_k_to_2(&m);
            r.set("source_glasses", m.glasses());
            r.set("primes", join(&c.primes));
            r.set("target_commands", c.machine.commands().len());
            if let Some(cfg) = check {
                let start = config_arg(cfg)?;
                m.check_configuration(&start).map_err(machine_fail)?;
                r.set("fuel", fuel);
                let projected = c.projected_run(&start, *fuel);
                let source: Vec<Configuration> = match run(&m, &start, *fuel) {
                    Ok(o) => o.trace().configurations().cloned().collect(),
                    Err(e) => return Err(machine_fail(e)),
                };
                let n = projected.len().min(source.len());
                let consistent = projected[..n] == source[..n];
                r.set("source_steps", source.len() - 1);
                r.set("projected_anchors", projected.len());
                r.set("simulation", if consistent { "consistent" } else { "mismatch" });
                if !consistent {
                    r.fail(Status::VerificationFailed);
                }
            }
            r.artifact(c.machine.to_string(), out.output.as_deref());
            Ok(())
        }
        Command::DepthGlasses { machine, out } => {
            let m = load_machine(r, machine)?;
            let d = attach_depth_glasses(&m).map_err(machine_fail)?;
            describe(r, &d);
            r.artifact(d.to_string(), out.output.as_deref());
            Ok(())
        }
        Command::Emit { variant, machine, literal, quasi_identity, out } => {
            let m = load_machine(r, machine)?;
            let p = presentation(r, variant, &m, *literal)?;
            r.set("generators", p.generators().len());
            r.set("relations", p.relations().len());
            r.set("forbidden", p.forbidden().len());
            match quasi_identity {
                Some(cfg) => {
                    let q = p.quasi_identity(&config_arg(cfg)?).map_err(Fail::usage)?;
                    r.set("premises", q.premises.len());
                    r.artifact(q.to_string(), out.output.as_deref());
                }
                None => r.artifact(p.to_string(), out.output.as_deref()),
            }
            Ok(())
        }
        Command::Decide { machine, variant, u, v, fuel, literal, confluence, out } => {
            let m = load_machine(r, machine)?;
            let p = presentation(r, variant, &m, *literal)?;
            let (wu, wv) = (word_arg(&p, u)?, word_arg(&p, v)?);
            r.set("fuel", fuel);
            r.set("u", p.show(&wu));
            r.set("v", p.show(&wv));
            let verdict = decide_equal(&p, &m, &wu, &wv, *fuel).map_err(rewrite_fail)?;
            r.set("verdict", &verdict);
            match &verdict {
                Verdict::Equal(d) => {
                    r.set("derivation_length", d.len());
                    r.artifact(d.to_string(), out.output.as_deref());
                }
                Verdict::Distinct(_) => {}
                Verdict::Unknown { .. } => r.fail(Status::FuelExhausted),
            }
            if *confluence > 0 {
                confluence_check(r, &p, &wu, *confluence, cli.seed, *fuel)?;
            }
            Ok(())
        }
        Command::Divisors { machine, variant, word, fuel, literal, out } => {
            let m = load_machine(r, machine)?;
            let p = presentation(r, variant, &m, *literal)?;
            let w = word_arg(&p, word)?;
            r.set("fuel", fuel);
            r.set("word", p.show(&w));
            match divisor_set(&p, &w, *fuel) {
                Ok(d) => {
                    r.set("closure", d.closure().len());
                    r.set("factors", d.factors().len());
                    r.set("classes", d.classes().len());
                    let mut text = String::new();
                    for class in d.classes() {
                        let words: Vec<String> = class.iter().map(|w| p.show(w)).collect();
                        writeln!(text, "{}", words.join(" | ")).expect("string write");
                    }
                    r.artifact(text, out.output.as_deref());
                    Ok(())
                }
                Err(RewriteError::ZeroWord) => {
                    r.set("closure", "contains 0");
                    Ok(())
                }
                Err(e) => Err(rewrite_fail(e)),
            }
        }
        Command::Quotient { machine, variant, word, fuel, literal, quasi_identity, separate, order_bound, budget, out } => {
            let m = load_machine(r, machine)?;
            let p = presentation(r, variant, &m, *literal)?;
            let w = word_arg(&p, word)?;
            r.set("fuel", fuel);
            r.set("word", p.show(&w));
            let (f, q) = rees_quotient(&p, &w, *fuel).map_err(algebra_fail)?;
            r.set("order", f.len());
            r.set("word_nonzero", q.eval(&w) != q.zero);
            let respects = q.respects(&p);
            r.set("respects_relations", respects);
            r.set("idempotent_exponent", f.idempotent_exponent());
            let squares: Identity = "x^2 y^2 = y^2 x^2".parse().expect("fixed identity");
            r.set("satisfies x^2 y^2 = y^2 x^2", eval_identity(&f, &squares, *budget).map_err(algebra_fail)?);
            if !respects {
                r.fail(Status::VerificationFailed);
            }
            if let Some(cfg) = quasi_identity {
                let qi = p.quasi_identity(&config_arg(cfg)?).map_err(Fail::usage)?;
                let holds = eval_quasi_identity(&f, &qi, *budget).map_err(algebra_fail)?;
                r.set("quasi_identity", holds);
            }
            if let Some(other) = separate {
                let v = word_arg(&p, other)?;
                match separating_quotient_search(&p, &w, &v, *order_bound, *fuel).map_err(algebra_fail)? {
                    Some(s) => {
                        r.set("separating_order", s.order());
                        r.set("separating_divisors_of", p.show(&s.divisors_of));
                    }
                    None => r.set("separating_order", "none within bounds"),
                }
            }
            r.artifact(f.to_table_file(), out.output.as_deref());
            Ok(())
        }
        Command::ConwayCompile { machine, literal_sub2, out } => {
            let m = load_machine(r, machine)?;
            let f = compile_conway(&m, ConwayOptions { literal_sub2: *literal_sub2 }).map_err(conway_fail)?;
            r.set("pieces", f.pieces.len());
            r.set("primes", join(&f.primes));
            let text: String = f.pieces.iter().map(|p| format!("{p}\n")).collect();
            r.artifact(text, out.output.as_deref());
            Ok(())
        }
        Command::ConwayRun { machine, n, m: input, fuel, literal_sub2, out } => {
            let machine = load_machine(r, machine)?;
            let f = compile_conway(&machine, ConwayOptions { literal_sub2: *literal_sub2 }).map_err(conway_fail)?;
            let start = match (n, input) {
                (Some(n), None) => n.parse::<BigUint>().map_err(|_| Fail::usage(format!("bad start value `{n}`")))?,
                (None, Some(m)) => f.encode(&Configuration::new(1, vec![*m, 0])).map_err(conway_fail)?,
                _ => return Err(Fail::usage("give exactly one of --n and --m")),
            };
            r.set("fuel", fuel);
            r.set("start", &start);
            let t = trajectory(&f, &start, *fuel).map_err(conway_fail)?;
            match t.reached_one {
                Some(s) => {
                    r.set("reached_one", true);
                    r.set("s", s);
                }
                None => {
                    r.set("reached_one", false);
                    r.set("fixed_point", t.fixed_point);
                }
            }
            r.set("steps", t.values.len() - 1);
            r.set("max_digits", t.max().to_string().len());
            if !t.is_conclusive() {
                r.fail(Status::FuelExhausted);
            }
            r.artifact(t.to_string(), out.output.as_deref());
            Ok(())
        }
        Command::ConwayVerify { machine, m: range, fuel, literal_sub2 } => {
            let machine = load_machine(r, machine)?;
            let f = compile_conway(&machine, ConwayOptions { literal_sub2: *literal_sub2 }).map_err(conway_fail)?;
            let (a, b) = range
                .split_once("..")
                .and_then(|(a, b)| Some((a.trim().parse::<u64>().ok()?, b.trim().trim_start_matches('=').parse::<u64>().ok()?)))
                .ok_or_else(|| Fail::usage(format!("bad range `{range}`, expected a..b")))?;
            r.set("fuel", fuel);
            let rows = minsky::conway::verify_correspondence(&machine, &f, a..=b, *fuel).map_err(conway_fail)?;
            let mut counts = [0usize; 3];
            for row in &rows {
                let reached = row.reached_one.map_or("none".to_string(), |s| s.to_string());
                r.set(
                    format!("m={}", row.m),
                    format!("{} accepted={} reached_one={} lockstep={}", row.verdict, row.accepted, reached, row.lockstep),
                );
                match row.verdict {
                    Correspondence::Agree => counts[0] += 1,
                    Correspondence::Disagree => {
                        counts[1] += 1;
                        r.fail(Status::VerificationFailed);
                    }
                    Correspondence::BothInconclusive => {
                        counts[2] += 1;
                        r.fail(Status::FuelExhausted);
                    }
                }
            }
            r.set("agree", counts[0]);
            r.set("disagree", counts[1]);
            r.set("inconclusive", counts[2]);
            Ok(())
        }
        Command::ReesMatrix { group, sandwich, out } => {
            let g = group_arg(r, group)?;
            let rows: Vec<Vec<Option<usize>>> = sandwich
                .split(';')
                .map(|row| {
                    row.split_whitespace()
                        .map(|e| if e == "0" { Ok(None) } else { g.index(e).map(Some).ok_or_else(|| Fail::usage(format!("`{e}` is not a group element"))) })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            let cols = rows.len();
            let m = rows.first().map_or(0, Vec::len);
            let f = rees_matrix_semigroup(&ReesMatrix { group: g, rows: m, cols, sandwich: rows }).map_err(algebra_fail)?;
            r.set("order", f.len());
            r.set("zero_simple", f.is_zero_simple());
            r.set("nilpotency_degree", f.nilpotency_degree().map_or("none".to_string(), |d| d.to_string()));
            r.artifact(f.to_table_file(), out.output.as_deref());
            Ok(())
        }
        Command::SplitSystem { partial_group, extensions, bound, out } => {
            let text = r.read_input(partial_group)?;
            let g = parse_partial_group(&text)?;
            g.validate().map_err(algebra_fail)?;
            r.set("elements", g.len());
            r.set("base", g.base_len);
            let groups = if *extensions {
                r.set("bound", bound);
                let ext = enumerate_extensions(&g, *bound).map_err(algebra_fail)?;
                r.set("extensions", ext.groups.len());
                r.set("truncated", ext.truncated);
                ext.groups
            } else {
                vec![g]
            };
            let mut text = String::new();
            for (i, gi) in groups.iter().enumerate() {
                let n = split_system_semigroup(gi).map_err(algebra_fail)?;
                let degree = n.nilpotency_degree();
                r.set(format!("n{}", i + 1), format!("order={} nilpotency_degree={}", n.len(), degree.map_or("none".into(), |d| d.to_string())));
                if degree.is_none_or(|d| d > 4) {
                    r.fail(Status::VerificationFailed);
                }
                if groups.len() > 1 {
                    writeln!(text, "# N{}", i + 1).expect("string write");
                }
                text.push_str(&n.to_table_file());
            }
            r.artifact(text, out.output.as_deref());
            Ok(())
        }
        Command::IdentityEval { semigroup, identity, identities, budget } => {
            let f = semigroup_arg(r, semigroup)?;
            let mut ids = Vec::new();
            if let Some(s) = identity {
                ids.push(s.parse::<Identity>().map_err(identity_fail)?);
            }
            if let Some(path) = identities {
                let text = r.read_input(path)?;
                ids.extend(parse_identities(&text).map_err(identity_fail)?);
            }
            if ids.is_empty() {
                return Err(Fail::usage("give --identity or --identities"));
            }
            r.set("order", f.len());
            r.set("budget", budget);
            for id in &ids {
                r.set(id.to_string(), eval_identity(&f, id, *budget).map_err(algebra_fail)?);
            }
            Ok(())
        }
        Command::Zimin { n, out } => {
            if *n == 0 || *n > 24 {
                return Err(Fail::usage("n must be in 1..=24"));
            }
            let z = zimin(*n);
            r.set("length", z.len());
            r.artifact(format!("{}\n", show_zimin(&z)), out.output.as_deref());
            Ok(())
        }
        Command::Isoterm { word, identity } => {
            let id: Identity = identity.parse().map_err(identity_fail)?;
            let w = parse_letters(word);
            r.set("identity", &id);
            r.set("length", w.len());
            r.set("isoterm", is_isoterm(&w, &id));
            Ok(())
        }
        Command::VarietyCheck { identities, flip, budget } => {
            let text = r.read_input(identities)?;
            let sigma = parse_identities(&text).map_err(identity_fail)?;
            r.set("identities", sigma.len());
            r.set("budget", budget);
            let t5 = periodic_condition_with_budget(&sigma, *flip, *budget).map_err(identity_fail)?;
            r.set("n", t5.n);
            r.set("zimin_isoterm", t5.zimin_isoterm);
            r.set("nonbalanced", t5.nonbalanced);
            r.set("zimin_clause_flipped", t5.flipped);
            for w in &t5.witnesses {
                r.set(format!("periodic.witness {}", w.name), format!("satisfies={}", w.satisfies));
            }
            r.set("periodic_condition", t5.value);
            let t4 = balanced_condition_with_budget(&sigma, *budget).map_err(identity_fail)?;
            r.set("all_balanced", t4.all_balanced);
            for w in &t4.witnesses {
                r.set(format!("balanced.witness {}", w.name), format!("satisfies={} contained={}", w.satisfies, w.satisfies && t4.all_balanced));
            }
            r.set("balanced_condition", t4.value);
            Ok(())
        }
    }
}

fn describe(r: &mut Report, m: &MinskyMachine) {
    r.set("name", m.name());
    r.set("glasses", m.glasses());
    r.set("commands", m.commands().len());
    r.set("labels", m.max_label());
    r.set("deterministic", m.is_deterministic());
    r.set("classic", m.is_classic());
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn load_machine(r: &mut Report, path: &Path) -> Result<MinskyMachine, Fail> {
    let text = r.read_input(path)?;
    parse_machine(&text).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

fn config_arg(text: &str) -> Result<Configuration, Fail> {
    parse_configuration(text).ok_or_else(|| Fail::usage(format!("bad configuration `{text}`, expected e.g. 1;2,0")))
}

fn presentation(r: &mut Report, variant: &str, m: &MinskyMachine, literal: bool) -> Result<Presentation, Fail> {
    let v: Variant = variant.parse().map_err(Fail::usage)?;
    r.set("variant", v);
    r.set("literal", literal);
    emit(v, m, EmitOptions { literal }).map_err(Fail::usage)
}

/// A word in generator names, or a configuration written `label;g1,g2`.
fn word_arg(p: &Presentation, text: &str) -> Result<Word, Fail> {
    if text.contains(';') {
        let c = config_arg(text)?;
        let counter = p.variant().is_primed().then_some(0);
        return p.config_word(&c, counter).map_err(Fail::usage);
    }
    p.parse_word(text).map_err(Fail::usage)
}

fn confluence_check(r: &mut Report, p: &Presentation, w: &[Gen], runs: u32, seed: u64, fuel: u64) -> CmdResult {
    let base = rewrite_confluent(p, w, Strategy::LeftmostInnermost, fuel).map_err(rewrite_fail)?;
    let mut agree = true;
    for k in 0..runs {
        let other = rewrite_confluent(p, w, Strategy::Random(seed.wrapping_add(u64::from(k))), fuel).map_err(rewrite_fail)?;
        agree &= other.normal_form == base.normal_form;
    }
    r.set("confluence_normal_form", base.normal_form.show(p));
    r.set("confluence_runs", runs);
    r.set("confluence", if agree { "agree" } else { "disagree" });
    if !agree {
        r.fail(Status::VerificationFailed);
    }
    Ok(())
}

fn cyclic(k: usize) -> FiniteSemigroup {
    let names = (0..k).map(|i| if i == 0 { "1".to_string() } else { format!("g{i}") }).collect();
    let table = (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect();
    FiniteSemigroup::new(names, table, None).expect("cyclic groups associate")
}

fn group_arg(r: &mut Report, text: &str) -> Result<FiniteSemigroup, Fail> {
    if let Some(k) = text.strip_prefix('Z').and_then(|k| k.parse::<usize>().ok()) {
        if k == 0 {
            return Err(Fail::usage("Z0 is empty"));
        }
        r.set("group", format!("cyclic of order {k}"));
        return Ok(cyclic(k));
    }
    let text = r.read_input(Path::new(text))?;
    FiniteSemigroup::parse_table_file(&text).map_err(algebra_fail)
}

fn semigroup_arg(r: &mut Report, text: &str) -> Result<FiniteSemigroup, Fail> {
    if let Some((a, b)) = text.split_once('*') {
        r.set("semigroup", text);
        let a = builtin(a.trim()).map_err(algebra_fail)?;
        let b = builtin(b.trim()).map_err(algebra_fail)?;
        return Ok(direct_product(&a, &b));
    }
    if let Ok(f) = builtin(text) {
        r.set("semigroup", text);
        return Ok(f);
    }
    let body = r.read_input(Path::new(text))?;
    FiniteSemigroup::parse_table_file(&body).map_err(algebra_fail)
}

/// Partial-group file: a names line (identity first), an optional `base <k>` line,
/// then one row per element with `-` for undefined products.
fn parse_partial_group(text: &str) -> Result<PartialGroup, Fail> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let names: Vec<String> = lines.next().ok_or_else(|| Fail::usage("empty partial group file"))?.split_whitespace().map(String::from).collect();
    let n = names.len();
    let mut base_len = n;
    let mut table = Vec::new();
    for line in lines {
        if let Some(k) = line.strip_prefix("base") {
            base_len = k.trim().parse().map_err(|_| Fail::usage(format!("bad base line `{line}`")))?;
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| if t == "-" { Ok(None) } else { names.iter().position(|x| x == t).map(Some).ok_or_else(|| Fail::usage(format!("unknown element `{t}`"))) })
            .collect::<Result<Vec<_>, _>>()?;
        table.push(row);
    }
    if table.len() != n || table.iter().any(|r| r.len() != n) {
        return Err(Fail::usage(format!("partial group table must be {n}x{n}")));
    }
    let inverse = (0..n)
        .map(|x| (0..n).find(|&y| table[x][y] == Some(0) && table[y][x] == Some(0)))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Fail::usage("some element has no inverse"))?;
    Ok(PartialGroup { names, base_len, table, inverse })
}

fn machine_fail(e: MachineError) -> Fail {
    Fail::usage(e)
}

fn rewrite_fail(e: RewriteError) -> Fail {
    match e {
        RewriteError::FuelExceeded(_) => Fail::fuel(e),
        other => Fail::usage(other),
    }
}

fn algebra_fail(e: AlgebraError) -> Fail {
    match e {
        AlgebraError::Rewrite(inner) => rewrite_fail(inner),
        AlgebraError::Budget { .. } => Fail::fuel(e),
        other => Fail::usage(other),
    }
}

fn identity_fail(e: IdentityError) -> Fail {
    match e {
        IdentityError::Algebra(inner) => algebra_fail(inner),
        other => Fail::usage(other),
    }
}

fn conway_fail(e: ConwayError) -> Fail {
    match e {
        ConwayError::NonInteger { .. } => Fail { status: Status::VerificationFailed, message: e.to_string() },
        _ => Fail::usage(e),
    }
}

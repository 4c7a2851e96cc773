//! Subcommand drivers. Each returns a report; violated identities are
//! recorded as violations so the caller can exit with status 1.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use splitqm_core::automorphisms::{check_fixed_point, inner_distance_check, FixedPointReport};
use splitqm_core::counting::{counting_combination, decomposition_bound, decomposition_residual};
use splitqm_core::defect_space::{
    embed_subgroup, order_bound_check, pullback_quotient, sandwich_check, ses_embed, FiniteHom,
};
use splitqm_core::groups::FactorDescriptor;
use splitqm_core::qrep::{
    check_no_small_subgroups, nontriviality_witness, SmallSubgroupOptions, SplitQRep, TOL,
};
use splitqm_core::quasicocycles::{prime_power_witness, staircase_witness, Convention, Vector};
use splitqm_core::quasimorphisms::{rademacher, SplitQM};
use splitqm_core::rational::{format_rational, Rational, Real};
use splitqm_core::selftest::{run_criterion, SelftestOptions, CRITERIA};
use splitqm_core::words::{Side, Splitting, WordSampler};
use splitqm_core::Error;

use crate::config::Config;
use crate::error::CliError;
use crate::report::Report;

/// Shared inputs: the loaded config and the global overrides.
pub struct Context {
    pub config: Option<Config>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub depth: Option<u32>,
}

/// Child seed for a subcommand: the first eight bytes of
/// `SHA-256(seed_le || name)`.
pub fn child_seed(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

impl Context {
    fn config(&self) -> Result<&Config, CliError> {
        self.config
            .as_ref()
            .ok_or_else(|| CliError::Usage("this subcommand needs --config PATH".into()))
    }

    fn root_seed(&self) -> u64 {
        self.seed
            .or(self.config.as_ref().map(|c| c.seed))
            .unwrap_or(0)
    }

    fn sampler(&self, s: &Splitting, name: &str) -> WordSampler {
        let (len, exp) = match &self.config {
            Some(c) => (c.sampler.length_bound, c.sampler.exponent_bound),
            None => (8, 5),
        };
        WordSampler::new(s.clone(), len, exp, child_seed(self.root_seed(), name))
    }

    fn samples(&self) -> usize {
        self.samples
            .or(self.config.as_ref().map(|c| c.sampler.samples))
            .unwrap_or(1000)
    }
}

fn pick<'a, T>(
    map: &'a BTreeMap<String, T>,
    name: Option<&str>,
    kind: &str,
) -> Result<(&'a str, &'a T), CliError> {
    let names = || map.keys().cloned().collect::<Vec<_>>().join(", ");
    match name {
        Some(n) => map
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| {
                CliError::Usage(format!("unknown {kind} `{n}`; available: {}", names()))
            }),
        None if map.len() == 1 => Ok(map
            .iter()
            .next()
            .map(|(k, v)| (k.as_str(), v))
            .expect("one entry")),
        None if map.is_empty() => Err(CliError::Usage(format!("the config defines no {kind}"))),
        None => Err(CliError::Usage(format!(
            "choose a {kind} with --name: {}",
            names()
        ))),
    }
}

fn q(r: &Rational) -> String {
    format_rational(r)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::A => "A",
        Side::B => "B",
    }
}

fn real_le(a: &Real, b: &Real) -> bool {
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => x <= y,
        _ => a.to_f64() <= b.to_f64() + TOL,
    }
}

fn real_eq(a: &Real, b: &Real) -> bool {
    real_le(a, b) && real_le(b, a)
}

/// Coordinates for dense vectors, `[word, coefficient]` pairs for sparse ones.
pub fn vector_json(s: &Splitting, v: &Vector) -> Value {
    match v {
        Vector::Dense(c) => json!(c.iter().map(q).collect::<Vec<_>>()),
        Vector::Sparse(m) => json!(m
            .iter()
            .map(|(w, c)| json!([s.format_word(w), q(c)]))
            .collect::<Vec<_>>()),
    }
}

pub fn eval(ctx: &Context, name: Option<&str>, word: &str) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let (name, f) = pick(&cfg.quasimorphisms, name, "quasimorphism")?;
    let g = f.splitting.parse_word(word)?;
    let v = q(&f.eval(&g));
    let mut r = Report::new("eval");
    r.lines.push(v.clone());
    r.quiet_rows = true;
    r.text("quasimorphism", name);
    r.text("word", f.splitting.format_word(&g));
    r.text("value", v);
    Ok(r)
}

/// Sampled defect over random pairs, together with the coboundary at a
/// junction pair built from the maximizing factor pair.
fn sampled_defect(f: &SplitQM, sampler: &mut WordSampler, n: usize) -> (Rational, Rational) {
    let sampled = f.sampled_defect(sampler, n);
    let (side, fd) = f.maximizing_pair();
    let junction = match fd.witness {
        Some((x, y)) => {
            let (g, h) = sampler.junction_pair(side, &x, &y);
            f.coboundary(&g, &h).abs()
        }
        None => Rational::zero(),
    };
    (sampled, junction)
}

pub fn defect(ctx: &Context, name: Option<&str>) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let (name, f) = pick(&cfg.quasimorphisms, name, "quasimorphism")?;
    let mut r = Report::new("defect");
    r.text("quasimorphism", name);
    for side in [Side::A, Side::B] {
        let fd = f.factor_defect(side);
        r.text(format!("factor defect {}", side_name(side)), q(&fd.value));
        if let Some((x, y)) = fd.witness {
            r.text(
                format!("factor defect {} pair", side_name(side)),
                format!("({x}, {y})"),
            );
        }
    }
    let split = f.split_defect();
    r.text("split defect", q(&split));

    let n = ctx.samples();
    let mut sampler = ctx.sampler(&f.splitting, "defect");
    let (sampled, junction) = sampled_defect(f, &mut sampler, n);
    r.row("samples", n);
    r.text("sampled defect", q(&sampled));
    r.text("junction coboundary", q(&junction));
    if sampled > split {
        r.violation(format!(
            "sampled defect {sampled} exceeds the split defect {split}"
        ));
    }
    if sampled.clone().max(junction) != split {
        r.violation("the junction pair does not attain the split defect");
    }

    match f.gromov_norm() {
        Ok(g) => {
            let doubled = &g.value + &g.value;
            r.text(
                "gromov norm",
                format!(
                    "{} (split defect {}, homogenized defect {})",
                    q(&g.value),
                    q(&split),
                    q(&doubled)
                ),
            );
            if let Some(w) = g.witness {
                r.text("homogenized witness g", f.splitting.format_word(&w.g));
                r.text("homogenized witness h", f.splitting.format_word(&w.h));
                r.text("homogenized gap", q(&w.gap));
            }
            if g.value != split {
                r.violation("the class norm differs from the split defect");
            }
        }
        Err(Error::IdentityViolation(m)) => r.violation(m),
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

pub fn homogenize(ctx: &Context, name: Option<&str>, word: &str) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let (name, f) = pick(&cfg.quasimorphisms, name, "quasimorphism")?;
    let s = &f.splitting;
    let g = s.parse_word(word)?;
    let h = f.homogenize(&g);
    let mut r = Report::new("homogenize");
    r.text("quasimorphism", name);
    r.text("word", s.format_word(&g));
    r.text("value", q(&f.eval(&g)));
    r.text("homogenized", q(&h));

    let depth = ctx.depth.unwrap_or(4) as i64;
    for n in -depth..=depth {
        let lhs = f.homogenize(&s.power_i64(&g, n));
        if lhs != &h * Rational::from_integer(n.into()) {
            r.violation(format!("homogenization of the power {n} is {lhs}"));
        }
    }
    r.row("powers checked", 2 * depth + 1);
    let n = ctx.samples();
    let mut sampler = ctx.sampler(s, "homogenize");
    for _ in 0..n {
        let w = sampler.sample();
        let c = f.homogenize(&s.conjugate(&g, &w));
        if c != h {
            r.violation(format!(
                "conjugate by {} has homogenization {c}",
                s.format_word(&w)
            ));
            break;
        }
    }
    r.row("conjugates checked", n);
    Ok(r)
}

pub fn decompose(
    ctx: &Context,
    name: Option<&str>,
    word: Option<&str>,
) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let (name, f) = pick(&cfg.quasimorphisms, name, "quasimorphism")?;
    let s = &f.splitting;
    let mut r = Report::new("decompose");
    r.text("quasimorphism", name);
    let words = match word {
        Some(w) => vec![s.parse_word(w)?],
        None => {
            let mut sampler = ctx.sampler(s, "decompose");
            (0..ctx.samples()).map(|_| sampler.sample()).collect()
        }
    };
    let mut worst_gap = Rational::zero();
    for g in &words {
        let big_f = counting_combination(f, g)?;
        let v = f.eval(g);
        let gap = (&big_f - &v).abs();
        let bound = decomposition_bound(f, g)?;
        if words.len() == 1 {
            r.text("word", s.format_word(g));
            r.text("counting combination", q(&big_f));
            r.text("value", q(&v));
        }
        match decomposition_residual(f, g) {
            Ok(_) => {}
            Err(Error::IdentityViolation(m)) => r.violation(m),
            Err(e) => return Err(e.into()),
        }
        if gap > bound {
            r.violation(format!(
                "|F - f| = {gap} exceeds {bound} at {}",
                s.format_word(g)
            ));
        }
        worst_gap = worst_gap.max(gap);
    }
    r.row("words", words.len());
    r.text(
        "residual",
        if r.ok() { "0 on every word" } else { "nonzero" },
    );
    r.text("max |F - f|", q(&worst_gap));
    Ok(r)
}

pub fn tau_check(ctx: &Context, name: Option<&str>, n: i64) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let (name, f) = pick(&cfg.quasimorphisms, name, "quasimorphism")?;
    let s = &f.splitting;
    let mut sampler = ctx.sampler(s, "tau-check");
    let words: Vec<_> = (0..ctx.samples()).map(|_| sampler.sample()).collect();
    let mut r = Report::new("tau-check");
    r.text("quasimorphism", name);
    r.row("n", n);
    match check_fixed_point(f, n, &words)? {
        FixedPointReport::Fixed {
            checked,
            forced_zero,
        } => {
            r.text("fixed", "yes");
            r.row("words checked", checked);
            r.row("forced zero", forced_zero);
        }
        FixedPointReport::Violated(w) => {
            r.text("fixed", "no");
            r.text("witness", s.format_word(&w.word));
            r.row("growth", w.growth.iter().map(q).collect::<Vec<_>>());
            r.text("homomorphism residual", q(&w.residual));
            r.text("commutator term", q(&w.commutator));
        }
        FixedPointReport::Inconclusive => {
            r.text("fixed", "inconclusive: no witness within the scan bounds")
        }
    }
    let h = sampler.sample();
    let d = inner_distance_check(f, &h, &words)?;
    r.text("inner conjugator", s.format_word(&h));
    r.text("max |f(hgh^-1) - f(g)|", q(&d));
    Ok(r)
}

pub fn qc_growth(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    if cfg.growth.is_none() && cfg.cocycles.is_empty() {
        return Err(CliError::Usage(
            "the config has neither a growth section nor cocycles".into(),
        ));
    }
    let depth = ctx.depth.unwrap_or(6);
    let mut r = Report::new("qc-growth");
    if let Some(g) = &cfg.growth {
        let s = g.action.splitting();
        for &(p, ctrl) in &g.primes {
            let (_, rep) = prime_power_witness(
                &g.action,
                p,
                ctrl,
                &g.vector,
                depth,
                Convention::PrefixInverse,
            )?;
            r.row(
                format!("prime {p} norms"),
                rep.norms.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            );
            r.row(
                format!("prime {p} values"),
                rep.values
                    .iter()
                    .map(|v| vector_json(s, v))
                    .collect::<Vec<_>>(),
            );
            r.text(format!("prime {p} control {ctrl}"), "0 at every depth");
        }
        let (_, rep) = staircase_witness(&g.action, &g.vector, depth, Convention::PrefixInverse)?;
        r.row(
            "staircase norms",
            rep.norms.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        );
        r.row(
            "staircase values",
            rep.values
                .iter()
                .map(|v| vector_json(s, v))
                .collect::<Vec<_>>(),
        );
    }
    for (name, f) in &cfg.cocycles {
        let norm = f.action.natural_norm();
        let d = f.split_defect(norm);
        let mut sampler = ctx.sampler(f.splitting(), &format!("qc-growth/{name}"));
        let mut best = Real::zero();
        for _ in 0..ctx.samples() {
            let g = sampler.sample();
            let h = sampler.sample();
            best = best.max(f.coboundary(&g, &h).norm(norm));
        }
        r.text(format!("cocycle {name} defect"), &d);
        r.text(format!("cocycle {name} sampled defect"), &best);
        if !real_le(&best, &d) {
            r.violation(format!("cocycle {name}: sampled defect {best} exceeds {d}"));
        }
    }
    Ok(r)
}

pub fn defect_space(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let ds = cfg
        .defect_space
        .as_ref()
        .ok_or_else(|| CliError::Usage("the config has no defect_space section".into()))?;
    let mut r = Report::new("defect-space");
    for (name, f) in &ds.vectors {
        r.text(format!("{name} carrier"), f.carrier());
        match sandwich_check(f) {
            Ok((sup, dn)) => {
                r.text(format!("{name} defect norm"), q(&dn));
                r.text(format!("{name} sup norm"), q(&sup));
            }
            Err(Error::IdentityViolation(m)) => r.violation(format!("{name}: {m}")),
            Err(e) => return Err(e.into()),
        }
        match order_bound_check(f) {
            Ok(rep) => {
                if let Some((g, slack)) = rep.tightest {
                    r.text(
                        format!("{name} order bound slack"),
                        format!("{} at {g}", q(&slack)),
                    );
                }
            }
            Err(Error::IdentityViolation(m)) => r.violation(format!("{name}: {m}")),
            Err(e) => return Err(e.into()),
        }
    }
    for e in &ds.extensions {
        let sub = &ds.vectors[&e.sub];
        let quot = &ds.vectors[&e.quotient];
        let (FactorDescriptor::Cyclic(n), FactorDescriptor::Cyclic(k)) =
            (sub.carrier(), quot.carrier())
        else {
            unreachable!("extension carriers are checked on load");
        };
        let i = FiniteHom::cyclic_multiply(*n, n * k, *k)?;
        let pi = FiniteHom::cyclic_multiply(n * k, *k, 1)?;
        let key = format!("{} -> Z/{} -> {}", e.sub, n * k, e.quotient);
        let emb = embed_subgroup(sub, &i)?.defect_norm();
        let pb = pullback_quotient(quot, &pi)?.defect_norm();
        let both = ses_embed(sub, quot, &i, &pi)?.defect_norm();
        r.text(format!("{key} subgroup norm"), q(&emb));
        r.text(format!("{key} pullback norm"), q(&pb));
        r.text(format!("{key} combined norm"), q(&both));
        let expected = sub.defect_norm().max(quot.defect_norm());
        if emb != sub.defect_norm() || pb != quot.defect_norm() || both != expected {
            r.violation(format!("{key}: embedding is not isometric"));
        }
    }
    Ok(r)
}

/// Defect rows and sampled-vs-exact checks for one representation.
fn qrep_rows(ctx: &Context, r: &mut Report, name: &str, mu: &SplitQRep) {
    r.text(format!("{name} target"), &mu.target);
    for side in [Side::A, Side::B] {
        r.text(
            format!("{name} defect {}", side_name(side)),
            mu.factor_defect(side).0,
        );
    }
    let d = mu.defect();
    let mut sampler = ctx.sampler(&mu.splitting, &format!("qrep/{name}"));
    let sampled = mu.sampled_defect(&mut sampler, ctx.samples());
    let junction = mu.junction_defect(&mut sampler, 1);
    r.text(format!("{name} defect"), &d);
    r.text(format!("{name} sampled defect"), &sampled);
    r.text(format!("{name} junction defect"), &junction);
    if !real_le(&sampled, &d) {
        r.violation(format!("{name}: sampled defect {sampled} exceeds {d}"));
    }
    if !real_eq(&sampled.max(junction), &d) {
        r.violation(format!(
            "{name}: the junction pairs do not attain the defect"
        ));
    }
    match mu.sup_norm() {
        Some(n) => r.text(format!("{name} sup norm"), n),
        None => r.text(format!("{name} sup norm"), "unbounded"),
    }
    r.row(format!("{name} homomorphism"), mu.is_homomorphism());
}

pub fn qrep(ctx: &Context, name: Option<&str>) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let entries: Vec<(&str, _)> = match name {
        Some(_) => vec![pick(&cfg.qreps, name, "representation")?],
        None if cfg.qreps.is_empty() => {
            return Err(CliError::Usage("the config defines no qreps".into()))
        }
        None => cfg.qreps.iter().map(|(k, v)| (k.as_str(), v)).collect(),
    };
    let depth = ctx.depth.unwrap_or(32);
    let mut r = Report::new("qrep");
    for (name, e) in entries {
        qrep_rows(ctx, &mut r, name, &e.rep);
        let Some(eps) = e.eps else { continue };
        let opts = SmallSubgroupOptions {
            seed: child_seed(ctx.root_seed(), &format!("qrep/{name}/subgroups")),
            ..SmallSubgroupOptions::default()
        };
        let sub = check_no_small_subgroups(&e.rep.target, eps, &opts);
        if !sub.passed {
            r.text(
                format!("{name} small subgroups"),
                format!("found inside the {eps}-ball; witness search skipped"),
            );
            continue;
        }
        r.text(
            format!("{name} small subgroups"),
            format!("none inside the {eps}-ball ({} checked)", sub.checked),
        );
        for other in &e.against {
            let rho = &cfg.qreps[other].rep;
            let key = format!("{name} vs {other}");
            match nontriviality_witness(&e.rep, rho, eps, depth) {
                Ok(w) => {
                    r.text(
                        format!("{key} witness"),
                        e.rep.splitting.format_word(&w.word),
                    );
                    r.text(format!("{key} distance"), &w.distance);
                    r.text(format!("{key} delta"), &w.delta);
                    if !real_le(&w.delta, &w.distance) {
                        r.violation(format!(
                            "{key}: witness distance {} below {}",
                            w.distance, w.delta
                        ));
                    }
                }
                Err(Error::SearchExhausted(m)) => {
                    r.text(format!("{key} witness"), format!("exhausted: {m}"))
                }
                Err(err) => return Err(err.into()),
            }
        }
    }
    Ok(r)
}

pub fn rademacher_report(ctx: &Context) -> Result<Report, CliError> {
    let f = rademacher();
    let s = &f.splitting;
    let mut r = Report::new("rademacher");
    r.text("splitting", format!("{} * {}", s.a, s.b));
    r.text("factor defect B", q(&f.factor_defect(Side::B).value));
    let split = f.split_defect();
    r.text("split defect", q(&split));
    let mut sampler = WordSampler::new(s.clone(), 8, 2, child_seed(ctx.root_seed(), "rademacher"));
    let (sampled, junction) = sampled_defect(&f, &mut sampler, ctx.samples());
    r.text("sampled defect", q(&sampled));
    if sampled > split || sampled.max(junction) != split {
        r.violation("sampled defect does not match the split defect");
    }
    let g = f.gromov_norm()?;
    r.text("gromov norm", q(&g.value));
    let examples: Vec<Value> = (0..5)
        .map(|_| {
            let w = sampler.sample();
            json!([s.format_word(&w), q(&f.eval(&w))])
        })
        .collect();
    r.row("sample values", examples);
    Ok(r)
}

/// Config-dependent selftest checks: sampled defects of every configured
/// quasimorphism and representation.
fn config_checks(ctx: &Context, cfg: &Config, r: &mut Report) {
    for (name, f) in &cfg.quasimorphisms {
        let mut sampler = ctx.sampler(&f.splitting, &format!("selftest/{name}"));
        let (sampled, junction) = sampled_defect(f, &mut sampler, ctx.samples());
        let split = f.split_defect();
        let ok = sampled <= split && sampled.max(junction) == split;
        let status = if ok { "PASS" } else { "FAIL" };
        r.lines.push(format!(
            "{status} [cfg] quasimorphism {name}: split defect {}",
            q(&split)
        ));
        if !ok {
            r.violation(format!(
                "quasimorphism {name}: sampled defect does not match"
            ));
        }
    }
    for (name, e) in &cfg.qreps {
        let mut sub = Report::new("selftest");
        qrep_rows(ctx, &mut sub, name, &e.rep);
        let status = if sub.ok() { "PASS" } else { "FAIL" };
        r.lines.push(format!(
            "{status} [cfg] representation {name}: defect {}",
            e.rep.defect()
        ));
        r.violations.extend(sub.violations);
    }
}

pub fn selftest(ctx: &Context, literal_convention: bool, only: &[u8]) -> Result<Report, CliError> {
    let mut opts = SelftestOptions {
        literal_convention,
        ..SelftestOptions::default()
    };
    if let Some(seed) = ctx.seed {
        opts.seed = child_seed(seed, "selftest");
    }
    let ids: Vec<u8> = if only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        only.to_vec()
    };
    let mut r = Report::new("selftest");
    for id in ids {
        let res = run_criterion(id, &opts)
            .ok_or_else(|| CliError::Usage(format!("no criterion {id}")))?;
        r.lines.push(res.line());
        r.row(format!("criterion {id}"), res.passed);
        if !res.passed {
            r.violation(format!("criterion {id} failed"));
        }
    }
    match &ctx.config {
        Some(cfg) => config_checks(ctx, cfg, &mut r),
        None => r
            .lines
            .push("SKIP [cfg] config-dependent checks: no --config given".into()),
    }
    Ok(r)
}

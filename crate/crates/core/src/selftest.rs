//! The acceptance suite as library functions, shared by the integration
//! tests and the `selftest` subcommand.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automorphisms::{
    check_fixed_point, inner_distance_check, violation_witness, Endo, FixedPointReport,
};
use crate::counting::{counting_qm, decomposition_residual, subword_count, ReducedLetterWord};
use crate::defect_space::{
    all_alternating, embed_subgroup, order_bound_check, pullback_quotient, sandwich_check,
    ses_embed, DefectVector, FiniteHom,
};
use crate::error::{Error, Result};
use crate::groups::{FactorDescriptor, FactorElement};
use crate::qrep::{
    check_no_small_subgroups, nontriviality_witness, FactorQRMap, GElem, MetricGroup,
    SmallSubgroupOptions, SplitQRep, TOL,
};
use crate::quasicocycles::{
    inner_cocycle, prime_power_witness, rotation_permutation_action, staircase_witness, Convention,
    FactorCocycleMap, ModuleAction, SplitQC, Vector,
};
use crate::quasimorphisms::{sequence_qm, FactorQM, SplitQM};
use crate::rational::{int, rat, Rational, Real};
use crate::words::{Letter, Side, Splitting, Word, WordSampler};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Build the quasicocycle witnesses with the literal translations in
    /// criterion 9, which must then fail.
    pub literal_convention: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 20240601,
            literal_convention: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

type Check = fn(&SelftestOptions) -> Result<String>;

pub const CRITERIA: [(u8, &str, Check); 13] = [
    (1, "split defect equality", crit_defect_equality),
    (2, "sign-map evaluation", crit_sign_map),
    (3, "homogenization", crit_homogenization),
    (4, "homogenized witnesses and Gromov norm", crit_gromov),
    (5, "counting quasimorphisms", crit_counting),
    (6, "counting decomposition", crit_decomposition),
    (7, "tau_n fixed points", crit_tau),
    (8, "inner conjugation bound", crit_inner),
    (9, "quasicocycle growth witnesses", crit_quasicocycles),
    (10, "defect space", crit_defect_space),
    (11, "quasi-representations", crit_qrep),
    (12, "sequence quasimorphisms", crit_sequence),
    (
        13,
        "negative control for the translation convention",
        crit_negative_control,
    ),
];

pub fn run_criterion(id: u8, opts: &SelftestOptions) -> Option<CriterionResult> {
    let (id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check(opts);
    let elapsed = start.elapsed();
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    Some(CriterionResult {
        id: *id,
        name,
        passed,
        detail,
        elapsed,
    })
}

pub fn run_all(opts: &SelftestOptions) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter_map(|c| run_criterion(c.0, opts))
        .collect()
}

fn rng_for(opts: &SelftestOptions, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(1_000_003).wrapping_add(id))
}

fn fail(msg: String) -> Error {
    Error::IdentityViolation(msg)
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    let den = *[1i64, 2, 3].choose(rng).expect("nonempty");
    rat(rng.gen_range(-4..=4), den)
}

/// A random alternating periodic table of period `n`.
fn random_periodic<R: Rng>(n: usize, rng: &mut R) -> Vec<Rational> {
    let mut t = vec![Rational::zero(); n];
    for r in 1..n {
        if r < n - r {
            t[r] = small_rational(rng);
            t[n - r] = -t[r].clone();
        }
    }
    t
}

/// A random factor map with finite support, plus random sign, periodic and
/// slope parts on integer factors unless `finite_support_only` is set.
pub fn random_factor_qm<R: Rng>(
    d: &FactorDescriptor,
    rng: &mut R,
    finite_support_only: bool,
) -> FactorQM {
    let pairs: Vec<(FactorElement, Rational)> = match d.enumerate() {
        Ok(all) => {
            let mut pairs = Vec::new();
            for x in all.into_iter().filter(|x| *x != d.inv_unchecked(x)) {
                if rng.gen_bool(0.6) {
                    pairs.push((x, small_rational(rng)));
                }
            }
            pairs
        }
        Err(_) => (1..=rng.gen_range(1..=4))
            .map(|_| {
                let k = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
                (FactorElement::int(k), small_rational(rng))
            })
            .collect(),
    };
    let mut q = FactorQM::zero();
    for p in pairs {
        // later pairs may revisit an element; keep the first value
        if let Ok(next) = q.clone().with_support(d, [p]) {
            q = next;
        }
    }
    if finite_support_only || *d != FactorDescriptor::Integer {
        return q;
    }
    if rng.gen_bool(0.5) {
        q = q.with_sign(small_rational(rng));
    }
    if rng.gen_bool(0.4) {
        let n = rng.gen_range(2..=4);
        q = q
            .with_periodic(random_periodic(n, rng))
            .expect("alternating table");
    }
    if rng.gen_bool(0.3) {
        q = q.with_slope(small_rational(rng));
    }
    q
}

pub fn random_split_qm<R: Rng>(s: &Splitting, rng: &mut R, finite_support_only: bool) -> SplitQM {
    let fa = random_factor_qm(&s.a, rng, finite_support_only);
    let fb = random_factor_qm(&s.b, rng, finite_support_only);
    SplitQM::new(s.clone(), fa, fb).expect("random maps are valid")
}

fn z5_z6() -> Splitting {
    Splitting::new(FactorDescriptor::Cyclic(5), FactorDescriptor::Cyclic(6)).expect("nontrivial")
}

fn crit_defect_equality(opts: &SelftestOptions) -> Result<String> {
    let start = Instant::now();
    let mut rng = rng_for(opts, 1);
    let mut summary = Vec::new();
    for i in 0..20 {
        let s = if i % 2 == 0 {
            Splitting::free()
        } else {
            z5_z6()
        };
        let f = random_split_qm(&s, &mut rng, false);
        let exact = f.split_defect();
        let mut sampler = WordSampler::new(s.clone(), 6, 6, rng.gen());
        let sampled = f.sampled_defect(&mut sampler, 10_000);
        if sampled > exact {
            return Err(fail(format!(
                "config {i}: sampled {sampled} exceeds split defect {exact}"
            )));
        }
        let mut best = sampled;
        let (side, fd) = f.maximizing_pair();
        if let Some((x, y)) = fd.witness {
            for _ in 0..5 {
                let (g, h) = f.junction_pair(side, &x, &y, &mut sampler);
                best = best.max(f.coboundary(&g, &h).abs());
            }
        }
        if best != exact {
            return Err(fail(format!(
                "config {i}: observed {best}, split defect {exact}"
            )));
        }
        summary.push(exact.to_string());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        return Err(fail(format!("took {elapsed:?}, limit 10 s")));
    }
    Ok(format!(
        "20 configs, defects [{}], {elapsed:.2?}",
        summary.join(", ")
    ))
}

fn crit_sign_map(opts: &SelftestOptions) -> Result<String> {
    let s = Splitting::free();
    let f = SplitQM::new(
        s.clone(),
        FactorQM::sign_map(int(1)),
        FactorQM::sign_map(int(1)),
    )?;
    let g = s.parse_word("a b^-2 a^3 b")?;
    let v = f.eval(&g);
    if v != int(2) {
        return Err(fail(format!("f(a b^-2 a^3 b) = {v}")));
    }
    let mut sampler = WordSampler::new(s, 12, 9, rng_for(opts, 2).gen());
    for _ in 0..500 {
        let g = sampler.sample();
        let oracle: i64 = g
            .letters()
            .iter()
            .map(|l| {
                l.elem
                    .as_int()
                    .and_then(|k| k.signum().to_i64())
                    .expect("integer letter")
            })
            .sum();
        if f.eval(&g) != int(oracle) {
            return Err(fail(format!(
                "f({g}) = {} but the sign count is {oracle}",
                f.eval(&g)
            )));
        }
    }
    Ok("f(a b^-2 a^3 b) = 2; 500 random words match the sign count".into())
}

fn homogenization_maps() -> Result<Vec<SplitQM>> {
    let s = Splitting::free();
    let d = FactorDescriptor::Integer;
    let fa = FactorQM::from_support(
        &d,
        [
            (FactorElement::int(1), int(1)),
            (FactorElement::int(2), rat(-1, 2)),
        ],
    )?
    .with_sign(rat(1, 3))
    .with_slope(int(2));
    let fb = FactorQM::periodic_map(vec![int(0), int(1), int(-1)])?
        .with_support(&d, [(FactorElement::int(3), int(2))])?
        .with_slope(rat(-1, 2));
    Ok(vec![
        SplitQM::new(s.clone(), fa, fb)?,
        SplitQM::new(s, FactorQM::sign_map(int(1)), FactorQM::sign_map(int(1)))?,
    ])
}

fn crit_homogenization(opts: &SelftestOptions) -> Result<String> {
    let s = Splitting::free();
    let exps = Splitting::exponent_range(3);
    let words = s.all_words(4, &exps, &exps);
    let short = s.all_words(2, &exps, &exps);
    let mut rng = rng_for(opts, 3);
    let mut sampler = WordSampler::new(s.clone(), 8, 5, rng.gen());
    let mut checks = 0usize;
    for f in homogenization_maps()? {
        for g in &words {
            let hg = f.homogenize(g);
            for n in -4i64..=4 {
                let lhs = f.homogenize(&s.power_i64(g, n));
                if lhs != &hg * int(n) {
                    return Err(fail(format!(
                        "ĥ(g^{n}) = {lhs}, n·ĥ(g) = {} at g = {g}",
                        &hg * int(n)
                    )));
                }
                checks += 1;
            }
            let randoms: Vec<Word> = (0..4).map(|_| sampler.sample()).collect();
            for w in short.iter().chain(&randoms) {
                let c = s.product([w, g, &s.invert(w)]);
                if f.homogenize(&c) != hg {
                    return Err(fail(format!("ĥ changes under conjugation of {g} by {w}")));
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{} words, {checks} identities", words.len()))
}

fn integer_window(f: &SplitQM, side: Side) -> Vec<FactorElement> {
    let d = f.splitting.factor(side);
    match d.enumerate() {
        Ok(all) => all,
        Err(_) => {
            let w = f.factor(side).defect_window();
            (-w..=w).map(FactorElement::int).collect()
        }
    }
}

fn crit_gromov(opts: &SelftestOptions) -> Result<String> {
    let mut rng = rng_for(opts, 4);
    let mut gaps = 0usize;
    for i in 0..10 {
        let s = if i % 2 == 0 {
            Splitting::free()
        } else {
            z5_z6()
        };
        let f = random_split_qm(&s, &mut rng, false);
        let da = s.factor(Side::A);
        let (a, b) = match da {
            FactorDescriptor::Integer => (FactorElement::int(1), FactorElement::int(1)),
            _ => (FactorElement::Finite(1), FactorElement::Finite(1)),
        };
        let window = integer_window(&f, Side::A);
        for x1 in &window {
            for x2 in &window {
                if da.is_identity(x1)
                    || da.is_identity(x2)
                    || da.is_identity(&da.mul_unchecked(x1, x2))
                {
                    continue;
                }
                let w = f.doubling_witness(Side::A, x1, x2, &a, &b)?;
                let recomputed = f.homogenized_coboundary(&w.g, &w.h);
                let expected = int(2) * f.fa.coboundary(da, x1, x2);
                if recomputed != expected {
                    return Err(fail(format!(
                        "config {i}: gap {recomputed} ≠ {expected} at ({x1}, {x2})"
                    )));
                }
                gaps += 1;
            }
        }
        let report = f.gromov_norm()?;
        let twice = int(2) * f.split_defect();
        match &report.witness {
            Some(w) if w.gap == twice => {}
            None if twice.is_zero() => {}
            _ => return Err(fail(format!("config {i}: maximized gap is not {twice}"))),
        }
        let mut sampler = WordSampler::new(s.clone(), 6, 6, rng.gen());
        for _ in 0..10_000 {
            let g = sampler.sample();
            let h = sampler.sample();
            let c = f.homogenized_coboundary(&g, &h).abs();
            if c > twice {
                return Err(fail(format!(
                    "config {i}: homogenized coboundary {c} exceeds {twice}"
                )));
            }
        }
    }
    Ok(format!(
        "{gaps} witness gaps, 10 Gromov norms, 100000 sampled pairs"
    ))
}

/// Occurrences of `w` in `g` by trying every offset.
fn offset_scan(w: &[crate::counting::Gen], g: &[crate::counting::Gen]) -> usize {
    if w.is_empty() || w.len() > g.len() {
        return 0;
    }
    (0..=g.len() - w.len())
        .filter(|&i| g[i..i + w.len()] == *w)
        .count()
}

fn crit_counting(_: &SelftestOptions) -> Result<String> {
    let w = ReducedLetterWord::parse("aba")?;
    let g = ReducedLetterWord::parse("ababa")?;
    let v = counting_qm(&w, &g);
    if v != 2 {
        return Err(fail(format!("h_aba(ababa) = {v}")));
    }
    let all: Vec<ReducedLetterWord> = (0..=8).flat_map(ReducedLetterWord::all_of_length).collect();
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let chunk = all.len().div_ceil(threads);
    let mismatch = std::thread::scope(|scope| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|gs| {
                let all = &all;
                scope.spawn(move || {
                    for g in gs {
                        for w in all {
                            if w.is_empty() {
                                continue;
                            }
                            if subword_count(w, g) != offset_scan(w.letters(), g.letters()) {
                                return Some(format!("count of {w} in {g}"));
                            }
                        }
                    }
                    None
                })
            })
            .collect();
        handles.into_iter().find_map(|h| h.join().expect("worker"))
    });
    if let Some(m) = mismatch {
        return Err(fail(format!("KMP and offset scan disagree on the {m}")));
    }
    Ok(format!(
        "h_aba(ababa) = 2; {} words squared agree with the offset scan",
        all.len()
    ))
}

fn crit_decomposition(opts: &SelftestOptions) -> Result<String> {
    let s = Splitting::free();
    let mut rng = rng_for(opts, 6);
    let mut checked = 0usize;
    for i in 0..10 {
        let f = random_split_qm(&s, &mut rng, true);
        let mut sampler = WordSampler::new(s.clone(), 10, 6, rng.gen());
        let mut words: Vec<Word> = (0..1000).map(|_| sampler.sample()).collect();
        for (start, len) in [
            (Side::A, 3),
            (Side::A, 4),
            (Side::B, 3),
            (Side::B, 4),
            (Side::A, 1),
            (Side::B, 1),
        ] {
            let exps: Vec<i64> = (0..len).map(|j| if j % 2 == 0 { 2 } else { -3 }).collect();
            words.push(s.from_exponents(start, &exps)?);
        }
        for g in &words {
            decomposition_residual(&f, g).map_err(|e| fail(format!("config {i}: {e}")))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} residuals vanish"))
}

/// Visits every normal form with at most `max_len` letters.
fn for_each_word(
    max_len: usize,
    elems_a: &[FactorElement],
    elems_b: &[FactorElement],
    visit: &mut dyn FnMut(&Word) -> Result<()>,
) -> Result<()> {
    fn go(
        prefix: &mut Vec<Letter>,
        max_len: usize,
        elems_a: &[FactorElement],
        elems_b: &[FactorElement],
        visit: &mut dyn FnMut(&Word) -> Result<()>,
    ) -> Result<()> {
        let w = Splitting::free().reduce(prefix.iter().cloned())?;
        visit(&w)?;
        if prefix.len() == max_len {
            return Ok(());
        }
        let sides: &[Side] = match prefix.last() {
            None => &[Side::A, Side::B],
            Some(l) if l.side == Side::A => &[Side::B],
            Some(_) => &[Side::A],
        };
        for &side in sides {
            let elems = if side == Side::A { elems_a } else { elems_b };
            for e in elems {
                prefix.push(Letter::new(side, e.clone()));
                go(prefix, max_len, elems_a, elems_b, visit)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    go(&mut Vec::new(), max_len, elems_a, elems_b, visit)
}

fn crit_tau(opts: &SelftestOptions) -> Result<String> {
    let s = Splitting::free();
    let d = FactorDescriptor::Integer;
    let mut rng = rng_for(opts, 7);
    let mut fixed_words = 0usize;
    for n in [3i64, 4, 5] {
        let table = random_periodic(n as usize, &mut rng);
        let fa = FactorQM::periodic_map(table.clone())?;
        let f = SplitQM::new(s.clone(), fa, FactorQM::zero())?;
        let tau = Endo::tau(n);
        let ea = Splitting::exponent_range(2 * n);
        let eb = Splitting::exponent_range(2);
        for_each_word(6, &ea, &eb, &mut |g| {
            if f.eval(&tau.apply(g)) != f.eval(g) {
                return Err(fail(format!(
                    "f(τ_{n}(g)) ≠ f(g) at {g} with table {table:?}"
                )));
            }
            fixed_words += 1;
            Ok(())
        })?;
        // violations: nonzero f_B, and a non-periodic f_A
        let violators = [
            SplitQM::new(
                s.clone(),
                FactorQM::periodic_map(table.clone())?,
                FactorQM::from_support(&d, [(FactorElement::int(1), int(1))])?,
            )?,
            SplitQM::new(s.clone(), FactorQM::sign_map(int(1)), FactorQM::zero())?,
            SplitQM::new(
                s.clone(),
                FactorQM::from_support(&d, [(FactorElement::int(1), int(1))])?,
                FactorQM::zero(),
            )?,
        ];
        for (j, f) in violators.iter().enumerate() {
            let w = violation_witness(f, n, f.fa.defect_window() + n, 10)?
                .ok_or_else(|| fail(format!("n = {n}, violator {j}: no witness")))?;
            if w.growth.len() != 10 || !w.growth.windows(2).all(|p| p[0] < p[1]) {
                return Err(fail(format!(
                    "n = {n}, violator {j}: growth {:?} not strictly increasing",
                    w.growth
                )));
            }
        }
    }
    let exps = Splitting::exponent_range(4);
    let words = s.all_words(4, &exps, &Splitting::exponent_range(2));
    for n in [-2i64, -1, 1, 2] {
        let f = SplitQM::new(
            s.clone(),
            FactorQM::periodic_map(vec![int(0); n.unsigned_abs() as usize])?,
            FactorQM::zero(),
        )?;
        match check_fixed_point(&f, n, &words)? {
            FixedPointReport::Fixed {
                forced_zero: true, ..
            } => {}
            other => return Err(fail(format!("n = {n}: unexpected report {other:?}"))),
        }
    }
    Ok(format!(
        "{fixed_words} fixed-point equalities; 9 growth witnesses; |n| ≤ 2 forces zero"
    ))
}

fn crit_inner(opts: &SelftestOptions) -> Result<String> {
    let mut rng = rng_for(opts, 8);
    let mut worst = Vec::new();
    for i in 0..5 {
        let s = if i % 2 == 0 {
            Splitting::free()
        } else {
            z5_z6()
        };
        let f = random_split_qm(&s, &mut rng, false);
        let mut sampler = WordSampler::new(s.clone(), 6, 6, rng.gen());
        let mut best = Rational::zero();
        for _ in 0..10_000 {
            let h = sampler.sample();
            let g = sampler.sample();
            best = best.max(inner_distance_check(&f, &h, std::slice::from_ref(&g))?);
        }
        worst.push(format!("{best} ≤ {}", int(2) * f.split_defect()));
    }
    Ok(format!("5 configs × 10000 pairs: {}", worst.join("; ")))
}

fn qc_actions() -> Result<Vec<(String, ModuleAction, Vector)>> {
    let s = Splitting::free();
    let fd = rotation_permutation_action();
    let reg_v = Vector::sparse([
        (Word::identity(), int(1)),
        (s.parse_word("a b^-1")?, rat(-1, 2)),
    ]);
    Ok(vec![
        (
            "3-dim".into(),
            fd,
            Vector::dense(vec![rat(1, 2), int(-1), int(2)]),
        ),
        (
            "regular p=1".into(),
            ModuleAction::regular(s.clone(), 1.0)?,
            reg_v.clone(),
        ),
        ("regular p=2".into(), ModuleAction::regular(s, 2.0)?, reg_v),
    ])
}

fn quasicocycle_growth(convention: Convention) -> Result<String> {
    let mut parts = Vec::new();
    for (name, m, v) in qc_actions()? {
        prime_power_witness(&m, 2, 3, &v, 6, convention)?;
        prime_power_witness(&m, 3, 2, &v, 6, convention)?;
        let (_, rep) = staircase_witness(&m, &v, 6, convention)?;
        parts.push(format!("{name} ‖f_ξ(w_6)‖ = {}", rep.norms[6]));
    }
    Ok(parts.join("; "))
}

fn crit_quasicocycles(opts: &SelftestOptions) -> Result<String> {
    let convention = if opts.literal_convention {
        Convention::Literal
    } else {
        Convention::PrefixInverse
    };
    let growth = quasicocycle_growth(convention)?;
    let mut rng = rng_for(opts, 9);
    for (name, m, v) in qc_actions()? {
        let f = SplitQC::new(
            m.clone(),
            FactorCocycleMap::Inner(v.clone()),
            FactorCocycleMap::Inner(v.clone()),
        )?;
        let mut sampler = WordSampler::new(m.splitting().clone(), 8, 5, rng.gen());
        for _ in 0..500 {
            let g = sampler.sample();
            if f.eval(&g) != inner_cocycle(&m, &v, &g)? {
                return Err(fail(format!("{name}: split inner cocycle differs at {g}")));
            }
        }
    }
    Ok(format!("{growth}; inner cocycles split on 3×500 words"))
}

fn crit_defect_space(opts: &SelftestOptions) -> Result<String> {
    let halves: Vec<Rational> = (-2..=2).map(|k| rat(k, 2)).collect();
    let mut vectors = 0usize;
    for n in 2..=8 {
        for f in all_alternating(&FactorDescriptor::Cyclic(n), &halves)? {
            order_bound_check(&f)?;
            sandwich_check(&f)?;
            vectors += 1;
        }
    }
    let z2 = all_alternating(&FactorDescriptor::Cyclic(2), &halves)?;
    if z2.len() != 1 || !z2[0].is_zero() {
        return Err(fail("Z/2 carries a nonzero alternating function".into()));
    }
    let mut rng = rng_for(opts, 10);
    let mut embeddings = 0usize;
    for (mid, m, q) in [(6usize, 2usize, 2usize), (12, 4, 4)] {
        let i = FiniteHom::cyclic_multiply(3, mid, m)?;
        let pi = FiniteHom::cyclic_multiply(mid, q, 1)?;
        let fs = all_alternating(&FactorDescriptor::Cyclic(3), &halves)?;
        let fqs = all_alternating(&FactorDescriptor::Cyclic(q), &halves)?;
        let mut randoms = Vec::new();
        for _ in 0..200 {
            let f = DefectVector::from_support(
                FactorDescriptor::Cyclic(3),
                [(FactorElement::Finite(1), small_rational(&mut rng))],
            )?;
            let fq = DefectVector::from_support(
                FactorDescriptor::Cyclic(q),
                [(
                    FactorElement::Finite(1),
                    if q > 2 {
                        small_rational(&mut rng)
                    } else {
                        int(0)
                    },
                )],
            )?;
            randoms.push((f, fq));
        }
        let pairs = fs
            .iter()
            .flat_map(|f| fqs.iter().map(move |fq| (f.clone(), fq.clone())))
            .chain(randoms);
        for (f, fq) in pairs {
            let s = embed_subgroup(&f, &i)?;
            let p = pullback_quotient(&fq, &pi)?;
            let j = ses_embed(&f, &fq, &i, &pi)?;
            if s.defect_norm() != f.defect_norm() || p.defect_norm() != fq.defect_norm() {
                return Err(fail(format!(
                    "Z/3 → Z/{mid} → Z/{q}: an embedding changes the norm"
                )));
            }
            let expect = f.defect_norm().max(fq.defect_norm());
            if j.defect_norm() != expect {
                return Err(fail(format!(
                    "Z/3 → Z/{mid} → Z/{q}: ‖j‖ = {}, expected {expect}",
                    j.defect_norm()
                )));
            }
            embeddings += 1;
        }
    }
    Ok(format!(
        "{vectors} vectors on Z/2..Z/8; {embeddings} embedding triples isometric; D(Z/2) = 0"
    ))
}

/// `Z/12` with a quarter of the circular distance, and every alternating
/// map from `Z/3` and `Z/4` with sup norm at most `1/2`.
fn finite_qrep_setup() -> Result<(Splitting, MetricGroup, Vec<SplitQRep>, Vec<SplitQRep>)> {
    let s = Splitting::new(FactorDescriptor::Cyclic(3), FactorDescriptor::Cyclic(4))?;
    let g = MetricGroup::cyclic_circular(12, rat(1, 4))?;
    let small = [0usize, 1, 2, 10, 11];
    let mut mus = Vec::new();
    for &x in &small {
        for &y in &small {
            let ma =
                FactorQRMap::from_values(&s.a, &g, [(FactorElement::Finite(1), GElem::Finite(x))])?;
            let mb =
                FactorQRMap::from_values(&s.b, &g, [(FactorElement::Finite(1), GElem::Finite(y))])?;
            mus.push(SplitQRep::new(s.clone(), g.clone(), ma, mb)?);
        }
    }
    let mut rhos = Vec::new();
    for ra in [0usize, 4, 8] {
        for rb in [0usize, 3, 6, 9] {
            let rho = SplitQRep::new(
                s.clone(),
                g.clone(),
                FactorQRMap::power(GElem::Finite(ra)),
                FactorQRMap::power(GElem::Finite(rb)),
            )?;
            rhos.push(rho);
        }
    }
    Ok((s, g, mus, rhos))
}

fn observed_defect(mu: &SplitQRep, sampler: &mut WordSampler) -> Real {
    mu.sampled_defect(sampler, 1000)
        .max(mu.junction_defect(sampler, 3))
}

fn crit_qrep(opts: &SelftestOptions) -> Result<String> {
    let mut rng = rng_for(opts, 11);
    let (s, g, mus, rhos) = finite_qrep_setup()?;
    let report = check_no_small_subgroups(&g, 1.0, &SmallSubgroupOptions::default());
    if !report.passed {
        return Err(fail("Z/12 target has 1-small subgroups".into()));
    }
    let mut sampler = WordSampler::new(s, 6, 1, rng.gen());
    let mut witnesses = 0usize;
    for mu in &mus {
        let exact = mu.defect();
        let seen = observed_defect(mu, &mut sampler);
        if seen != exact {
            return Err(fail(format!(
                "finite target: observed defect {seen}, exact {exact}"
            )));
        }
        let delta = mu.sup_norm().expect("finite factors");
        if delta.to_f64() > 0.5 {
            return Err(fail(format!("μ has δ = {delta} > 1/2")));
        }
        for rho in &rhos {
            nontriviality_witness(mu, rho, 1.0, 32)?;
            witnesses += 1;
        }
    }
    let circle = MetricGroup::Circle;
    if !check_no_small_subgroups(&circle, PI / 2.0, &SmallSubgroupOptions::default()).passed {
        return Err(fail("circle has π/2-small subgroups".into()));
    }
    let free = Splitting::free();
    let quarter = GElem::angle(rat(1, 4));
    let circle_mus = [
        SplitQRep::new(
            free.clone(),
            circle.clone(),
            FactorQRMap::sign(quarter.clone()),
            FactorQRMap::sign(quarter.clone()),
        )?,
        SplitQRep::new(
            free.clone(),
            circle.clone(),
            FactorQRMap::from_values(
                &FactorDescriptor::Integer,
                &circle,
                [
                    (FactorElement::int(1), GElem::angle(rat(1, 6))),
                    (FactorElement::int(3), GElem::angle(rat(-1, 5))),
                ],
            )?,
            FactorQRMap::sign(GElem::angle(rat(1, 8))),
        )?,
    ];
    let mut sampler = WordSampler::new(free.clone(), 6, 8, rng.gen());
    for mu in &circle_mus {
        let exact = mu.defect().to_f64();
        let seen = observed_defect(mu, &mut sampler).to_f64();
        if (seen - exact).abs() > TOL {
            return Err(fail(format!(
                "circle: observed defect {seen}, exact {exact}"
            )));
        }
    }
    let mu = &circle_mus[0];
    for _ in 0..1000 {
        let rho = SplitQRep::new(
            free.clone(),
            circle.clone(),
            FactorQRMap::power(circle.random_element(&mut rng)),
            FactorQRMap::power(circle.random_element(&mut rng)),
        )?;
        nontriviality_witness(mu, &rho, PI / 2.0, 32)?;
        witnesses += 1;
    }
    Ok(format!(
        "{} finite μ × {} ρ and 1000 circle ρ: {witnesses} witnesses",
        mus.len(),
        rhos.len()
    ))
}

fn crit_sequence(_: &SelftestOptions) -> Result<String> {
    let s = Splitting::free();
    let f = sequence_qm(&[(1, int(1))])?;
    let seq = |k: i64| -> Rational {
        match k.abs() {
            1 => int(k.signum()),
            _ => int(0),
        }
    };
    for k in (-5i64..=5).filter(|&k| k != 0) {
        for e in [1i64, -1] {
            let g = s.from_exponents(Side::A, &[k, e])?;
            for n in 0..=10i64 {
                let v = f.eval(&s.power_i64(&g, n));
                let expected = int(n) * (seq(k) + int(e) * seq(1));
                if v != expected {
                    return Err(fail(format!(
                        "f_s((a^{k} b^{e})^{n}) = {v}, expected {expected}"
                    )));
                }
            }
        }
    }
    let mut count = 0;
    for code in 0..81u32 {
        let mut c = code;
        let mut s_vals = Vec::new();
        for k in 1..=4i64 {
            s_vals.push((k, int((c % 3) as i64 - 1)));
            c /= 3;
        }
        let zero = s_vals.iter().all(|(_, v)| v.is_zero());
        let f = sequence_qm(&s_vals)?;
        if f.is_trivial() != zero {
            return Err(fail(format!("is_trivial is wrong for s = {s_vals:?}")));
        }
        count += 1;
    }
    Ok(format!(
        "growth identities for |k| ≤ 5, n ≤ 10; triviality on {count} sequences"
    ))
}

fn crit_negative_control(_: &SelftestOptions) -> Result<String> {
    let mut caught = Vec::new();
    for (name, m, v) in qc_actions()? {
        let l24 = prime_power_witness(&m, 2, 3, &v, 6, Convention::Literal);
        let t25 = staircase_witness(&m, &v, 6, Convention::Literal);
        for (what, r) in [("prime-power", l24.err()), ("staircase", t25.err())] {
            match r {
                Some(Error::IdentityViolation(_)) => caught.push(format!("{name} {what}")),
                other => return Err(fail(format!(
                    "{name} {what} growth check did not reject the literal convention: {other:?}"
                ))),
            }
        }
    }
    Ok(format!(
        "literal convention rejected: {}",
        caught.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_configs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in [Splitting::free(), z5_z6()] {
            for _ in 0..50 {
                let f = random_split_qm(&s, &mut rng, true);
                assert!(f.fa.is_finitely_supported() && f.fb.is_finitely_supported());
                random_split_qm(&s, &mut rng, false);
            }
        }
    }

    #[test]
    fn word_visitor_counts() {
        let e = Splitting::exponent_range(1);
        let mut n = 0;
        for_each_word(3, &e, &e, &mut |_| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 1 + 4 + 8 + 16);
    }

    #[test]
    fn literal_flag_fails_criterion_nine() {
        let opts = SelftestOptions {
            literal_convention: true,
            ..SelftestOptions::default()
        };
        assert!(!run_criterion(9, &opts).unwrap().passed);
        assert!(run_criterion(13, &opts).unwrap().passed);
    }
}

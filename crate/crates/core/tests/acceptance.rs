//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use rqc_core::euler::{euler_truncations, remark44, EulerKind, Fixed};
use rqc_core::family::{
    genus_branch, genus_subext, h_from_tuple, mask_count, tuple_from_h, FamilySpec, TupleSpace,
};
use rqc_core::field::{Elem, Field};
use rqc_core::model::{fiber_distribution, model_moments, model_pmf, tv_distance, xi_distribution};
use rqc_core::poly::Poly;
use rqc_core::report;
use rqc_core::trace::{empirical_moments, trace_histogram, Mode, TraceHistogram};
use rqc_core::verify::{
    census_r, census_s, fiber_census, genus_formula_report, identity_check, subextensions_match_oracle,
    FiberCensus, Verdict, DEFAULT_TOLERANCE,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn field(q: u64) -> Field {
    Field::with_q(q).expect("valid field")
}

/// 1. Fiber census: exact closed forms and subcase fractions.
fn fiber_census_exact() -> Outcome {
    let start = Instant::now();
    let mut done = Vec::new();
    for (q, r) in [(3u64, 2u32), (5, 2), (7, 2), (3, 3)] {
        let c = fiber_census(&field(q), r).map_err(|e| e.to_string())?;
        let e = FiberCensus::expected(q, r);
        ensure(c.total == e.total && c.case_i == e.case_i && c.case_ii == e.case_ii, || {
            format!("(q, r) = ({q}, {r}): got {c:?}, closed forms {e:?}")
        })?;
        let t = 1u128 << r;
        ensure(
            c.ia * t == c.case_i
                && c.ib * t == (t - 1) * c.case_i
                && c.iia * (t / 2) == c.case_ii
                && c.iib * (t / 2) == (t / 2 - 1) * c.case_ii,
            || format!("(q, r) = ({q}, {r}): subcase fractions off in {c:?}"),
        )?;
        done.push(format!("({q},{r}): {}/{}/{}", c.total, c.case_i, c.case_ii));
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("{} in {:.1?}", done.join(", "), start.elapsed()))
}

/// 2. The combinatorial identity for q in {3,5,7,9}, m in 1..=15.
fn identity_exact() -> Outcome {
    let start = Instant::now();
    for q in [3u64, 5, 7, 9] {
        for m in 1..=15 {
            ensure(identity_check(q, m).map_err(|e| e.to_string())?, || format!("fails at q = {q}, m = {m}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("60 cases in {:.1?}", start.elapsed()))
}

/// 3. Exact sanity of the local model.
fn model_sanity() -> Outcome {
    for q in [3u64, 5, 7, 9] {
        for r in 1..=4 {
            let x = xi_distribution(q, r).map_err(|e| e.to_string())?;
            let f = fiber_distribution(q, r).map_err(|e| e.to_string())?;
            ensure(x.total().is_one(), || format!("q={q} r={r}: total {}", x.total()))?;
            ensure(x.moment(1).is_zero(), || format!("q={q} r={r}: mean {}", x.moment(1)))?;
            let shifted: Vec<(i64, BigRational)> = x.atoms.iter().map(|(v, p)| (v + 1, p.clone())).collect();
            ensure(f.atoms == shifted, || format!("q={q} r={r}: fiber law is not the shift"))?;
            ensure(f.moment(1).is_one(), || format!("q={q} r={r}: fiber mean {}", f.moment(1)))?;
        }
        let x = xi_distribution(q, 1).map_err(|e| e.to_string())?;
        let q = q as i64;
        let want = vec![(-1, rat(q, 2 * (q + 1))), (0, rat(1, q + 1)), (1, rat(q, 2 * (q + 1)))];
        ensure(x.atoms == want, || format!("q={q}: r = 1 law {:?}", x.atoms))?;
    }
    Ok("q in {3,5,7,9}, r in 1..=4: exact".into())
}

/// All degree vectors of length `m` with sum at most `total`.
fn degree_vectors(m: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for d in 0..=left {
            cur.push(d);
            rec(m, left - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, total, &mut Vec::new(), &mut out);
    out
}

/// 4. Genus routes agree on every tuple; the literal formula is flagged on
/// all-even triples with deviation exactly one.
fn genus_consistency() -> Outcome {
    let start = Instant::now();
    let k = field(3);
    let mut tuples = 0u64;
    for r in 1..=3u32 {
        for degrees in degree_vectors(mask_count(r), 6) {
            let fs = FamilySpec::new(3, r, degrees, false, false).map_err(|e| e.to_string())?;
            let space = TupleSpace::new(&k, &fs).map_err(|e| e.to_string())?;
            let bad = space.par_fold(
                || (0u64, 0u64),
                |acc, t| {
                    let t = t.to_tuple(r);
                    acc.0 += 1;
                    acc.1 += (genus_branch(&t) != genus_subext(&t)) as u64;
                },
                |a, b| (a.0 + b.0, a.1 + b.1),
            );
            tuples += bad.0;
            ensure(bad.1 == 0, || format!("r = {r}, degrees {:?}: {} disagreements", fs.degrees, bad.1))?;
        }
    }
    let triples: Vec<[usize; 3]> =
        degree_vectors(3, 12).into_iter().filter(|d| d.iter().all(|&n| n <= 4)).map(|d| [d[0], d[1], d[2]]).collect();
    let rows = genus_formula_report(&triples);
    let mut mixed_flagged = 0;
    for row in &rows {
        ensure(row.branch == row.subext, || format!("{:?}: branch {} subext {}", row.degrees, row.branch, row.subext))?;
        let all_even = row.degrees.iter().all(|n| n % 2 == 0);
        let all_odd = row.degrees.iter().all(|n| n % 2 == 1);
        if all_even {
            ensure(row.verdict == Verdict::Flagged && row.literal - row.branch == 1, || {
                format!("{:?}: literal {} branch {}", row.degrees, row.literal, row.branch)
            })?;
        } else if all_odd {
            ensure(row.verdict == Verdict::Agree, || format!("{:?} flagged", row.degrees))?;
        } else {
            ensure(row.verdict == Verdict::Flagged && row.literal - row.branch == -1, || {
                format!("{:?}: literal {} branch {}", row.degrees, row.literal, row.branch)
            })?;
            mixed_flagged += 1;
        }
    }
    let anchor = &genus_formula_report(&[[2, 2, 2]])[0];
    ensure((anchor.branch, anchor.literal) == (3, 4), || format!("(2,2,2): {anchor:?}"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{tuples} tuples agree; all-even triples flagged (+1), (2,2,2): 3 vs 4; all {mixed_flagged} mixed-parity triples flagged (-1); {:.1?}",
        start.elapsed()
    ))
}

/// 5. Tuple -> h -> tuple is the identity, and every p_J matches the oracle.
fn bijection_roundtrip() -> Outcome {
    let k = field(3);
    let mut n = 0u64;
    for a in 0..=2 {
        for b in 0..=2 {
            for c in 0..=2 {
                let fs = FamilySpec::new(3, 2, vec![a, b, c], false, true).map_err(|e| e.to_string())?;
                for t in TupleSpace::new(&k, &fs).map_err(|e| e.to_string())?.tuples() {
                    let back = tuple_from_h(&k, &h_from_tuple(&k, &t)).map_err(|e| e.to_string())?;
                    ensure(back.normalized(&k) == t.normalized(&k), || format!("roundtrip fails for {t:?}"))?;
                    ensure(subextensions_match_oracle(&k, &t).map_err(|e| e.to_string())?, || {
                        format!("p_J differs from the square-free part for {t:?}")
                    })?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} hat tuples with degrees <= (2,2,2)"))
}

/// 6. Relative errors of the value-constrained counts shrink with degree.
fn counting_lemmas() -> Outcome {
    let start = Instant::now();
    let k = field(3);
    let one = Poly::one();
    let x = [Elem(0)];
    let a = [Elem(1)];
    let mut errors = Vec::new();
    for d in 3..=6 {
        let rep = census_s(&k, d, &one, &x, &a, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        if d == 3 {
            ensure(rep.exact_count == BigInt::from(7) && rep.main_term.exact == Some(rat(27, 4)), || {
                format!("anchor: {} vs {:?}", rep.exact_count, rep.main_term.exact)
            })?;
            ensure((rep.rel_error - 1.0 / 27.0).abs() < 1e-12, || format!("anchor error {}", rep.rel_error))?;
        }
        errors.push(rep.rel_error);
    }
    ensure(errors[3] < errors[0], || format!("lemma-S errors d=3..6: {errors:?}"))?;
    let values = [vec![Elem(1)], vec![Elem(1)]];
    let small = census_r(&k, &[2, 2], &one, &x, &values, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    let large = census_r(&k, &[4, 4], &one, &x, &values, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    ensure(large.rel_error < small.rel_error, || {
        format!("lemma-R (2,2): {} vs (4,4): {}", small.rel_error, large.rel_error)
    })?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "lemma-S errors d=3..6 {:?}; lemma-R (2,2) {:.4} -> (4,4) {:.4}",
        errors.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
        small.rel_error,
        large.rel_error
    ))
}

fn bracket_histogram(n: usize) -> Result<TraceHistogram, String> {
    let fs = FamilySpec::new(3, 2, vec![n, n, n], true, true).map_err(|e| e.to_string())?;
    trace_histogram(&field(3), &fs, Mode::Exhaustive).map_err(|e| e.to_string())
}

/// 7. Distribution trend toward the model over bracket hat families.
fn distribution_trend(hists: &[(usize, TraceHistogram)]) -> Outcome {
    let pmf = model_pmf(3, 2).map_err(|e| e.to_string())?;
    let tv: Vec<f64> = hists
        .iter()
        .map(|(_, h)| tv_distance(h, &pmf).map(|d| d.to_f64().unwrap_or(f64::NAN)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(tv[2] < tv[0], || format!("TV n=2,3,4: {tv:?}"))?;
    let m = empirical_moments(&hists[2].1, 2).map_err(|e| e.to_string())?;
    let mean = m[1].shat_raw.to_f64().unwrap_or(f64::NAN);
    let second = m[2].shat_normalized;
    ensure(mean.abs() <= 0.25, || format!("mean at n = 4: {mean}"))?;
    ensure((second - 2.0).abs() / 2.0 <= 0.15, || format!("second normalized moment at n = 4: {second}"))?;
    Ok(format!(
        "TV n=2,3,4: {:.4} {:.4} {:.4}; n=4 mean {mean:.4}, M2 {second:.4} (model 2)",
        tv[0], tv[1], tv[2]
    ))
}

/// 8. Moments: empirical toward model, closed form for k = 2, Gaussian trend.
fn moments(hists: &[(usize, TraceHistogram)]) -> Outcome {
    let q = 3;
    let x = xi_distribution(q, 2).map_err(|e| e.to_string())?;
    let pmf = model_pmf(q, 2).map_err(|e| e.to_string())?;
    let model = model_moments(&pmf, &x, 4);
    let gap = |h: &TraceHistogram| -> Result<Vec<f64>, String> {
        let e = empirical_moments(h, 4).map_err(|e| e.to_string())?;
        Ok((1..=4).map(|k| (e[k].shat_normalized - model[k].normalized).abs()).collect())
    };
    let (g2, g4) = (gap(&hists[0].1)?, gap(&hists[2].1)?);
    for k in 0..4 {
        ensure(g4[k] <= g2[k], || format!("k = {}: gap {} at n=4 vs {} at n=2", k + 1, g4[k], g2[k]))?;
    }
    for q in [3u64, 5, 7, 9, 27] {
        let x = xi_distribution(q, 2).map_err(|e| e.to_string())?;
        let m = model_moments(&model_pmf(q, 2).map_err(|e| e.to_string())?, &x, 2);
        let want = rat(3 * (q as i64 + 1), q as i64 + 3);
        ensure(m[2].normalized_exact.as_ref() == Some(&want), || format!("q = {q}: {:?}", m[2].normalized_exact))?;
    }
    let mut last: Option<(f64, f64)> = None;
    let mut trail = Vec::new();
    for q in [3u64, 9, 27] {
        let x = xi_distribution(q, 2).map_err(|e| e.to_string())?;
        let m = model_moments(&model_pmf(q, 2).map_err(|e| e.to_string())?, &x, 4);
        let d3 = m[3].standardized.abs();
        let d4 = (m[4].standardized - 3.0).abs();
        if let Some((p3, p4)) = last {
            ensure(d3 < p3 && d4 < p4, || format!("q = {q}: |m3| {d3} (was {p3}), |m4 - 3| {d4} (was {p4})"))?;
        }
        last = Some((d3, d4));
        trail.push(format!("{:.4}", m[4].standardized));
    }
    Ok(format!(
        "gaps k=1..4 n=2 {:?} -> n=4 {:?}; standardized m4 at q=3,9,27: {}",
        g2.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>(),
        g4.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>(),
        trail.join(" ")
    ))
}

/// 9. Euler constants: identities, range, and the regrouped product bound.
fn euler_constants() -> Outcome {
    let start = Instant::now();
    let tol = Fixed::from_ratio(&BigInt::one(), &BigInt::from(10u64.pow(12)));
    for q in [3u64, 5] {
        let kinds = [
            EulerKind::L,
            EulerKind::K,
            EulerKind::LBeta(2),
            EulerKind::LBeta(3),
            EulerKind::LBeta(4),
            EulerKind::LBeta(5),
            EulerKind::LBeta(6),
            EulerKind::LBeta(7),
        ];
        let all = euler_truncations(q, &kinds, 12).map_err(|e| e.to_string())?;
        for rows in &all {
            for v in rows {
                ensure(!v.value.is_negative() && !v.value.mantissa().is_zero() && v.value < Fixed::one(), || {
                    format!("{} at q = {q}, D = {}: {}", v.spec.kind.label(), v.spec.max_degree, v.value)
                })?;
            }
        }
        let (l, k, l2, l3) = (&all[0][11].value, &all[1][11].value, &all[2][11].value, &all[3][11].value);
        ensure(l.sub(l2).abs() <= tol, || format!("q = {q}: L {l} vs L_2 {l2}"))?;
        let ratio = l3.div(l2).map_err(|e| e.to_string())?;
        ensure(k.sub(&ratio).abs() <= tol, || format!("q = {q}: K {k} vs L_3/L_2 {ratio}"))?;
    }
    let two_thirds = Fixed::from_ratio(&BigInt::from(2), &BigInt::from(3));
    let rows = remark44(3, 12).map_err(|e| e.to_string())?;
    ensure(rows.iter().all(|r| r.value > two_thirds), || "a regrouped truncation is below 2/3".into())?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "L_2 = L, K = L_3/L_2 to 1e-12 at D = 12; regrouped q=3 D=12: {}; {:.1?}",
        rows[11].value.to_decimal(12),
        start.elapsed()
    ))
}

/// All CSV outputs for a fixed configuration.
fn csv_outputs() -> Result<Vec<String>, String> {
    let k = field(3);
    let err = |e: rqc_core::Error| e.to_string();
    let small = FamilySpec::new(3, 2, vec![2, 1, 1], true, true).map_err(err)?;
    let mid = FamilySpec::new(3, 2, vec![2, 2, 2], true, true).map_err(err)?;
    let pmf = model_pmf(3, 2).map_err(err)?;
    let x = xi_distribution(3, 2).map_err(err)?;
    let exhaustive = trace_histogram(&k, &mid, Mode::Exhaustive).map_err(err)?;
    let sampled = trace_histogram(&k, &mid, Mode::Sampled { size: 20_000, seed: 7 }).map_err(err)?;
    let tuples = TupleSpace::new(&k, &small).map_err(err)?.tuples();
    let constants = euler_truncations(3, &[EulerKind::L, EulerKind::K], 12).map_err(err)?;
    let constants: Vec<_> = constants.into_iter().map(|mut v| v.pop().unwrap()).collect();
    let mut reports = fiber_census(&k, 2).map_err(err)?.reports();
    reports.push(census_s(&k, 4, &Poly::one(), &[Elem(0)], &[Elem(1)], DEFAULT_TOLERANCE).map_err(err)?);
    Ok(vec![
        report::enumerate_csv(&tuples, 2).map_err(err)?,
        report::trace_dist_csv(&exhaustive, &pmf).map_err(err)?,
        report::trace_dist_csv(&sampled, &pmf).map_err(err)?,
        report::moments_csv(&empirical_moments(&sampled, 6).map_err(err)?, &model_moments(&pmf, &x, 6)).map_err(err)?,
        report::model_csv(&pmf).map_err(err)?,
        report::constants_csv(&constants, &remark44(3, 12).map_err(err)?).map_err(err)?,
        report::verify_csv(&reports).map_err(err)?,
    ])
}

/// 10. CSV bytes do not depend on the number of worker threads.
fn determinism() -> Outcome {
    let mut reference: Option<Vec<String>> = None;
    for threads in [1, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let out = pool.install(csv_outputs)?;
        match &reference {
            None => reference = Some(out),
            Some(r) => {
                for (i, (a, b)) in r.iter().zip(&out).enumerate() {
                    ensure(a == b, || format!("output {i} differs with {threads} threads"))?;
                }
            }
        }
    }
    let n = reference.map_or(0, |r| r.len());
    Ok(format!("{n} CSV outputs byte-identical with 1, 4 and 8 threads"))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: u32, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    };
    report(1, "fiber census", fiber_census_exact());
    report(2, "combinatorial identity", identity_exact());
    report(3, "model sanity", model_sanity());
    report(4, "genus consistency", genus_consistency());
    report(5, "bijection roundtrip", bijection_roundtrip());
    report(6, "counting-lemma convergence", counting_lemmas());
    let start = Instant::now();
    let hists: Result<Vec<(usize, TraceHistogram)>, String> =
        [2usize, 3, 4].into_iter().map(|n| bracket_histogram(n).map(|h| (n, h))).collect();
    let elapsed = start.elapsed();
    match hists {
        Ok(h) => {
            let trend = distribution_trend(&h).and_then(|d| {
                within(elapsed, Duration::from_secs(600))?;
                Ok(format!("{d}; histograms {elapsed:.1?}"))
            });
            report(7, "distribution trend", trend);
            report(8, "moments", moments(&h));
        }
        Err(e) => {
            report(7, "distribution trend", Err(e.clone()));
            report(8, "moments", Err(e));
        }
    }
    report(9, "Euler constants", euler_constants());
    report(10, "determinism", determinism());
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

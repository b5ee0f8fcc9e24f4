use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use rqc_core::euler::{euler_truncations, remark44, EulerKind};
use rqc_core::family::{mask_count, FamilySpec, TupleSpace};
use rqc_core::field::{Elem, Field, FieldDesignation};
use rqc_core::model::{model_moments, model_pmf, sum_distribution, tv_distance, xi_distribution};
use rqc_core::poly::Poly;
use rqc_core::report;
use rqc_core::trace::{empirical_moments, trace_histogram, Mode, Point, TraceHistogram};
use rqc_core::verify::{self, CensusReport, PointTarget};
use rqc_core::{Error, Result};

use crate::{Cli, Command, FamilyArgs, Format, SampleArgs, VerifyArgs};

/// Size the global worker pool from `RQC_THREADS`; returns the thread count.
pub fn configure_threads() -> Result<usize> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("RQC_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse(format!("RQC_THREADS must be a positive integer, got {text:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build_global().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(rayon::current_num_threads())
}

pub fn execute(cli: &Cli, threads: usize) -> Result<()> {
    if let Command::Rerun { sidecar_file } = &cli.command {
        let text = fs::read_to_string(sidecar_file)?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("sidecar: {e}")))?;
        let mut inner: Cli = serde_json::from_value(doc.get("config").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::Parse(format!("sidecar config: {e}")))?;
        if matches!(inner.command, Command::Rerun { .. }) {
            return Err(Error::Parse("a sidecar cannot describe another rerun".into()));
        }
        if cli.out.is_some() {
            inner.out = cli.out.clone();
            inner.sidecar = cli.sidecar.clone();
        }
        return execute(&inner, threads);
    }
    let start = Instant::now();
    let (table, counts) = dispatch(&cli.command)?;
    let body = match cli.format {
        Format::Csv => table,
        Format::Json => csv_to_json(&table)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, &body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    let sidecar = cli.sidecar.clone().or_else(|| {
        cli.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = sidecar {
        let doc = json!({
            "tool": "rqc",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cli,
            "threads": threads,
            "wall_time_secs": start.elapsed().as_secs_f64(),
            "counts": counts,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn csv_to_json(table: &str) -> Result<String> {
    let mut reader = csv::Reader::from_reader(table.as_bytes());
    let headers = reader.headers()?.clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: serde_json::Map<String, Value> =
            headers.iter().zip(record.iter()).map(|(h, v)| (h.to_string(), Value::String(v.to_string()))).collect();
        rows.push(Value::Object(row));
    }
    serde_json::to_string_pretty(&rows).map(|s| s + "\n").map_err(|e| Error::Parse(e.to_string()))
}

fn field(q: &str) -> Result<Field> {
    Field::from_designation(FieldDesignation::from_str(q)?)
}

fn family(args: &FamilyArgs) -> Result<(Field, FamilySpec)> {
    let k = field(&args.q)?;
    let fs = FamilySpec::new(k.q() as u64, args.r, args.degrees.clone(), args.bracket, args.hat)?;
    Ok((k, fs))
}

fn histogram(k: &Field, fs: &FamilySpec, sample: &SampleArgs) -> Result<TraceHistogram> {
    let mode = match (sample.sample, sample.seed) {
        (Some(size), Some(seed)) => Mode::Sampled { size, seed },
        (Some(_), None) => return Err(Error::Domain("--seed is required with --sample".into())),
        (None, _) => {
            let work = TupleSpace::new(k, fs)?.cardinality();
            if work > sample.max_work {
                return Err(Error::Infeasible {
                    what: "exhaustive enumeration (use --sample/--seed or raise --max-work)".into(),
                    work,
                    limit: sample.max_work,
                });
            }
            Mode::Exhaustive
        }
    };
    trace_histogram(k, fs, mode)
}

type Output = (String, Value);

fn dispatch(command: &Command) -> Result<Output> {
    match command {
        Command::Enumerate { family: args, max_work } => {
            let (k, fs) = family(args)?;
            let space = TupleSpace::new(&k, &fs)?;
            let work = space.cardinality();
            if work > *max_work {
                return Err(Error::Infeasible { what: "tuple listing".into(), work, limit: *max_work });
            }
            let tuples = space.tuples();
            Ok((report::enumerate_csv(&tuples, fs.r)?, json!({ "tuples": tuples.len() })))
        }
        Command::TraceDist { family: args, sample } => {
            let (k, fs) = family(args)?;
            let h = histogram(&k, &fs, sample)?;
            let pmf = model_pmf(fs.q, fs.r)?;
            let tv = tv_distance(&h, &pmf)?;
            eprintln!("total variation distance to the model: {:.6}", tv.to_f64().unwrap_or(f64::NAN));
            let counts = json!({
                "tuples": h.total,
                "mode": h.mode,
                "tv_distance": tv.to_f64(),
                "tv_distance_exact": tv.to_string(),
            });
            Ok((report::trace_dist_csv(&h, &pmf)?, counts))
        }
        Command::Moments { family: args, sample, max_k } => {
            let (k, fs) = family(args)?;
            let h = histogram(&k, &fs, sample)?;
            let x = xi_distribution(fs.q, fs.r)?;
            let pmf = model_pmf(fs.q, fs.r)?;
            let table = report::moments_csv(&empirical_moments(&h, *max_k)?, &model_moments(&pmf, &x, *max_k))?;
            Ok((table, json!({ "tuples": h.total, "mode": h.mode })))
        }
        Command::Model { q, r } => {
            let k = field(q)?;
            let pmf = model_pmf(k.q() as u64, *r)?;
            let counts = json!({ "summands": pmf.n, "support": pmf.numerators.len(), "denominator": pmf.denominator.to_string() });
            Ok((report::model_csv(&pmf)?, counts))
        }
        Command::ModelMoments { q, r, max_k, n } => {
            let k = field(q)?;
            let x = xi_distribution(k.q() as u64, *r)?;
            let n = n.unwrap_or(k.q() + 1);
            let pmf = sum_distribution(&x, n);
            Ok((report::model_moments_csv(&model_moments(&pmf, &x, *max_k))?, json!({ "summands": n })))
        }
        Command::Constants { q, beta, max_degree } => {
            let q = field(q)?.q() as u64;
            if *beta == 0 {
                return Err(Error::Domain("--beta must be at least 1".into()));
            }
            let kinds = [EulerKind::L, EulerKind::K, EulerKind::LBeta(*beta)];
            let all = euler_truncations(q, &kinds, *max_degree)?;
            let values: Vec<_> =
                (0..*max_degree as usize).flat_map(|d| all.iter().map(move |rows| rows[d].clone())).collect();
            let regrouped = remark44(q, *max_degree)?;
            Ok((report::constants_csv(&values, &regrouped)?, json!({ "rows": values.len() + regrouped.len() })))
        }
        Command::Verify(args) => {
            let reports = verify_statement(args)?;
            let mut verdicts: BTreeMap<String, usize> = BTreeMap::new();
            for r in &reports {
                *verdicts.entry(r.verdict.to_string()).or_default() += 1;
            }
            Ok((report::verify_csv(&reports)?, json!({ "rows": reports.len(), "verdicts": verdicts })))
        }
        Command::Genus { r, degrees, max_degree } => {
            let m = mask_count(*r);
            let vectors = match degrees {
                Some(d) => vec![d.clone()],
                None => {
                    let work = (*max_degree as u128 + 1).checked_pow(m as u32).unwrap_or(u128::MAX);
                    if work > 1_000_000 {
                        return Err(Error::Infeasible { what: "genus table".into(), work, limit: 1_000_000 });
                    }
                    all_vectors(m, *max_degree)
                }
            };
            if vectors.iter().any(|v| v.len() != m) {
                return Err(Error::Domain(format!("r = {r} needs {m} degrees")));
            }
            Ok((report::genus_csv(*r, &vectors)?, json!({ "rows": vectors.len() })))
        }
        Command::Rerun { .. } => Err(Error::Parse("nested rerun".into())),
    }
}

/// Vectors of length `m` with entries in `0..=top`, last entry fastest.
fn all_vectors(m: usize, top: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|v| (0..=top).map(move |d| [v.clone(), vec![d]].concat())).collect();
    }
    out
}

fn elem(k: &Field, text: &str) -> Result<Elem> {
    let i: u32 = text.trim().parse().map_err(|_| Error::Parse(format!("not an element index: {text:?}")))?;
    k.elem(i)
}

fn groups(text: &str) -> Vec<Vec<String>> {
    text.split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| g.split(',').map(|s| s.trim().to_string()).collect())
        .collect()
}

fn elem_groups(k: &Field, text: &str) -> Result<Vec<Vec<Elem>>> {
    groups(text).iter().map(|g| g.iter().map(|s| elem(k, s)).collect()).collect()
}

fn finite_points(k: &Field, points: &[String]) -> Result<Vec<Elem>> {
    points.iter().map(|s| elem(k, s)).collect()
}

fn triple(degrees: &[usize]) -> Result<[usize; 3]> {
    <[usize; 3]>::try_from(degrees)
        .map_err(|_| Error::Domain(format!("three degrees (f1, f2, f) are required, got {}", degrees.len())))
}

fn one_per_point<T>(rows: Vec<T>, points: usize) -> Result<Vec<T>> {
    if rows.len() != points {
        return Err(Error::Domain(format!("{} value groups for {points} points", rows.len())));
    }
    Ok(rows)
}

fn verify_statement(args: &VerifyArgs) -> Result<Vec<CensusReport>> {
    let k = field(&args.q)?;
    let q = k.q() as u64;
    let tol = args.tolerance;
    let u = Poly::parse(&args.u, &k)?;
    match args.statement.as_str() {
        "lemma-S" => {
            let [d] = <[usize; 1]>::try_from(args.degrees.as_slice())
                .map_err(|_| Error::Domain("lemma-S takes one degree".into()))?;
            let points = finite_points(&k, &args.points)?;
            let values = elem_groups(&k, &args.values)?.concat();
            Ok(vec![verify::census_s(&k, d, &u, &points, &values, tol)?])
        }
        "lemma-R" => {
            let points = finite_points(&k, &args.points)?;
            let mut values = elem_groups(&k, &args.values)?;
            if points.is_empty() && values.is_empty() {
                values = vec![Vec::new(); args.degrees.len()];
            }
            Ok(vec![verify::census_r(&k, &args.degrees, &u, &points, &values, tol)?])
        }
        "prop45" => {
            let points = finite_points(&k, &args.points)?;
            let rows = one_per_point(elem_groups(&k, &args.values)?, points.len())?;
            let mut a = Vec::new();
            let mut b = Vec::new();
            for row in rows {
                let [x, y] = <[Elem; 2]>::try_from(row).map_err(|_| Error::Domain("prop45 takes `a,b` per point".into()))?;
                a.push(x);
                b.push(y);
            }
            Ok(vec![verify::census_prop45(&k, triple(&args.degrees)?, &points, &a, &b, tol)?])
        }
        "cor46" => {
            let points = finite_points(&k, &args.points)?;
            let targets = one_per_point(elem_groups(&k, &args.values)?, points.len())?
                .into_iter()
                .map(|row| match row.as_slice() {
                    [a, b] => PointTarget::from_triple(*a, *b, Elem::ZERO),
                    [a, b, c] => PointTarget::from_triple(*a, *b, *c),
                    _ => Err(Error::Domain("cor46 takes `a,b` or `a,b,c` per point".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![verify::census_cor46(&k, triple(&args.degrees)?, &points, &targets, tol)?])
        }
        "cor47" | "cor48" => {
            let patterns = groups(&args.values)
                .into_iter()
                .map(|g| {
                    let v: Vec<i8> = g
                        .iter()
                        .map(|s| s.parse().map_err(|_| Error::Parse(format!("not a character value: {s:?}"))))
                        .collect::<Result<_>>()?;
                    <[i8; 3]>::try_from(v)
                        .map(|[a, b, c]| (a, b, c))
                        .map_err(|_| Error::Domain("character patterns are `e1,e2,e` per point".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let patterns = one_per_point(patterns, args.points.len())?;
            let degrees = triple(&args.degrees)?;
            if args.statement == "cor47" {
                let points = finite_points(&k, &args.points)?;
                Ok(vec![verify::census_cor47(&k, degrees, &points, &patterns, tol)?])
            } else {
                let points = args
                    .points
                    .iter()
                    .map(|s| match s.trim() {
                        "inf" | "infinity" => Ok(Point::Infinity),
                        s => elem(&k, s).map(Point::Finite),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(vec![verify::census_cor48(&k, degrees, &points, &patterns, tol)?])
            }
        }
        "cor68" => {
            let points = finite_points(&k, &args.points)?;
            let values = one_per_point(elem_groups(&k, &args.values)?, points.len())?;
            Ok(vec![verify::census_cor68(&k, args.r, &args.degrees, &points, &values, tol)?])
        }
        "fibers" => Ok(verify::fiber_census(&k, args.r)?.reports()),
        "genus" => {
            let top = args.max as usize;
            let triples: Vec<[usize; 3]> = all_vectors(3, top).into_iter().map(|v| [v[0], v[1], v[2]]).collect();
            Ok(verify::genus_formula_report(&triples).iter().map(|r| r.report()).collect())
        }
        "identity" => verify::identity_reports(q, args.max),
        other => Err(Error::Domain(format!(
            "unknown statement {other:?}; expected lemma-S, lemma-R, prop45, cor46, cor47, cor48, cor68, fibers, genus or identity"
        ))),
    }
}

//! CSV rendering of results. Output depends only on the values, never on the
//! order in which parallel workers finished.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::Result;
use crate::euler::{EulerValue, Remark44Row};
use crate::family::{genus_branch, genus_branch_degrees, genus_subext_degrees, QuadTuple};
use crate::model::{ModelMoment, SumPmf};
use crate::trace::{EmpiricalMoment, TraceHistogram};
use crate::verify::{CensusReport, GenusRow};

/// Decimal digits printed for high-precision constants.
pub const CONSTANT_DIGITS: usize = 50;

fn render<F>(header: &[&str], rows: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    rows(&mut w)?;
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn float(x: f64) -> String {
    format!("{x}")
}

fn ratio_float(x: &BigRational) -> String {
    float(x.to_f64().unwrap_or(f64::NAN))
}

/// One row per tuple: components in mask order, then the genus.
pub fn enumerate_csv(tuples: &[QuadTuple], r: u32) -> Result<String> {
    let m = crate::family::mask_count(r);
    let mut header: Vec<String> = (1..=m).map(|j| format!("f{j}")).collect();
    header.push("genus".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    render(&header, |w| {
        for t in tuples {
            let mut row: Vec<String> = t.components().iter().map(|f| f.to_string()).collect();
            row.push(genus_branch(t).to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn trace_dist_csv(h: &TraceHistogram, pmf: &SumPmf) -> Result<String> {
    let support: std::collections::BTreeSet<i64> = h.counts.keys().copied().chain(pmf.support()).collect();
    render(&["M", "count", "empirical_prob", "model_prob", "abs_diff"], |w| {
        for m in support {
            let emp = h.probability(m);
            let model = pmf.prob(m);
            let diff = crate::trace::abs_diff(&emp, &model);
            w.write_record([
                m.to_string(),
                h.counts.get(&m).copied().unwrap_or(0).to_string(),
                ratio_float(&emp),
                ratio_float(&model),
                ratio_float(&diff),
            ])?;
        }
        Ok(())
    })
}

/// Empirical against model normalized moments, both sign conventions.
pub fn moments_csv(empirical: &[EmpiricalMoment], model: &[ModelMoment]) -> Result<String> {
    render(&["k", "empirical", "model", "gaussian", "empirical_trace", "model_trace"], |w| {
        for (e, m) in empirical.iter().zip(model) {
            let sign = if m.k % 2 == 1 { -1.0 } else { 1.0 };
            w.write_record([
                e.k.to_string(),
                float(e.shat_normalized),
                float(m.normalized),
                m.gaussian.to_string(),
                float(e.trace_normalized),
                float(sign * m.normalized),
            ])?;
        }
        Ok(())
    })
}

pub fn model_csv(pmf: &SumPmf) -> Result<String> {
    render(&["M", "prob_num", "prob_den", "prob_float"], |w| {
        for m in pmf.support() {
            let p = pmf.prob(m);
            w.write_record([m.to_string(), p.numer().to_string(), p.denom().to_string(), ratio_float(&p)])?;
        }
        Ok(())
    })
}

pub fn model_moments_csv(moments: &[ModelMoment]) -> Result<String> {
    render(&["k", "raw", "normalized", "standardized", "gaussian"], |w| {
        for m in moments {
            w.write_record([
                m.k.to_string(),
                m.raw.to_string(),
                float(m.normalized),
                float(m.standardized),
                m.gaussian.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn constants_csv(values: &[EulerValue], remark: &[Remark44Row]) -> Result<String> {
    render(&["kind", "D", "value", "tail_bound"], |w| {
        for v in values {
            w.write_record([
                v.spec.kind.label(),
                v.spec.max_degree.to_string(),
                v.value.to_decimal(CONSTANT_DIGITS),
                float(v.tail_bound),
            ])?;
        }
        for row in remark {
            w.write_record([
                "regrouped".to_string(),
                row.degree.to_string(),
                row.value.to_decimal(CONSTANT_DIGITS),
                float(row.tail_bound),
            ])?;
        }
        Ok(())
    })
}

pub fn verify_csv(reports: &[CensusReport]) -> Result<String> {
    render(&["statement", "params", "exact_count", "main_term", "rel_error", "verdict"], |w| {
        for r in reports {
            let main = match &r.main_term.exact {
                Some(x) if x.is_integer() => x.to_integer().to_string(),
                _ => float(r.main_term.value),
            };
            w.write_record([
                r.statement.clone(),
                r.params.clone(),
                r.exact_count.to_string(),
                main,
                float(r.rel_error),
                r.verdict.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Genus per degree vector; the literal closed formula only exists for `r = 2`.
pub fn genus_csv(r: u32, degree_vectors: &[Vec<usize>]) -> Result<String> {
    render(&["degrees", "branch", "subext", "literal", "verdict"], |w| {
        for d in degree_vectors {
            let label = d.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ");
            if r == 2 && d.len() == 3 {
                let row: &GenusRow = &crate::verify::genus_formula_report(&[[d[0], d[1], d[2]]])[0];
                w.write_record([
                    label,
                    row.branch.to_string(),
                    row.subext.to_string(),
                    row.literal.to_string(),
                    row.verdict.to_string(),
                ])?;
            } else {
                let (b, s) = (genus_branch_degrees(r, d), genus_subext_degrees(r, d));
                let verdict = if b == s { "agree" } else { "mismatch" };
                w.write_record([label, b.to_string(), s.to_string(), String::new(), verdict.to_string()])?;
            }
        }
        Ok(())
    })
}

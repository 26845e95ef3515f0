use std::io::Write;

use crate::params::ModelParams;

use super::{CvResult, MetricResult, SigTestResult};

/// `query_id<TAB>metric<TAB>value` lines, then an `all` row per metric.
pub fn write_metrics_tsv<W: Write + ?Sized>(out: &mut W, results: &[MetricResult]) -> std::io::Result<()> {
    writeln!(out, "query_id\tmetric\tvalue")?;
    for r in results {
        for (q, v) in &r.per_query {
            writeln!(out, "{q}\t{}\t{v:.6}", r.metric)?;
        }
    }
    for r in results {
        writeln!(out, "all\t{}\t{:.6}", r.metric, r.mean)?;
    }
    Ok(())
}

pub fn write_significance_tsv<W: Write + ?Sized>(
    out: &mut W,
    rows: &[(MetricResult, MetricResult, SigTestResult)],
    alpha: f64,
) -> std::io::Result<()> {
    writeln!(out, "metric\tqueries\tmean_a\tmean_b\tdiff\tp_value\tsamples\tseed\tsignificant")?;
    for (a, b, s) in rows {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
            a.metric,
            a.per_query.len(),
            a.mean,
            b.mean,
            s.observed_mean_diff,
            s.p_value,
            s.samples,
            if s.exact { "-".to_string() } else { s.seed.to_string() },
            s.significant(alpha)
        )?;
    }
    Ok(())
}

/// One block per fold with the chosen parameters, then the pooled held-out means.
pub fn write_cv_report<W: Write + ?Sized>(out: &mut W, result: &CvResult, points: &[ModelParams]) -> std::io::Result<()> {
    for (i, fold) in result.folds.iter().enumerate() {
        writeln!(out, "# fold {} test={} train_map={:.6}", i + 1, fold.test_queries.join(","), fold.train_map)?;
        write!(out, "{}", points[fold.best_point].to_kv())?;
    }
    writeln!(out, "# pooled")?;
    writeln!(out, "map\t{:.6}", result.mean_map)?;
    writeln!(out, "ndcg20\t{:.6}", result.mean_ndcg20)?;
    Ok(())
}

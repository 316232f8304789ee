use std::cmp::Ordering;
use std::io::Read;

use super::config::ConfigIdentity;
use super::experiment::ResultRecord;
use super::metrics::MetricsTriple;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str = "rank,architecture,loss,kernel,stride,filter_exponents,fc_exponents,optimizer,epochs,r2_mean,mae_mean,mse_mean,r2_per_seed,mae_per_seed,mse_per_seed,seconds";

/// Marks a seed that did not complete in the per-seed lists.
const FAILED: &str = "failed";

/// One line of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub identity: ConfigIdentity,
    pub mean: Option<MetricsTriple>,
    pub per_seed: Vec<Option<MetricsTriple>>,
    pub seconds: Option<f64>,
}

impl From<&ResultRecord> for ResultRow {
    fn from(r: &ResultRecord) -> Self {
        Self {
            identity: r.identity.clone(),
            mean: r.mean,
            per_seed: r.per_seed.clone(),
            seconds: Some(r.seconds),
        }
    }
}

impl ResultRow {
    fn r2(&self) -> Option<f64> {
        self.mean.and_then(|m| m.r2)
    }

    fn mse(&self) -> Option<f64> {
        self.mean.map(|m| m.mse)
    }
}

/// Present values first, in `cmp` order.
fn present_first(a: Option<f64>, b: Option<f64>, descending: bool) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) if descending => y.total_cmp(&x),
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedTables {
    /// Mean R^2, best first.
    pub by_r2: Vec<ResultRow>,
    /// Mean MSE, best first.
    pub by_mse: Vec<ResultRow>,
}

/// Ties on R^2 break by lower MSE, ties on MSE by higher R^2, then by identity.
pub fn rank_results(rows: &[ResultRow]) -> RankedTables {
    let mut by_r2 = rows.to_vec();
    by_r2.sort_by(|a, b| {
        present_first(a.r2(), b.r2(), true)
            .then_with(|| present_first(a.mse(), b.mse(), false))
            .then_with(|| a.identity.cmp(&b.identity))
    });
    let mut by_mse = rows.to_vec();
    by_mse.sort_by(|a, b| {
        present_first(a.mse(), b.mse(), false)
            .then_with(|| present_first(a.r2(), b.r2(), true))
            .then_with(|| a.identity.cmp(&b.identity))
    });
    RankedTables { by_r2, by_mse }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn per_seed(seeds: &[Option<MetricsTriple>], f: impl Fn(&MetricsTriple) -> Option<f64>) -> String {
    seeds
        .iter()
        .map(|s| match s {
            Some(m) => fmt_opt(f(m)),
            None => FAILED.to_string(),
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Renders rows in the given order with 1-based ranks. `seconds` stays empty
/// unless `timings` is set, so that reruns produce identical bytes.
pub fn results_csv(rows: &[ResultRow], timings: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER.split(','))
        .expect("write to memory");
    for (i, row) in rows.iter().enumerate() {
        let id = &row.identity;
        let m = row.mean;
        let record = [
            (i + 1).to_string(),
            id.architecture.clone(),
            id.loss.clone(),
            id.kernel.clone(),
            id.stride.clone(),
            id.filter_exponents.clone(),
            id.fc_exponents.clone(),
            id.optimizer.clone(),
            id.epochs.clone(),
            fmt_opt(m.and_then(|m| m.r2)),
            fmt_opt(m.map(|m| m.mae)),
            fmt_opt(m.map(|m| m.mse)),
            per_seed(&row.per_seed, |m| m.r2),
            per_seed(&row.per_seed, |m| Some(m.mae)),
            per_seed(&row.per_seed, |m| Some(m.mse)),
            if timings {
                fmt_opt(row.seconds)
            } else {
                String::new()
            },
        ];
        w.write_record(&record).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

fn parse_opt(field: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Schema(format!("results line {line}: bad number {field:?}")))
}

fn parse_list(field: &str, line: usize) -> Result<Vec<Option<Option<f64>>>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|s| {
            if s == FAILED {
                Ok(None)
            } else {
                parse_opt(s, line).map(Some)
            }
        })
        .collect()
}

/// Reads a table written by [`results_csv`]; the rank column is ignored.
pub fn read_results_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(Error::Schema(format!(
            "unexpected results header {:?}",
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |k: usize| rec.get(k).unwrap_or("").to_string();
        let identity = ConfigIdentity {
            architecture: f(1),
            loss: f(2),
            kernel: f(3),
            stride: f(4),
            filter_exponents: f(5),
            fc_exponents: f(6),
            optimizer: f(7),
            epochs: f(8),
        };
        let r2 = parse_opt(&f(9), line)?;
        let mae = parse_opt(&f(10), line)?;
        let mse = parse_opt(&f(11), line)?;
        let mean = match (mae, mse) {
            (Some(mae), Some(mse)) => Some(MetricsTriple { r2, mae, mse }),
            _ => None,
        };
        let (mut r2s, maes, mses) = (
            parse_list(&f(12), line)?,
            parse_list(&f(13), line)?,
            parse_list(&f(14), line)?,
        );
        if r2s.is_empty() && maes.len() == 1 {
            // a single seed with undefined r2 renders as an empty field
            r2s.push(Some(None));
        }
        if r2s.len() != maes.len() || maes.len() != mses.len() {
            return Err(Error::Schema(format!(
                "results line {line}: per-seed lists differ in length"
            )));
        }
        let per_seed = r2s
            .into_iter()
            .zip(maes)
            .zip(mses)
            .map(
                |((r2, mae), mse)| match (r2, mae.flatten(), mse.flatten()) {
                    (Some(r2), Some(mae), Some(mse)) => Some(MetricsTriple { r2, mae, mse }),
                    _ => None,
                },
            )
            .collect();
        rows.push(ResultRow {
            identity,
            mean,
            per_seed,
            seconds: parse_opt(&f(15), line)?,
        });
    }
    Ok(rows)
}

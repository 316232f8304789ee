use super::kendall::{kendall_tau, KendallTau};
use super::report::{CorrelationStep, DroppedColumn};

/// Drops columns whose |tau-b| with an earlier retained column exceeds
/// `threshold`, scanning in column order. Constant columns are dropped first.
///
/// `columns` are column-major values. Returns the indices of retained columns.
pub fn prune_correlated(
    names: &[String],
    columns: &[Vec<f64>],
    threshold: f64,
) -> (Vec<usize>, CorrelationStep) {
    let f = columns.len();
    let mut matrix = vec![vec![None; f]; f];
    let mut taus = vec![vec![KendallTau::Undefined; f]; f];
    let usable = columns.first().is_some_and(|c| c.len() >= 2);
    for i in 0..f {
        for j in i..f {
            let tau = if usable {
                kendall_tau(&columns[i], &columns[j])
            } else {
                KendallTau::Undefined
            };
            taus[i][j] = tau;
            taus[j][i] = tau;
            matrix[i][j] = tau.value();
            matrix[j][i] = tau.value();
        }
    }

    let mut retained: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..f {
        if taus[i][i] == KendallTau::Undefined {
            dropped.push(DroppedColumn {
                column: names[i].clone(),
                reason: "constant".into(),
                tau: None,
                partner: None,
            });
            continue;
        }
        let partner = retained
            .iter()
            .copied()
            .filter(|&r| taus[i][r].magnitude() > threshold)
            .max_by(|&a, &b| taus[i][a].magnitude().total_cmp(&taus[i][b].magnitude()));
        match partner {
            Some(r) => dropped.push(DroppedColumn {
                column: names[i].clone(),
                reason: "correlated".into(),
                tau: taus[i][r].value(),
                partner: Some(names[r].clone()),
            }),
            None => retained.push(i),
        }
    }

    let step = CorrelationStep {
        method: "kendall tau-b".into(),
        threshold,
        columns: names.to_vec(),
        matrix,
        dropped,
        retained: retained.iter().map(|&i| names[i].clone()).collect(),
    };
    (retained, step)
}

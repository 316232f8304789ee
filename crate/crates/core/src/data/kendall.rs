use std::cmp::Ordering;

/// Tau-b, or `Undefined` when either input is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KendallTau {
    Value(f64),
    Undefined,
}

impl KendallTau {
    pub fn value(self) -> Option<f64> {
        match self {
            KendallTau::Value(v) => Some(v),
            KendallTau::Undefined => None,
        }
    }

    /// Magnitude used for pruning; an undefined correlation counts as 1.
    pub fn magnitude(self) -> f64 {
        match self {
            KendallTau::Value(v) => v.abs(),
            KendallTau::Undefined => 1.0,
        }
    }
}

/// Number of tied pairs in runs of equal values of an already-sorted sequence.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` stably, returning the number of inversions (swaps).
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps =
        merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
///
/// Panics if the inputs differ in length or hold fewer than two values.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> KendallTau {
    assert_eq!(x.len(), y.len(), "kendall_tau needs equal lengths");
    assert!(x.len() >= 2, "kendall_tau needs at least two observations");
    let n = x.len() as u64;

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let x_ties = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let joint_ties = tied_pairs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_count(&mut ys, &mut buf);
    let y_ties = tied_pairs(&ys, |a, b| a.partial_cmp(b) == Some(Ordering::Equal));

    let total = n * (n - 1) / 2;
    let denom = ((total - x_ties) as f64) * ((total - y_ties) as f64);
    if denom == 0.0 {
        return KendallTau::Undefined;
    }
    // concordant - discordant
    let diff =
        total as f64 - x_ties as f64 - y_ties as f64 + joint_ties as f64 - 2.0 * swaps as f64;
    KendallTau::Value((diff / denom.sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement_and_reversal() {
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]),
            KendallTau::Value(1.0)
        );
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]),
            KendallTau::Value(-1.0)
        );
    }

    #[test]
    fn tie_corrected_example() {
        let t = kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0])
            .value()
            .unwrap();
        assert!((t - 2.0 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_undefined() {
        let t = kendall_tau(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]);
        assert_eq!(t, KendallTau::Undefined);
        assert_eq!(t.magnitude(), 1.0);
    }
}

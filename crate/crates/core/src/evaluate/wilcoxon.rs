//! Exact one-sided Wilcoxon signed-rank test for paired samples.

use super::EvalError;

pub const MIN_PAIRS: usize = 5;

/// P-value for the alternative `a > b`.
///
/// Zero differences are dropped, tied absolute differences get midranks,
/// and the p-value is `P(W⁺ ≥ w)` under the exact permutation distribution
/// of the signs, obtained by dynamic programming over doubled ranks.
pub fn wilcoxon_paired_one_sided(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            what: "paired samples",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < MIN_PAIRS {
        return Err(EvalError::TooFewPairs {
            got: a.len(),
            min: MIN_PAIRS,
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return Err(EvalError::AllZeroDifferences);
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    // Doubled midranks are integers.
    let mut rank2 = vec![0usize; d.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && d[idx[j + 1]].abs() == d[idx[i]].abs() {
            j += 1;
        }
        for &c in &idx[i..=j] {
            rank2[c] = i + j + 2;
        }
        i = j + 1;
    }
    let w2: usize = (0..d.len()).filter(|&c| d[c] > 0.0).map(|c| rank2[c]).sum();
    let total: usize = rank2.iter().sum();
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    for &r in &rank2 {
        for s in (r..=total).rev() {
            dist[s] = 0.5 * dist[s] + 0.5 * dist[s - r];
        }
        for v in dist.iter_mut().take(r) {
            *v *= 0.5;
        }
    }
    Ok(dist[w2..].iter().sum::<f64>().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_shift_of_five() {
        let b = [0.1, 0.2, 0.3, 0.4, 0.5];
        let a: Vec<f64> = b.iter().map(|v| v + 1.0).collect();
        assert!((wilcoxon_paired_one_sided(&a, &b).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!((wilcoxon_paired_one_sided(&b, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_and_too_few() {
        let a = [1.0; 5];
        assert_eq!(wilcoxon_paired_one_sided(&a, &a), Err(EvalError::AllZeroDifferences));
        assert!(matches!(
            wilcoxon_paired_one_sided(&a[..4], &a[..4]),
            Err(EvalError::TooFewPairs { .. })
        ));
    }

    #[test]
    fn matches_enumeration() {
        let a = [3.1, 2.0, 5.5, 1.0, 4.2, 0.3, 2.2];
        let b = [2.0, 2.5, 3.0, 1.0, 1.2, 0.9, 1.2];
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
        let n = d.len();
        let ranks: Vec<f64> = d
            .iter()
            .map(|x| {
                let less = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
                let eq = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect();
        let w: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
        let mut hits = 0;
        for mask in 0..(1u32 << n) {
            let s: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s >= w - 1e-12 {
                hits += 1;
            }
        }
        let expected = hits as f64 / (1u32 << n) as f64;
        assert!((wilcoxon_paired_one_sided(&a, &b).unwrap() - expected).abs() < 1e-12);
    }
}

//! Elementary scores and Murphy diagrams.

use std::io::Write;

use super::{EvalError, FoldPredictions};

/// `L_θ(x, y) = |y − θ|` when `min(x, y) ≤ θ < max(x, y)`, else 0.
#[inline]
pub fn elementary_score(x: f64, y: bool, theta: f64) -> f64 {
    let yv = if y { 1.0 } else { 0.0 };
    let (lo, hi) = if x < yv { (x, yv) } else { (yv, x) };
    if lo <= theta && theta < hi {
        (yv - theta).abs()
    } else {
        0.0
    }
}

/// 99 points 0.01, 0.02, …, 0.99.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Mean elementary score per θ, averaged over folds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCurve {
    pub theta: Vec<f64>,
    pub mean: Vec<f64>,
    pub per_fold: Vec<Vec<f64>>,
}

impl ScoreCurve {
    /// Fraction of grid points where `self` is at or below `other`.
    pub fn fraction_at_or_below(&self, other: &ScoreCurve) -> f64 {
        let n = self.mean.len().min(other.mean.len());
        if n == 0 {
            return 0.0;
        }
        let below = self
            .mean
            .iter()
            .zip(&other.mean)
            .filter(|(a, b)| **a <= **b + 1e-12)
            .count();
        below as f64 / n as f64
    }

    /// `theta,mean_score,fold1,…`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["theta".to_string(), "mean_score".to_string()];
        header.extend((1..=self.per_fold.len()).map(|k| format!("fold{k}")));
        w.write_record(&header)?;
        for (i, t) in self.theta.iter().enumerate() {
            let mut rec = vec![format!("{t}"), format!("{:.8}", self.mean[i])];
            rec.extend(self.per_fold.iter().map(|f| format!("{:.8}", f[i])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn validate_theta_grid(grid: &[f64]) -> Result<(), EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidGrid("empty θ grid".into()));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(EvalError::InvalidGrid("θ must lie in (0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::InvalidGrid("θ grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Per θ: mean `L_θ` over each fold's test cells, then mean over folds.
pub fn murphy_diagram(folds: &[FoldPredictions], grid: &[f64]) -> Result<ScoreCurve, EvalError> {
    validate_theta_grid(grid)?;
    if folds.is_empty() || folds.iter().any(FoldPredictions::is_empty) {
        return Err(EvalError::EmptyTestSet);
    }
    let per_fold: Vec<Vec<f64>> = folds
        .iter()
        .map(|f| {
            let n = f.len() as f64;
            grid.iter()
                .map(|&t| {
                    f.pred
                        .iter()
                        .zip(&f.truth)
                        .map(|(&x, &y)| elementary_score(x, y, t))
                        .sum::<f64>()
                        / n
                })
                .collect()
        })
        .collect();
    let k = per_fold.len() as f64;
    let mean = (0..grid.len())
        .map(|i| per_fold.iter().map(|f| f[i]).sum::<f64>() / k)
        .collect();
    Ok(ScoreCurve {
        theta: grid.to_vec(),
        mean,
        per_fold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_cases() {
        assert!((elementary_score(0.7, true, 0.8) - 0.2).abs() < 1e-15);
        assert_eq!(elementary_score(0.7, true, 0.5), 0.0);
        for t in default_theta_grid() {
            assert_eq!(elementary_score(1.0, true, t), 0.0);
            assert_eq!(elementary_score(0.0, false, t), 0.0);
        }
        assert!((elementary_score(0.3, false, 0.1) - 0.1).abs() < 1e-15);
        assert_eq!(elementary_score(0.3, false, 0.3), 0.0);
    }

    #[test]
    fn perfect_predictor_scores_zero() {
        let f = FoldPredictions::new(vec![1.0, 0.0, 1.0], vec![true, false, true]).unwrap();
        let c = murphy_diagram(&[f], &default_theta_grid()).unwrap();
        assert!(c.mean.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_half_on_balanced_truth() {
        let f = FoldPredictions::new(vec![0.5, 0.5], vec![true, false]).unwrap();
        let c = murphy_diagram(&[f], &default_theta_grid()).unwrap();
        for (t, v) in c.theta.iter().zip(&c.mean) {
            // y = 0 contributes θ on [0, 0.5); y = 1 contributes 1 − θ on [0.5, 1).
            let expect = if *t < 0.5 { t / 2.0 } else { (1.0 - t) / 2.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_bad_grid() {
        let f = FoldPredictions::new(vec![], vec![]).unwrap();
        assert_eq!(murphy_diagram(&[f], &[0.5]), Err(EvalError::EmptyTestSet));
        let g = FoldPredictions::new(vec![0.1], vec![true]).unwrap();
        assert!(murphy_diagram(&[g.clone()], &[0.0]).is_err());
        assert!(murphy_diagram(&[g], &[0.5, 0.4]).is_err());
    }
}

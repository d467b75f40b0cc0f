use crate::error::{invalid, Result};
use crate::series::mean_std;

use super::ScoreSeries;

/// Alarm threshold in standard deviations above the mean score.
pub const DEFAULT_K_SIGMA: f64 = 5.0;

/// Indices where the score exceeds `mean + k * std` of its valid range.
/// A run of consecutive crossings is reported once, at its first index. A
/// constant score never alarms.
pub fn threshold_alarms(scores: &ScoreSeries, k: f64) -> Result<Vec<usize>> {
    if !(k > 0.0) {
        return invalid(format!("k must be positive, got {k}"));
    }
    let values = scores.valid_values();
    let (mean, std) = mean_std(values);
    if std == 0.0 {
        return Ok(Vec::new());
    }
    let threshold = mean + k * std;
    let mut alarms = Vec::new();
    let mut in_run = false;
    for (i, &v) in values.iter().enumerate() {
        let over = v > threshold;
        if over && !in_run {
            alarms.push(scores.valid_from() + i);
        }
        in_run = over;
    }
    Ok(alarms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spike() {
        let mut v = vec![0.0; 1000];
        v[7] = 100.0;
        let s = ScoreSeries::new(1000, 0, v).unwrap();
        // mean 0.1, std ~3.16; threshold ~15.9
        assert_eq!(threshold_alarms(&s, 5.0).unwrap(), vec![7]);
        assert!(threshold_alarms(&s, 1e9).unwrap().is_empty());
    }

    #[test]
    fn constant_scores_never_alarm() {
        let s = ScoreSeries::new(10, 0, vec![4.0; 10]).unwrap();
        assert!(threshold_alarms(&s, 0.1).unwrap().is_empty());
    }

    #[test]
    fn runs_are_merged_and_offset() {
        let mut v = vec![0.0; 200];
        v[50..55].fill(100.0);
        v[120] = 100.0;
        let s = ScoreSeries::new(300, 30, v).unwrap();
        assert_eq!(threshold_alarms(&s, 2.0).unwrap(), vec![80, 150]);
    }

    #[test]
    fn rejects_bad_k() {
        let s = ScoreSeries::new(3, 0, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(threshold_alarms(&s, 0.0).is_err());
        assert!(threshold_alarms(&s, f64::NAN).is_err());
        assert!(threshold_alarms(&s, -1.0).is_err());
    }
}

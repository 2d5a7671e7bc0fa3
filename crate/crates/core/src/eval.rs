//! Precision / recall / F1 with the target ("inside") class as positive.

use crate::data::DataMatrix;
use crate::datagen::GridSpec;
use crate::error::{Result, SvddError};
use crate::model::SvddModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// A zero denominator forced one of the measures to 0.
    pub degenerate: bool,
}

/// `predicted[i]` / `actual[i]` are `true` for the positive (inside) class.
pub fn f1_measure(predicted: &[bool], actual: &[bool]) -> Result<EvalReport> {
    if predicted.len() != actual.len() {
        return Err(SvddError::input(format!(
            "prediction length {} differs from label length {}",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(SvddError::input("cannot evaluate zero observations"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        degenerate = true;
        0.0
    };
    Ok(EvalReport {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision,
        recall,
        f1,
        degenerate,
    })
}

/// `F1(sampling) / F1(full)` on the same labeled scoring set.
///
/// Returns `Ok(None)` when the full model's F1 is zero and the ratio is
/// undefined.
pub fn f1_ratio(
    model_sampling: &SvddModel,
    model_full: &SvddModel,
    score_data: &DataMatrix,
    actual: &[bool],
) -> Result<Option<f64>> {
    let full = f1_measure(&model_full.inside_mask(score_data)?, actual)?;
    let sampling = f1_measure(&model_sampling.inside_mask(score_data)?, actual)?;
    Ok(if full.f1 > 0.0 {
        Some(sampling.f1 / full.f1)
    } else {
        None
    })
}

/// Fraction of grid points both models label the same way.
pub fn grid_agreement(model_a: &SvddModel, model_b: &SvddModel, grid: &GridSpec) -> Result<f64> {
    let points = grid.points();
    let a = model_a.inside_mask(&points)?;
    let b = model_b.inside_mask(&points)?;
    let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
    Ok(same as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;
    use proptest::prelude::*;

    #[test]
    fn perfect_classifier() {
        let labels = [true, false, true, true, false];
        let r = f1_measure(&labels, &labels).unwrap();
        assert_eq!(r.f1, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn worked_counts() {
        // TP=8, FP=2, FN=4, TN=1
        let mut pred = vec![true; 10];
        let mut act = vec![true; 8];
        act.extend([false, false]);
        pred.extend([false; 5]);
        act.extend([true, true, true, true, false]);
        let r = f1_measure(&pred, &act).unwrap();
        assert_eq!((r.true_positives, r.false_positives, r.false_negatives, r.true_negatives), (8, 2, 4, 1));
        assert!((r.precision - 0.8).abs() < 1e-15);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.f1 - 8.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn all_negative_predictions() {
        let r = f1_measure(&[false, false, false], &[true, false, true]).unwrap();
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.f1, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn length_mismatch() {
        assert!(f1_measure(&[true], &[true, false]).is_err());
    }

    fn point_model(at: [f64; 2], r2: f64) -> SvddModel {
        SvddModel::from_parts(
            DataMatrix::from_rows(&[at]).unwrap(),
            vec![1.0],
            KernelParams::new(1.0).unwrap(),
            1.0,
            1.0,
            r2,
            1.0,
            at.to_vec(),
            1,
            false,
        )
        .unwrap()
    }

    #[test]
    fn ratio_and_agreement() {
        let m = point_model([0.0, 0.0], 0.5);
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 20).unwrap();
        let pts = grid.points();
        let labels: Vec<bool> = pts.rows().map(|r| r[0].hypot(r[1]) < 1.0).collect();
        assert_eq!(f1_ratio(&m, &m, &pts, &labels).unwrap(), Some(1.0));
        assert_eq!(grid_agreement(&m, &m, &grid).unwrap(), 1.0);

        // R² = 0 scores every off-center point outside
        let empty = point_model([0.0, 0.0], 0.0);
        assert_eq!(f1_ratio(&empty, &m, &pts, &labels).unwrap(), Some(0.0));
        assert_eq!(f1_ratio(&m, &empty, &pts, &labels).unwrap(), None);

        let far = point_model([50.0, 50.0], 0.0);
        let agree = grid_agreement(&m, &far, &grid).unwrap();
        assert!((0.0..=1.0).contains(&agree));
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_bounded(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60), seed in any::<u64>()) {
            let (p, a): (Vec<bool>, Vec<bool>) = pairs.iter().cloned().unzip();
            let r = f1_measure(&p, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.f1));
            let perfect = r.false_positives == 0 && r.false_negatives == 0 && r.true_positives > 0;
            prop_assert_eq!(r.f1 == 1.0, perfect);

            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            let mut s = seed;
            for i in (1..idx.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let p2: Vec<bool> = idx.iter().map(|&i| p[i]).collect();
            let a2: Vec<bool> = idx.iter().map(|&i| a[i]).collect();
            prop_assert_eq!(f1_measure(&p2, &a2).unwrap(), r);
        }
    }
}

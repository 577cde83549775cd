use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::features::FeatureSet;

/// Fraction of the CXps that contain each feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FfaScores {
    scores: Vec<f64>,
}

impl FfaScores {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Score of feature `i` (0-based).
    pub fn get(&self, i: usize) -> f64 {
        self.scores[i]
    }

    /// Features with a positive score.
    pub fn support(&self) -> FeatureSet {
        (0..self.scores.len()).filter(|&i| self.scores[i] > 0.0).collect()
    }

    /// `feature,score` rows with 1-based features, header first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for (i, s) in self.scores.iter().enumerate() {
            writeln!(out, "{},{:?}", i + 1, s).unwrap();
        }
        out
    }

    /// Plain-text portable graymap (`P2`, maxval 255) of shape `h × w`, each
    /// pixel `round(255 · score)`.
    pub fn to_pgm(&self, h: usize, w: usize) -> Result<String> {
        if h * w != self.scores.len() {
            return Err(Error::Usage(format!(
                "shape {h}x{w} has {} pixels but there are {} features",
                h * w,
                self.scores.len()
            )));
        }
        let mut out = format!("P2\n{w} {h}\n255\n");
        for row in self.scores.chunks(w) {
            let px: Vec<String> = row.iter().map(|s| pixel(*s).to_string()).collect();
            out.push_str(&px.join(" "));
            out.push('\n');
        }
        Ok(out)
    }
}

fn pixel(score: f64) -> u8 {
    (255.0 * score).round().clamp(0.0, 255.0) as u8
}

pub fn ffa_scores(cxps: &[FeatureSet], m: usize) -> Result<FfaScores> {
    if cxps.is_empty() {
        return Err(Error::Usage("feature attribution needs at least one CXp".into()));
    }
    if let Some(c) = cxps.iter().find(|c| c.bound() > m) {
        return Err(Error::Usage(format!("CXp {c} exceeds 1..{m}")));
    }
    let mut counts = vec![0usize; m];
    for c in cxps {
        c.iter().for_each(|i| counts[i] += 1);
    }
    let n = cxps.len() as f64;
    Ok(FfaScores {
        scores: counts.into_iter().map(|k| k as f64 / n).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(list: &[&[usize]], m: usize) -> Vec<FeatureSet> {
        list.iter().map(|s| FeatureSet::from_one_based(s, m).unwrap()).collect()
    }

    #[test]
    fn counting_examples() {
        assert_eq!(ffa_scores(&sets(&[&[1]], 3), 3).unwrap().scores(), &[1.0, 0.0, 0.0]);
        let f = ffa_scores(&sets(&[&[1], &[2]], 4), 4).unwrap();
        assert_eq!(f.scores(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(f.support().to_one_based(), vec![1, 2]);
        let f = ffa_scores(&sets(&[&[1, 2], &[1, 3]], 3), 3).unwrap();
        assert_eq!(f.scores(), &[1.0, 0.5, 0.5]);
        assert!(ffa_scores(&[], 3).is_err());
    }

    #[test]
    fn csv_and_graymap() {
        let f = ffa_scores(&sets(&[&[1], &[2]], 4), 4).unwrap();
        assert_eq!(f.to_csv(), "feature,score\n1,0.5\n2,0.5\n3,0.0\n4,0.0\n");
        assert_eq!(f.to_pgm(2, 2).unwrap(), "P2\n2 2\n255\n128 128\n0 0\n");
        assert!(f.to_pgm(3, 1).is_err());
        let one = ffa_scores(&sets(&[&[1]], 1), 1).unwrap();
        assert_eq!(one.to_pgm(1, 1).unwrap(), "P2\n1 1\n255\n255\n");
    }
}

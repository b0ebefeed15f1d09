/// Mean squared error within the nonnull and null coefficient sets.
/// An empty set contributes 0.
pub fn mse_split(estimates: &[f64], truth: &[f64], nonnull: &[bool]) -> (f64, f64) {
    let mut acc = [(0.0, 0usize); 2];
    for ((e, t), &nn) in estimates.iter().zip(truth).zip(nonnull) {
        let slot = &mut acc[if nn { 0 } else { 1 }];
        slot.0 += (e - t) * (e - t);
        slot.1 += 1;
    }
    let avg = |(s, c): (f64, usize)| if c == 0 { 0.0 } else { s / c as f64 };
    (avg(acc[0]), avg(acc[1]))
}

/// Mean of `values` within the nonnull and null sets.
pub fn mean_split(values: &[f64], nonnull: &[bool]) -> (f64, f64) {
    let mean = |want: bool| {
        let v: Vec<f64> = values
            .iter()
            .zip(nonnull)
            .filter(|(_, &n)| n == want)
            .map(|(v, _)| *v)
            .collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    (mean(true), mean(false))
}

/// `(TPR, FPR)`; a rate with an empty denominator is 0.
pub fn selection_metrics(selected: &[bool], truth_nonnull: &[bool]) -> (f64, f64) {
    let (mut tp, mut fn_, mut fp, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &t) in selected.iter().zip(truth_nonnull) {
        match (s, t) {
            (true, true) => tp += 1,
            (false, true) => fn_ += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let rate = |a: usize, b: usize| {
        if a + b == 0 {
            0.0
        } else {
            a as f64 / (a + b) as f64
        }
    };
    (rate(tp, fn_), rate(fp, tn))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(eps, fpr, tpr)` per threshold, in grid order.
    pub points: Vec<(f64, f64, f64)>,
    pub auc: f64,
}

/// `m` evenly spaced thresholds from 0 to the largest effect.
pub fn default_eps_grid(effects: &[f64], m: usize) -> Vec<f64> {
    let top = effects.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    if m < 2 {
        return vec![0.0];
    }
    (0..m).map(|k| top * k as f64 / (m - 1) as f64).collect()
}

/// Selects `j` when `|effect_j| > eps` for each threshold; the area is the
/// trapezoid rule over the points sorted by `(FPR, TPR)` with `(0, 0)` and
/// `(1, 1)` appended. With only one class present the area is 0.5.
pub fn roc_from_effects(effects: &[f64], truth_nonnull: &[bool], eps_grid: &[f64]) -> RocCurve {
    let points: Vec<(f64, f64, f64)> = eps_grid
        .iter()
        .map(|&eps| {
            let sel: Vec<bool> = effects.iter().map(|e| e.abs() > eps).collect();
            let (tpr, fpr) = selection_metrics(&sel, truth_nonnull);
            (eps, fpr, tpr)
        })
        .collect();
    if truth_nonnull.iter().all(|&t| t) || truth_nonnull.iter().all(|&t| !t) {
        return RocCurve { points, auc: 0.5 };
    }
    let mut xy: Vec<(f64, f64)> = points.iter().map(|&(_, f, t)| (f, t)).collect();
    xy.push((0.0, 0.0));
    xy.push((1.0, 1.0));
    xy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let auc = xy
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    RocCurve { points, auc }
}

/// Probability that a random nonnull score beats a random null score, ties
/// counting one half. With scores `#{k : eps_k < |effect|}` this equals the
/// area of [`roc_from_effects`] on the same grid.
pub fn mann_whitney_auc(scores: &[f64], truth_nonnull: &[bool]) -> f64 {
    let pos: Vec<f64> = scores
        .iter()
        .zip(truth_nonnull)
        .filter(|(_, &t)| t)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(truth_nonnull)
        .filter(|(_, &t)| !t)
        .map(|(s, _)| *s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for &a in &pos {
        for &b in &neg {
            wins += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

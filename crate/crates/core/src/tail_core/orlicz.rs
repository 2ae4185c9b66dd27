/// Default moment orders for [`orlicz_norm_estimate`].
pub const DEFAULT_P_GRID: [f64; 9] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];

/// Grid estimate of the G(m, r) norm `sup_{p≥2} |τ|_p p^{-1/m} log^{r/m} p`.
///
/// The supremum is taken only over `p_grid` and the moments are empirical,
/// so this is consistent for the grid maximum, not for the true norm.
/// `m = +∞` drops the weight entirely.
pub fn orlicz_norm_estimate(samples: &[f64], m: f64, r: f64, p_grid: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "Orlicz norm estimate needs samples");
    assert!(p_grid.iter().all(|&p| p >= 2.0), "moment orders must be >= 2");
    let scale = samples.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let n = samples.len() as f64;
    p_grid
        .iter()
        .map(|&p| {
            // Scale by the largest magnitude so high powers stay finite.
            let mean = samples.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>() / n;
            let norm = scale * mean.powf(1.0 / p);
            norm * p.powf(-1.0 / m) * p.ln().powf(r / m)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

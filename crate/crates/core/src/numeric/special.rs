
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Upper tail `Ψ(x) = P(N(0,1) > x)`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `log Ψ(x)`, accurate far into the upper tail where `Ψ` underflows.
pub fn ln_normal_tail(x: f64) -> f64 {
    if x < 30.0 {
        return normal_tail(x).ln();
    }
    // Ψ(x) = φ(x)/x · (1 - 1/x² + 3/x⁴ - 15/x⁶ + ...)
    let inv2 = 1.0 / (x * x);
    let series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2));
    -0.5 * x * x - (x / FRAC_1_SQRT_2PI).ln() + series.ln()
}

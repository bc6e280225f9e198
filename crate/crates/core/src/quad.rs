//! Small quadrature helpers on uniform grids.

/// Composite Simpson rule; an even number of points closes with Simpson's 3/8 on the last four.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (y[0] + y[1]),
        3 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ if n % 2 == 1 => {
            let mut s = y[0] + y[n - 1];
            for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        }
        _ => {
            let m = n - 3;
            let head = simpson(&y[..m], h);
            let t = &y[m - 1..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

/// Mean over one period by the trapezoid rule; exact for trigonometric polynomials of degree below `n`.
pub fn periodic_mean(f: impl Fn(f64) -> f64, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() / n as f64
}

//! Real roots of low-degree polynomials.

/// Real roots of `a x³ + b x² + c x + d`, ascending, each polished by Newton.
///
/// Degenerates to the quadratic or linear case when leading coefficients
/// vanish relative to the rest. Returns nothing for the zero polynomial.
pub fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = b.abs().max(c.abs()).max(d.abs());
    if a.abs() <= 1e-14 * scale || a == 0.0 {
        return quadratic_roots(b, c, d);
    }
    let (p2, p1, p0) = (b / a, c / a, d / a);
    // depressed cubic t³ + pt + q with x = t − p2/3
    let shift = p2 / 3.0;
    let p = p1 - p2 * shift;
    let q = 2.0 * shift * shift * shift - p1 * shift + p0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut roots = if p == 0.0 && q == 0.0 {
        vec![0.0]
    } else if disc > 0.0 {
        let s = disc.sqrt();
        // cancellation-free choice of the larger cube
        let w = if q > 0.0 { -(q / 2.0) - s } else { -(q / 2.0) + s };
        let cw = w.cbrt();
        vec![cw - p / (3.0 * cw)]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - std::f64::consts::TAU * k as f64 / 3.0).cos())
            .collect()
    };
    for r in roots.iter_mut() {
        *r -= shift;
        *r = polish(*r, |x| ((a * x + b) * x + c) * x + d, |x| (3.0 * a * x + 2.0 * b) * x + c);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(1.0));
    roots
}

/// Real roots of `a x² + b x + c`, ascending.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = b.abs().max(c.abs());
    if a.abs() <= 1e-14 * scale || a == 0.0 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / a, c / q]
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

fn polish(mut x: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..3 {
        let (fx, dfx) = (f(x), df(x));
        if dfx == 0.0 || !fx.is_finite() {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() || f(next).abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    x
}

//! Bracketed maximisation of smooth unimodal functions.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "golden section needs lo < hi and tol > 0 (got [{lo}, {hi}], tol {tol})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iterations = 0;
    while b - a > tol && iterations < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        iterations += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Maximum {
        x,
        value,
        iterations,
    })
}

/// Scans `grid_points` equally spaced values of `[lo, hi]`, then refines the
/// best cell pair by golden section. Fails with `PeakNotBracketed` when the
/// refined maximum sits on the bracket boundary or does not rise strictly
/// above both end values.
pub fn bracketed_peak<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || grid_points < 3 {
        return Err(Error::InvalidParameter(format!(
            "peak search needs lo < hi and >= 3 grid points (got [{lo}, {hi}], {grid_points})"
        )));
    }
    let last = grid_points - 1;
    let step = (hi - lo) / last as f64;
    let xs: Vec<f64> = (0..grid_points)
        .map(|i| if i == last { hi } else { lo + step * i as f64 })
        .collect();
    let mut values = Vec::with_capacity(grid_points);
    for &x in &xs {
        values.push(f(x)?);
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let left = xs[best.saturating_sub(1)];
    let right = xs[(best + 1).min(last)];
    let peak = golden_section_max(&mut f, left, right, tol)?;

    let not_bracketed = Error::PeakNotBracketed { lo, hi };
    let edge = 2.0 * tol;
    if peak.x - lo <= edge || hi - peak.x <= edge {
        return Err(not_bracketed);
    }
    if !(peak.value > values[0] && peak.value > values[last]) {
        return Err(not_bracketed);
    }
    Ok(peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_top() {
        let m = golden_section_max(|x| Ok(-(x - 0.3f64).powi(2)), 0.0, 1.0, 1e-10).unwrap();
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn narrow_peak_near_edge() {
        let f = |x: f64| Ok(1.0 / (1e-8 + (x - 0.9999).powi(2)));
        let m = bracketed_peak(f, 0.5, 1.0, 200, 1e-10).unwrap();
        assert!((m.x - 0.9999).abs() < 1e-8);
    }

    #[test]
    fn monotone_is_not_bracketed() {
        let r = bracketed_peak(Ok, 0.5, 1.0, 200, 1e-9);
        assert_eq!(r, Err(Error::PeakNotBracketed { lo: 0.5, hi: 1.0 }));
        let r = bracketed_peak(|_| Ok(0.0), 0.5, 1.0, 200, 1e-9);
        assert_eq!(r, Err(Error::PeakNotBracketed { lo: 0.5, hi: 1.0 }));
    }

    #[test]
    fn errors_propagate() {
        let r = bracketed_peak(|_| Err(Error::EmptyGrid), 0.0, 1.0, 10, 1e-9);
        assert_eq!(r, Err(Error::EmptyGrid));
    }
}

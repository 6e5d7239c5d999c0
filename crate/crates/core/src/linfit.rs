//! Ordinary least-squares line fit with slope uncertainty, shared by the
//! growth-rate, spatial-decay and finite-size-scaling fits.

use crate::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope (zero for n = 2 or an exact fit).
    pub slope_stderr: T,
    /// Coefficient of determination; defined as 1 for a zero-variance target.
    pub r_squared: T,
    pub n: usize,
}

/// Fits `y = intercept + slope * x`. Returns `None` for fewer than two
/// points or a degenerate x range.
pub fn fit_line<T: Scalar>(xs: &[T], ys: &[T]) -> Option<LineFit<T>> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nt = T::from_usize(n)?;
    let mean_x = xs.iter().fold(T::zero(), |a, &x| a + x) / nt;
    let mean_y = ys.iter().fold(T::zero(), |a, &y| a + y) / nt;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr = (syy - slope * sxy).max(T::zero());
    let r_squared = if syy > T::zero() { T::one() - ssr / syy } else { T::one() };
    let slope_stderr = if n > 2 {
        (ssr / (T::from_usize(n - 2)? * sxx)).sqrt()
    } else {
        T::zero()
    };
    Some(LineFit { slope, intercept, slope_stderr, r_squared, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
        assert!(fit.slope_stderr < 1e-13);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_target_has_unit_r_squared() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [2.0; 4];
        let fit = fit_line(&xs, &ys).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(fit_line::<f64>(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn noisy_slope_uncertainty_is_sensible() {
        // y = 2x with +/-0.1 alternating perturbation
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> =
            xs.iter().enumerate().map(|(i, x)| 2.0 * x + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.01);
        assert!(fit.slope_stderr > 0.0 && fit.slope_stderr < 0.01);
        assert!(fit.r_squared > 0.999);
    }
}

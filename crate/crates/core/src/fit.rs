use crate::{Error, Real, Result};

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square of the residuals.
    pub rms: T,
}

pub(crate) fn line_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::input("fit abscissae and ordinates differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::input(format!("need at least 3 points for a fit, got {}", xs.len())));
    }
    let n = T::from_usize(xs.len()).unwrap();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx <= T::zero() {
        return Err(Error::input("degenerate fit: all abscissae coincide"));
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(LineFit { slope, intercept, rms: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = line_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 3.0).abs() < 1e-15 && f.rms < 1e-15);
    }

    #[test]
    fn too_few_points() {
        assert!(line_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(line_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}

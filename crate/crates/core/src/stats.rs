use crate::scalar::Scalar;

/// Mean, population standard deviation, extremes and count of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary<S> {
    pub count: usize,
    pub mean: S,
    pub std_dev: S,
    pub min: S,
    pub max: S,
}

impl<S: Scalar> Summary<S> {
    /// `None` for an empty sample.
    pub fn of(values: &[S]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = S::from_usize(values.len()).expect("sample size fits the scalar");
        let mean = values.iter().copied().sum::<S>() / n;
        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<S>() / n;
        let min = values.iter().copied().fold(S::infinity(), S::min);
        let max = values.iter().copied().fold(S::neg_infinity(), S::max);
        Some(Summary { count: values.len(), mean, std_dev: var.sqrt(), min, max })
    }

    /// Like [`Summary::of`] but all-zero for an empty sample.
    pub fn of_or_zero(values: &[S]) -> Self {
        Self::of(values).unwrap_or(Summary {
            count: 0,
            mean: S::zero(),
            std_dev: S::zero(),
            min: S::zero(),
            max: S::zero(),
        })
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`; zero when both are zero.
pub fn relative_difference<S: Scalar>(a: S, b: S) -> S {
    let scale = a.abs().max(b.abs());
    if scale == S::zero() {
        S::zero()
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sample() {
        let s = Summary::of(&[2.0f64, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.std_dev, 2.0);
        assert_eq!((s.min, s.max, s.count), (2.0, 9.0, 8));
    }

    #[test]
    fn single_precision_agrees() {
        let s = Summary::of(&[1.0f32, 2.0, 3.0]).unwrap();
        assert!((s.mean - 2.0).abs() < 1e-6);
        assert!(Summary::<f32>::of(&[]).is_none());
    }

    #[test]
    fn relative_difference_is_symmetric() {
        assert_eq!(relative_difference(0.0f64, 0.0), 0.0);
        assert!((relative_difference(90.0f64, 100.0) - 0.1).abs() < 1e-12);
        assert_eq!(relative_difference(90.0f64, 100.0), relative_difference(100.0, 90.0));
    }
}

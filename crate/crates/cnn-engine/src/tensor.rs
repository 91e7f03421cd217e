use crate::CnnError;

/// Multi-channel 1D signal, row-major by channel: `data[c * len + t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor1D {
    channels: usize,
    len: usize,
    data: Vec<f64>,
}

impl Tensor1D {
    pub fn zeros(channels: usize, len: usize) -> Self {
        assert!(channels >= 1 && len >= 1, "tensor must be non-empty");
        Tensor1D {
            channels,
            len,
            data: vec![0.0; channels * len],
        }
    }

    pub fn from_data(channels: usize, len: usize, data: Vec<f64>) -> Result<Self, CnnError> {
        if channels == 0 || len == 0 || data.len() != channels * len {
            return Err(CnnError::ShapeMismatch(format!(
                "{} values for {channels} channels x {len} samples",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CnnError::ShapeMismatch("non-finite tensor value".into()));
        }
        Ok(Tensor1D {
            channels,
            len,
            data,
        })
    }

    pub fn single_channel(samples: Vec<f64>) -> Result<Self, CnnError> {
        let len = samples.len();
        Tensor1D::from_data(1, len, samples)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Training example: input signal plus a one-hot target.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub input: Tensor1D,
    pub class: usize,
    pub num_classes: usize,
}

impl LabeledExample {
    pub fn new(input: Tensor1D, class: usize, num_classes: usize) -> Result<Self, CnnError> {
        if class >= num_classes {
            return Err(CnnError::ShapeMismatch(format!(
                "class index {class} out of range for {num_classes} classes"
            )));
        }
        Ok(LabeledExample {
            input,
            class,
            num_classes,
        })
    }

    /// One-hot target vector.
    pub fn target(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.num_classes];
        r[self.class] = 1.0;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_row_major_by_channel() {
        let t = Tensor1D::from_data(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(t.channel(0), &[1.0, 2.0, 3.0]);
        assert_eq!(t.channel(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Tensor1D::from_data(2, 3, vec![0.0; 5]).is_err());
        assert!(Tensor1D::from_data(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(LabeledExample::new(Tensor1D::zeros(1, 4), 3, 3).is_err());
    }

    #[test]
    fn one_hot_target() {
        let e = LabeledExample::new(Tensor1D::zeros(1, 4), 1, 3).unwrap();
        assert_eq!(e.target(), vec![0.0, 1.0, 0.0]);
    }
}

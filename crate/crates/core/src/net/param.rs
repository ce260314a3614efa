use crate::real::Real;

/// A named trainable tensor: values plus an accumulated gradient of the same
/// shape.
#[derive(Debug, Clone)]
pub struct ParamTensor<T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<T>,
    pub grad: Vec<T>,
    pub trainable: bool,
}

impl<T: Real> ParamTensor<T> {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<T>) -> Self {
        let numel: usize = shape.iter().product();
        assert_eq!(values.len(), numel, "parameter data length mismatch");
        ParamTensor {
            name: name.into(),
            shape,
            grad: vec![T::zero(); numel],
            values,
            trainable: true,
        }
    }

    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        ParamTensor::new(name, shape, vec![T::zero(); numel])
    }

    pub fn numel(&self) -> usize {
        self.values.len()
    }

    pub fn zero_grad(&mut self) {
        for g in &mut self.grad {
            *g = T::zero();
        }
    }

    pub fn accumulate_grad(&mut self, contrib: &[T]) {
        debug_assert_eq!(contrib.len(), self.grad.len());
        for (g, c) in self.grad.iter_mut().zip(contrib) {
            *g += *c;
        }
    }
}

/// Gradient accumulation buffer aligned with a parameter list, used by the
/// chunked trainer: each chunk fills its own buffer and the buffers are
/// merged in chunk order so results do not depend on thread scheduling.
#[derive(Debug, Clone)]
pub struct GradBuffer<T> {
    pub slots: Vec<Vec<T>>,
}

impl<T: Real> GradBuffer<T> {
    pub fn zeros_like(params: &[&ParamTensor<T>]) -> Self {
        GradBuffer {
            slots: params.iter().map(|p| vec![T::zero(); p.numel()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradBuffer<T>) {
        assert_eq!(self.slots.len(), other.slots.len());
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    /// Scales every entry, e.g. to divide by the ray count once at the end.
    pub fn scale(&mut self, s: T) {
        for slot in &mut self.slots {
            for v in slot.iter_mut() {
                *v *= s;
            }
        }
    }
}

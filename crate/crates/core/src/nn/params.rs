/// Anything holding trainable `f64` parameters as a fixed list of slices.
///
/// Gradients are stored in a value of the same type, so optimizers and the
/// gradient checker can walk parameters and gradients in lockstep.
pub trait Params {
    fn param_slices(&self) -> Vec<&[f64]>;
    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for s in self.param_slices() {
            out.extend_from_slice(s);
        }
        out
    }

    fn assign_flat(&mut self, flat: &[f64]) {
        let mut off = 0;
        for s in self.param_slices_mut() {
            let n = s.len();
            s.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        assert_eq!(off, flat.len(), "flat parameter vector has wrong length");
    }

    fn zero(&mut self) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    fn scale(&mut self, a: f64) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|x| *x *= a);
        }
    }

    fn all_finite(&self) -> bool {
        self.param_slices()
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite()))
    }
}

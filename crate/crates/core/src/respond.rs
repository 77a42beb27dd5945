use rand::Rng;

use crate::env::Instance;
use crate::privacy::{bern_param_unchecked, draw_bit};

/// Pulls an arm and returns only the privatized bit: one uniform for the
/// reward, one for the mechanism.
pub(crate) struct Responder<'a> {
    inst: &'a Instance,
    eps: f64,
    p_zero: f64,
    p_one: f64,
}

impl<'a> Responder<'a> {
    pub(crate) fn new(inst: &'a Instance, eps: f64) -> Self {
        Self { inst, eps, p_zero: bern_param_unchecked(0.0, eps), p_one: bern_param_unchecked(1.0, eps) }
    }

    #[inline]
    pub(crate) fn respond<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> bool {
        let reward = self.inst.sample_unchecked(arm, rng);
        let p = if reward == 1.0 {
            self.p_one
        } else if reward == 0.0 {
            self.p_zero
        } else {
            bern_param_unchecked(reward, self.eps)
        };
        draw_bit(p, rng)
    }
}

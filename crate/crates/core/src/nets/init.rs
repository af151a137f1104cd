use rand_chacha::ChaCha8Rng;

use super::aaf::AAF_INIT;
use super::arch::Architecture;
use crate::rng;

/// Fills `out` from U(-a, a) with a = gain * sqrt(6 / (fan_in + fan_out)).
fn xavier_uniform(rng: &mut ChaCha8Rng, out: &mut [f64], fan_in: usize, fan_out: usize, gain: f64) {
    let bound = gain * (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in out {
        *v = bound * (2.0 * rng::uniform_open(rng) - 1.0);
    }
}

impl Architecture {
    /// Fresh parameters: Xavier-uniform weights (expansion blocks use the
    /// small expansion gain and are initialised one channel at a time),
    /// zero biases, equal activation weights and the given gate value.
    pub fn init_params(&self, seed: u64, gate_init: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.n_params()];
        let e = self.config.expansion_width;
        let kind = self.kind as u64;
        for ch in 0..self.channels() {
            let mut r = rng::stream(seed, &[kind, 0, ch as u64]);
            let at = self.exp_w + ch * e;
            xavier_uniform(&mut r, &mut p[at..at + e], 1, e, self.config.expansion_gain);
        }
        let n = e * super::arch::SENTIMENT_DIM;
        let mut r = rng::stream(seed, &[kind, 1]);
        xavier_uniform(
            &mut r,
            &mut p[self.sent_w..self.sent_w + n],
            super::arch::SENTIMENT_DIM,
            e,
            self.config.dense_gain,
        );
        p[self.gate] = gate_init;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut r = rng::stream(seed, &[kind, 2, i as u64]);
            let n = layer.fan_in * layer.fan_out;
            xavier_uniform(
                &mut r,
                &mut p[layer.w..layer.w + n],
                layer.fan_in,
                layer.fan_out,
                self.config.dense_gain,
            );
            p[layer.aaf..layer.aaf + AAF_INIT.len()].copy_from_slice(&AAF_INIT);
        }
        let width = self.layers.last().map_or(0, |l| l.fan_out);
        for (h, &(w, _)) in self.heads.iter().enumerate() {
            let mut r = rng::stream(seed, &[kind, 3, h as u64]);
            xavier_uniform(&mut r, &mut p[w..w + width], width, 1, self.config.dense_gain);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::arch::NetConfig;

    #[test]
    fn biases_zero_and_aaf_equal() {
        let arch = Architecture::value(NetConfig::value()).unwrap();
        let p = arch.init_params(7, 1.2);
        for s in arch.segments() {
            let v = &p[s.range()];
            if s.name.ends_with("bias") {
                assert!(v.iter().all(|&x| x == 0.0), "{}", s.name);
            } else if s.name.starts_with("aaf.") {
                assert_eq!(v, &AAF_INIT[..]);
            } else if s.name == "gate" {
                assert_eq!(v, &[1.2]);
            } else {
                assert!(v.iter().any(|&x| x != 0.0), "{}", s.name);
            }
        }
        let bound = 0.01 * (6.0f64 / 51.0).sqrt();
        let exp = arch.segment("expansion.weight").unwrap();
        assert!(p[exp.range()].iter().all(|x| x.abs() <= bound));
    }

    #[test]
    fn seeded_and_kind_specific() {
        let v = Architecture::value(NetConfig::value()).unwrap();
        assert_eq!(v.init_params(3, 0.25), v.init_params(3, 0.25));
        assert_ne!(v.init_params(3, 0.25), v.init_params(4, 0.25));
    }
}

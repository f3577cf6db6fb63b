use serde::{Deserialize, Serialize};

use super::{Atom, BmsChannel};

/// Order-1 Wasserstein distance on `[0, 1]`, i.e. the L1 distance between
/// the two cumulative mass functions.
pub fn wasserstein(a: &BmsChannel, b: &BmsChannel) -> f64 {
    let (xa, xb) = (a.atoms(), b.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut prev = 0.0;
    let mut dist = 0.0;
    while i < xa.len() || j < xb.len() {
        let next = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.x.min(q.x),
            (Some(p), None) => p.x,
            (None, Some(q)) => q.x,
            (None, None) => unreachable!(),
        };
        dist += (fa - fb).abs() * (next - prev);
        while i < xa.len() && xa[i].x == next {
            fa += xa[i].p;
            i += 1;
        }
        while j < xb.len() && xb[j].x == next {
            fb += xb[j].p;
            j += 1;
        }
        prev = next;
    }
    dist + (fa - fb).abs() * (1.0 - prev)
}

/// A density supported on the grid `i / T` whose masses are multiples of `1 / T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDensity {
    t: u64,
    /// `counts[i]` is the mass at `i / T` in units of `1 / T`; sums to `T`.
    counts: Vec<u64>,
}

impl GridDensity {
    /// Panics unless `counts` has `T + 1` entries summing to `T`.
    pub fn new(t: u64, counts: Vec<u64>) -> Self {
        assert!(t >= 1, "grid resolution must be positive");
        assert_eq!(counts.len() as u64, t + 1, "need T + 1 grid points");
        assert_eq!(counts.iter().sum::<u64>(), t, "grid masses must sum to T");
        GridDensity { t, counts }
    }

    pub fn resolution(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn to_channel(&self) -> BmsChannel {
        let t = self.t as f64;
        let atoms = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| Atom {
                x: i as f64 / t,
                p: c as f64 / t,
            })
            .collect();
        BmsChannel::from_atoms(atoms, format!("grid:T={}", self.t))
            .expect("grid densities are valid channels")
    }
}

/// Moves every atom to its nearest grid point, then rounds the cumulative mass
/// function to multiples of `1 / T` at each grid point. Both steps move the
/// CDF by at most `1 / 2T` in L1, so the result is within `1 / T` of `ch`.
pub fn quantize(ch: &BmsChannel, t: u64) -> GridDensity {
    assert!(t >= 1, "grid resolution must be positive");
    let tf = t as f64;
    let mut mass = vec![0.0; t as usize + 1];
    for a in ch.atoms() {
        let i = (a.x * tf).round().clamp(0.0, tf) as usize;
        mass[i] += a.p;
    }
    let mut counts = Vec::with_capacity(mass.len());
    let mut cdf = 0.0;
    let mut prev = 0u64;
    for (i, m) in mass.iter().enumerate() {
        cdf += m;
        let level = if i == t as usize {
            t
        } else {
            ((cdf * tf).round() as u64).min(t)
        };
        counts.push(level - prev);
        prev = level;
    }
    GridDensity::new(t, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channel(rng: &mut ChaCha8Rng, max_atoms: usize) -> BmsChannel {
        let k = rng.random_range(1..=max_atoms);
        let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let atoms = w
            .into_iter()
            .map(|p| Atom { x: rng.random::<f64>(), p })
            .collect();
        BmsChannel::from_atoms(atoms, "random").unwrap()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let ch = BmsChannel::bsc(0.2).unwrap();
        assert_eq!(wasserstein(&ch, &ch), 0.0);
    }

    #[test]
    fn bec_pair() {
        let a = BmsChannel::bec(0.3).unwrap();
        let b = BmsChannel::bec(0.5).unwrap();
        // CDFs differ by 0.2 on [0, 1).
        assert!((wasserstein(&a, &b) - 0.2).abs() < 1e-15);
        assert!((wasserstein(&b, &a) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_channel(&mut rng, 6);
            let b = random_channel(&mut rng, 6);
            let c = random_channel(&mut rng, 6);
            let (ab, bc, ac) = (wasserstein(&a, &b), wasserstein(&b, &c), wasserstein(&a, &c));
            assert!(ac <= ab + bc + 1e-12);
            assert!((ab - wasserstein(&b, &a)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_density_is_fixed_point() {
        let g = GridDensity::new(4, vec![1, 0, 2, 0, 1]);
        let q = quantize(&g.to_channel(), 4);
        assert_eq!(q, g);
        assert!(wasserstein(&g.to_channel(), &q.to_channel()) < 1e-15);
    }

    #[test]
    fn bsc_quantization_bound() {
        let ch = BmsChannel::bsc(0.11).unwrap();
        let q = quantize(&ch, 372);
        assert!(wasserstein(&ch, &q.to_channel()) <= 2.0 / 372.0);
    }

    #[test]
    fn bec_third_at_t3() {
        let ch = BmsChannel::bec(1.0 / 3.0).unwrap();
        let q = quantize(&ch, 3);
        assert_eq!(q.counts(), &[1, 0, 0, 2]);
        let d = wasserstein(&ch, &q.to_channel());
        assert!(d <= 2.0 / 3.0);
        // Compare against every grid density at T = 3: ours is a closest one.
        let mut best = f64::INFINITY;
        for c0 in 0..=3u64 {
            for c1 in 0..=3 - c0 {
                for c2 in 0..=3 - c0 - c1 {
                    let g = GridDensity::new(3, vec![c0, c1, c2, 3 - c0 - c1 - c2]);
                    best = best.min(wasserstein(&ch, &g.to_channel()));
                }
            }
        }
        assert!(d <= best + 1e-12);
    }

    #[test]
    fn random_quantization_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let ch = random_channel(&mut rng, 20);
            let t = rng.random_range(1..200);
            let q = quantize(&ch, t);
            assert!(q.support_size() as u64 <= t + 1);
            assert!(wasserstein(&ch, &q.to_channel()) <= 1.0 / t as f64 + 1e-12);
        }
    }
}

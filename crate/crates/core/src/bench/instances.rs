use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::IsingProblem;

/// `J_ij` (i < j, row order) then `h_i`, all i.i.d. uniform on `[0, 1)`.
fn sample_ising(n: usize, rng: &mut ChaCha8Rng) -> IsingProblem {
    let mut j = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v: f64 = rng.random();
            j[a][b] = v;
            j[b][a] = v;
        }
    }
    let h: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    IsingProblem { n_qubits: n, j, h, three_body: Vec::new(), offset: 0.0 }
}

/// Random Ising instance with couplings and fields uniform on `[0, 1)`.
pub fn random_ising(n: usize, seed: u64) -> IsingProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ising(n, &mut rng)
}

/// `count` instances of size `n`; instance `k` is drawn from stream `k` of
/// the generator seeded with `seed`, so it does not depend on `count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub n_qubits: usize,
    pub count: usize,
    pub seed: u64,
    pub instances: Vec<IsingProblem>,
}

impl InstanceSet {
    pub fn generate(n_qubits: usize, count: usize, seed: u64) -> Self {
        let instances = (0..count)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                sample_ising(n_qubits, &mut rng)
            })
            .collect();
        Self { n_qubits, count, seed, instances }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        assert_eq!(random_ising(4, 11), random_ising(4, 11));
        assert_ne!(random_ising(4, 11), random_ising(4, 12));
        let p = random_ising(5, 3);
        assert!(p.h.iter().chain(p.j.iter().flatten()).all(|&x| (0.0..1.0).contains(&x)));
        assert!((0..5).all(|i| p.j[i][i] == 0.0));
    }

    #[test]
    fn sets_are_prefix_stable() {
        let a = InstanceSet::generate(3, 5, 9);
        let b = InstanceSet::generate(3, 8, 9);
        assert_eq!(a.instances[..], b.instances[..5]);
        assert_ne!(a.instances[0], a.instances[1]);
    }
}

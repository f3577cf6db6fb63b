use super::{log2_len, PolarError};

/// `x = u G2^{(x)n}` over GF(2), in place. The transform is an involution.
pub fn polar_transform_in_place(bits: &mut [u8]) -> Result<(), PolarError> {
    log2_len(bits.len())?;
    let n = bits.len();
    let mut half = n / 2;
    while half >= 1 {
        for start in (0..n).step_by(2 * half) {
            for i in start..start + half {
                bits[i] ^= bits[i + half];
            }
        }
        half /= 2;
    }
    Ok(())
}

pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>, PolarError> {
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kron_matrix(n: u32) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        for _ in 0..n {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    // [[G, 0], [G, G]]
                    next[r][c] = g[r][c];
                    next[m + r][c] = g[r][c];
                    next[m + r][m + c] = g[r][c];
                }
            }
            g = next;
        }
        g
    }

    #[test]
    fn small_cases() {
        assert_eq!(polar_transform(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(polar_transform(&[0; 8]).unwrap(), vec![0; 8]);
        assert_eq!(polar_transform(&[1, 0, 1]), Err(PolarError::NotPowerOfTwo(3)));
    }

    #[test]
    fn matches_kronecker_product() {
        for n in 0..=5u32 {
            let g = kron_matrix(n);
            let len = 1usize << n;
            for pattern in 0..(1usize << len).min(256) {
                let u: Vec<u8> = (0..len).map(|i| ((pattern >> i) & 1) as u8).collect();
                let expect: Vec<u8> = (0..len)
                    .map(|c| (0..len).fold(0, |acc, r| acc ^ (u[r] & g[r][c])))
                    .collect();
                assert_eq!(polar_transform(&u).unwrap(), expect);
            }
        }
        let u = [1, 0, 1, 1];
        let g = kron_matrix(2);
        let x: Vec<u8> = (0..4).map(|c| (0..4).fold(0, |a, r| a ^ (u[r] & g[r][c]))).collect();
        assert_eq!(polar_transform(&u).unwrap(), x);
        assert_eq!(x, vec![1, 1, 0, 1]);
    }

    proptest! {
        #[test]
        fn involution(n in 0u32..=12, seed in any::<u64>()) {
            let len = 1usize << n;
            let u: Vec<u8> = (0..len).map(|i| ((seed.rotate_left(i as u32 % 64) ^ i as u64) & 1) as u8).collect();
            let x = polar_transform(&u).unwrap();
            prop_assert_eq!(polar_transform(&x).unwrap(), u);
        }
    }
}

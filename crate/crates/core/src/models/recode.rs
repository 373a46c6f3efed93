use crate::error::{Error, Result};

use super::spec::MarkovSftSpec;

/// One-sided block model equivalent to a finite-range observable on a
/// two-sided subshift.
#[derive(Debug, Clone, PartialEq)]
pub struct Recoding {
    pub spec: MarkovSftSpec,
    /// Allowed words of length `2m+1`, indexed like the new alphabet.
    pub blocks: Vec<Vec<usize>>,
    pub range: usize,
    /// `2m · max|φ|`: bound on the difference between the one-sided block
    /// sum and the two-sided Birkhoff sum of the same length.
    pub boundary_bound: f64,
}

impl Recoding {
    pub fn block_index(&self, word: &[usize]) -> Option<usize> {
        self.blocks.iter().position(|b| b.as_slice() == word)
    }
}

/// Recode an observable depending on coordinates `-m..=m` of a two-sided
/// subshift with pair potential `potential` onto the one-sided shift of
/// allowed `(2m+1)`-blocks. The new state at time `k` is the word
/// `x_k … x_{k+2m}` and the new observable reads `φ` off the source block,
/// so its Birkhoff sums are those of `φ∘σ^m`.
pub fn two_sided_recode(
    incidence: &[Vec<u8>],
    potential: &[Vec<f64>],
    m: usize,
    observable: &dyn Fn(&[usize]) -> f64,
    lattice: bool,
    cap: usize,
) -> Result<Recoding> {
    let k = incidence.len();
    let mut blocks: Vec<Vec<usize>> = (0..k).map(|a| vec![a]).collect();
    for _ in 0..2 * m {
        let mut next = Vec::new();
        for b in &blocks {
            let last = *b.last().expect("nonempty block");
            for a in 0..k {
                if incidence[last][a] == 1 {
                    let mut w = b.clone();
                    w.push(a);
                    next.push(w);
                }
            }
        }
        if next.len() > cap {
            return Err(Error::RangeTooLarge { blocks: next.len(), cap });
        }
        blocks = next;
    }
    if blocks.len() > cap {
        return Err(Error::RangeTooLarge { blocks: blocks.len(), cap });
    }
    let nb = blocks.len();
    let mut inc = vec![vec![0u8; nb]; nb];
    let mut pot = vec![vec![0.0; nb]; nb];
    let mut obs = vec![vec![0.0; nb]; nb];
    let mut max_phi: f64 = 0.0;
    for (i, b) in blocks.iter().enumerate() {
        let value = observable(b);
        max_phi = max_phi.max(value.abs());
        for (j, c) in blocks.iter().enumerate() {
            let follows = if m == 0 { incidence[b[0]][c[0]] == 1 } else { b[1..] == c[..2 * m] };
            if follows {
                inc[i][j] = 1;
                pot[i][j] = potential[b[0]][b.get(1).copied().unwrap_or(c[0])];
                obs[i][j] = value;
            }
        }
    }
    Ok(Recoding {
        spec: MarkovSftSpec { incidence: inc, potential: pot, observable: obs, lattice },
        blocks,
        range: m,
        boundary_bound: 2.0 * m as f64 * max_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_zero_is_identity() {
        let inc = vec![vec![1, 1], vec![1, 0]];
        let pot = vec![vec![0.1, 0.2], vec![0.3, 0.0]];
        let r = two_sided_recode(&inc, &pot, 0, &|w| w[0] as f64, true, 100).unwrap();
        assert_eq!(r.spec.incidence, inc);
        assert_eq!(r.spec.potential, pot);
        assert_eq!(r.boundary_bound, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let inc = vec![vec![1, 1], vec![1, 1]];
        let pot = vec![vec![0.0; 2]; 2];
        let e = two_sided_recode(&inc, &pot, 3, &|_| 0.0, false, 20).unwrap_err();
        assert!(matches!(e, Error::RangeTooLarge { .. }));
    }
}

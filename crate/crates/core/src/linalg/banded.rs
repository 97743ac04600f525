use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::scalar::Field;
use num_traits::Zero;

/// LU factorisation in band storage, without pivoting.
///
/// Fill-in stays inside the band, so the cost is `O(n·kl·ku)`. Intended for
/// matrices where elimination without pivoting is stable: M-matrices and
/// matrices with positive definite Hermitian part. For an M-matrix both
/// factors keep nonpositive off-diagonals, so forward and backward
/// substitution with a nonnegative right-hand side only ever add
/// nonnegative terms and the computed solution is exactly nonnegative.
#[derive(Debug, Clone)]
pub struct BandedLu<S> {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<S>,
}

impl<S: Field> BandedLu<S> {
    pub fn factor(a: &CsrMatrix<S>) -> Result<Self> {
        let n = a.n();
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..n {
            for (j, _) in a.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let w = kl + ku + 1;
        let mut band = vec![S::zero(); n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[i * w + j + kl - i] += v;
            }
        }
        for k in 0..n {
            let pivot = band[k * w + kl];
            if pivot.modulus() == S::Real::zero() || !pivot.finite() {
                return Err(Error::Singular { row: k });
            }
            let inv = S::one() / pivot;
            let imax = (k + kl).min(n - 1);
            let jmax = (k + ku).min(n - 1);
            for i in k + 1..=imax {
                let ik = i * w + k + kl - i;
                let l = band[ik] * inv;
                band[ik] = l;
                if l.modulus() == S::Real::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = band[k * w + j + kl - k];
                    band[i * w + j + kl - i] -= l * kj;
                }
            }
        }
        Ok(BandedLu { n, kl, ku, band })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = kl + ku + 1;
        let mut x = b.to_vec();
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let mut acc = x[i];
            for j in j0..i {
                acc -= self.band[i * w + j + kl - i] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let jmax = (i + ku).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=jmax {
                acc -= self.band[i * w + j + kl - i] * x[j];
            }
            x[i] = acc / self.band[i * w + kl];
        }
        x
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

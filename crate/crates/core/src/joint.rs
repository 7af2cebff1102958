//! Joint distribution of `(X, Y, U)` under the Markov chain `U - X - Y`.

use crate::channel::{invert_channel, AuxChannel, CorrelationChannel};
use crate::error::Result;
use crate::prob::xlog2x;
use crate::rule::DecoderTable;

/// A 2×2×2 array indexed `[x][y][z]`.
pub type Cube = [[[f64; 2]; 2]; 2];

/// `p(x, y, u)` indexed `[x][y][u]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPXYU {
    entries: Cube,
}

impl JointPXYU {
    #[inline]
    pub fn get(&self, x: usize, y: usize, u: usize) -> f64 {
        self.entries[x][y][u]
    }

    pub fn entries(&self) -> &Cube {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().flatten().sum()
    }

    /// `p(x, y)` indexed `[x][y]`.
    pub fn marginal_xy(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        std::array::from_fn(|x| std::array::from_fn(|y| e[x][y][0] + e[x][y][1]))
    }

    /// `p(x, u)` indexed `[x][u]`.
    pub fn marginal_xu(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        std::array::from_fn(|x| std::array::from_fn(|u| e[x][0][u] + e[x][1][u]))
    }

    /// `p(y, u)` indexed `[y][u]`.
    pub fn marginal_yu(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        std::array::from_fn(|y| std::array::from_fn(|u| e[0][y][u] + e[1][y][u]))
    }

    /// Largest `|p(u|x,y) - p(u|x)|` over cells with `p(x,y) > 0`.
    pub fn markov_gap(&self) -> f64 {
        let pxy = self.marginal_xy();
        let pxu = self.marginal_xu();
        let mut gap: f64 = 0.0;
        for x in 0..2 {
            let px = pxu[x][0] + pxu[x][1];
            for y in 0..2 {
                if pxy[x][y] <= 0.0 || px <= 0.0 {
                    continue;
                }
                for u in 0..2 {
                    let lhs = self.entries[x][y][u] / pxy[x][y];
                    let rhs = pxu[x][u] / px;
                    gap = gap.max((lhs - rhs).abs());
                }
            }
        }
        gap
    }

    /// Expected Hamming distortion of a decoder `x̂ = f(y, u)`.
    pub fn expected_distortion(&self, decoder: DecoderTable) -> f64 {
        let mut d = 0.0;
        for y in 0..2 {
            for u in 0..2 {
                let xhat = decoder.0[y][u] as usize;
                d += self.entries[1 - xhat][y][u];
            }
        }
        d
    }

    /// Distortion of the argmax decoder: `Σ_{y,u} min(p(0,y,u), p(1,y,u))`.
    pub fn sum_of_mins(&self) -> f64 {
        let e = &self.entries;
        let mut d = 0.0;
        for y in 0..2 {
            for u in 0..2 {
                d += e[0][y][u].min(e[1][y][u]);
            }
        }
        d
    }

    /// `I(X; U | Y)` in bits.
    pub fn conditional_mutual_information(&self) -> f64 {
        conditional_mutual_information(&self.entries)
    }
}

/// Builds `p(x, y, u) = ½ p(y|x) p(u|x)`.
pub fn joint_pxyu(ch: &CorrelationChannel, aux: &AuxChannel) -> JointPXYU {
    let pyx = ch.transition();
    let pux = aux.transition();
    let entries = std::array::from_fn(|x| {
        std::array::from_fn(|y| std::array::from_fn(|u| 0.5 * pyx[x][y] * pux[x][u]))
    });
    JointPXYU { entries }
}

/// `p(u|y)` indexed `[y][u]`, from the closed-form concatenation of `Y→X` and
/// `X→U`.
pub fn p_u_given_y(ch: &CorrelationChannel, aux: &AuxChannel) -> Result<[[f64; 2]; 2]> {
    invert_channel(ch)?;
    let (a, b, p, q) = (ch.a(), ch.b(), aux.p(), aux.q());
    let den0 = 1.0 - a + b;
    let den1 = a + 1.0 - b;
    let u1_y0 = ((1.0 - a) * p + b * (1.0 - q)) / den0;
    let u0_y1 = (a * (1.0 - p) + (1.0 - b) * q) / den1;
    Ok([[1.0 - u1_y0, u1_y0], [u0_y1, 1.0 - u0_y1]])
}

/// `I(X; Z | Y)` in bits for any joint `p(x, y, z)` indexed `[x][y][z]`.
pub fn conditional_mutual_information(p: &Cube) -> f64 {
    // I(X;Z|Y) = Σ p(x,y,z) log p(x,y,z) p(y) / (p(x,y) p(y,z))
    //          = -H(X,Y,Z) + H(X,Y) + H(Y,Z) - H(Y)
    let mut neg_h_xyz = 0.0;
    let mut pxy = [[0.0; 2]; 2];
    let mut pyz = [[0.0; 2]; 2];
    let mut py = [0.0; 2];
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let v = p[x][y][z];
                neg_h_xyz += xlog2x(v);
                pxy[x][y] += v;
                pyz[y][z] += v;
                py[y] += v;
            }
        }
    }
    let neg_h = |vals: &[f64]| vals.iter().map(|&v| xlog2x(v)).sum::<f64>();
    let flat_xy = [pxy[0][0], pxy[0][1], pxy[1][0], pxy[1][1]];
    let flat_yz = [pyz[0][0], pyz[0][1], pyz[1][0], pyz[1][1]];
    neg_h_xyz - neg_h(&flat_xy) - neg_h(&flat_yz) + neg_h(&py)
}

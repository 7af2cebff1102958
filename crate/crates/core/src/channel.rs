//! Binary channels: the X→Y correlation channel, its inverse, and the X→U
//! auxiliary (test) channel, plus label-swap canonicalization.

use crate::error::{RdError, Result};
use crate::prob::{Probability, PROB_TOL};
use crate::rule::DecoderTable;

/// Binary asymmetric channel from the source X to the side information Y.
///
/// `a = p(Y=1|X=0)`, `b = p(Y=0|X=1)`. The source is fixed to Bernoulli(1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationChannel {
    a: Probability,
    b: Probability,
}

impl CorrelationChannel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Ok(Self {
            a: Probability::named("a", a)?,
            b: Probability::named("b", b)?,
        })
    }

    pub fn from_probabilities(a: Probability, b: Probability) -> Self {
        Self { a, b }
    }

    /// Binary symmetric channel with crossover `t`.
    pub fn bsc(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a.value()
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b.value()
    }

    /// `a <= b` and `a + b <= 1`, up to [`PROB_TOL`].
    pub fn is_canonical(&self) -> bool {
        self.a() <= self.b() + PROB_TOL && self.a() + self.b() <= 1.0 + PROB_TOL
    }

    pub fn ensure_canonical(&self) -> Result<()> {
        if self.is_canonical() {
            Ok(())
        } else {
            Err(RdError::NonCanonical {
                a: self.a(),
                b: self.b(),
            })
        }
    }

    /// Zero-rate distortion, reached by outputting `x̂ = y`.
    #[inline]
    pub fn d_max(&self) -> f64 {
        0.5 * (self.a() + self.b())
    }

    /// `p(y|x)` indexed `[x][y]`.
    pub fn transition(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.a(), self.b());
        [[1.0 - a, a], [b, 1.0 - b]]
    }

    /// Joint `p(x, y)` under the uniform source, indexed `[x][y]`.
    pub fn joint(&self) -> [[f64; 2]; 2] {
        let t = self.transition();
        [
            [0.5 * t[0][0], 0.5 * t[0][1]],
            [0.5 * t[1][0], 0.5 * t[1][1]],
        ]
    }

    /// `p(Y=0)` and `p(Y=1)` under the uniform source.
    pub fn p_y(&self) -> [f64; 2] {
        let (a, b) = (self.a(), self.b());
        [0.5 * (1.0 - a + b), 0.5 * (a + 1.0 - b)]
    }
}

/// The backward channel Y→X under the uniform source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseChannel {
    /// `p(X=1|Y=0)`
    pub a_star: Probability,
    /// `p(X=0|Y=1)`
    pub b_star: Probability,
    pub p_y0: Probability,
    pub p_y1: Probability,
}

impl InverseChannel {
    /// `H(X|Y) = p(Y=0) H(a*) + p(Y=1) H(b*)`.
    pub fn conditional_entropy(&self) -> f64 {
        use crate::prob::binary_entropy;
        self.p_y0.value() * binary_entropy(self.a_star)
            + self.p_y1.value() * binary_entropy(self.b_star)
    }

    /// `p(x|y)` indexed `[y][x]`.
    pub fn posterior(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.a_star.value(), self.b_star.value());
        [[1.0 - a, a], [b, 1.0 - b]]
    }
}

/// Inverts the correlation channel. Fails only when `p(Y=y) = 0` for some `y`,
/// i.e. at `(a, b) = (0, 1)` or `(1, 0)`.
pub fn invert_channel(ch: &CorrelationChannel) -> Result<InverseChannel> {
    let (a, b) = (ch.a(), ch.b());
    let den0 = 1.0 - a + b;
    let den1 = a + 1.0 - b;
    if den0 <= 0.0 || den1 <= 0.0 {
        return Err(RdError::DegenerateChannel { a, b });
    }
    Ok(InverseChannel {
        a_star: Probability::from_arith("a*", b / den0)?,
        b_star: Probability::from_arith("b*", a / den1)?,
        p_y0: Probability::from_arith("p(Y=0)", 0.5 * den0)?,
        p_y1: Probability::from_arith("p(Y=1)", 0.5 * den1)?,
    })
}

pub fn d_max(ch: &CorrelationChannel) -> f64 {
    ch.d_max()
}

/// Binary channel from X to the auxiliary variable U.
///
/// `p = p(U=1|X=0)`, `q = p(U=0|X=1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxChannel {
    p: Probability,
    q: Probability,
}

impl AuxChannel {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            p: Probability::named("p", p)?,
            q: Probability::named("q", q)?,
        })
    }

    pub fn from_probabilities(p: Probability, q: Probability) -> Self {
        Self { p, q }
    }

    /// Builds from optimizer output that may have drifted by rounding.
    pub(crate) fn from_arith(p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            p: Probability::from_arith("p", p)?,
            q: Probability::from_arith("q", q)?,
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p.value()
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q.value()
    }

    pub fn is_canonical(&self) -> bool {
        self.p() + self.q() <= 1.0 + PROB_TOL
    }

    /// `p(u|x)` indexed `[x][u]`.
    pub fn transition(&self) -> [[f64; 2]; 2] {
        let (p, q) = (self.p(), self.q());
        [[1.0 - p, p], [q, 1.0 - q]]
    }
}

/// Which output labels were swapped to reach the canonical domain.
///
/// Canonical values relate to raw ones by `x' = x ^ flip_x` (and likewise for
/// `y`, `u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelTransform {
    /// `(a, b) -> (1 - a, 1 - b)` was applied (Y labels swapped).
    pub complemented: bool,
    /// `(a, b) -> (b, a)` was applied (X and Y labels swapped jointly).
    pub swapped: bool,
    /// `(p, q) -> (1 - p, 1 - q)` was applied to the auxiliary channel after
    /// any X relabeling (U labels swapped).
    pub aux_complemented: bool,
}

impl LabelTransform {
    pub fn is_identity(&self) -> bool {
        !(self.complemented || self.swapped || self.aux_complemented)
    }

    pub fn flip_x(&self) -> bool {
        self.swapped
    }

    pub fn flip_y(&self) -> bool {
        self.complemented ^ self.swapped
    }

    pub fn flip_u(&self) -> bool {
        self.aux_complemented
    }

    /// Maps a decoder expressed in canonical labels back to raw labels.
    pub fn decanonicalize(&self, canonical: DecoderTable) -> DecoderTable {
        let (fx, fy, fu) = (
            self.flip_x() as u8,
            self.flip_y() as u8,
            self.flip_u() as u8,
        );
        let mut raw = [[0u8; 2]; 2];
        for (y, row) in raw.iter_mut().enumerate() {
            for (u, cell) in row.iter_mut().enumerate() {
                *cell = canonical.0[y ^ fy as usize][u ^ fu as usize] ^ fx;
            }
        }
        DecoderTable(raw)
    }

    /// Applies the X relabeling of this transform to an auxiliary channel, then
    /// complements it if needed so that `p + q <= 1`. Returns the updated record.
    pub fn canonicalize_aux(&self, aux: &AuxChannel) -> (AuxChannel, LabelTransform) {
        let (mut p, mut q) = (aux.p, aux.q);
        if self.swapped {
            // X relabeled alone: p' = p(U=1|X=1) = 1 - q, q' = p(U=0|X=0) = 1 - p
            (p, q) = (q.complement(), p.complement());
        }
        let mut record = *self;
        record.aux_complemented = false;
        if p.value() + q.value() > 1.0 {
            (p, q) = (p.complement(), q.complement());
            record.aux_complemented = true;
        }
        (AuxChannel { p, q }, record)
    }
}

/// Maps `(a, b)` into `a + b <= 1, a <= b` by label swaps.
pub fn canonicalize_correlation(ch: &CorrelationChannel) -> (CorrelationChannel, LabelTransform) {
    let (mut a, mut b) = (ch.a, ch.b);
    let mut record = LabelTransform::default();
    if a.value() + b.value() > 1.0 {
        (a, b) = (a.complement(), b.complement());
        record.complemented = true;
    }
    if a.value() > b.value() {
        (a, b) = (b, a);
        record.swapped = true;
    }
    (CorrelationChannel { a, b }, record)
}

/// Canonicalizes a correlation channel and an auxiliary channel together so
/// that rate and distortion are preserved.
pub fn canonicalize_pair(
    ch: &CorrelationChannel,
    aux: &AuxChannel,
) -> (CorrelationChannel, AuxChannel, LabelTransform) {
    let (ch_c, record) = canonicalize_correlation(ch);
    let (aux_c, record) = record.canonicalize_aux(aux);
    (ch_c, aux_c, record)
}

//! Seeded random generators shared by the self-check suite and the test
//! harness. Everything derives from a ChaCha stream so runs are
//! reproducible from the session seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bound::{Ext, Fin, PosInf};
use crate::psdo::{OpTuple, PsdOp, RingType};
use crate::rational::{rat, Rat};
use crate::series::{Mode, XSeries};

pub struct Sampler {
    pub rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Small nonzero rational.
    pub fn rat(&mut self) -> Rat {
        let num = loop {
            let v = self.rng.gen_range(-4i64..=4);
            if v != 0 {
                break v;
            }
        };
        let den = self.rng.gen_range(1i64..=3);
        rat(num, den)
    }

    /// Random operator: `terms` monomials with x-exponents in
    /// [xlo, xhi] and d-exponents in [dlo, dmax], then truncated to the
    /// claims window (xcap, floor).
    #[allow(clippy::too_many_arguments)]
    pub fn op(
        &mut self,
        n: usize,
        ring: RingType,
        terms: usize,
        xrange: (i64, i64),
        drange: (i64, i64),
        floor: i64,
    ) -> PsdOp {
        let mut acc = PsdOp::zero(n, ring, vec![]);
        for _ in 0..terms {
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let lo = if ring == RingType::E { 0.max(xrange.0) } else { xrange.0 };
                    self.rng.gen_range(lo..=xrange.1)
                })
                .collect();
            let d: Vec<i64> = (0..n).map(|_| self.rng.gen_range(drange.0..=drange.1)).collect();
            let c = self.rat();
            acc = acc
                .add(&PsdOp::monomial(n, ring, vec![], x, d, c))
                .expect("sampler add");
        }
        acc.truncate(&vec![PosInf; n], &vec![Fin(floor); n])
    }

    /// Random series with exponents in [lo, hi] per variable.
    pub fn series(&mut self, modes: Vec<Mode>, terms: usize, lo: i64, hi: i64) -> XSeries {
        let n = modes.len();
        let mut acc = XSeries::zero(modes.clone(), vec![]);
        for _ in 0..terms {
            let e: Vec<i64> = (0..n)
                .map(|i| {
                    let lo = if modes[i] == Mode::Taylor { 0.max(lo) } else { lo };
                    self.rng.gen_range(lo..=hi)
                })
                .collect();
            let c = self.rat();
            acc = acc
                .add(&XSeries::monomial(modes.clone(), vec![], e, c))
                .expect("sampler add");
        }
        acc
    }

    /// Random element of 1 + E_- (or 1 + P_-): the identity plus sparse
    /// negative-order terms, truncated at the floor.
    pub fn dressing_factor(
        &mut self,
        n: usize,
        ring: RingType,
        terms: usize,
        floor: i64,
    ) -> PsdOp {
        let one = PsdOp::one(n, ring, vec![]);
        let mut acc = one;
        for _ in 0..terms {
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    if ring == RingType::E {
                        self.rng.gen_range(0..=2)
                    } else {
                        self.rng.gen_range(-2..=2)
                    }
                })
                .collect();
            let mut d: Vec<i64> = (0..n).map(|_| self.rng.gen_range(-3..=0)).collect();
            // order < 0 means a negative d_n-exponent
            d[n - 1] = self.rng.gen_range(-3..=-1);
            let c = self.rat();
            acc = acc
                .add(&PsdOp::monomial(n, ring, vec![], x, d, c))
                .expect("sampler add");
        }
        acc.truncate(&vec![PosInf; n], &vec![Fin(floor); n])
    }

    /// A commuting tuple obtained by conjugating (d_1, ..., d_n) with a
    /// random dressing factor.
    pub fn commuting_tuple(&mut self, n: usize, terms: usize, floor: i64) -> OpTuple {
        let s0 = self.dressing_factor(n, RingType::E, terms, floor);
        let s0inv = s0.inverse().expect("1 + E_- is invertible");
        OpTuple::new(
            (1..=n)
                .map(|i| {
                    let di = PsdOp::delta(n, RingType::E, vec![], i);
                    s0inv.mul(&di).unwrap().mul(&s0).unwrap()
                })
                .collect(),
        )
        .expect("tuple shape")
    }

    /// A normalized one-variable operator d^k + (order < k-1), monic with
    /// the subleading term absent.
    pub fn normalized_1d(&mut self, k: i64, terms: usize, floor: i64) -> PsdOp {
        assert!(k != 0);
        let mut acc = PsdOp::monomial(1, RingType::P, vec![], vec![0], vec![k], Rat::from(num::BigInt::from(1)));
        for _ in 0..terms {
            let d = self.rng.gen_range(floor.max(-4)..=k - 2);
            let x = self.rng.gen_range(-2..=2);
            let c = self.rat();
            acc = acc
                .add(&PsdOp::monomial(1, RingType::P, vec![], vec![x], vec![d], c))
                .expect("sampler add");
        }
        acc.truncate(&[PosInf], &[Fin(floor)])
    }

    /// Windowed truncation levels for soundness meta-tests: a window and a
    /// strictly larger one.
    pub fn nested_floors(&mut self, n: usize) -> (Vec<Ext>, Vec<Ext>) {
        let inner: Vec<Ext> = (0..n).map(|_| Fin(self.rng.gen_range(-6..=-3))).collect();
        let outer: Vec<Ext> = inner
            .iter()
            .map(|e| Fin(e.finite() - self.rng.gen_range(1..=3)))
            .collect();
        (inner, outer)
    }
}

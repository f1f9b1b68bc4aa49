//! Functionals on P^n, gradients through the residue pairing, and the
//! Lie-Poisson and R-matrix brackets.
//!
//! A functional is a polynomial in coordinate extractors c_{a,b,i} (the
//! coefficient of x^a d^b in slot i), or one of the built-in families:
//! linear functionals F_M(L) = <L, M>, the conserved quantities
//! H_k(L) = res_P(L^k), and the combined n = 2 Hamiltonians
//! H_m = (1/m) sum_{k+l=m} C(m,k) H_{k,l}.
//!
//! The gradient is defined variationally: <M, grad F(L)> = dF(L + eps M)
//! at eps = 0 for all directions M in the window. The monomial pairing is
//! triangular rather than diagonal (dual monomials pick up corrections up
//! the diagonal), so the gradient of an extractor is obtained by solving
//! that triangular system inside the window.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::bound::{Ext, Fin};
use crate::error::{Error, Result};
use crate::psdo::{pair, OpTuple, PsdOp, RingType};
use crate::rational::{binom_int, falling, rat_int, Rat};

/// A coordinate extractor: the coefficient of x^xexp d^dexp in one slot
/// (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extractor {
    pub slot: usize,
    pub xexp: Vec<i64>,
    pub dexp: Vec<i64>,
}

/// A polynomial in extractors: sum of (coefficient, product of extractors).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FuncPoly {
    pub terms: Vec<(Rat, Vec<Extractor>)>,
}

/// A functional on P^n.
#[derive(Clone, Debug)]
pub enum Functional {
    /// Polynomial in coordinate extractors.
    Poly(FuncPoly),
    /// F_M(L) = <L, M>.
    Linear(OpTuple),
    /// H_k(L) = res_P(L_1^k1 ... L_n^kn).
    ResPower(Vec<u32>),
    /// The combined Hamiltonian H_m on P^2.
    CombinedN2(u32),
}

/// Which direct-sum splitting the R-matrix uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplittingConfig {
    /// The d_n-sign split P = P_+ + P_-.
    StandardPM,
    /// Split by the x_var-exponent against a threshold (1-based variable);
    /// thresholds 1 and 0 give the two x-exponent subring pairs.
    XSplit { var: usize, threshold: i64 },
}

/// Applies the configured splitting to one operator.
pub fn split_with(op: &PsdOp, cfg: SplittingConfig) -> (PsdOp, PsdOp) {
    match cfg {
        SplittingConfig::StandardPM => op.split(),
        SplittingConfig::XSplit { var, threshold } => {
            let mut high = op.clone();
            let mut low = op.clone();
            let idx = var - 1;
            let mut ht = high.terms().clone();
            ht.retain(|k, _| k.x[idx] >= threshold);
            let mut lt = low.terms().clone();
            lt.retain(|k, _| k.x[idx] < threshold);
            high.set_terms(ht);
            low.set_terms(lt);
            (high, low)
        }
    }
}

/// Values of functionals on tuples carrying nilpotent parameters: a
/// polynomial in the aux degrees.
type AuxVal = BTreeMap<Vec<u32>, Rat>;

fn aux_zero(naux: usize) -> Vec<u32> {
    vec![0; naux]
}

fn aux_add(a: &AuxVal, b: &AuxVal, caps: &[u32]) -> AuxVal {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(k.clone()).or_insert_with(Rat::zero);
        *e += v;
    }
    out.retain(|k, v| !v.is_zero() && k.iter().zip(caps).all(|(&d, &c)| d <= c));
    out
}

fn aux_mul(a: &AuxVal, b: &AuxVal, caps: &[u32]) -> AuxVal {
    let mut out = AuxVal::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            if k.iter().zip(caps).any(|(&d, &c)| d > c) {
                continue;
            }
            let e = out.entry(k).or_insert_with(Rat::zero);
            *e += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn aux_scale(a: &AuxVal, c: &Rat) -> AuxVal {
    let mut out = AuxVal::new();
    if c.is_zero() {
        return out;
    }
    for (k, v) in a {
        out.insert(k.clone(), v * c);
    }
    out
}

fn aux_constant(c: Rat, naux: usize) -> AuxVal {
    let mut out = AuxVal::new();
    if !c.is_zero() {
        out.insert(aux_zero(naux), c);
    }
    out
}

/// Extractor value on one slot, as an aux polynomial.
fn extract(l: &OpTuple, e: &Extractor) -> AuxVal {
    let slot = l.slot(e.slot);
    let mut out = AuxVal::new();
    for (k, c) in slot.terms() {
        if k.x == e.xexp && k.d == e.dexp {
            out.insert(k.aux.clone(), c.clone());
        }
    }
    out
}

fn caps_of(l: &OpTuple) -> Vec<u32> {
    l.slot(0).aux().iter().map(|p| p.cap).collect()
}

/// Evaluation with full aux structure retained.
pub fn f_eval_aux(f: &Functional, l: &OpTuple) -> Result<AuxVal> {
    let l = &as_p_type(l)?;
    let caps = caps_of(l);
    let naux = caps.len();
    match f {
        Functional::Poly(p) => {
            let mut acc = AuxVal::new();
            for (c, extractors) in &p.terms {
                let mut term = aux_constant(c.clone(), naux);
                for e in extractors {
                    term = aux_mul(&term, &extract(l, e), &caps);
                }
                acc = aux_add(&acc, &term, &caps);
            }
            Ok(acc)
        }
        Functional::Linear(m) => {
            let m = as_p_type(m)?.lift_aux(l.slot(0).aux())?;
            let mut acc = AuxVal::new();
            for (a, b) in l.slots().iter().zip(m.slots()) {
                let p = a.mul_to_floor(b, &vec![Fin(-1); a.n()])?;
                acc = aux_add(&acc, &p.residue_aux()?, &caps);
            }
            Ok(acc)
        }
        Functional::ResPower(k) => l.power_product(k)?.residue_aux(),
        Functional::CombinedN2(m) => {
            if l.n() != 2 {
                return Err(Error::DimensionMismatch("combined Hamiltonians need n = 2".into()));
            }
            let m = *m;
            assert!(m >= 1);
            let mut acc = AuxVal::new();
            for k in 0..=m {
                let h = l.power_product(&[k, m - k])?.residue_aux()?;
                acc = aux_add(&acc, &aux_scale(&h, &binom_int(m as i64, k as u64)), &caps);
            }
            Ok(aux_scale(&acc, &(rat_int(1) / rat_int(m as i64))))
        }
    }
}

/// Evaluates a functional at an aux-free point.
pub fn f_eval(f: &Functional, l: &OpTuple) -> Result<Rat> {
    let table = f_eval_aux(f, l)?;
    let naux = caps_of(l).len();
    Ok(table.get(&aux_zero(naux)).cloned().unwrap_or_else(Rat::zero))
}

/// Directional derivative dF(L + eps E)/d eps at eps = 0, by dual-number
/// evaluation (eps is a cap-1 nilpotent).
pub fn directional_derivative(f: &Functional, l: &OpTuple, dir: &OpTuple) -> Result<Rat> {
    let l = as_p_type(l)?;
    let dir = as_p_type(dir)?;
    let mut target = l.slot(0).aux().to_vec();
    target.push(crate::series::AuxParam::new("veps", 1));
    let lifted = l.lift_aux(&target)?;
    let shifted = dir.lift_aux(&target)?.map(|s| s.aux_shift("veps", 1))?;
    let point = lifted.add(&shifted)?;
    let table = f_eval_aux(f, &point)?;
    let naux = target.len();
    let mut key = aux_zero(naux);
    key[naux - 1] = 1;
    Ok(table.get(&key).cloned().unwrap_or_else(Rat::zero))
}

/// Gradient of a single extractor inside the window: the triangular system
/// for <x^(a+s) d^(b+s), G> = delta_{s,0} over in-window diagonal shifts s.
fn extractor_gradient(e: &Extractor, l: &OpTuple) -> Result<PsdOp> {
    let slot = l.slot(e.slot);
    let n = slot.n();
    let win = slot.window();
    // the diagonal correction chain is truncated where the dual cells
    // leave the window's d-floor; that floor dualizes to the cap on the
    // directions the defining identity is asserted for
    let mut smax = Vec::with_capacity(n);
    for i in 0..n {
        let cap = match win.dfloor[i] {
            Ext::Fin(f) => -1 - e.dexp[i] - f,
            Ext::NegInf => return Err(Error::InfiniteTail),
            Ext::PosInf => unreachable!("floors are never +inf"),
        };
        if cap < 0 {
            return Err(Error::WindowTooSmall(format!(
                "dual cell of the extractor leaves the window in variable {}",
                i + 1
            )));
        }
        smax.push(cap);
    }
    // enumerate shifts in the box [0, smax], in increasing |s| order
    let mut shifts: Vec<Vec<i64>> = vec![vec![]];
    for &cap in &smax {
        let mut next = Vec::new();
        for base in &shifts {
            for v in 0..=cap {
                let mut b = base.clone();
                b.push(v);
                next.push(b);
            }
        }
        shifts = next;
    }
    shifts.sort_by_key(|s| (s.iter().sum::<i64>(), s.clone()));
    let mut mu: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
    for s in &shifts {
        let mut acc = if s.iter().all(|&v| v == 0) {
            Rat::one()
        } else {
            Rat::zero()
        };
        for (k, mk) in &mu {
            if k.iter().zip(s).all(|(a, b)| a <= b) && k != s {
                let mut w = Rat::one();
                for i in 0..n {
                    let kappa = (s[i] - k[i]) as u64;
                    w *= binom_int(e.dexp[i] + s[i], kappa);
                    w *= falling(-1 - e.xexp[i] - k[i], kappa);
                }
                acc -= mk * w;
            }
        }
        if !acc.is_zero() {
            mu.insert(s.clone(), acc);
        }
    }
    let mut g = PsdOp::zero(n, RingType::P, slot.aux().to_vec());
    for (k, c) in mu {
        let xe: Vec<i64> = (0..n).map(|i| -1 - e.xexp[i] - k[i]).collect();
        let de: Vec<i64> = (0..n).map(|i| -1 - e.dexp[i] - k[i]).collect();
        g = g.add(&PsdOp::monomial(n, RingType::P, slot.aux().to_vec(), xe, de, c))?;
    }
    Ok(g)
}

fn zero_tuple_like(l: &OpTuple) -> OpTuple {
    let n = l.n();
    OpTuple::new(
        (0..n)
            .map(|_| PsdOp::zero(n, RingType::P, l.slot(0).aux().to_vec()))
            .collect(),
    )
    .expect("zero tuple")
}

/// Converts a tuple into P-type (the gradients live in P even for E-type
/// points).
fn as_p_type(l: &OpTuple) -> Result<OpTuple> {
    l.map(|s| Ok(s.to_p_type()))
}

/// The cyclic derivative of H_k: exact for any L, commuting or not.
fn res_power_gradient(l: &OpTuple, k: &[u32]) -> Result<OpTuple> {
    let n = l.n();
    let first = l.slot(0);
    let one = PsdOp::one(n, first.ring(), first.aux().to_vec());
    let mut slots = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = PsdOp::zero(n, first.ring(), first.aux().to_vec());
        // U_i = sum_{j=0}^{k_i - 1} L_i^(k_i-1-j) (prod_{s>i} L_s^(k_s))
        //       (prod_{s<i} L_s^(k_s)) L_i^j
        let mut after = one.clone();
        for s in (i + 1)..n {
            for _ in 0..k[s] {
                after = after.mul(l.slot(s))?;
            }
        }
        let mut before = one.clone();
        for s in 0..i {
            for _ in 0..k[s] {
                before = before.mul(l.slot(s))?;
            }
        }
        let middle = after.mul(&before)?;
        for j in 0..k[i] {
            let mut term = one.clone();
            for _ in 0..(k[i] - 1 - j) {
                term = term.mul(l.slot(i))?;
            }
            term = term.mul(&middle)?;
            for _ in 0..j {
                term = term.mul(l.slot(i))?;
            }
            acc = acc.add(&term)?;
        }
        slots.push(acc);
    }
    OpTuple::new(slots)
}

/// The variational gradient: the unique window-supported tuple with
/// <M, grad F(L)> = dF(L + eps M) for all in-window monomial directions.
pub fn f_gradient(f: &Functional, l: &OpTuple) -> Result<OpTuple> {
    match f {
        Functional::Linear(m) => as_p_type(m)?.lift_aux(l.slot(0).aux()),
        Functional::ResPower(k) => as_p_type(&res_power_gradient(l, k)?),
        Functional::CombinedN2(m) => {
            if l.n() != 2 {
                return Err(Error::DimensionMismatch("combined Hamiltonians need n = 2".into()));
            }
            let m = *m;
            let mut acc = zero_tuple_like(l);
            for k in 0..=m {
                let g = as_p_type(&res_power_gradient(l, &[k, m - k])?)?;
                acc = acc.add(&g.scale(&binom_int(m as i64, k as u64)))?;
            }
            Ok(acc.scale(&(rat_int(1) / rat_int(m as i64))))
        }
        Functional::Poly(p) => {
            let mut acc = zero_tuple_like(l);
            // set of distinct extractors appearing in the polynomial
            let mut seen: Vec<&Extractor> = Vec::new();
            for (_, es) in &p.terms {
                for e in es {
                    if !seen.contains(&e) {
                        seen.push(e);
                    }
                }
            }
            for e in seen {
                let unit = {
                    let n = l.n();
                    let mut slots: Vec<PsdOp> = (0..n)
                        .map(|_| PsdOp::zero(n, l.slot(0).ring(), l.slot(0).aux().to_vec()))
                        .collect();
                    slots[e.slot] = PsdOp::monomial(
                        n,
                        l.slot(0).ring(),
                        l.slot(0).aux().to_vec(),
                        e.xexp.clone(),
                        e.dexp.clone(),
                        Rat::one(),
                    );
                    OpTuple::new(slots)?
                };
                let partial = directional_derivative(f, l, &unit)?;
                if partial.is_zero() {
                    continue;
                }
                let g = extractor_gradient(e, l)?;
                let mut slots: Vec<PsdOp> = acc.slots().to_vec();
                slots[e.slot] = slots[e.slot].add(&g.scale(&partial))?;
                acc = OpTuple::new(slots)?;
            }
            Ok(acc)
        }
    }
}

/// Lemma-style closed form of the H_k gradient on commuting tuples:
/// U_i = k_i L_1^k1 ... L_i^(k_i - 1) ... L_n^kn.
pub fn grad_hk_closed(l: &OpTuple, k: &[u32]) -> Result<OpTuple> {
    if !l.commutes()? {
        return Err(Error::NotCommuting);
    }
    let n = l.n();
    let first = l.slot(0);
    let mut slots = Vec::with_capacity(n);
    for i in 0..n {
        if k[i] == 0 {
            slots.push(PsdOp::zero(n, first.ring(), first.aux().to_vec()));
            continue;
        }
        let mut exps = k.to_vec();
        exps[i] -= 1;
        let p = l.power_product(&exps)?;
        slots.push(p.scale(&rat_int(k[i] as i64)));
    }
    as_p_type(&OpTuple::new(slots)?)
}

/// Working floors for bracket commutators: deep enough that the residue
/// pairing against L is determined.
fn bracket_floors(l_slot: &PsdOp) -> Vec<Ext> {
    (0..l_slot.n())
        .map(|j| Fin(-2 - l_slot.window().dcap[j].finite_or(0).max(0)))
        .collect()
}

fn commutator_to_floor(a: &PsdOp, b: &PsdOp, floors: &[Ext]) -> Result<PsdOp> {
    a.mul_to_floor(b, floors)?.sub(&b.mul_to_floor(a, floors)?)
}

/// The Lie-Poisson bracket {F, G}(L) = <L, [grad F, grad G]>.
pub fn bracket_lie(f: &Functional, g: &Functional, l: &OpTuple) -> Result<Rat> {
    let lp = as_p_type(l)?;
    let u = f_gradient(f, &lp)?;
    let v = f_gradient(g, &lp)?;
    let mut acc = Rat::zero();
    for i in 0..l.n() {
        let fl = bracket_floors(lp.slot(i));
        let c = commutator_to_floor(u.slot(i), v.slot(i), &fl)?;
        acc += pair(lp.slot(i), &c)?;
    }
    Ok(acc)
}

/// The R-matrix bracket {F, G}_R(L) = <L, [grad F, grad G]_R> with
/// [X, Y]_R = [X_+, Y_+] - [X_-, Y_-] for the configured splitting.
pub fn bracket_r(
    f: &Functional,
    g: &Functional,
    l: &OpTuple,
    cfg: SplittingConfig,
) -> Result<Rat> {
    let lp = as_p_type(l)?;
    let u = f_gradient(f, &lp)?;
    let v = f_gradient(g, &lp)?;
    let mut acc = Rat::zero();
    for i in 0..l.n() {
        let fl = bracket_floors(lp.slot(i));
        let (up, um) = split_with(u.slot(i), cfg);
        let (vp, vm) = split_with(v.slot(i), cfg);
        let c = commutator_to_floor(&up, &vp, &fl)?
            .sub(&commutator_to_floor(&um, &vm, &fl)?)?;
        acc += pair(lp.slot(i), &c)?;
    }
    Ok(acc)
}

/// Hamiltonian form of the R-bracket system when every [U_i, L_i]
/// vanishes: dL_i/dt = [(U_i)_+, L_i].
pub fn ham_flow_form(h: &Functional, l: &OpTuple) -> Result<OpTuple> {
    let lp = as_p_type(l)?;
    let u = f_gradient(h, &lp)?;
    for i in 0..l.n() {
        if !u.slot(i).commutator(lp.slot(i))?.is_zero() {
            return Err(Error::HypothesisFailed(i + 1));
        }
    }
    let mut slots = Vec::with_capacity(l.n());
    for i in 0..l.n() {
        slots.push(u.slot(i).plus_part().commutator(lp.slot(i))?);
    }
    OpTuple::new(slots)
}

/// The combined flow on P^2: ([(L1+L2)^(m-1)_+, L1], [(L1+L2)^(m-1)_+, L2]).
pub fn combined_hamiltonian_flow_n2(l: &OpTuple, m: u32) -> Result<OpTuple> {
    if l.n() != 2 {
        return Err(Error::DimensionMismatch("combined flow needs n = 2".into()));
    }
    if !l.commutes()? {
        return Err(Error::NotCommuting);
    }
    assert!(m >= 1);
    let lp = as_p_type(l)?;
    let sum = lp.slot(0).add(lp.slot(1))?;
    let mut w = PsdOp::one(2, RingType::P, lp.slot(0).aux().to_vec());
    for _ in 0..m - 1 {
        w = w.mul(&sum)?;
    }
    let wp = w.plus_part();
    lp.map(|slot| wp.commutator(slot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::PosInf;
    use crate::rational::rat;

    fn p_mono1(x: i64, d: i64, c: i64) -> PsdOp {
        PsdOp::monomial(1, RingType::P, vec![], vec![x], vec![d], rat_int(c))
    }

    fn p_mono2(x: [i64; 2], d: [i64; 2], c: i64) -> PsdOp {
        PsdOp::monomial(2, RingType::P, vec![], x.to_vec(), d.to_vec(), rat_int(c))
    }

    fn dressed_pair(floor: i64) -> OpTuple {
        let s0 = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![
                (vec![0, 0], vec![0, 0], rat_int(1)),
                (vec![1, 0], vec![0, -1], rat_int(1)),
                (vec![0, 1], vec![-1, -1], rat(1, 2)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(floor), Fin(floor)]);
        let s0inv = s0.inverse().unwrap();
        OpTuple::new(
            (1..=2)
                .map(|i| {
                    let di = PsdOp::delta(2, RingType::E, vec![], i);
                    s0inv.mul(&di).unwrap().mul(&s0).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        // extractor c_{0,(1),(1)} reads the coefficient of d1 in slot 1
        let l_op = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![0], vec![1], rat(3, 2)),
                (vec![1], vec![-1], rat_int(5)),
            ],
        );
        let l = OpTuple::new(vec![l_op]).unwrap();
        let f = Functional::Poly(FuncPoly {
            terms: vec![(
                rat_int(1),
                vec![Extractor { slot: 0, xexp: vec![0], dexp: vec![1] }],
            )],
        });
        assert_eq!(f_eval(&f, &l).unwrap(), rat(3, 2));

        // H_(1,0)(d1, d2) = 0
        let deltas = OpTuple::deltas(2, RingType::P, vec![]);
        assert_eq!(f_eval(&Functional::ResPower(vec![1, 0]), &deltas).unwrap(), rat_int(0));

        // F_M(L) = <L, M>
        let m = OpTuple::new(vec![p_mono1(-2, -2, 1)]).unwrap();
        let xd = OpTuple::new(vec![p_mono1(1, 1, 1)]).unwrap();
        assert_eq!(f_eval(&Functional::Linear(m), &xd).unwrap(), rat_int(1));
    }

    #[test]
    fn lemma3_linear_gradient() {
        // grad F_M = M, and it satisfies the defining identity
        let m = OpTuple::new(vec![
            PsdOp::poly(
                2,
                RingType::P,
                vec![],
                vec![
                    (vec![-1, 0], vec![-1, -2], rat_int(2)),
                    (vec![0, -1], vec![-2, -1], rat(1, 3)),
                ],
            ),
            p_mono2([-1, -1], [-1, -1], 1),
        ])
        .unwrap();
        let f = Functional::Linear(m.clone());
        let l = dressed_pair(-8);
        let g = f_gradient(&f, &l).unwrap();
        for (a, b) in g.slots().iter().zip(m.slots()) {
            assert!(a.same_terms(b));
        }
        // defining identity against sample directions
        for dir in [
            OpTuple::new(vec![
                p_mono2([0, 0], [0, 1], 1),
                p_mono2([1, 0], [-1, 0], 3),
            ])
            .unwrap(),
            OpTuple::new(vec![
                p_mono2([1, 0], [0, 0], 2),
                p_mono2([0, 0], [0, 0], 1),
            ])
            .unwrap(),
        ] {
            let lhs = dir.pair(&g).unwrap();
            let rhs = directional_derivative(&f, &l, &dir).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn extractor_gradient_defining_identity() {
        // window the point, then check <E, grad F> = dF(L + eps E) for
        // every monomial direction inside a sample box
        let l_op = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![0], vec![1], rat_int(1)),
                (vec![1], vec![-1], rat_int(2)),
                (vec![-1], vec![0], rat(1, 2)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-3)]);
        let l = OpTuple::new(vec![l_op]).unwrap();
        let f = Functional::Poly(FuncPoly {
            terms: vec![
                (
                    rat_int(2),
                    vec![
                        Extractor { slot: 0, xexp: vec![0], dexp: vec![1] },
                        Extractor { slot: 0, xexp: vec![1], dexp: vec![-1] },
                    ],
                ),
                (rat(1, 3), vec![Extractor { slot: 0, xexp: vec![-1], dexp: vec![0] }]),
            ],
        });
        let g = f_gradient(&f, &l).unwrap();
        for xe in -2..=2i64 {
            for de in -2..=2i64 {
                let dir = OpTuple::new(vec![p_mono1(xe, de, 1)]).unwrap();
                let lhs = dir.pair(&g).unwrap();
                let rhs = directional_derivative(&f, &l, &dir).unwrap();
                assert_eq!(lhs, rhs, "direction x^{xe} d^{de}");
            }
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = Functional::Poly(FuncPoly { terms: vec![(rat_int(7), vec![])] });
        let l = dressed_pair(-6);
        assert!(f_gradient(&f, &l).unwrap().is_zero());
    }

    #[test]
    fn lemma4_closed_form_matches_variational() {
        let l = dressed_pair(-9);
        for k in [[1u32, 0], [0, 1], [1, 1], [2, 0], [2, 1]] {
            let closed = grad_hk_closed(&l, &k).unwrap();
            let variational = f_gradient(&Functional::ResPower(k.to_vec()), &l).unwrap();
            for (a, b) in closed.slots().iter().zip(variational.slots()) {
                assert!(a.sub(b).unwrap().is_zero(), "H_{k:?} gradients differ");
            }
        }
        // k with a zero entry has a zero slot
        let g = grad_hk_closed(&l, &[1, 0]).unwrap();
        assert!(g.slot(1).is_zero());
    }

    #[test]
    fn res_power_gradient_defining_identity() {
        // off P' the cyclic formula still realizes the variational identity
        let l = OpTuple::new(vec![
        PsdOp::poly(
                2,
                RingType::P,
                vec![],
                vec![
                    (vec![0, 0], vec![1, 0], rat_int(1)),
                    (vec![1, 1], vec![0, -1], rat_int(1)),
                ],
            )
            .truncate(&[PosInf, PosInf], &[Fin(-5), Fin(-5)]),
            PsdOp::poly(
                2,
                RingType::P,
                vec![],
                vec![
                    (vec![0, 0], vec![0, 1], rat_int(1)),
                    (vec![0, 2], vec![-1, 0], rat(1, 2)),
                ],
            )
            .truncate(&[PosInf, PosInf], &[Fin(-5), Fin(-5)]),
        ])
        .unwrap();
        let f = Functional::ResPower(vec![1, 1]);
        let g = f_gradient(&f, &l).unwrap();
        for dir in [
            OpTuple::new(vec![
                p_mono2([0, 0], [0, 0], 1),
                p_mono2([-1, 0], [-1, 0], 2),
            ])
            .unwrap(),
            OpTuple::new(vec![
                p_mono2([-2, 0], [-1, -1], 3),
                p_mono2([0, -1], [0, -2], 1),
            ])
            .unwrap(),
        ] {
            let lhs = dir.pair(&g).unwrap();
            let rhs = directional_derivative(&f, &l, &dir).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn adjointness_eq9() {
        // <A, [B, C]> = <[A, B], C> on sample tuples
        let mk = |terms: Vec<(Vec<i64>, Vec<i64>, i64)>| {
            PsdOp::poly(
                1,
                RingType::P,
                vec![],
                terms.into_iter().map(|(x, d, c)| (x, d, rat_int(c))).collect(),
            )
            .truncate(&[PosInf], &[Fin(-6)])
        };
        let a = OpTuple::new(vec![mk(vec![(vec![1], vec![1], 2), (vec![-1], vec![-1], 1)])]).unwrap();
        let b = OpTuple::new(vec![mk(vec![(vec![0], vec![2], 1), (vec![2], vec![-2], 3)])]).unwrap();
        let c = OpTuple::new(vec![mk(vec![(vec![1], vec![0], 1), (vec![0], vec![-1], 5)])]).unwrap();
        let bc = OpTuple::new(vec![b.slot(0).commutator(c.slot(0)).unwrap()]).unwrap();
        let ab = OpTuple::new(vec![a.slot(0).commutator(b.slot(0)).unwrap()]).unwrap();
        assert_eq!(a.pair(&bc).unwrap(), ab.pair(&c).unwrap());
    }

    #[test]
    fn bracket_antisymmetry_and_linear_substitution() {
        let l = dressed_pair(-8);
        let a = OpTuple::new(vec![
            p_mono2([-1, 0], [-2, -1], 1),
            p_mono2([-2, -1], [-1, 0], 2),
        ])
        .unwrap();
        let b = OpTuple::new(vec![
            p_mono2([0, -1], [-1, -1], 1),
            p_mono2([-1, 0], [0, -1], 1),
        ])
        .unwrap();
        let fa = Functional::Linear(a.clone());
        let fb = Functional::Linear(b.clone());
        // {F_A, F_B}(L) = <L, [A, B]>
        let lhs = bracket_lie(&fa, &fb, &l).unwrap();
        let mut rhs = Rat::zero();
        for i in 0..2 {
            let fl = [Fin(-4), Fin(-4)];
            let c = commutator_to_floor(a.slot(i), b.slot(i), &fl).unwrap();
            rhs += pair(&l.slot(i).to_p_type(), &c).unwrap();
        }
        assert_eq!(lhs, rhs);
        // antisymmetry
        assert_eq!(bracket_lie(&fa, &fb, &l).unwrap(), -bracket_lie(&fb, &fa, &l).unwrap());
        assert_eq!(bracket_lie(&fa, &fa, &l).unwrap(), Rat::zero());
        assert_eq!(
            bracket_r(&fa, &fb, &l, SplittingConfig::StandardPM).unwrap(),
            -bracket_r(&fb, &fa, &l, SplittingConfig::StandardPM).unwrap()
        );
    }

    #[test]
    fn jacobi_identity_linear_functionals() {
        let l = dressed_pair(-8);
        let tuples = [
            OpTuple::new(vec![
                p_mono2([-1, 0], [-1, 0], 1),
                p_mono2([0, -1], [0, -2], 2),
            ])
            .unwrap(),
            OpTuple::new(vec![
                p_mono2([0, -1], [-2, 0], 3),
                p_mono2([-1, 0], [0, -1], 1),
            ])
            .unwrap(),
            OpTuple::new(vec![
                p_mono2([-2, 0], [0, -1], 1),
                p_mono2([-1, -1], [-1, 0], 1),
            ])
            .unwrap(),
        ];
        // nested brackets of linear functionals stay linear:
        // {F_A, F_B} = F_[A,B] for the Lie bracket, and F_[A,B]_R for R
        let fl = [Fin(-5), Fin(-5)];
        let comm = |a: &OpTuple, b: &OpTuple| -> OpTuple {
            OpTuple::new(
                a.slots()
                    .iter()
                    .zip(b.slots())
                    .map(|(x, y)| commutator_to_floor(x, y, &fl).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        let comm_r = |a: &OpTuple, b: &OpTuple| -> OpTuple {
            OpTuple::new(
                a.slots()
                    .iter()
                    .zip(b.slots())
                    .map(|(x, y)| {
                        let (xp, xm) = x.split();
                        let (yp, ym) = y.split();
                        commutator_to_floor(&xp, &yp, &fl)
                            .unwrap()
                            .sub(&commutator_to_floor(&xm, &ym, &fl).unwrap())
                            .unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        };
        let [a, b, c] = &tuples;
        // Lie bracket: {F_A, {F_B, F_C}} + cyclic = 0, using
        // {F_B, F_C} = F_[B,C]
        let lie_total = bracket_lie(&Functional::Linear(a.clone()), &Functional::Linear(comm(b, c)), &l).unwrap()
            + bracket_lie(&Functional::Linear(b.clone()), &Functional::Linear(comm(c, a)), &l).unwrap()
            + bracket_lie(&Functional::Linear(c.clone()), &Functional::Linear(comm(a, b)), &l).unwrap();
        assert_eq!(lie_total, Rat::zero(), "Lie Jacobi defect");
        // R-bracket: nested gradients are [.,.]_R of the linear data
        let cfg = SplittingConfig::StandardPM;
        let r_total = bracket_r(&Functional::Linear(a.clone()), &Functional::Linear(comm_r(b, c)), &l, cfg).unwrap()
            + bracket_r(&Functional::Linear(b.clone()), &Functional::Linear(comm_r(c, a)), &l, cfg).unwrap()
            + bracket_r(&Functional::Linear(c.clone()), &Functional::Linear(comm_r(a, b)), &l, cfg).unwrap();
        assert_eq!(r_total, Rat::zero(), "R Jacobi defect");
    }

    #[test]
    fn hk_brackets_vanish_on_commuting_points() {
        let l = dressed_pair(-9);
        let f = Functional::Poly(FuncPoly {
            terms: vec![
                (
                    rat(2, 3),
                    vec![Extractor { slot: 0, xexp: vec![0, 0], dexp: vec![-1, 0] }],
                ),
                (
                    rat_int(1),
                    vec![
                        Extractor { slot: 1, xexp: vec![1, 0], dexp: vec![0, -1] },
                        Extractor { slot: 0, xexp: vec![0, 0], dexp: vec![0, 1] },
                    ],
                ),
            ],
        });
        for k in [[1u32, 0], [0, 1], [1, 1]] {
            let hk = Functional::ResPower(k.to_vec());
            assert_eq!(
                bracket_lie(&hk, &f, &l).unwrap(),
                Rat::zero(),
                "{{H_{k:?}, F}} != 0"
            );
        }
        for k in [[1u32, 0], [0, 1]] {
            for kk in [[0u32, 1], [1, 1]] {
                let a = Functional::ResPower(k.to_vec());
                let b = Functional::ResPower(kk.to_vec());
                assert_eq!(
                    bracket_r(&a, &b, &l, SplittingConfig::StandardPM).unwrap(),
                    Rat::zero(),
                    "{{H_{k:?}, H_{kk:?}}}_R != 0"
                );
            }
        }
    }

    #[test]
    fn xsplit_bracket_differs_from_standard() {
        // n = 1: the d-sign split sends the derivation to the (+)-part,
        // the x-exponent split sends it to the other side, and the bracket
        // values separate
        let l_op = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![1], vec![0], rat_int(1)),
                (vec![0], vec![1], rat_int(1)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-6)]);
        let l = OpTuple::new(vec![l_op]).unwrap();
        let fa = Functional::Linear(OpTuple::new(vec![p_mono1(0, 1, 1)]).unwrap());
        let fb = Functional::Linear(OpTuple::new(vec![p_mono1(-1, -1, 1)]).unwrap());
        let standard = bracket_r(&fa, &fb, &l, SplittingConfig::StandardPM).unwrap();
        let xsplit = bracket_r(
            &fa,
            &fb,
            &l,
            SplittingConfig::XSplit { var: 1, threshold: 1 },
        )
        .unwrap();
        assert_ne!(standard, xsplit);
    }

    #[test]
    fn xsplit_parts_are_subrings() {
        // both x-exponent splittings produce multiplicatively closed parts
        let samples = vec![
            p_mono1(1, 1, 2),
            p_mono1(2, -1, 1),
            PsdOp::poly(
                1,
                RingType::P,
                vec![],
                vec![(vec![1], vec![2], rat_int(1)), (vec![3], vec![-2], rat_int(4))],
            ),
        ];
        let neg_samples = vec![
            p_mono1(0, 1, 1),
            p_mono1(-2, -1, 3),
            PsdOp::poly(
                1,
                RingType::P,
                vec![],
                vec![(vec![0], vec![2], rat_int(1)), (vec![-1], vec![-1], rat_int(2))],
            ),
        ];
        for threshold in [1i64, 0] {
            let cfg = SplittingConfig::XSplit { var: 1, threshold };
            for a in samples.iter().chain(&neg_samples) {
                for b in samples.iter().chain(&neg_samples) {
                    let a = a.truncate(&[PosInf], &[Fin(-5)]);
                    let b = b.truncate(&[PosInf], &[Fin(-5)]);
                    let (ah, al) = split_with(&a, cfg);
                    let (bh, bl) = split_with(&b, cfg);
                    // high * high stays high, low * low stays low
                    let hh = ah.mul(&bh).unwrap();
                    let (_, spill) = split_with(&hh, cfg);
                    assert!(spill.is_zero(), "high part not closed");
                    let ll = al.mul(&bl).unwrap();
                    let (spill_high, _) = split_with(&ll, cfg);
                    assert!(spill_high.is_zero(), "low part not closed");
                }
            }
        }
    }

    #[test]
    fn ham_flow_examples() {
        let l = dressed_pair(-9);
        // H_m flow on P' is m_i [(L^(m - e_i))_+, L_i]
        for m in [[1u32, 1], [2, 0]] {
            let flow = ham_flow_form(&Functional::ResPower(m.to_vec()), &l).unwrap();
            for i in 0..2 {
                if m[i] == 0 {
                    assert!(flow.slot(i).is_zero());
                    continue;
                }
                let mut exps = m.to_vec();
                exps[i] -= 1;
                let w = l
                    .power_product(&exps)
                    .unwrap()
                    .to_p_type()
                    .plus_part();
                let want = w
                    .commutator(&l.slot(i).to_p_type())
                    .unwrap()
                    .scale(&rat_int(m[i] as i64));
                assert!(flow.slot(i).sub(&want).unwrap().is_zero());
            }
        }
        // stationary at (d1, d2)
        let deltas = OpTuple::deltas(2, RingType::P, vec![])
            .map(|s| Ok(s.truncate(&[PosInf, PosInf], &[Fin(-6), Fin(-6)])))
            .unwrap();
        let flow = ham_flow_form(&Functional::ResPower(vec![1, 1]), &deltas).unwrap();
        assert!(flow.is_zero());
        // an extractor functional whose gradient does not commute with L
        let bad = Functional::Poly(FuncPoly {
            terms: vec![(
                rat_int(1),
                vec![Extractor { slot: 0, xexp: vec![0, 0], dexp: vec![-1, -1] }],
            )],
        });
        assert!(matches!(
            ham_flow_form(&bad, &l),
            Err(Error::HypothesisFailed(_))
        ));
    }

    #[test]
    fn combined_flow_n2() {
        let deltas = OpTuple::deltas(2, RingType::P, vec![])
            .map(|s| Ok(s.truncate(&[PosInf, PosInf], &[Fin(-6), Fin(-6)])))
            .unwrap();
        assert!(combined_hamiltonian_flow_n2(&deltas, 3).unwrap().is_zero());
        assert!(combined_hamiltonian_flow_n2(&deltas, 1).unwrap().is_zero());

        let l = dressed_pair(-9);
        let m = 3u32;
        let flow = combined_hamiltonian_flow_n2(&l, m).unwrap();
        // independent binomial expansion of (L1 + L2)^2
        let lp = l.map(|s| Ok(s.to_p_type())).unwrap();
        let l1 = lp.slot(0);
        let l2 = lp.slot(1);
        let mut w = l1.mul(l1).unwrap();
        w = w.add(&l1.mul(l2).unwrap()).unwrap();
        w = w.add(&l2.mul(l1).unwrap()).unwrap();
        w = w.add(&l2.mul(l2).unwrap()).unwrap();
        let wp = w.plus_part();
        for i in 0..2 {
            let want = wp.commutator(lp.slot(i)).unwrap();
            assert!(flow.slot(i).sub(&want).unwrap().is_zero());
        }
        // cross-check against ham_flow_form of the combined functional
        let via_ham = ham_flow_form(&Functional::CombinedN2(m), &l).unwrap();
        for i in 0..2 {
            assert!(via_ham.slot(i).sub(flow.slot(i)).unwrap().is_zero());
        }
    }

    #[test]
    fn prop8_r_brackets_vanish() {
        let l = dressed_pair(-9);
        for m in [1u32, 2, 3] {
            for mp in [2u32, 3] {
                let a = Functional::CombinedN2(m);
                let b = Functional::CombinedN2(mp);
                assert_eq!(
                    bracket_r(&a, &b, &l, SplittingConfig::StandardPM).unwrap(),
                    Rat::zero(),
                    "{{H_{m}, H_{mp}}}_R != 0"
                );
            }
        }
        // P' is preserved to first order by the combined flow
        let flow = combined_hamiltonian_flow_n2(&l, 3).unwrap();
        let lp = l.map(|s| Ok(s.to_p_type())).unwrap();
        assert!(crate::hierarchy::pprime_tangency_check(&lp, &flow).unwrap());
    }

    #[test]
    fn remark5_coincidence_and_divergence() {
        // n = 1: the Hamiltonian field of H_m is m * V^(m-1)
        let l_op = {
            let s0 = PsdOp::poly(
                1,
                RingType::E,
                vec![],
                vec![
                    (vec![0], vec![0], rat_int(1)),
                    (vec![1], vec![-1], rat_int(1)),
                ],
            )
            .truncate(&[PosInf], &[Fin(-9)]);
            let s0inv = s0.inverse().unwrap();
            let d = PsdOp::delta(1, RingType::E, vec![], 1);
            s0inv.mul(&d).unwrap().mul(&s0).unwrap()
        };
        let l = OpTuple::new(vec![l_op]).unwrap();
        for m in [2u32, 3] {
            let ham = ham_flow_form(&Functional::ResPower(vec![m]), &l).unwrap();
            let v = crate::hierarchy::vfield(&l, &[m - 1])
                .unwrap()
                .map(|s| Ok(s.to_p_type()))
                .unwrap()
                .scale(&rat_int(m as i64));
            assert!(ham.slot(0).sub(v.slot(0)).unwrap().is_zero());
        }
        // n = 2: the two fields differ at a dressed point
        let l2 = dressed_pair(-9);
        let ham = ham_flow_form(&Functional::ResPower(vec![1, 1]), &l2).unwrap();
        let v = crate::hierarchy::vfield(&l2, &[1, 1])
            .unwrap()
            .map(|s| Ok(s.to_p_type()))
            .unwrap();
        let differs = (0..2).any(|i| !ham.slot(i).sub(v.slot(i)).unwrap().is_zero());
        assert!(differs, "Hamiltonian and hierarchy fields coincide unexpectedly at n = 2");
    }
}

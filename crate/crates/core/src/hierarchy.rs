//! The generalized KP hierarchy on P^n.
//!
//! Flows are labeled by nonnegative multi-indices m: the vector field is
//!
//! `V^m_L = ([(L^m)_+, L_1], ..., [(L^m)_+, L_n])`,   L^m = L_1^m1 ... L_n^mn
//!
//! and trajectories are formal Taylor solutions of dL/dt_m = V^m_L. Time is
//! nilpotent (truncated at the Taylor degree), so Picard iteration closes
//! after `degree` steps and everything stays rational.
//!
//! Trajectories are stored as explicit Taylor slices (one operator per
//! power of t). Keeping the slices separate means the t^0 data keeps its
//! original window instead of inheriting the coarser windows of the
//! higher corrections.

use std::collections::BTreeMap;

use num::Zero;

use crate::error::{Error, Result};
use crate::psdo::{OpTuple, PsdOp};
use crate::rational::{rat_int, Rat};
use crate::series::AuxParam;

/// A flow label and its Taylor truncation degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSpec {
    /// Multi-index time label (componentwise >= 0).
    pub m: Vec<u32>,
    /// Taylor truncation in the formal time (>= 1).
    pub degree: u32,
}

/// An operator-valued Taylor polynomial in one formal time.
#[derive(Clone, Debug)]
pub struct TimePoly {
    slices: Vec<PsdOp>,
}

impl TimePoly {
    /// A time-independent value, exactly: higher slices are the exact zero.
    pub fn constant(op: PsdOp, degree: u32) -> Self {
        let zero = PsdOp::zero(op.n(), op.ring(), op.aux().to_vec());
        let mut slices = vec![op];
        slices.resize(degree as usize + 1, zero);
        TimePoly { slices }
    }

    pub fn from_slices(slices: Vec<PsdOp>) -> Self {
        assert!(!slices.is_empty());
        TimePoly { slices }
    }

    pub fn degree(&self) -> u32 {
        (self.slices.len() - 1) as u32
    }

    pub fn slice(&self, j: u32) -> &PsdOp {
        &self.slices[j as usize]
    }

    pub fn slices(&self) -> &[PsdOp] {
        &self.slices
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(|s| s.is_zero())
    }

    pub fn add(&self, other: &TimePoly) -> Result<TimePoly> {
        let len = self.slices.len().min(other.slices.len());
        let mut slices = Vec::with_capacity(len);
        for j in 0..len {
            slices.push(self.slices[j].add(&other.slices[j])?);
        }
        Ok(TimePoly { slices })
    }

    pub fn sub(&self, other: &TimePoly) -> Result<TimePoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TimePoly {
        TimePoly { slices: self.slices.iter().map(|s| s.neg()).collect() }
    }

    /// Cauchy product in t, truncated at the common degree.
    pub fn mul(&self, other: &TimePoly) -> Result<TimePoly> {
        let len = self.slices.len().min(other.slices.len());
        let mut slices = Vec::with_capacity(len);
        for j in 0..len {
            let mut acc: Option<PsdOp> = None;
            for i in 0..=j {
                let term = self.slices[i].mul(&other.slices[j - i])?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
            }
            slices.push(acc.expect("nonempty convolution"));
        }
        Ok(TimePoly { slices })
    }

    pub fn commutator(&self, other: &TimePoly) -> Result<TimePoly> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn plus_part(&self) -> TimePoly {
        TimePoly { slices: self.slices.iter().map(|s| s.plus_part()).collect() }
    }

    pub fn minus_part(&self) -> TimePoly {
        TimePoly { slices: self.slices.iter().map(|s| s.minus_part()).collect() }
    }

    /// The formal `int_0^t`: slice j moves to j+1 with division; the top
    /// slice truncates away.
    pub fn integrate(&self) -> TimePoly {
        let mut slices = Vec::with_capacity(self.slices.len());
        slices.push(PsdOp::zero(
            self.slices[0].n(),
            self.slices[0].ring(),
            self.slices[0].aux().to_vec(),
        ));
        for j in 1..self.slices.len() {
            slices.push(self.slices[j - 1].scale(&(rat_int(1) / rat_int(j as i64))));
        }
        TimePoly { slices }
    }

    /// d/dt: slice j+1 scaled by j+1 moves down to j. The result is one
    /// degree shorter (the top derivative slice is not determined).
    pub fn deriv(&self) -> TimePoly {
        let mut slices: Vec<PsdOp> = (1..self.slices.len())
            .map(|j| self.slices[j].scale(&rat_int(j as i64)))
            .collect();
        if slices.is_empty() {
            slices.push(PsdOp::zero(
                self.slices[0].n(),
                self.slices[0].ring(),
                self.slices[0].aux().to_vec(),
            ));
        }
        TimePoly { slices }
    }

    /// Truncates to a lower degree.
    pub fn truncate_degree(&self, degree: u32) -> TimePoly {
        let top = (degree as usize).min(self.slices.len() - 1);
        TimePoly { slices: self.slices[..=top].to_vec() }
    }

    /// Multiplicative inverse by slice recursion from the t^0 inverse.
    pub fn inverse(&self) -> Result<TimePoly> {
        let inv0 = self.slices[0].inverse()?;
        let mut slices = vec![inv0.clone()];
        for j in 1..self.slices.len() {
            let mut acc: Option<PsdOp> = None;
            for i in 1..=j {
                let term = self.slices[i].mul(&slices[j - i])?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
            }
            slices.push(inv0.mul(&acc.expect("nonempty"))?.neg());
        }
        Ok(TimePoly { slices })
    }

    /// Assembles the aux-parameter representation `sum_j slice_j t^j`.
    pub fn to_aux_op(&self, name: &str) -> Result<PsdOp> {
        let first = &self.slices[0];
        let mut target = first.aux().to_vec();
        target.push(AuxParam::new(name, self.degree()));
        let mut acc = PsdOp::zero(first.n(), first.ring(), target.clone());
        for (j, s) in self.slices.iter().enumerate() {
            let lifted = s.lift_aux(&target)?.aux_shift(name, j as u32)?;
            acc = acc.add(&lifted)?;
        }
        Ok(acc)
    }
}

/// A trajectory of the hierarchy: Taylor slices of a tuple.
#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    /// One Taylor polynomial per slot.
    pub slots: Vec<TimePoly>,
}

impl FlowTrajectory {
    /// Setting t = 0 recovers the initial tuple.
    pub fn at_zero(&self) -> Result<OpTuple> {
        OpTuple::new(self.slots.iter().map(|s| s.slice(0).clone()).collect())
    }

    /// The tuple of t^j coefficients.
    pub fn slice(&self, j: u32) -> Result<OpTuple> {
        OpTuple::new(self.slots.iter().map(|s| s.slice(j).clone()).collect())
    }

    pub fn degree(&self) -> u32 {
        self.slots[0].degree()
    }
}

/// The hierarchy vector field V^m at a point of P^n.
pub fn vfield(l: &OpTuple, m: &[u32]) -> Result<OpTuple> {
    let w = l.power_product(m)?.plus_part();
    l.map(|slot| w.commutator(slot))
}

fn power_product_t(slots: &[TimePoly], m: &[u32]) -> Result<TimePoly> {
    let first = slots[0].slice(0);
    let one = PsdOp::one(first.n(), first.ring(), first.aux().to_vec());
    let mut acc = TimePoly::constant(one, slots[0].degree());
    for (slot, &e) in slots.iter().zip(m) {
        for _ in 0..e {
            acc = acc.mul(slot)?;
        }
    }
    Ok(acc)
}

/// V^m on a time-dependent tuple, slicewise.
pub fn vfield_t(slots: &[TimePoly], m: &[u32]) -> Result<Vec<TimePoly>> {
    let w = power_product_t(slots, m)?.plus_part();
    slots.iter().map(|s| w.commutator(s)).collect()
}

/// The formal-time Taylor solution of the hierarchy flow, by Picard
/// iteration in the nilpotent time.
pub fn flow_taylor(l0: &OpTuple, spec: &FlowSpec) -> Result<FlowTrajectory> {
    assert!(spec.degree >= 1);
    let base: Vec<TimePoly> = l0
        .slots()
        .iter()
        .map(|s| TimePoly::constant(s.clone(), spec.degree))
        .collect();
    let mut cur = base.clone();
    for _ in 0..spec.degree {
        let v = vfield_t(&cur, &spec.m)?;
        let mut next = Vec::with_capacity(base.len());
        for (b, vi) in base.iter().zip(&v) {
            next.push(b.add(&vi.integrate())?);
        }
        cur = next;
    }
    Ok(FlowTrajectory { slots: cur })
}

/// H_k(L) = res_P(L^k) for a time-free point.
pub fn conserved_quantity(l: &OpTuple, k: &[u32]) -> Result<Rat> {
    l.power_product(k)?.residue()
}

/// H_k along a trajectory: one residue per time degree.
pub fn hk_along(tr: &FlowTrajectory, k: &[u32]) -> Result<Vec<Rat>> {
    let p = power_product_t(&tr.slots, k)?;
    p.slices().iter().map(|s| s.residue()).collect()
}

/// H_k for an aux-carrying tuple, keyed by aux degrees.
pub fn hk_aux(l: &OpTuple, k: &[u32]) -> Result<BTreeMap<Vec<u32>, Rat>> {
    l.power_product(k)?.residue_aux()
}

/// True when H_k of the trajectory is time-independent at this truncation.
pub fn hk_is_conserved(tr: &FlowTrajectory, k: &[u32]) -> Result<bool> {
    let values = hk_along(tr, k)?;
    Ok(values[1..].iter().all(|v| v.is_zero()))
}

/// The Zakharov-Shabat residual
/// `d(L^m)_+/dt_k - d(L^k)_+/dt_m - [(L^k)_+, (L^m)_+]`,
/// with the time derivatives expanded through degree-1 flows.
pub fn zs_residual(l: &OpTuple, k: &[u32], m: &[u32]) -> Result<PsdOp> {
    let d_of = |flow_dir: &[u32], power: &[u32]| -> Result<PsdOp> {
        let tr = flow_taylor(l, &FlowSpec { m: flow_dir.to_vec(), degree: 1 })?;
        let p = power_product_t(&tr.slots, power)?.plus_part();
        Ok(p.slice(1).clone())
    };
    let a = d_of(k, m)?;
    let b = d_of(m, k)?;
    let bracket = l
        .power_product(k)?
        .plus_part()
        .commutator(&l.power_product(m)?.plus_part())?;
    a.sub(&b)?.sub(&bracket)
}

/// Sato-Wilson flow dS/dt_m = -(S d^m S^-1)_- S as a Taylor polynomial.
pub fn sato_wilson_flow(s0: &PsdOp, m: &[u32], degree: u32) -> Result<TimePoly> {
    assert!(degree >= 1);
    let n = s0.n();
    let dm = PsdOp::monomial(
        n,
        s0.ring(),
        s0.aux().to_vec(),
        vec![0; n],
        m.iter().map(|&e| e as i64).collect(),
        num::One::one(),
    );
    let dm = TimePoly::constant(dm, degree);
    let base = TimePoly::constant(s0.clone(), degree);
    let mut cur = base.clone();
    for _ in 0..degree {
        let sinv = cur.inverse()?;
        let core = cur.mul(&dm)?.mul(&sinv)?;
        let rhs = core.minus_part().mul(&cur)?.neg();
        cur = base.add(&rhs.integrate())?;
    }
    Ok(cur)
}

/// Checks that the Sato-Wilson trajectory induces the hierarchy flow on
/// L_i = S d_i S^-1: dL_i/dt = V^m_i mod t^degree.
pub fn sw_induced_check(s0: &PsdOp, m: &[u32], degree: u32) -> Result<bool> {
    let s = sato_wilson_flow(s0, m, degree)?;
    let n = s0.n();
    let sinv = s.inverse()?;
    let mut slots = Vec::with_capacity(n);
    for i in 1..=n {
        let di = TimePoly::constant(
            PsdOp::delta(n, s0.ring(), s0.aux().to_vec(), i),
            degree,
        );
        slots.push(s.mul(&di)?.mul(&sinv)?);
    }
    let v = vfield_t(&slots, m)?;
    for (slot, vi) in slots.iter().zip(&v) {
        let lhs = slot.deriv();
        let diff = lhs.sub(&vi.truncate_degree(lhs.degree()))?;
        if !diff.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tangency to the commuting variety: [X_i, L_j] = [X_j, L_i] for all
/// pairs.
pub fn pprime_tangency_check(l: &OpTuple, x: &OpTuple) -> Result<bool> {
    let n = l.n();
    for i in 0..n {
        for j in i + 1..n {
            let lhs = x.slot(i).commutator(l.slot(j))?;
            let rhs = x.slot(j).commutator(l.slot(i))?;
            if !lhs.sub(&rhs)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mixed-flow commutation: evolving in t_k then t_m agrees with the
/// reverse order mod both time caps. The k-flow runs in Taylor slices;
/// the m-flow runs in a nilpotent auxiliary time carried by the slices.
pub fn flow_commutation_check(
    l0: &OpTuple,
    k: &[u32],
    m: &[u32],
    degree: u32,
) -> Result<bool> {
    let mut target = l0.slot(0).aux().to_vec();
    target.push(AuxParam::new("tb", degree));
    let lifted = l0.lift_aux(&target)?;

    // path A: flow in t_m (aux time), then in t_k (slices)
    let tb_flowed = aux_flow(&lifted, m, degree, "tb")?;
    let path_a = flow_taylor(&tb_flowed, &FlowSpec { m: k.to_vec(), degree })?;

    // path B: flow in t_k (slices), then run the t_m Picard on the whole
    // sliced family, integrating in the aux time inside each slice
    let ta_flowed = flow_taylor(&lifted, &FlowSpec { m: k.to_vec(), degree })?;
    let base = ta_flowed.slots;
    let mut cur = base.clone();
    for _ in 0..degree {
        let v = vfield_t(&cur, m)?;
        let mut next = Vec::with_capacity(base.len());
        for (b, vi) in base.iter().zip(&v) {
            let integrated: Vec<PsdOp> = vi
                .slices()
                .iter()
                .map(|s| s.aux_integrate("tb"))
                .collect::<Result<_>>()?;
            next.push(b.add(&TimePoly::from_slices(integrated))?);
        }
        cur = next;
    }
    for (a, b) in path_a.slots.iter().zip(&cur) {
        if !a.sub(b)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Picard integration in a named nilpotent aux time already present in the
/// tuple signature.
fn aux_flow(l0: &OpTuple, m: &[u32], degree: u32, name: &str) -> Result<OpTuple> {
    let mut cur = l0.clone();
    for _ in 0..degree {
        let v = vfield(&cur, m)?;
        let integrated = v.map(|s| s.aux_integrate(name))?;
        cur = l0.add(&integrated)?;
    }
    Ok(cur)
}

/// Tangency of the field ([U_+, L_1], ..., [U_+, L_n]) to the invariant
/// variety { V(L)_- = 0 } for the word monomial V(L) = L_{i_1} ... L_{i_k}.
/// The word is a list of 1-based slot indices.
pub fn kdv_tangency_check(l: &OpTuple, word: &[usize], u: &PsdOp) -> Result<bool> {
    let n = l.n();
    let ring = l.slot(0).ring();
    let word_product_t = |t: &[TimePoly]| -> Result<TimePoly> {
        let one = PsdOp::one(n, ring, t[0].slice(0).aux().to_vec());
        let mut acc = TimePoly::constant(one, 1);
        for &i in word {
            acc = acc.mul(&t[i - 1])?;
        }
        Ok(acc)
    };
    let base: Vec<TimePoly> =
        l.slots().iter().map(|s| TimePoly::constant(s.clone(), 1)).collect();
    let v = word_product_t(&base)?;
    if !v.slice(0).minus_part().is_zero() {
        return Err(Error::ConstraintNotSatisfied(
            "the word monomial has a nonzero (-)-part at the base point".into(),
        ));
    }
    // first-order perturbation along the field, as a degree-1 Taylor slice
    let up = u.plus_part();
    let mut perturbed = Vec::with_capacity(n);
    for slot in l.slots() {
        let f = up.commutator(slot)?;
        perturbed.push(TimePoly::from_slices(vec![slot.clone(), f]));
    }
    let first_order = word_product_t(&perturbed)?;
    Ok(first_order.slice(1).minus_part().is_zero())
}

#[cfg(test)]

mod tests {
    use super::*;
    use crate::bound::{Fin, PosInf};
    use crate::psdo::RingType;
    use crate::rational::{rat, rat_int};

    fn deltas(n: usize) -> OpTuple {
        OpTuple::deltas(n, RingType::E, vec![])
            .map(|s| Ok(s.truncate(&vec![PosInf; s.n()], &vec![Fin(-8); s.n()])))
            .unwrap()
    }

    fn dressed_pair() -> OpTuple {
        // conjugate (d1, d2) by S0 in 1 + E_-
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
        .truncate(&[PosInf, PosInf], &[Fin(-16), Fin(-16)]);
        let s0inv = s0.inverse().unwrap();
        let slots: Vec<PsdOp> = (1..=2)
            .map(|i| {
                let di = PsdOp::delta(2, RingType::E, vec![], i);
                s0inv.mul(&di).unwrap().mul(&s0).unwrap()
            })
            .collect();
        OpTuple::new(slots).unwrap()
    }

    #[test]
    fn vfield_vanishes_on_deltas() {
        let l = deltas(2);
        assert!(vfield(&l, &[1, 0]).unwrap().is_zero());
        assert!(vfield(&l, &[0, 0]).unwrap().is_zero());
        assert!(vfield(&l, &[2, 1]).unwrap().is_zero());
    }

    #[test]
    fn classical_kp_vector_field() {
        // n = 1, L = d + u d^-1 with u = x^2: V^2 = [d^2 + 2u, L]
        let u = rat_int(1);
        let l_op = PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![
                (vec![0], vec![1], rat_int(1)),
                (vec![2], vec![-1], u.clone()),
            ],
        )
        .truncate(&[PosInf], &[Fin(-7)]);
        let l = OpTuple::new(vec![l_op.clone()]).unwrap();
        let v = vfield(&l, &[2]).unwrap();
        // hand-expanded (L^2)_+ = d^2 + 2u
        let w = PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![
                (vec![0], vec![2], rat_int(1)),
                (vec![2], vec![0], rat_int(2)),
            ],
        );
        let want = w.commutator(&l_op).unwrap();
        assert!(v.slot(0).sub(&want).unwrap().is_zero());
    }

    #[test]
    fn stationary_flow_at_deltas() {
        let l = deltas(2);
        let tr = flow_taylor(&l, &FlowSpec { m: vec![1, 1], degree: 3 }).unwrap();
        // trajectory is constant: all positive-degree slices vanish
        for slot in &tr.slots {
            for j in 1..=tr.degree() {
                assert!(slot.slice(j).is_zero());
            }
        }
        let back = tr.at_zero().unwrap();
        for (a, b) in back.slots().iter().zip(l.slots()) {
            assert!(a.same_terms(b));
        }
    }

    #[test]
    fn degree_one_flow_is_euler_step() {
        let l = dressed_pair();
        let spec = FlowSpec { m: vec![1, 0], degree: 1 };
        let tr = flow_taylor(&l, &spec).unwrap();
        let v = vfield(&l, &spec.m).unwrap();
        let t1 = tr.slice(1).unwrap();
        for (a, b) in t1.slots().iter().zip(v.slots()) {
            assert!(a.sub(b).unwrap().is_zero());
        }
    }

    #[test]
    fn flow_satisfies_its_ode() {
        let l = dressed_pair();
        let spec = FlowSpec { m: vec![0, 1], degree: 3 };
        let tr = flow_taylor(&l, &spec).unwrap();
        let v = vfield_t(&tr.slots, &spec.m).unwrap();
        for (i, slot) in tr.slots.iter().enumerate() {
            let lhs = slot.deriv();
            let diff = lhs.sub(&v[i].truncate_degree(lhs.degree())).unwrap();
            assert!(diff.is_zero(), "ODE defect in slot {i}");
        }
    }

    #[test]
    fn conserved_quantities() {
        let l = deltas(2);
        assert_eq!(conserved_quantity(&l, &[1, 0]).unwrap(), rat_int(0));
        assert_eq!(conserved_quantity(&l, &[2, 2]).unwrap(), rat_int(0));

        // n = 1: L = d + x^-1 d^-1 has H_1 = 1
        let l1 = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![0], vec![1], rat_int(1)),
                (vec![-1], vec![-1], rat_int(1)),
            ],
        );
        let t = OpTuple::new(vec![l1]).unwrap();
        assert_eq!(conserved_quantity(&t, &[1]).unwrap(), rat_int(1));
    }

    #[test]
    fn conservation_along_flow() {
        let l = dressed_pair();
        let tr = flow_taylor(&l, &FlowSpec { m: vec![1, 0], degree: 2 }).unwrap();
        for k in [[1, 0], [0, 1], [1, 1]] {
            assert!(
                hk_is_conserved(&tr, &k).unwrap(),
                "H_{k:?} drifts along the flow"
            );
            let before = conserved_quantity(&l, &k).unwrap();
            let along = hk_along(&tr, &k).unwrap();
            assert_eq!(before, along[0]);
        }
    }

    #[test]
    fn zs_residual_vanishes_on_dressed_points() {
        let l = dressed_pair();
        let r = zs_residual(&l, &[1, 0], &[0, 1]).unwrap();
        assert!(r.is_zero(), "ZS residual: {r}");
        let r2 = zs_residual(&deltas(2), &[2, 0], &[1, 1]).unwrap();
        assert!(r2.is_zero());
    }

    #[test]
    fn zs_residual_detects_noncommuting() {
        // (d1, d2 + x1 d2^-1) is not in P'
        let l1 = PsdOp::delta(2, RingType::E, vec![], 1)
            .truncate(&[PosInf, PosInf], &[Fin(-8), Fin(-8)]);
        let l2 = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![
                (vec![0, 0], vec![0, 1], rat_int(1)),
                (vec![1, 1], vec![0, -1], rat_int(1)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-8), Fin(-8)]);
        let t = OpTuple::new(vec![l1, l2]).unwrap();
        let r = zs_residual(&t, &[1, 0], &[0, 2]).unwrap();
        assert!(!r.is_zero());
    }

    #[test]
    fn sato_wilson_stationary_cases() {
        // S0 = 1: S(t) = 1
        let one = PsdOp::one(2, RingType::E, vec![])
            .truncate(&[PosInf, PosInf], &[Fin(-6), Fin(-6)]);
        let s = sato_wilson_flow(&one, &[1, 0], 2).unwrap();
        for j in 1..=s.degree() {
            assert!(s.slice(j).is_zero());
        }
        // constant-coefficient S0: (S d^m S^-1)_- = 0, so S(t) = S0
        let s0 = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![
                (vec![0, 0], vec![0, 0], rat_int(1)),
                (vec![0, 0], vec![-1, -2], rat(2, 3)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-8), Fin(-8)]);
        let st = sato_wilson_flow(&s0, &[1, 1], 2).unwrap();
        for j in 1..=st.degree() {
            assert!(st.slice(j).is_zero());
        }
    }

    #[test]
    fn sato_wilson_induces_hierarchy_flow() {
        let s0 = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![
                (vec![0, 0], vec![0, 0], rat_int(1)),
                (vec![1, 0], vec![0, -1], rat_int(1)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-12), Fin(-12)]);
        assert!(sw_induced_check(&s0, &[1, 0], 2).unwrap());
    }

    #[test]
    fn tangency_checks() {
        let l = dressed_pair();
        let v = vfield(&l, &[1, 1]).unwrap();
        assert!(pprime_tangency_check(&l, &v).unwrap());
        // any field ([U, L_1], ..., [U, L_n]) is tangent
        let u = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![
                (vec![1, 1], vec![0, -1], rat_int(2)),
                (vec![0, 0], vec![-1, 0], rat_int(1)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-8), Fin(-8)]);
        let f = l.map(|slot| u.commutator(slot)).unwrap();
        assert!(pprime_tangency_check(&l, &f).unwrap());
        // a non-tangent direction at (d1, d2): X = (x2, 0)
        let base = deltas(2);
        let x2 = PsdOp::xvar(2, RingType::E, vec![], 2);
        let zero = PsdOp::zero(2, RingType::E, vec![]);
        let bad = OpTuple::new(vec![x2, zero]).unwrap();
        assert!(!pprime_tangency_check(&base, &bad).unwrap());
    }

    #[test]
    fn flows_commute_on_dressed_points() {
        let l = dressed_pair();
        assert!(flow_commutation_check(&l, &[1, 0], &[0, 1], 2).unwrap());
    }

    #[test]
    fn kdv_invariant_variety() {
        // L = (d^2 + q)^(1/2): the constraint (L^2)_- = 0 holds on the window
        let schrodinger = PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![
                (vec![0], vec![2], rat_int(1)),
                (vec![1], vec![0], rat_int(1)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-8)]);
        let l_op = schrodinger.root(2).unwrap();
        let l = OpTuple::new(vec![l_op]).unwrap();
        let u = PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![
                (vec![1], vec![3], rat_int(1)),
                (vec![0], vec![-1], rat(1, 2)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-8)]);
        assert!(kdv_tangency_check(&l, &[1, 1], &u).unwrap());

        // (d1, d2): any word stays tangent
        let base = deltas(2);
        let w = PsdOp::poly(
            2,
            RingType::E,
            vec![],
            vec![(vec![1, 0], vec![2, 1], rat_int(1))],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-8), Fin(-8)]);
        assert!(kdv_tangency_check(&base, &[1, 2, 2], &w).unwrap());

        // violated constraint is rejected
        let bad = OpTuple::new(vec![PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![
                (vec![0], vec![1], rat_int(1)),
                (vec![1], vec![-1], rat_int(1)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-6)])])
        .unwrap();
        let w1 = PsdOp::delta(1, RingType::E, vec![], 1);
        assert!(matches!(
            kdv_tangency_check(&bad, &[1, 1], &w1),
            Err(Error::ConstraintNotSatisfied(_))
        ));
    }
}

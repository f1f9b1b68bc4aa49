//! The operator algebra: truncated elements of the rings P and E of formal
//! pseudo-differential operators in n variables.
//!
//! An operator is a finite table (x-exponents, d-exponents) -> rational,
//! multiplied by the Leibniz rule
//!
//! `(a d^i)(b d^j) = sum_k C(i,k) a d^k(b) d^(i+j-k)`
//!
//! applied per d-variable, with the generalized binomial C(i,k) =
//! i(i-1)...(i-k+1)/k! valid for negative i.
//!
//! Windows extend the series claims to the d-direction: `dfloor[j]` is the
//! exactness floor (coefficients of d_j-exponents at or above it are exact;
//! `-inf` means the tail is exact) and `dcap[j]` is a support cap claim
//! (the true object has no d_j-exponents above it). Caps are what make the
//! truncated Leibniz sum finite and the x-precision loss bounded.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::bound::{Ext, Fin, NegInf, PosInf};
use crate::error::{Error, Result};
use crate::rational::{binom_int, falling, rat_int, rat_to_string, Rat};
use crate::series::{AuxParam, Mode, XSeries};

/// Which coefficient ring the x-part lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingType {
    /// Taylor x-coefficients: E = k[[x1..xn]]((d1^-1))..((dn^-1)).
    E,
    /// Iterated-Laurent x-coefficients: P = k((x1))..((xn))((d1^-1))..((dn^-1)).
    P,
}

impl RingType {
    pub fn mode(self) -> Mode {
        match self {
            RingType::E => Mode::Taylor,
            RingType::P => Mode::Laurent,
        }
    }
}

/// Truncation window of an operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    /// Per x-variable support floor claim.
    pub xlo: Vec<Ext>,
    /// Per x-variable exactness cap.
    pub xhi: Vec<Ext>,
    /// Per d-variable exactness floor.
    pub dfloor: Vec<Ext>,
    /// Per d-variable support cap claim.
    pub dcap: Vec<Ext>,
}

impl Window {
    /// Window of an exactly known object with the given supports.
    fn exact(xlo: Vec<Ext>, dcap: Vec<Ext>) -> Self {
        let n = xlo.len();
        Window { xlo, xhi: vec![PosInf; n], dfloor: vec![NegInf; n], dcap }
    }
}

/// Sparse term key. Ordering is the canonical print order: d-exponents
/// descending with d_n most significant, then x-exponents descending,
/// then aux degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpKey {
    pub x: Vec<i64>,
    pub d: Vec<i64>,
    pub aux: Vec<u32>,
}

impl Ord for OpKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for j in (0..self.d.len()).rev() {
            match other.d[j].cmp(&self.d[j]) {
                std::cmp::Ordering::Equal => {}
                ord => return ord,
            }
        }
        match other.x.cmp(&self.x) {
            std::cmp::Ordering::Equal => self.aux.cmp(&other.aux),
            ord => ord,
        }
    }
}

impl PartialOrd for OpKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsdOp {
    n: usize,
    ring: RingType,
    aux: Vec<AuxParam>,
    terms: BTreeMap<OpKey, Rat>,
    win: Window,
}

impl PsdOp {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> RingType {
        self.ring
    }

    pub fn aux(&self) -> &[AuxParam] {
        &self.aux
    }

    pub fn terms(&self) -> &BTreeMap<OpKey, Rat> {
        &self.terms
    }

    pub fn window(&self) -> &Window {
        &self.win
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_terms(&self, other: &PsdOp) -> bool {
        self.terms == other.terms
    }

    pub fn zero(n: usize, ring: RingType, aux: Vec<AuxParam>) -> Self {
        PsdOp {
            n,
            ring,
            aux,
            terms: BTreeMap::new(),
            win: Window {
                xlo: vec![PosInf; n],
                xhi: vec![PosInf; n],
                dfloor: vec![NegInf; n],
                dcap: vec![NegInf; n],
            },
        }
    }

    /// A single exact term `c * x^xexp * d^dexp`.
    pub fn monomial(
        n: usize,
        ring: RingType,
        aux: Vec<AuxParam>,
        xexp: Vec<i64>,
        dexp: Vec<i64>,
        c: Rat,
    ) -> Self {
        if c.is_zero() {
            return Self::zero(n, ring, aux);
        }
        if ring == RingType::E {
            assert!(xexp.iter().all(|&e| e >= 0), "negative x-exponent in E");
        }
        let win = Window::exact(
            xexp.iter().map(|&e| Fin(e)).collect(),
            dexp.iter().map(|&e| Fin(e)).collect(),
        );
        let naux = aux.len();
        let mut terms = BTreeMap::new();
        terms.insert(OpKey { x: xexp, d: dexp, aux: vec![0; naux] }, c);
        PsdOp { n, ring, aux, terms, win }
    }

    pub fn constant(n: usize, ring: RingType, aux: Vec<AuxParam>, c: Rat) -> Self {
        Self::monomial(n, ring, aux, vec![0; n], vec![0; n], c)
    }

    pub fn one(n: usize, ring: RingType, aux: Vec<AuxParam>) -> Self {
        Self::constant(n, ring, aux, Rat::one())
    }

    /// The derivation d_i (1-based).
    pub fn delta(n: usize, ring: RingType, aux: Vec<AuxParam>, i: usize) -> Self {
        let mut dexp = vec![0i64; n];
        dexp[i - 1] = 1;
        Self::monomial(n, ring, aux, vec![0; n], dexp, Rat::one())
    }

    /// The multiplication operator x_i (1-based).
    pub fn xvar(n: usize, ring: RingType, aux: Vec<AuxParam>, i: usize) -> Self {
        let mut xexp = vec![0i64; n];
        xexp[i - 1] = 1;
        Self::monomial(n, ring, aux, xexp, vec![0; n], Rat::one())
    }

    /// Sum of exact monomials.
    pub fn poly(
        n: usize,
        ring: RingType,
        aux: Vec<AuxParam>,
        terms: Vec<(Vec<i64>, Vec<i64>, Rat)>,
    ) -> Self {
        let mut acc = Self::zero(n, ring, aux.clone());
        for (x, d, c) in terms {
            acc = acc
                .add(&Self::monomial(n, ring, aux.clone(), x, d, c))
                .expect("poly construction");
        }
        acc
    }

    /// Embeds a coefficient series as a d-degree-zero operator.
    pub fn from_series(s: &XSeries, ring: RingType) -> Self {
        let n = s.n();
        assert!(s.modes().iter().all(|&m| m == ring.mode()), "series mode / ring mismatch");
        let mut terms = BTreeMap::new();
        for (k, c) in s.terms() {
            terms.insert(
                OpKey { x: k.x.clone(), d: vec![0; n], aux: k.aux.clone() },
                c.clone(),
            );
        }
        let dcap = if terms.is_empty() { vec![NegInf; n] } else { vec![Fin(0); n] };
        PsdOp {
            n,
            ring,
            aux: s.aux().to_vec(),
            terms,
            win: Window {
                xlo: s.xlo().to_vec(),
                xhi: s.xhi().to_vec(),
                dfloor: vec![NegInf; n],
                dcap,
            },
        }
    }

    /// Extracts the coefficient series at a fixed d-exponent vector.
    pub fn coeff_series(&self, d: &[i64]) -> XSeries {
        let modes = vec![self.ring.mode(); self.n];
        let mut terms = Vec::new();
        for (k, c) in &self.terms {
            if k.d == d {
                terms.push((k.x.clone(), k.aux.clone(), c.clone()));
            }
        }
        let xlo: Vec<i64> = self
            .win
            .xlo
            .iter()
            .enumerate()
            .map(|(i, &lo)| match self.ring {
                RingType::E => 0,
                RingType::P => lo.finite_or(
                    terms.iter().map(|(x, _, _)| x[i]).min().unwrap_or(0).min(0),
                ),
            })
            .collect();
        XSeries::from_terms(modes, self.aux.clone(), terms, xlo, self.win.xhi.clone())
            .expect("coefficient extraction stays inside the window")
    }

    /// Distinct d-exponent vectors with nonzero coefficients.
    pub fn d_support(&self) -> Vec<Vec<i64>> {
        let mut seen: Vec<Vec<i64>> = Vec::new();
        for k in self.terms.keys() {
            if seen.last().map_or(true, |s| s != &k.d) && !seen.contains(&k.d) {
                seen.push(k.d.clone());
            }
        }
        seen
    }

    pub fn coeff(&self, x: &[i64], d: &[i64], aux: &[u32]) -> Rat {
        self.terms
            .get(&OpKey { x: x.to_vec(), d: d.to_vec(), aux: aux.to_vec() })
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    fn check_compat(&self, other: &PsdOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("n = {} vs {}", self.n, other.n)));
        }
        if self.ring != other.ring {
            return Err(Error::ModeMismatch("E-type vs P-type".into()));
        }
        if self.aux.len() != other.aux.len()
            || self.aux.iter().zip(&other.aux).any(|(a, b)| a.name != b.name)
        {
            return Err(Error::AuxMismatch("lift to a common signature first".into()));
        }
        Ok(())
    }

    fn combined_aux(&self, other: &PsdOp) -> Vec<AuxParam> {
        self.aux
            .iter()
            .zip(&other.aux)
            .map(|(a, b)| AuxParam { name: a.name.clone(), cap: a.cap.min(b.cap) })
            .collect()
    }

    pub fn add(&self, other: &PsdOp) -> Result<PsdOp> {
        self.check_compat(other)?;
        let aux = self.combined_aux(other);
        let n = self.n;
        let win = Window {
            xlo: (0..n).map(|i| self.win.xlo[i].min(other.win.xlo[i])).collect(),
            xhi: (0..n).map(|i| self.win.xhi[i].min(other.win.xhi[i])).collect(),
            dfloor: (0..n).map(|j| self.win.dfloor[j].max(other.win.dfloor[j])).collect(),
            dcap: (0..n).map(|j| self.win.dcap[j].max(other.win.dcap[j])).collect(),
        };
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(k.clone()).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|k, c| {
            !c.is_zero()
                && (0..n).all(|i| Fin(k.x[i]) <= win.xhi[i] && Fin(k.d[i]) >= win.dfloor[i])
                && k.aux.iter().zip(&aux).all(|(&d, p)| d <= p.cap)
        });
        Ok(PsdOp { n, ring: self.ring, aux, terms, win })
    }

    pub fn neg(&self) -> PsdOp {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &PsdOp) -> Result<PsdOp> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> PsdOp {
        let mut out = self.clone();
        if c.is_zero() {
            out.terms.clear();
            return out;
        }
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    /// Effective exactness floor used by the product rule: the claimed floor
    /// when finite, otherwise the stored support (an exact tail is complete
    /// inside the x-claims, so treating its minimum as the floor is sound).
    fn efloor(&self, j: usize) -> Ext {
        match self.win.dfloor[j] {
            Fin(f) => Fin(f),
            _ => self.terms.keys().map(|k| Fin(k.d[j])).min().unwrap_or(Fin(0)).min(Fin(0)),
        }
    }

    fn fully_exact(&self) -> bool {
        self.win.xhi.iter().all(|&h| h == PosInf)
            && self.win.dfloor.iter().all(|&f| f == NegInf)
    }

    /// Window of a Leibniz product, per the propagation rules. The floors
    /// bound the derivative counts, which in turn shrink the x-claims.
    fn product_window(&self, other: &PsdOp, floor_req: Option<&[Ext]>) -> Result<Window> {
        let n = self.n;
        let exact_pair = self.fully_exact() && other.fully_exact();
        let mut dfloor = Vec::with_capacity(n);
        for j in 0..n {
            let cand = (self.win.dfloor[j] + other.win.dcap[j])
                .max(other.win.dfloor[j] + self.win.dcap[j]);
            let mut f = if cand == NegInf && !exact_pair {
                (self.efloor(j) + other.win.dcap[j]).max(other.efloor(j) + self.win.dcap[j])
            } else {
                cand
            };
            if let Some(req) = floor_req {
                f = f.max(req[j]);
            }
            if f == NegInf {
                // exact tail requested: every stored pair must terminate
                for ka in self.terms.keys() {
                    for kb in other.terms.keys() {
                        if ka.d[j] < 0 && kb.x[j] < 0 {
                            return Err(Error::InfiniteTail);
                        }
                    }
                }
            }
            dfloor.push(f);
        }
        // Derivative-count bounds per variable, for claims and loop limits.
        // The floor-derived bound can be sharpened against the known
        // x-support of the differentiated (right) factor: when that factor
        // is fully x-exact and nonnegative in x_j, derivatives at counts
        // above its top x_j-exponent kill every term.
        let mut kmax_floor = vec![0i64; n];
        let mut kmax_known = vec![0i64; n];
        for j in 0..n {
            if let (Fin(ca), Fin(cb), Fin(f)) =
                (self.win.dcap[j], other.win.dcap[j], dfloor[j])
            {
                let fb = (ca + cb - f).max(0);
                kmax_floor[j] = fb;
                kmax_known[j] = fb;
                if other.win.xhi[j] == PosInf {
                    let mut bx: i64 = 0;
                    let mut unbounded = false;
                    for kb in other.terms.keys() {
                        if kb.x[j] < 0 {
                            unbounded = true;
                            break;
                        }
                        bx = bx.max(kb.x[j]);
                    }
                    if !unbounded {
                        kmax_known[j] = fb.min(bx);
                    }
                }
            }
        }
        let mut win = Window {
            xlo: Vec::with_capacity(n),
            xhi: Vec::with_capacity(n),
            dfloor,
            dcap: (0..n).map(|j| self.win.dcap[j] + other.win.dcap[j]).collect(),
        };
        for i in 0..n {
            let mut lo = (self.win.xlo[i] + other.win.xlo[i] - kmax_known[i])
                .min(self.win.xlo[i] + other.win.xhi[i] + 1 - kmax_floor[i]);
            if self.ring == RingType::E {
                lo = lo.max(Fin(0));
            }
            win.xlo.push(lo);
            win.xhi.push(
                (self.win.xhi[i] + other.win.xlo[i] - kmax_known[i])
                    .min(other.win.xhi[i] + self.win.xlo[i] - kmax_floor[i]),
            );
        }
        Ok(win)
    }

    /// Leibniz product. `floor_req` requests additional truncation of the
    /// output d-floors (used by inverse/root internals to bound tails).
    fn mul_impl(&self, other: &PsdOp, floor_req: Option<&[Ext]>) -> Result<PsdOp> {
        self.check_compat(other)?;
        let n = self.n;
        let aux = self.combined_aux(other);
        if self.terms.is_empty() || other.terms.is_empty() {
            let mut out = PsdOp::zero(n, self.ring, aux);
            for i in 0..n {
                out.win.xlo[i] = self.win.xlo[i] + other.win.xlo[i];
                out.win.xhi[i] = (self.win.xhi[i] + other.win.xlo[i])
                    .min(other.win.xhi[i] + self.win.xlo[i]);
                out.win.dfloor[i] = (self.win.dfloor[i] + other.win.dcap[i])
                    .max(other.win.dfloor[i] + self.win.dcap[i]);
                out.win.dcap[i] = self.win.dcap[i] + other.win.dcap[i];
            }
            return Ok(out);
        }

        let win = self.product_window(other, floor_req)?;
        let mut terms: BTreeMap<OpKey, Rat> = BTreeMap::new();
        let naux = aux.len();
        for (ka, ca) in &self.terms {
            'pairs: for (kb, cb) in &other.terms {
                let mut auxv = Vec::with_capacity(naux);
                for (t, p) in aux.iter().enumerate() {
                    let dsum = ka.aux[t] + kb.aux[t];
                    if dsum > p.cap {
                        continue 'pairs;
                    }
                    auxv.push(dsum);
                }
                // per-variable derivative ranges
                let mut kbound = Vec::with_capacity(n);
                for j in 0..n {
                    let mut b = i64::MAX;
                    if let Fin(f) = win.dfloor[j] {
                        b = b.min(ka.d[j] + kb.d[j] - f);
                    }
                    if ka.d[j] >= 0 {
                        b = b.min(ka.d[j]);
                    }
                    if kb.x[j] >= 0 {
                        b = b.min(kb.x[j]);
                    }
                    if b == i64::MAX {
                        return Err(Error::InfiniteTail);
                    }
                    if b < 0 {
                        continue 'pairs;
                    }
                    kbound.push(b);
                }
                let base = ca * cb;
                let mut k = vec![0i64; n];
                'kloop: loop {
                    // contribution for the current derivative multi-index
                    let mut coeff = base.clone();
                    for j in 0..n {
                        if k[j] > 0 {
                            coeff *= binom_int(ka.d[j], k[j] as u64);
                            coeff *= falling(kb.x[j], k[j] as u64);
                            if coeff.is_zero() {
                                break;
                            }
                        }
                    }
                    if !coeff.is_zero() {
                        let mut inside = true;
                        let mut x = Vec::with_capacity(n);
                        let mut d = Vec::with_capacity(n);
                        for j in 0..n {
                            let xe = ka.x[j] + kb.x[j] - k[j];
                            let de = ka.d[j] + kb.d[j] - k[j];
                            if Fin(xe) > win.xhi[j] || Fin(de) < win.dfloor[j] {
                                inside = false;
                                break;
                            }
                            x.push(xe);
                            d.push(de);
                        }
                        if inside {
                            let entry = terms
                                .entry(OpKey { x, d, aux: auxv.clone() })
                                .or_insert_with(Rat::zero);
                            *entry += coeff;
                        }
                    }
                    // advance the multi-index
                    for j in 0..n {
                        if k[j] < kbound[j] {
                            k[j] += 1;
                            continue 'kloop;
                        }
                        k[j] = 0;
                    }
                    break;
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(PsdOp { n, ring: self.ring, aux, terms, win })
    }

    /// Truncated Leibniz product on the propagated window.
    pub fn mul(&self, other: &PsdOp) -> Result<PsdOp> {
        self.mul_impl(other, None)
    }

    /// Leibniz product truncated at the requested d-floors.
    pub fn mul_to_floor(&self, other: &PsdOp, floors: &[Ext]) -> Result<PsdOp> {
        self.mul_impl(other, Some(floors))
    }

    pub fn commutator(&self, other: &PsdOp) -> Result<PsdOp> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Imposes a narrower window: lower x-caps and/or higher d-floors.
    pub fn truncate(&self, xhi: &[Ext], dfloor: &[Ext]) -> PsdOp {
        let mut out = self.clone();
        for i in 0..self.n {
            out.win.xhi[i] = out.win.xhi[i].min(xhi[i]);
            out.win.dfloor[i] = out.win.dfloor[i].max(dfloor[i]);
        }
        out.terms.retain(|k, _| {
            (0..self.n)
                .all(|i| Fin(k.x[i]) <= out.win.xhi[i] && Fin(k.d[i]) >= out.win.dfloor[i])
        });
        out
    }

    /// Order: the top d_n-exponent of the stored table.
    pub fn order(&self) -> Result<i64> {
        self.terms
            .keys()
            .map(|k| k.d[self.n - 1])
            .max()
            .ok_or(Error::ZeroOperator)
    }

    /// Exponent vector of the highest term (d_n most significant, then
    /// d_{n-1}, ...), over the aux-free part.
    pub fn nu(&self) -> Result<Vec<i64>> {
        let mut best: Option<&OpKey> = None;
        for k in self.terms.keys() {
            if k.aux.iter().any(|&a| a != 0) {
                continue;
            }
            best = match best {
                None => Some(k),
                Some(b) => {
                    if crate::series::cmp_iterated(&k.d, &b.d) == std::cmp::Ordering::Greater {
                        Some(k)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best.map(|k| k.d.clone()).ok_or(Error::ZeroOperator)
    }

    /// The highest term: the full leading x-series times d^nu.
    pub fn highest_term(&self) -> Result<PsdOp> {
        let nu = self.nu()?;
        let mut out = self.clone();
        out.terms.retain(|k, _| k.d == nu && k.aux.iter().all(|&a| a == 0));
        out.win.dcap = nu.iter().map(|&e| Fin(e)).collect();
        Ok(out)
    }

    /// Direct-sum split by the sign of the d_n-exponent: the (+)-part holds
    /// all terms with d_n-exponent >= 0, the (-)-part has order < 0.
    pub fn split(&self) -> (PsdOp, PsdOp) {
        let mut plus = self.clone();
        let mut minus = self.clone();
        plus.terms.retain(|k, _| k.d[self.n - 1] >= 0);
        minus.terms.retain(|k, _| k.d[self.n - 1] < 0);
        minus.win.dcap[self.n - 1] = minus.win.dcap[self.n - 1].min(Fin(-1));
        (plus, minus)
    }

    /// Positive part `(L)_+` of the split.
    pub fn plus_part(&self) -> PsdOp {
        self.split().0
    }

    /// Negative part `(L)_-` of the split.
    pub fn minus_part(&self) -> PsdOp {
        self.split().1
    }

    /// Checks that the residue cell (all exponents -1) is determined by the
    /// window.
    fn check_residue_window(&self) -> Result<()> {
        for i in 0..self.n {
            if self.win.xhi[i] < Fin(-1) {
                return Err(Error::WindowTooSmall(format!(
                    "residue cell x{}^-1 above the x-exactness cap",
                    i + 1
                )));
            }
            if self.win.dfloor[i] > Fin(-1) {
                return Err(Error::WindowTooSmall(format!(
                    "residue cell d{}^-1 below the d-exactness floor",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// res_P: the coefficient of x1^-1..xn^-1 d1^-1..dn^-1 (aux-free part).
    pub fn residue(&self) -> Result<Rat> {
        self.check_residue_window()?;
        Ok(self.coeff(&vec![-1; self.n], &vec![-1; self.n], &vec![0; self.aux.len()]))
    }

    /// Residue with the full aux-polynomial retained: one entry per aux
    /// degree vector.
    pub fn residue_aux(&self) -> Result<BTreeMap<Vec<u32>, Rat>> {
        self.check_residue_window()?;
        let mut out = BTreeMap::new();
        for (k, c) in &self.terms {
            if k.x.iter().all(|&e| e == -1) && k.d.iter().all(|&e| e == -1) {
                out.insert(k.aux.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Extends the aux signature (parameters matched by name).
    pub fn lift_aux(&self, target: &[AuxParam]) -> Result<PsdOp> {
        let mut map = Vec::with_capacity(self.aux.len());
        for p in &self.aux {
            let pos = target
                .iter()
                .position(|q| q.name == p.name)
                .ok_or_else(|| Error::AuxMismatch(format!("parameter {} missing", p.name)))?;
            map.push(pos);
        }
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut a = vec![0u32; target.len()];
            let mut fits = true;
            for (j, &pos) in map.iter().enumerate() {
                if k.aux[j] > target[pos].cap {
                    fits = false;
                    break;
                }
                a[pos] = k.aux[j];
            }
            if fits {
                terms.insert(OpKey { x: k.x.clone(), d: k.d.clone(), aux: a }, c.clone());
            }
        }
        let mut out = self.clone();
        out.aux = target.to_vec();
        out.terms = terms;
        Ok(out)
    }

    /// Termwise formal `int_0^t` in the named aux parameter.
    pub fn aux_integrate(&self, name: &str) -> Result<PsdOp> {
        let j = self.aux_index(name)?;
        let cap = self.aux[j].cap;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = k.aux[j] + 1;
            if d > cap {
                continue;
            }
            let mut nk = k.clone();
            nk.aux[j] = d;
            terms.insert(nk, c / rat_int(d as i64));
        }
        let mut out = self.clone();
        out.terms = terms;
        Ok(out)
    }

    /// Termwise d/dt in the named aux parameter.
    pub fn aux_deriv(&self, name: &str) -> Result<PsdOp> {
        let j = self.aux_index(name)?;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = k.aux[j];
            if d == 0 {
                continue;
            }
            let mut nk = k.clone();
            nk.aux[j] = d - 1;
            terms.insert(nk, c * rat_int(d as i64));
        }
        let mut out = self.clone();
        out.terms = terms;
        Ok(out)
    }

    /// Coefficient of t^k in the named aux parameter (parameter kept in the
    /// signature with exponent zero).
    pub fn aux_coeff(&self, name: &str, deg: u32) -> Result<PsdOp> {
        let j = self.aux_index(name)?;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            if k.aux[j] == deg {
                let mut nk = k.clone();
                nk.aux[j] = 0;
                terms.insert(nk, c.clone());
            }
        }
        let mut out = self.clone();
        out.terms = terms;
        Ok(out)
    }

    /// Removes an aux parameter whose exponent is everywhere zero.
    pub fn without_aux(&self, name: &str) -> Result<PsdOp> {
        let j = self.aux_index(name)?;
        if self.terms.keys().any(|k| k.aux[j] != 0) {
            return Err(Error::TimeDependent);
        }
        let mut aux = self.aux.clone();
        aux.remove(j);
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut a = k.aux.clone();
            a.remove(j);
            terms.insert(OpKey { x: k.x.clone(), d: k.d.clone(), aux: a }, c.clone());
        }
        let mut out = self.clone();
        out.aux = aux;
        out.terms = terms;
        Ok(out)
    }

    /// Multiplies by t^deg in the named aux parameter (degrees above the
    /// cap vanish).
    pub fn aux_shift(&self, name: &str, deg: u32) -> Result<PsdOp> {
        let j = self.aux_index(name)?;
        let cap = self.aux[j].cap;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = k.aux[j] + deg;
            if d > cap {
                continue;
            }
            let mut nk = k.clone();
            nk.aux[j] = d;
            terms.insert(nk, c.clone());
        }
        let mut out = self.clone();
        out.terms = terms;
        Ok(out)
    }

    fn aux_index(&self, name: &str) -> Result<usize> {
        self.aux
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::AuxMismatch(format!("no aux parameter named {name}")))
    }

    /// True iff the operator commutes with every d_i and every x_i on the
    /// window; the center of P is the constants, so this isolates them.
    pub fn commutes_with_generators(&self) -> Result<bool> {
        for i in 1..=self.n {
            let di = PsdOp::delta(self.n, self.ring, self.aux.clone(), i);
            if !self.commutator(&di)?.is_zero() {
                return Ok(false);
            }
            let xi = PsdOp::xvar(self.n, self.ring, self.aux.clone(), i);
            if !self.commutator(&xi)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Multiplicative inverse on a (possibly shrunken) reported window.
    ///
    /// The highest term f d^nu is factored off; f must be invertible in the
    /// coefficient ring (for E this is the Prop-style unit criterion). The
    /// remaining tail is summed geometrically and the defining equations
    /// L*inv = inv*L = 1 are verified on their propagated windows.
    pub fn inverse(&self) -> Result<PsdOp> {
        let nu = self.nu()?;
        let f = self.coeff_series(&nu);
        let finv = f.inverse().map_err(|e| match e {
            Error::NotAUnit => Error::NotInvertibleInE,
            other => other,
        })?;
        // target floors: the relative depth of the input window below nu,
        // measured from -nu
        let floors: Vec<Ext> = (0..self.n)
            .map(|j| self.win.dfloor[j] - 2 * nu[j])
            .collect();
        let neg_nu: Vec<i64> = nu.iter().map(|&e| -e).collect();
        let mono = PsdOp::monomial(
            self.n,
            self.ring,
            self.aux.clone(),
            vec![0; self.n],
            neg_nu,
            Rat::one(),
        );
        let hinv = mono.mul_to_floor(&PsdOp::from_series(&finv, self.ring), &floors)?;
        let one = PsdOp::one(self.n, self.ring, self.aux.clone());
        let tail = hinv.mul_to_floor(self, &floors)?.sub(&one)?;
        // a tail term whose powers never leave the window makes the
        // geometric sum infinite; demand a finite bound in some direction
        for k in tail.terms().keys() {
            let dies = k.aux.iter().any(|&a| a > 0)
                || (0..self.n).any(|j| {
                    (k.d[j] < 0 && floors[j].is_finite())
                        || (k.x[j] > 0 && tail.win.xhi[j].is_finite())
                });
            if !dies {
                return Err(Error::InfiniteTail);
            }
        }
        let inv = if tail.is_zero() && tail.fully_exact() {
            hinv
        } else {
            let mut acc = one.clone();
            let mut pow = one.clone();
            let mut budget: i64 = 64;
            for j in 0..self.n {
                if let (Fin(c), Fin(fl)) = (tail.win.dcap[j], floors[j]) {
                    budget += 4 * (c - fl).max(0);
                }
                if let (Fin(h), Fin(l)) = (tail.win.xhi[j], tail.win.xlo[j]) {
                    budget += 4 * (h - l).max(0);
                }
            }
            for p in &self.aux {
                budget += 4 * p.cap as i64;
            }
            let mut k = 0i64;
            loop {
                k += 1;
                if k > budget {
                    return Err(Error::InfiniteTail);
                }
                pow = pow.mul_to_floor(&tail, &floors)?;
                if pow.is_zero() && pow.fully_exact() {
                    break;
                }
                let signed = if k % 2 == 0 { pow.clone() } else { pow.neg() };
                acc = acc.add(&signed)?;
                if pow.is_zero() {
                    break;
                }
            }
            acc.mul_to_floor(&hinv, &floors)?
        };
        // verify the defining equations on the propagated windows
        let lhs = self.mul(&inv)?;
        let rhs = inv.mul(self)?;
        if !lhs.sub(&one)?.is_zero() || !rhs.sub(&one)?.is_zero() {
            return Err(Error::PrecisionLoss("inverse verification failed".into()));
        }
        Ok(inv)
    }

    /// Principal m-th root on the reported window, by a fixed-slope Newton
    /// iteration from the root of the highest term.
    pub fn root(&self, m: u32) -> Result<PsdOp> {
        assert!(m >= 1);
        if m == 1 {
            return Ok(self.clone());
        }
        let nu = self.nu()?;
        if nu.iter().any(|&e| e % m as i64 != 0) {
            return Err(Error::ExponentNotDivisible(m));
        }
        let f = self.coeff_series(&nu);
        let r0 = f.root(m)?;
        let nu_m: Vec<i64> = nu.iter().map(|&e| e / m as i64).collect();
        let floors: Vec<Ext> = (0..self.n)
            .map(|j| self.win.dfloor[j] - nu[j] + nu_m[j])
            .collect();
        let mono = PsdOp::monomial(
            self.n,
            self.ring,
            self.aux.clone(),
            vec![0; self.n],
            nu_m.clone(),
            Rat::one(),
        );
        let mut cand = PsdOp::from_series(&r0, self.ring).mul_to_floor(&mono, &floors)?;
        // fixed preconditioner: (m * cand0^(m-1))^-1
        let mut pre = PsdOp::one(self.n, self.ring, self.aux.clone());
        for _ in 0..m - 1 {
            pre = pre.mul_to_floor(&cand, &floors)?;
        }
        let pre_inv = pre.scale(&rat_int(m as i64)).inverse()?;
        let mut budget: i64 = 32;
        for j in 0..self.n {
            if let (Fin(c), Fin(fl)) = (self.win.dcap[j], floors[j]) {
                budget += 2 * (c - fl).max(0);
            }
            if let (Fin(h), Fin(l)) = (self.win.xhi[j], self.win.xlo[j]) {
                budget += 2 * (h - l).max(0);
            }
        }
        for _ in 0..budget {
            let mut powm = PsdOp::one(self.n, self.ring, self.aux.clone());
            for _ in 0..m {
                powm = powm.mul_to_floor(&cand, &floors)?;
            }
            let residual = self.sub(&powm)?;
            if residual.is_zero() {
                return Ok(cand);
            }
            let delta = pre_inv.mul_to_floor(&residual, &floors)?;
            if delta.is_zero() {
                return Err(Error::PrecisionLoss(
                    "root correction vanished before the residual".into(),
                ));
            }
            cand = cand.add(&delta)?;
        }
        Err(Error::PrecisionLoss("root iteration did not converge".into()))
    }

    /// The symbol: z-exponents replace d-exponents.
    pub fn symbol(&self) -> Symbol {
        Symbol { inner: self.clone() }
    }

    /// Coefficientwise x_i-derivative: the derivation of the coefficient
    /// ring extended termwise (1-based). Equals [d_i, .] as an operator
    /// identity.
    pub fn x_deriv(&self, i: usize) -> PsdOp {
        let idx = i - 1;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let e = k.x[idx];
            if e == 0 {
                continue;
            }
            let mut nk = k.clone();
            nk.x[idx] = e - 1;
            let nc = c * rat_int(e);
            if !nc.is_zero() {
                terms.insert(nk, nc);
            }
        }
        let mut out = self.clone();
        out.terms = terms;
        out.win.xhi[idx] = out.win.xhi[idx] - 1;
        if self.ring == RingType::P {
            out.win.xlo[idx] = out.win.xlo[idx] - 1;
        }
        out
    }

    /// Coefficientwise antiderivative in x_i with integration constant 0.
    pub fn x_antideriv(&self, i: usize) -> Result<PsdOp> {
        let idx = i - 1;
        if self.terms.keys().any(|k| k.x[idx] == -1) {
            return Err(Error::ResidueObstruction(i));
        }
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let e = k.x[idx];
            let mut nk = k.clone();
            nk.x[idx] = e + 1;
            terms.insert(nk, c / rat_int(e + 1));
        }
        let mut out = self.clone();
        out.terms = terms;
        out.win.xhi[idx] = out.win.xhi[idx] + 1;
        out.win.xlo[idx] = out.win.xlo[idx] + 1;
        Ok(out)
    }

    /// Tightens the support-cap claims to the stored support. Sound when
    /// the x-part is fully exact: nothing can hide above the caps then.
    pub fn tighten_dcap(mut self) -> PsdOp {
        if self.win.xhi.iter().all(|&h| h == PosInf) {
            for j in 0..self.n {
                let stored =
                    self.terms.keys().map(|k| Fin(k.d[j])).max().unwrap_or(NegInf);
                self.win.dcap[j] = self.win.dcap[j].min(stored);
            }
        }
        self
    }

    /// Terms at d_n-level m, with that exponent removed. Errors when the
    /// level lies below the exactness floor.
    pub fn dn_level(&self, m: i64) -> Result<PsdOp> {
        let last = self.n - 1;
        if Fin(m) < self.win.dfloor[last] {
            return Err(Error::WindowTooSmall(format!(
                "d{}-level {} below the exactness floor",
                self.n, m
            )));
        }
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            if k.d[last] == m {
                let mut nk = k.clone();
                nk.d[last] = 0;
                terms.insert(nk, c.clone());
            }
        }
        let mut out = self.clone();
        out.terms = terms;
        out.win.dfloor[last] = NegInf;
        out.win.dcap[last] = Fin(0);
        Ok(out.tighten_dcap())
    }

    /// Right multiplication by d_n^m: an exact exponent shift.
    pub fn shift_dn(&self, m: i64) -> PsdOp {
        let last = self.n - 1;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut nk = k.clone();
            nk.d[last] += m;
            terms.insert(nk, c.clone());
        }
        let mut out = self.clone();
        out.terms = terms;
        out.win.dfloor[last] = out.win.dfloor[last] + m;
        out.win.dcap[last] = out.win.dcap[last] + m;
        out
    }

    /// True when every stored term is constant in x.
    pub fn is_x_free(&self) -> bool {
        self.terms.keys().all(|k| k.x.iter().all(|&e| e == 0))
    }

    /// Embeds into P (Taylor coefficients are Laurent series too).
    pub fn to_p_type(&self) -> PsdOp {
        let mut out = self.clone();
        out.ring = RingType::P;
        out
    }

    /// Replaces the stored table; the window is kept, so this is only for
    /// projections that partition existing terms.
    pub(crate) fn set_terms(&mut self, terms: BTreeMap<OpKey, Rat>) {
        self.terms = terms;
    }
}

/// res_P(L M). The product is truncated at d-floor -1, which is all the
/// residue cell needs.
pub fn pair(a: &PsdOp, b: &PsdOp) -> Result<Rat> {
    a.mul_to_floor(b, &vec![Fin(-1); a.n()])?.residue()
}

/// Commutative shadow of an operator: same table with d read as z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    inner: PsdOp,
}

impl Symbol {
    pub fn table(&self) -> &PsdOp {
        &self.inner
    }

    pub fn same_terms(&self, other: &Symbol) -> bool {
        self.inner.same_terms(&other.inner)
    }

    /// The star product `F * G = sum_{alpha >= 0} (1/alpha!) D^alpha F d^alpha G`
    /// evaluated as a finite truncated sum. This is an independent route to
    /// the operator product: sigma(L M) = sigma(L) * sigma(M).
    pub fn star(&self, other: &Symbol) -> Result<Symbol> {
        let a = &self.inner;
        let b = &other.inner;
        a.check_compat(b)?;
        let n = a.n;
        // mirror the product's floor rule to bound the alpha sum
        let exact_pair = a.fully_exact() && b.fully_exact();
        let mut dfloor = Vec::with_capacity(n);
        for j in 0..n {
            let cand =
                (a.win.dfloor[j] + b.win.dcap[j]).max(b.win.dfloor[j] + a.win.dcap[j]);
            let f = if cand == NegInf && !exact_pair {
                (a.efloor(j) + b.win.dcap[j]).max(b.efloor(j) + a.win.dcap[j])
            } else {
                cand
            };
            dfloor.push(f);
        }
        let mut amax = vec![0i64; n];
        for j in 0..n {
            let mut bound: i64 = 0;
            for ka in a.terms.keys() {
                for kb in b.terms.keys() {
                    let mut t = i64::MAX;
                    if let Fin(f) = dfloor[j] {
                        t = t.min(ka.d[j] + kb.d[j] - f);
                    }
                    if ka.d[j] >= 0 {
                        t = t.min(ka.d[j]);
                    }
                    if kb.x[j] >= 0 {
                        t = t.min(kb.x[j]);
                    }
                    if t == i64::MAX {
                        return Err(Error::InfiniteTail);
                    }
                    bound = bound.max(t);
                }
            }
            amax[j] = bound;
        }

        let mut acc = PsdOp::zero(n, a.ring, a.combined_aux(b));
        let mut alpha = vec![0i64; n];
        'aloop: loop {
            // (1/alpha!) D^alpha a  (z-side derivative)
            let mut left = a.clone();
            let mut right = b.clone();
            let mut fact = Rat::one();
            for j in 0..n {
                for s in 0..alpha[j] {
                    fact *= rat_int(s + 1);
                    left = zderiv(&left, j);
                    right = xderiv(&right, j);
                }
            }
            let term = commutative_mul(&left, &right)?.scale(&(Rat::one() / fact));
            acc = acc.add(&term)?;
            for j in 0..n {
                if alpha[j] < amax[j] {
                    alpha[j] += 1;
                    continue 'aloop;
                }
                alpha[j] = 0;
            }
            break;
        }
        // claims: the star sum is the same truncated computation as the
        // operator product, so it reports the same window
        acc.win = a.product_window(b, None)?;
        acc.terms.retain(|k, _| {
            (0..n).all(|i| Fin(k.x[i]) <= acc.win.xhi[i] && Fin(k.d[i]) >= acc.win.dfloor[i])
        });
        Ok(Symbol { inner: acc })
    }
}

/// Termwise z-derivative D_j on a symbol table (0-based variable).
fn zderiv(s: &PsdOp, j: usize) -> PsdOp {
    let mut out = s.clone();
    let mut terms = BTreeMap::new();
    for (k, c) in &s.terms {
        let e = k.d[j];
        if e == 0 {
            continue;
        }
        let mut nk = k.clone();
        nk.d[j] = e - 1;
        let nc = c * rat_int(e);
        if !nc.is_zero() {
            terms.insert(nk, nc);
        }
    }
    out.terms = terms;
    out
}

/// Termwise x-derivative d_j on a symbol table (0-based variable).
fn xderiv(s: &PsdOp, j: usize) -> PsdOp {
    let mut out = s.clone();
    let mut terms = BTreeMap::new();
    for (k, c) in &s.terms {
        let e = k.x[j];
        if e == 0 {
            continue;
        }
        let mut nk = k.clone();
        nk.x[j] = e - 1;
        let nc = c * rat_int(e);
        if !nc.is_zero() {
            terms.insert(nk, nc);
        }
    }
    out.terms = terms;
    out
}

/// Plain commutative convolution of two tables (exponents add).
fn commutative_mul(a: &PsdOp, b: &PsdOp) -> Result<PsdOp> {
    let n = a.n;
    let aux = a.combined_aux(b);
    let mut out = PsdOp::zero(n, a.ring, aux.clone());
    let mut terms: BTreeMap<OpKey, Rat> = BTreeMap::new();
    for (ka, ca) in &a.terms {
        'pairs: for (kb, cb) in &b.terms {
            let mut auxv = Vec::with_capacity(aux.len());
            for (t, p) in aux.iter().enumerate() {
                let dsum = ka.aux[t] + kb.aux[t];
                if dsum > p.cap {
                    continue 'pairs;
                }
                auxv.push(dsum);
            }
            let x: Vec<i64> = (0..n).map(|i| ka.x[i] + kb.x[i]).collect();
            let d: Vec<i64> = (0..n).map(|i| ka.d[i] + kb.d[i]).collect();
            let entry = terms.entry(OpKey { x, d, aux: auxv }).or_insert_with(Rat::zero);
            *entry += ca * cb;
        }
    }
    terms.retain(|_, c| !c.is_zero());
    out.terms = terms;
    Ok(out)
}

/// A point of P^n: one operator per slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTuple {
    slots: Vec<PsdOp>,
}

impl OpTuple {
    pub fn new(slots: Vec<PsdOp>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::DimensionMismatch("empty tuple".into()));
        }
        let n = slots[0].n();
        if slots.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "tuple has {} slots for n = {}",
                slots.len(),
                n
            )));
        }
        for s in &slots[1..] {
            slots[0].check_compat(s)?;
        }
        Ok(OpTuple { slots })
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[PsdOp] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> &PsdOp {
        &self.slots[i]
    }

    /// The stationary tuple (d1, ..., dn).
    pub fn deltas(n: usize, ring: RingType, aux: Vec<AuxParam>) -> Self {
        OpTuple {
            slots: (1..=n).map(|i| PsdOp::delta(n, ring, aux.clone(), i)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&PsdOp) -> Result<PsdOp>) -> Result<OpTuple> {
        let mut slots = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            slots.push(f(s)?);
        }
        Ok(OpTuple { slots })
    }

    pub fn add(&self, other: &OpTuple) -> Result<OpTuple> {
        let mut slots = Vec::with_capacity(self.slots.len());
        for (a, b) in self.slots.iter().zip(&other.slots) {
            slots.push(a.add(b)?);
        }
        Ok(OpTuple { slots })
    }

    pub fn sub(&self, other: &OpTuple) -> Result<OpTuple> {
        let mut slots = Vec::with_capacity(self.slots.len());
        for (a, b) in self.slots.iter().zip(&other.slots) {
            slots.push(a.sub(b)?);
        }
        Ok(OpTuple { slots })
    }

    pub fn scale(&self, c: &Rat) -> OpTuple {
        OpTuple { slots: self.slots.iter().map(|s| s.scale(c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.slots.iter().all(|s| s.is_zero())
    }

    /// True iff all pairwise commutators vanish on the window (membership
    /// in the commuting variety P').
    pub fn commutes(&self) -> Result<bool> {
        for i in 0..self.slots.len() {
            for j in i + 1..self.slots.len() {
                if !self.slots[i].commutator(&self.slots[j])?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The pairing extended slotwise: sum_i <L_i, M_i>.
    pub fn pair(&self, other: &OpTuple) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (a, b) in self.slots.iter().zip(&other.slots) {
            acc += pair(a, b)?;
        }
        Ok(acc)
    }

    pub fn lift_aux(&self, target: &[AuxParam]) -> Result<OpTuple> {
        self.map(|s| s.lift_aux(target))
    }

    /// The product L1^(m1) ... Ln^(mn) for a nonnegative multi-index.
    pub fn power_product(&self, m: &[u32]) -> Result<PsdOp> {
        let first = &self.slots[0];
        let mut acc = PsdOp::one(first.n(), first.ring(), first.aux().to_vec());
        for (slot, &e) in self.slots.iter().zip(m) {
            for _ in 0..e {
                acc = acc.mul(slot)?;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for PsdOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", rat_to_string(c))?;
            for (j, &a) in k.aux.iter().enumerate() {
                if a != 0 {
                    write!(f, "*{}^{}", self.aux[j].name, a)?;
                }
            }
            for (i, &e) in k.x.iter().enumerate() {
                if e != 0 {
                    write!(f, "*x{}^{}", i + 1, e)?;
                }
            }
            for (i, &e) in k.d.iter().enumerate() {
                if e != 0 {
                    write!(f, "*d{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn d(n: usize, i: usize) -> PsdOp {
        PsdOp::delta(n, RingType::P, vec![], i)
    }

    fn x(n: usize, i: usize) -> PsdOp {
        PsdOp::xvar(n, RingType::P, vec![], i)
    }

    fn mono1(xe: i64, de: i64, c: i64) -> PsdOp {
        PsdOp::monomial(1, RingType::P, vec![], vec![xe], vec![de], rat_int(c))
    }

    #[test]
    fn heisenberg_relation() {
        // d * x = x d + 1
        let p = d(1, 1).mul(&x(1, 1)).unwrap();
        let want = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![1], vec![1], rat_int(1)), (vec![0], vec![0], rat_int(1))],
        );
        assert_eq!(p.terms(), want.terms());
        // [d, x] = 1
        let c = d(1, 1).commutator(&x(1, 1)).unwrap();
        assert!(c.same_terms(&PsdOp::one(1, RingType::P, vec![])));
    }

    #[test]
    fn dinv_times_x_expansion() {
        // d^-1 x = x d^-1 - d^-2 exactly (higher corrections vanish)
        let dinv = mono1(0, -1, 1);
        let p = dinv.mul(&x(1, 1)).unwrap();
        let want = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![1], vec![-1], rat_int(1)), (vec![0], vec![-2], rat_int(-1))],
        );
        assert_eq!(p.terms(), want.terms());
        assert!(p.window().dfloor.iter().all(|&f| f == NegInf));
        // [d^-1, x] = -d^-2
        let c = dinv.commutator(&x(1, 1)).unwrap();
        assert!(c.same_terms(&mono1(0, -2, -1)));
    }

    #[test]
    fn square_of_d_plus_x() {
        // (d + x)^2 = d^2 + 2xd + x^2 + 1
        let s = d(1, 1).add(&x(1, 1)).unwrap();
        let sq = s.mul(&s).unwrap();
        let want = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![0], vec![2], rat_int(1)),
                (vec![1], vec![1], rat_int(2)),
                (vec![2], vec![0], rat_int(1)),
                (vec![0], vec![0], rat_int(1)),
            ],
        );
        assert_eq!(sq.terms(), want.terms());
    }

    #[test]
    fn commuting_derivations() {
        assert!(d(2, 1).commutator(&d(2, 2)).unwrap().is_zero());
    }

    #[test]
    fn order_nu_examples() {
        // L = x1 d1^2 d2^-3 + d1^5 d2^-4 (n=2): ord = -3, nu = (2,-3)
        let l = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![1, 0], vec![2, -3], rat_int(1)),
                (vec![0, 0], vec![5, -4], rat_int(1)),
            ],
        );
        assert_eq!(l.order().unwrap(), -3);
        assert_eq!(l.nu().unwrap(), vec![2, -3]);
        let ht = l.highest_term().unwrap();
        assert!(ht.same_terms(&PsdOp::monomial(
            2,
            RingType::P,
            vec![],
            vec![1, 0],
            vec![2, -3],
            rat_int(1)
        )));

        assert_eq!(mono1(0, -1, 1).order().unwrap(), -1);
        assert_eq!(PsdOp::zero(1, RingType::P, vec![]).order(), Err(Error::ZeroOperator));
    }

    #[test]
    fn split_examples() {
        // split(d2 + d2^-1 + d1^-1) with n=2: plus = d2 + d1^-1, minus = d2^-1
        let l = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![0, 0], vec![0, 1], rat_int(1)),
                (vec![0, 0], vec![0, -1], rat_int(1)),
                (vec![0, 0], vec![-1, 0], rat_int(1)),
            ],
        );
        let (plus, minus) = l.split();
        let want_plus = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![0, 0], vec![0, 1], rat_int(1)),
                (vec![0, 0], vec![-1, 0], rat_int(1)),
            ],
        );
        assert!(plus.same_terms(&want_plus));
        assert!(minus.same_terms(&PsdOp::monomial(
            2,
            RingType::P,
            vec![],
            vec![0, 0],
            vec![0, -1],
            rat_int(1)
        )));
        assert!(plus.add(&minus).unwrap().same_terms(&l));

        let one = PsdOp::one(1, RingType::P, vec![]);
        let (p, m) = one.split();
        assert!(p.same_terms(&one) && m.is_zero());

        let dn_inv = mono1(0, -1, 1);
        let (p, m) = dn_inv.split();
        assert!(p.is_zero() && m.same_terms(&dn_inv));
    }

    #[test]
    fn residue_and_pairing() {
        // res(x^-1 d^-1) = 1
        assert_eq!(mono1(-1, -1, 1).residue().unwrap(), rat_int(1));
        // <x d, x^-2 d^-2> = 1
        assert_eq!(pair(&mono1(1, 1, 1), &mono1(-2, -2, 1)).unwrap(), rat_int(1));
        // <x d, d^-1> = 0
        assert_eq!(pair(&mono1(1, 1, 1), &mono1(0, -1, 1)).unwrap(), rat_int(0));
        // canonical dual pairs to 1
        for (a, b) in [((0, 0), (-1, -1)), ((2, -3), (-3, 2)), ((-1, 4), (0, -5))] {
            let l = mono1(a.0, a.1, 1);
            let m = mono1(b.0, b.1, 1);
            assert_eq!(pair(&l, &m).unwrap(), rat_int(1), "dual of {a:?}");
        }
    }

    #[test]
    fn residue_of_commutator_vanishes() {
        let l = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![2], vec![1], rat_int(3)),
                (vec![-1], vec![-2], rat(1, 2)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-6)]);
        let m = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![
                (vec![0], vec![2], rat_int(1)),
                (vec![-3], vec![-1], rat_int(5)),
            ],
        )
        .truncate(&[PosInf], &[Fin(-6)]);
        let c = l.commutator(&m).unwrap();
        assert_eq!(c.residue().unwrap(), rat_int(0));
    }

    #[test]
    fn symbol_star_oracle() {
        // sigma(d) * sigma(x) = x z + 1
        let s = d(1, 1).symbol().star(&x(1, 1).symbol()).unwrap();
        let direct = d(1, 1).mul(&x(1, 1)).unwrap().symbol();
        assert!(s.same_terms(&direct));

        let l = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![1, -1], vec![2, 0], rat_int(2)),
                (vec![0, 1], vec![-1, -2], rat(1, 3)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-5), Fin(-5)]);
        let m = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![0, 0], vec![1, 1], rat_int(1)),
                (vec![2, 0], vec![0, -1], rat_int(-4)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-5), Fin(-5)]);
        let via_star = l.symbol().star(&m.symbol()).unwrap();
        let via_mul = l.mul(&m).unwrap().symbol();
        assert!(via_star.same_terms(&via_mul));
    }

    #[test]
    fn inverse_of_delta() {
        let inv = d(1, 1).inverse().unwrap();
        assert!(inv.same_terms(&mono1(0, -1, 1)));
    }

    #[test]
    fn inverse_geometric() {
        // (1 - x d^-1)^-1 = 1 + x d^-1 + (x d^-1)^2 + ... to the window
        let l = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![0], vec![0], rat_int(1)), (vec![1], vec![-1], rat_int(-1))],
        )
        .truncate(&[PosInf], &[Fin(-4)]);
        let inv = l.inverse().unwrap();
        let one = PsdOp::one(1, RingType::P, vec![]);
        assert!(l.mul(&inv).unwrap().sub(&one).unwrap().is_zero());
        assert!(inv.mul(&l).unwrap().sub(&one).unwrap().is_zero());
        // first geometric terms: 1 + x d^-1 + x^2 d^-2 - x d^-3 + ...
        assert_eq!(inv.coeff(&[1], &[-1], &[]), rat_int(1));
        assert_eq!(inv.coeff(&[2], &[-2], &[]), rat_int(1));
    }

    #[test]
    fn e_invertibility_criterion() {
        // x d is not invertible in E (leading coefficient x is not a unit)
        let xd = PsdOp::monomial(1, RingType::E, vec![], vec![1], vec![1], rat_int(1));
        assert_eq!(xd.inverse(), Err(Error::NotInvertibleInE));
        // 1 + x (order 0, unit leading coefficient) is invertible in E
        let u = PsdOp::poly(
            1,
            RingType::E,
            vec![],
            vec![(vec![0], vec![0], rat_int(1)), (vec![1], vec![0], rat_int(1))],
        )
        .truncate(&[Fin(5)], &[Fin(-3)]);
        let inv = u.inverse().unwrap();
        let one = PsdOp::one(1, RingType::E, vec![]);
        assert!(u.mul(&inv).unwrap().sub(&one).unwrap().is_zero());
    }

    #[test]
    fn root_examples() {
        // root(d^2, 2) = d
        let d2 = mono1(0, 2, 1);
        assert!(d2.root(2).unwrap().same_terms(&d(1, 1)));
        // root((d + x)^2, 2) = d + x
        let s = d(1, 1).add(&x(1, 1)).unwrap().truncate(&[PosInf], &[Fin(-4)]);
        let sq = s.mul(&s).unwrap();
        let r = sq.root(2).unwrap();
        assert!(r.sub(&s).unwrap().is_zero());
        // root(d^3, 2): exponent not divisible
        assert_eq!(mono1(0, 3, 1).root(2), Err(Error::ExponentNotDivisible(2)));
    }

    #[test]
    fn center_is_constants() {
        let five = PsdOp::constant(1, RingType::P, vec![], rat_int(5));
        assert!(five.commutes_with_generators().unwrap());
        assert!(!x(1, 1).commutes_with_generators().unwrap());
        assert!(!d(1, 1).commutes_with_generators().unwrap());
    }

    #[test]
    fn order_inequality_counterexample_n2() {
        // [d1, d2 + x1 d2^-5] has order -5 < ord(L) + ord(M) - 1
        let l = d(2, 1);
        let m = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![0, 0], vec![0, 1], rat_int(1)),
                (vec![1, 0], vec![0, -5], rat_int(1)),
            ],
        );
        let c = l.commutator(&m).unwrap();
        assert_eq!(c.order().unwrap(), -5);
        assert!(c.order().unwrap() < l.order().unwrap() + m.order().unwrap() - 1);
        assert!(c.same_terms(&PsdOp::monomial(
            2,
            RingType::P,
            vec![],
            vec![0, 0],
            vec![0, -5],
            rat_int(1)
        )));
    }

    #[test]
    fn ord_nu_additivity() {
        let l = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![1, 1], vec![2, 1], rat_int(2)),
                (vec![0, 0], vec![0, -1], rat_int(1)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-4), Fin(-4)]);
        let m = PsdOp::poly(
            2,
            RingType::P,
            vec![],
            vec![
                (vec![0, -1], vec![1, 2], rat_int(1)),
                (vec![1, 0], vec![-2, 0], rat(3, 7)),
            ],
        )
        .truncate(&[PosInf, PosInf], &[Fin(-4), Fin(-4)]);
        let p = l.mul(&m).unwrap();
        assert_eq!(p.order().unwrap(), l.order().unwrap() + m.order().unwrap());
        let nu_sum: Vec<i64> = l
            .nu()
            .unwrap()
            .iter()
            .zip(m.nu().unwrap())
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(p.nu().unwrap(), nu_sum);
    }

    #[test]
    fn associativity_smoke() {
        let a = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![1], vec![1], rat_int(1)), (vec![-1], vec![-1], rat_int(2))],
        )
        .truncate(&[PosInf], &[Fin(-5)]);
        let b = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![0], vec![2], rat(1, 2)), (vec![2], vec![0], rat_int(1))],
        )
        .truncate(&[PosInf], &[Fin(-5)]);
        let c = PsdOp::poly(
            1,
            RingType::P,
            vec![],
            vec![(vec![0], vec![-1], rat_int(1)), (vec![1], vec![0], rat_int(-1))],
        )
        .truncate(&[PosInf], &[Fin(-5)]);
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        // compare on the common claims
        let diff = ab_c.sub(&a_bc).unwrap();
        assert!(diff.is_zero(), "associativity defect: {diff}");
    }
}

//! Truncated iterated Laurent/Taylor series in commuting variables x1..xn
//! over exact rationals, with auxiliary nilpotent parameters.
//!
//! A value carries a per-variable claim window: `xlo[i]` is a true support
//! floor of the represented object (every term of the object has x_i-exponent
//! at least `xlo[i]`), `xhi[i]` is the exactness cap (all coefficients with
//! every exponent at most `xhi[i]` are stored exactly; `+inf` means the value
//! is exact, e.g. a polynomial). Below the support floor coefficients are
//! known to be zero, above a finite cap they are unknown.
//!
//! Auxiliary parameters are nilpotent: a parameter with cap c satisfies
//! t^(c+1) = 0, so truncation in the aux directions is exact quotient
//! arithmetic, not a precision claim. Dual numbers are the cap-1 case;
//! formal flow times are higher caps.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::bound::{Ext, Fin, PosInf};
use crate::error::{Error, Result};
use crate::rational::{binom_rat, rat, rat_int, rat_nth_root_exact, rat_to_string, Rat};

/// Per-variable series mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exponents >= 0, support floor pinned at 0; houses k[[x]].
    Taylor,
    /// Exponents bounded below by the support floor; houses k((x)).
    Laurent,
}

/// A named nilpotent parameter with its degree cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxParam {
    pub name: String,
    pub cap: u32,
}

impl AuxParam {
    pub fn new(name: &str, cap: u32) -> Self {
        AuxParam { name: name.to_string(), cap }
    }
}

/// Sparse term key: x-exponents then aux-exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SKey {
    pub x: Vec<i64>,
    pub aux: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XSeries {
    modes: Vec<Mode>,
    aux: Vec<AuxParam>,
    terms: BTreeMap<SKey, Rat>,
    xlo: Vec<Ext>,
    xhi: Vec<Ext>,
}

/// Compares exponent vectors in the iterated-Laurent leading order:
/// x_n most significant, ascending.
pub fn cmp_iterated(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

impl XSeries {
    pub fn n(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn aux(&self) -> &[AuxParam] {
        &self.aux
    }

    pub fn terms(&self) -> &BTreeMap<SKey, Rat> {
        &self.terms
    }

    pub fn xlo(&self) -> &[Ext] {
        &self.xlo
    }

    pub fn xhi(&self) -> &[Ext] {
        &self.xhi
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the two values have identical term tables (claims ignored).
    pub fn same_terms(&self, other: &XSeries) -> bool {
        self.terms == other.terms
    }

    /// The zero object, known exactly.
    pub fn zero(modes: Vec<Mode>, aux: Vec<AuxParam>) -> Self {
        let n = modes.len();
        XSeries {
            modes,
            aux,
            terms: BTreeMap::new(),
            xlo: vec![PosInf; n],
            xhi: vec![PosInf; n],
        }
    }

    pub fn constant(modes: Vec<Mode>, aux: Vec<AuxParam>, c: Rat) -> Self {
        let n = modes.len();
        Self::monomial(modes, aux, vec![0; n], c)
    }

    pub fn one(modes: Vec<Mode>, aux: Vec<AuxParam>) -> Self {
        Self::constant(modes, aux, Rat::one())
    }

    /// A single exact monomial `c * x^exps`.
    pub fn monomial(modes: Vec<Mode>, aux: Vec<AuxParam>, exps: Vec<i64>, c: Rat) -> Self {
        if c.is_zero() {
            return Self::zero(modes, aux);
        }
        let naux = aux.len();
        let xlo = exps
            .iter()
            .zip(&modes)
            .map(|(&e, m)| match m {
                Mode::Taylor => {
                    assert!(e >= 0, "negative exponent in Taylor mode");
                    Fin(0)
                }
                Mode::Laurent => Fin(e),
            })
            .collect();
        let n = modes.len();
        let mut terms = BTreeMap::new();
        terms.insert(SKey { x: exps, aux: vec![0; naux] }, c);
        XSeries { modes, aux, terms, xlo, xhi: vec![PosInf; n] }
    }

    /// An exact polynomial from aux-free terms; claims are exact.
    pub fn poly(modes: Vec<Mode>, aux: Vec<AuxParam>, terms: Vec<(Vec<i64>, Rat)>) -> Self {
        let mut acc = Self::zero(modes.clone(), aux.clone());
        for (e, c) in terms {
            acc = acc.add(&Self::monomial(modes.clone(), aux.clone(), e, c)).unwrap();
        }
        acc
    }

    /// General windowed constructor. Terms outside the window are rejected.
    pub fn from_terms(
        modes: Vec<Mode>,
        aux: Vec<AuxParam>,
        terms: Vec<(Vec<i64>, Vec<u32>, Rat)>,
        xlo: Vec<i64>,
        xhi: Vec<Ext>,
    ) -> Result<Self> {
        let n = modes.len();
        let xlo: Vec<Ext> = xlo.into_iter().map(Fin).collect();
        for (i, m) in modes.iter().enumerate() {
            if *m == Mode::Taylor && xlo[i] != Fin(0) {
                return Err(Error::ModeMismatch(format!(
                    "Taylor-mode variable x{} must have support floor 0",
                    i + 1
                )));
            }
        }
        let mut table = BTreeMap::new();
        for (e, a, c) in terms {
            if e.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term has {} exponents, expected {}",
                    e.len(),
                    n
                )));
            }
            if a.len() != aux.len() {
                return Err(Error::AuxMismatch("aux exponent arity".into()));
            }
            for i in 0..n {
                if Fin(e[i]) < xlo[i] || Fin(e[i]) > xhi[i] {
                    return Err(Error::WindowTooSmall(format!(
                        "term exponent {} outside window for x{}",
                        e[i],
                        i + 1
                    )));
                }
            }
            for (j, p) in aux.iter().enumerate() {
                if a[j] > p.cap {
                    return Err(Error::AuxMismatch(format!(
                        "aux degree {} above cap {} for {}",
                        a[j], p.cap, p.name
                    )));
                }
            }
            if !c.is_zero() {
                let prev = table.insert(SKey { x: e, aux: a }, c);
                if prev.is_some() {
                    return Err(Error::DimensionMismatch("duplicate term".into()));
                }
            }
        }
        Ok(XSeries { modes, aux, terms: table, xlo, xhi })
    }

    fn check_compat(&self, other: &XSeries) -> Result<()> {
        if self.modes != other.modes {
            return Err(if self.n() != other.n() {
                Error::DimensionMismatch(format!("n = {} vs {}", self.n(), other.n()))
            } else {
                Error::ModeMismatch("per-variable modes differ".into())
            });
        }
        if self.aux.len() != other.aux.len()
            || self.aux.iter().zip(&other.aux).any(|(a, b)| a.name != b.name)
        {
            return Err(Error::AuxMismatch(
                "auxiliary parameter lists differ; lift first".into(),
            ));
        }
        Ok(())
    }

    fn combined_aux(&self, other: &XSeries) -> Vec<AuxParam> {
        self.aux
            .iter()
            .zip(&other.aux)
            .map(|(a, b)| AuxParam { name: a.name.clone(), cap: a.cap.min(b.cap) })
            .collect()
    }

    pub fn coeff(&self, x: &[i64], aux: &[u32]) -> Rat {
        self.terms
            .get(&SKey { x: x.to_vec(), aux: aux.to_vec() })
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &XSeries) -> Result<XSeries> {
        self.check_compat(other)?;
        let aux = self.combined_aux(other);
        let xlo: Vec<Ext> =
            self.xlo.iter().zip(&other.xlo).map(|(&a, &b)| a.min(b)).collect();
        let xhi: Vec<Ext> =
            self.xhi.iter().zip(&other.xhi).map(|(&a, &b)| a.min(b)).collect();
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(k.clone()).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|k, c| {
            !c.is_zero()
                && k.x.iter().zip(&xhi).all(|(&e, &h)| Fin(e) <= h)
                && k.aux.iter().zip(&aux).all(|(&d, p)| d <= p.cap)
        });
        Ok(XSeries { modes: self.modes.clone(), aux, terms, xlo, xhi })
    }

    pub fn neg(&self) -> XSeries {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &XSeries) -> Result<XSeries> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> XSeries {
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

    /// Cauchy product truncated to the propagated window.
    pub fn mul(&self, other: &XSeries) -> Result<XSeries> {
        self.check_compat(other)?;
        let aux = self.combined_aux(other);
        let n = self.n();
        let mut xlo = Vec::with_capacity(n);
        let mut xhi = Vec::with_capacity(n);
        for i in 0..n {
            xlo.push(self.xlo[i] + other.xlo[i]);
            xhi.push((self.xhi[i] + other.xlo[i]).min(other.xhi[i] + self.xlo[i]));
        }
        let mut terms: BTreeMap<SKey, Rat> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            'pairs: for (kb, cb) in &other.terms {
                let mut x = Vec::with_capacity(n);
                for i in 0..n {
                    let e = ka.x[i] + kb.x[i];
                    if Fin(e) > xhi[i] {
                        continue 'pairs;
                    }
                    x.push(e);
                }
                let mut a = Vec::with_capacity(aux.len());
                for (j, p) in aux.iter().enumerate() {
                    let d = ka.aux[j] + kb.aux[j];
                    if d > p.cap {
                        continue 'pairs;
                    }
                    a.push(d);
                }
                let c = ca * cb;
                let entry = terms.entry(SKey { x, aux: a }).or_insert_with(Rat::zero);
                *entry += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(XSeries { modes: self.modes.clone(), aux, terms, xlo, xhi })
    }

    /// Partial derivative d/dx_i (1-based index).
    pub fn deriv(&self, i: usize) -> XSeries {
        assert!(i >= 1 && i <= self.n(), "variable index out of range");
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
        let mut xlo = self.xlo.clone();
        let mut xhi = self.xhi.clone();
        xhi[idx] = xhi[idx] - 1;
        if self.modes[idx] == Mode::Laurent {
            xlo[idx] = xlo[idx] - 1;
        }
        XSeries { modes: self.modes.clone(), aux: self.aux.clone(), terms, xlo, xhi }
    }

    /// Antiderivative in x_i with integration constant 0. Fails with
    /// `ResidueObstruction` when an x_i^-1 term is present.
    pub fn antideriv(&self, i: usize) -> Result<XSeries> {
        assert!(i >= 1 && i <= self.n(), "variable index out of range");
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
        let mut xlo = self.xlo.clone();
        let mut xhi = self.xhi.clone();
        xhi[idx] = xhi[idx] + 1;
        if self.modes[idx] == Mode::Laurent {
            xlo[idx] = xlo[idx] + 1;
        }
        Ok(XSeries { modes: self.modes.clone(), aux: self.aux.clone(), terms, xlo, xhi })
    }

    /// Aux-free part of the table.
    fn aux_zero_terms(&self) -> impl Iterator<Item = (&SKey, &Rat)> {
        self.terms.iter().filter(|(k, _)| k.aux.iter().all(|&d| d == 0))
    }

    /// Leading term of the aux-free part: minimal in the iterated-Laurent
    /// order (x_n most significant).
    pub fn leading(&self) -> Result<(Vec<i64>, Rat)> {
        let mut best: Option<(&SKey, &Rat)> = None;
        for (k, c) in self.aux_zero_terms() {
            best = match best {
                None => Some((k, c)),
                Some((bk, bc)) => {
                    if cmp_iterated(&k.x, &bk.x) == std::cmp::Ordering::Less {
                        Some((k, c))
                    } else {
                        Some((bk, bc))
                    }
                }
            };
        }
        match best {
            Some((k, c)) => Ok((k.x.clone(), c.clone())),
            None => Err(Error::ZeroSeries),
        }
    }

    /// Keeps only terms with every x-exponent at most the given caps and
    /// tightens the exactness claims accordingly.
    pub fn truncate_hi(&self, caps: &[Ext]) -> XSeries {
        let mut out = self.clone();
        for i in 0..self.n() {
            out.xhi[i] = out.xhi[i].min(caps[i]);
        }
        out.terms.retain(|k, _| k.x.iter().zip(&out.xhi).all(|(&e, &h)| Fin(e) <= h));
        out
    }

    /// Geometric-style accumulation `sum_k coeff(k) * g^k` for a tail g that
    /// is strictly positive in the iterated valuation (or nilpotent in aux).
    /// Iteration stops when the windowed power vanishes; a budget guard
    /// converts non-termination into `InfiniteTail`.
    fn tail_sum(g: &XSeries, coeff_at: impl Fn(u64) -> Rat) -> Result<XSeries> {
        let mut acc = XSeries::one(g.modes.clone(), g.aux.clone());
        // claims of the sum are the intersection over all partial claims
        let mut pow = acc.clone();
        let mut budget: i64 = 64;
        for i in 0..g.n() {
            if let (Fin(h), Fin(l)) = (g.xhi[i], g.xlo[i]) {
                budget += 4 * (h - l).max(0);
            }
        }
        for p in &g.aux {
            budget += 4 * p.cap as i64;
        }
        // a tail term that never meets a finite cap keeps every power alive
        for k in g.terms.keys() {
            let dies = k.aux.iter().any(|&a| a > 0)
                || (0..g.n()).any(|i| k.x[i] > 0 && g.xhi[i].is_finite());
            if !dies {
                return Err(Error::InfiniteTail);
            }
        }
        let mut exact_end = false;
        let mut k: u64 = 0;
        loop {
            k += 1;
            if k as i64 > budget {
                return Err(Error::InfiniteTail);
            }
            pow = pow.mul(g)?;
            if pow.is_zero() && pow.xhi.iter().all(|&h| h == PosInf) {
                // exact zero power: the tail terminates with claims intact
                exact_end = true;
                break;
            }
            let c = coeff_at(k);
            acc = acc.add(&pow.scale(&c))?;
            if pow.is_zero() {
                break;
            }
        }
        if !exact_end {
            // Powers beyond the last computed one keep shrinking the claims
            // when a truncated tail can descend in some variable; take the
            // limit of that intersection so the window never overclaims.
            let mut collapsed = false;
            for i in 0..g.n() {
                if let Fin(l) = g.xlo[i] {
                    if l < 0 && g.xhi[i] != PosInf {
                        acc.xhi[i] = crate::bound::NegInf;
                        collapsed = true;
                    }
                }
            }
            if collapsed {
                acc.terms.clear();
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse on the propagated window.
    pub fn inverse(&self) -> Result<XSeries> {
        let (lead_exp, lead_coeff) = self.leading()?;
        if self.modes.iter().zip(&lead_exp).any(|(m, &e)| *m == Mode::Taylor && e > 0) {
            return Err(Error::NotAUnit);
        }
        let inv_mono = XSeries::monomial(
            self.modes.clone(),
            self.aux.clone(),
            lead_exp.iter().map(|&e| -e).collect(),
            Rat::one() / lead_coeff,
        );
        let g = inv_mono.mul(self)?.sub(&XSeries::one(self.modes.clone(), self.aux.clone()))?;
        if g.is_zero() && g.xhi.iter().all(|&h| h == PosInf) {
            return Ok(inv_mono);
        }
        let tail = Self::tail_sum(&g, |k| if k % 2 == 0 { rat_int(1) } else { rat_int(-1) })?;
        let out = tail.mul(&inv_mono)?;
        debug_assert!(
            out.mul(self)
                .map(|p| {
                    let one = XSeries::one(self.modes.clone(), self.aux.clone());
                    p.sub(&one).map(|d| d.is_zero()).unwrap_or(false)
                })
                .unwrap_or(false),
            "inverse verification failed"
        );
        Ok(out)
    }

    /// Principal m-th root on the propagated window.
    ///
    /// An exact input is first rooted inside a bounded window; the candidate
    /// is then verified to be an exact m-th root (perfect powers stay exact),
    /// otherwise the root is an infinite series and the caller must truncate.
    pub fn root(&self, m: u32) -> Result<XSeries> {
        assert!(m >= 1);
        let (lead_exp, lead_coeff) = self.leading()?;
        if lead_exp.iter().any(|&e| e % m as i64 != 0) {
            return Err(Error::ExponentNotDivisible(m));
        }
        let root_coeff =
            rat_nth_root_exact(&lead_coeff, m).ok_or(Error::CoefficientNotAPower(m))?;
        let root_exp: Vec<i64> = lead_exp.iter().map(|&e| e / m as i64).collect();
        let inv_mono = XSeries::monomial(
            self.modes.clone(),
            self.aux.clone(),
            lead_exp.iter().map(|&e| -e).collect(),
            Rat::one() / &lead_coeff,
        );
        let g = inv_mono.mul(self)?.sub(&XSeries::one(self.modes.clone(), self.aux.clone()))?;
        let root_mono =
            XSeries::monomial(self.modes.clone(), self.aux.clone(), root_exp, root_coeff);
        if g.is_zero() && g.xhi.iter().all(|&h| h == PosInf) {
            return Ok(root_mono);
        }
        if self.xhi.iter().all(|&h| h == PosInf) {
            let caps: Vec<Ext> = (0..self.n())
                .map(|i| {
                    let mx = self.terms.keys().map(|k| k.x[i]).max().unwrap_or(0);
                    Fin(mx + m as i64 + 2)
                })
                .collect();
            let windowed = self.truncate_hi(&caps).root(m)?;
            let mut cand = windowed;
            cand.xhi = vec![PosInf; self.n()];
            cand.xlo = (0..self.n())
                .map(|i| match self.modes[i] {
                    Mode::Taylor => Fin(0),
                    Mode::Laurent => {
                        cand.terms.keys().map(|k| Fin(k.x[i])).min().unwrap_or(PosInf)
                    }
                })
                .collect();
            let mut powm = XSeries::one(self.modes.clone(), self.aux.clone());
            for _ in 0..m {
                powm = powm.mul(&cand)?;
            }
            if powm.same_terms(self) {
                return Ok(cand);
            }
            return Err(Error::InfiniteTail);
        }
        let top = rat(1, m as i64);
        let tail = Self::tail_sum(&g, |k| binom_rat(&top, k))?;
        tail.mul(&root_mono)
    }

    /// Coefficient of x_1^-1 ... x_n^-1 in the aux-free part, checked to be
    /// within the exactness window.
    pub fn residue(&self) -> Result<Rat> {
        for i in 0..self.n() {
            if self.xhi[i] < Fin(-1) {
                return Err(Error::WindowTooSmall(format!(
                    "residue cell x{}^-1 lies above the exactness cap",
                    i + 1
                )));
            }
        }
        Ok(self.coeff(&vec![-1; self.n()], &vec![0; self.aux.len()]))
    }

    /// Splits by the x_i-exponent threshold: (part with exp >= threshold,
    /// part with exp < threshold). The parts sum to the input.
    pub fn split_x(&self, i: usize, threshold: i64) -> (XSeries, XSeries) {
        assert!(i >= 1 && i <= self.n());
        let idx = i - 1;
        let mut high = self.clone();
        let mut low = self.clone();
        high.terms.retain(|k, _| k.x[idx] >= threshold);
        low.terms.retain(|k, _| k.x[idx] < threshold);
        high.xlo[idx] = high.xlo[idx].max(Fin(threshold));
        (high, low)
    }

    /// Extends the aux signature; existing parameters are matched by name
    /// (their caps are kept), new ones start with exponent zero.
    pub fn lift_aux(&self, target: &[AuxParam]) -> Result<XSeries> {
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
                terms.insert(SKey { x: k.x.clone(), aux: a }, c.clone());
            }
        }
        Ok(XSeries {
            modes: self.modes.clone(),
            aux: target.to_vec(),
            terms,
            xlo: self.xlo.clone(),
            xhi: self.xhi.clone(),
        })
    }

    /// Termwise t -> t^(k+1)/(k+1) in the named aux parameter (the formal
    /// `int_0^t`); degrees above the cap vanish.
    pub fn aux_integrate(&self, name: &str) -> Result<XSeries> {
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
    pub fn aux_deriv(&self, name: &str) -> Result<XSeries> {
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

    /// Extracts the coefficient of t^k (t stays in the signature with
    /// exponent zero).
    pub fn aux_coeff(&self, name: &str, k: u32) -> Result<XSeries> {
        let j = self.aux_index(name)?;
        let mut terms = BTreeMap::new();
        for (key, c) in &self.terms {
            if key.aux[j] == k {
                let mut nk = key.clone();
                nk.aux[j] = 0;
                terms.insert(nk, c.clone());
            }
        }
        let mut out = self.clone();
        out.terms = terms;
        Ok(out)
    }

    /// Removes an aux parameter whose exponent is everywhere zero.
    pub fn without_aux(&self, name: &str) -> Result<XSeries> {
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
            terms.insert(SKey { x: k.x.clone(), aux: a }, c.clone());
        }
        let mut out = self.clone();
        out.aux = aux;
        out.terms = terms;
        Ok(out)
    }

    fn aux_index(&self, name: &str) -> Result<usize> {
        self.aux
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::AuxMismatch(format!("no aux parameter named {name}")))
    }
}

impl fmt::Display for XSeries {
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
            for (i, &e) in k.x.iter().enumerate() {
                if e != 0 {
                    write!(f, "*x{}^{}", i + 1, e)?;
                }
            }
            for (j, &d) in k.aux.iter().enumerate() {
                if d != 0 {
                    write!(f, "*{}^{}", self.aux[j].name, d)?;
                }
            }
        }
        Ok(())
    }
}

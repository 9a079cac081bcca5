//! Reach, height and length bounds for the coherent-state bridges.
//!
//! Integral quantities are evaluated by the group quadrature; suprema over
//! Lipschitz balls come from [`crate::optimize`] as heuristic lower values
//! paired with analytic caps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::berezin::{
    cond_exp_b, contravariant_symbol, covariant_symbol, embed_operator, phi_a_definitional, phi_b_definitional,
    phi_composite, pivot, BridgeClass, BridgeSpec, MatrixSide,
};
use crate::error::{Error, Result};
use crate::group::CosetSpace;
use crate::linalg::{c, op_norm, CMat};
use crate::metric::SymbolFunction;
use crate::optimize::{axis_seeds, maximize_over_lip_ball, FunctionBall, OperatorBall, OptimizerSettings};

/// Largest coset space on which the function-side `δ̂^A` search is run.
pub const DELTA_HAT_A_MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Quadrature { err: f64 },
    HeuristicLower,
    AnalyticCap,
    Oracle,
}

/// A numerical value with its status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip)]
    pub spec_key: u64,
}

impl BoundValue {
    pub fn exact(value: f64) -> Self {
        BoundValue {
            value,
            provenance: Provenance::Exact,
            cap: None,
            witness: None,
            spec_key: 0,
        }
    }

    pub fn quadrature(value: f64, err: f64) -> Self {
        BoundValue {
            provenance: Provenance::Quadrature { err },
            ..Self::exact(value)
        }
    }

    pub fn with_key(mut self, key: u64) -> Self {
        self.spec_key = key;
        self
    }

    /// Certified upper value: the cap for heuristic values, the value plus
    /// quadrature error otherwise.
    pub fn upper(&self) -> f64 {
        match (&self.provenance, self.cap) {
            (Provenance::HeuristicLower, Some(c)) => c,
            (Provenance::HeuristicLower, None) => f64::INFINITY,
            (Provenance::Quadrature { err }, _) => self.value + err,
            _ => self.value,
        }
    }

    pub fn check_cap(&self) -> Result<()> {
        if let (Provenance::HeuristicLower, Some(cap)) = (&self.provenance, self.cap) {
            if self.value > cap * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::Validation(format!(
                    "heuristic value {} exceeds its analytic cap {cap}",
                    self.value
                )));
            }
        }
        Ok(())
    }
}

fn integral(coset: &CosetSpace, f: impl Fn(usize) -> f64) -> BoundValue {
    let vals: Vec<f64> = (0..coset.len()).map(&f).collect();
    let dot = |w: &[f64]| w.iter().zip(&vals).map(|(a, b)| a * b).sum::<f64>();
    let value = dot(coset.weights());
    match coset.coarse_weights() {
        Some(cw) if !coset.group().is_finite() => BoundValue::quadrature(value, (value - dot(cw)).abs()),
        _ => BoundValue::exact(value),
    }
}

/// `γ̆^A = d ∫ ρ(e, y) ‖P α_y(P)‖ dy`, with `‖P α_y(P)‖ = √tr(P α_y(P))`.
pub fn gamma_breve_a(spec: &BridgeSpec, side: usize) -> BoundValue {
    let s = spec.side(side);
    let d = s.dim() as f64;
    let cs = spec.coset();
    integral(cs, |i| cs.distance(0, i) * d * s.overlap(i).sqrt()).with_key(spec.family_key())
}

/// `δ̃^A = ∫ ρ(e, x) d tr(P α_x(P)) dx`.
pub fn delta_tilde_a(spec: &BridgeSpec, side: usize) -> BoundValue {
    let s = spec.side(side);
    let d = s.dim() as f64;
    let cs = spec.coset();
    integral(cs, |i| cs.distance(0, i) * d * s.overlap(i)).with_key(spec.family_key())
}

fn require_first_class(spec: &BridgeSpec) -> Result<BridgeSpec> {
    if spec.class() != BridgeClass::FunctionMatrix {
        return Err(Error::Spec("quantity is defined for the first class only".into()));
    }
    spec.with_level(1)
}

/// `2 Σ_x w_x ℓ(x)`: from `‖T − τ(T)1‖ ≤ L(T)·mean ℓ` and unital contractions.
pub fn radius_cap(spec: &BridgeSpec) -> f64 {
    2.0 * spec.coset().group().mean_length()
}

/// `‖P(tr(PT)1 − T)‖` for the side's coherent vector.
pub fn gamma_b_objective(side: &MatrixSide) -> impl Fn(&CMat) -> f64 + Sync + '_ {
    move |t: &CMat| {
        let v = side.vector(0);
        let d = v.len();
        let tv: Vec<_> = (0..d).map(|i| (0..d).map(|j| t[(i, j)] * v[j]).sum::<crate::C64>()).collect();
        let e: crate::C64 = (0..d).map(|i| v[i].conj() * tv[i]).sum();
        (0..d).map(|i| (tv[i] - e * v[i]).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `γ^B = sup{‖P(tr(PT)1 − T)‖ : L^B(T) ≤ 1}`.
pub fn gamma_b(spec: &BridgeSpec, settings: &OptimizerSettings) -> Result<BoundValue> {
    let s1 = require_first_class(spec)?;
    let side = s1.side(0);
    let p = OperatorBall::new(side.projection().rep().clone(), gamma_b_objective(side));
    let seeds = axis_seeds(p.basis().len());
    Ok(maximize_over_lip_ball(&p, settings, &seeds, Some(radius_cap(&s1)))?.with_key(spec.family_key()))
}

/// The δ-family of a first-class bridge at level 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaValues {
    pub delta_a: BoundValue,
    pub delta_b: BoundValue,
    pub delta_hat_a: Option<BoundValue>,
    pub delta_hat_b: BoundValue,
    pub delta_tilde_b: BoundValue,
}

/// `r_ω⁻¹ E^B(ω (1 ⊗ T) ω)`.
fn phi_b_of_operator(spec: &BridgeSpec, t: &CMat) -> CMat {
    let w = pivot(spec);
    let e = embed_operator(spec, t, 0).expect("operator matches the bridge");
    cond_exp_b(spec, &w.mul(&e).mul(&w), 0).expect("element matches the bridge") * c(1.0 / spec.r_omega(), 0.0)
}

/// Berezin-transform weights `k_ij = d w_j tr(α_i(P) α_j(P))`.
fn berezin_kernel(spec: &BridgeSpec) -> Vec<Vec<f64>> {
    let s = spec.side(0);
    let d = s.dim() as f64;
    let w = spec.coset().weights();
    let n = spec.coset().len();
    (0..n)
        .map(|i| {
            let vi = s.vector(i);
            (0..n)
                .map(|j| {
                    let o: crate::C64 = vi.iter().zip(s.vector(j)).map(|(a, b)| a.conj() * b).sum();
                    d * w[j] * o.norm_sqr()
                })
                .collect()
        })
        .collect()
}

/// `δ^A` (exact 0: `A` is central in `D`), `δ^B` through the bridge,
/// `δ̂^B = sup ‖T − Φ^B Φ^A T‖`, `δ̃^B = sup ‖T − σ̆(σ_T)‖`, and on small
/// coset spaces `δ̂^A = sup ‖f − Φ^A Φ^B f‖`.
pub fn delta_quantities(spec: &BridgeSpec, settings: &OptimizerSettings) -> Result<DeltaValues> {
    let s1 = require_first_class(spec)?;
    let key = spec.family_key();
    let rep = s1.side(0).projection().rep().clone();
    let cap = Some(radius_cap(&s1));
    let dim = crate::linalg::traceless_hermitian_basis(rep.dim()).len();
    let seeds = axis_seeds(dim);

    let pb = OperatorBall::new(rep.clone(), |t: &CMat| op_norm(&(t - phi_b_of_operator(&s1, t))));
    let delta_b = maximize_over_lip_ball(&pb, settings, &seeds, cap)?.with_key(key);

    let ph = OperatorBall::new(rep.clone(), |t: &CMat| {
        let f = phi_a_definitional(&s1, t).expect("operator matches the bridge");
        op_norm(&(t - phi_b_definitional(&s1, &f).expect("function matches the bridge")))
    });
    let delta_hat_b = maximize_over_lip_ball(&ph, settings, &seeds, cap)?.with_key(key);

    let pt = OperatorBall::new(rep, |t: &CMat| op_norm(&(t - phi_composite(&s1, t, 0).expect("operator matches the bridge"))));
    let delta_tilde_b = maximize_over_lip_ball(&pt, settings, &seeds, cap)?.with_key(key);

    let cs = s1.coset();
    let delta_hat_a = if cs.len() <= DELTA_HAT_A_MAX_POINTS {
        let k = berezin_kernel(&s1);
        let cap_a = (0..cs.len())
            .map(|i| (0..cs.len()).map(|j| k[i][j] * cs.distance(i, j)).sum::<f64>())
            .fold(0.0, f64::max);
        let kk = &k;
        let pf = FunctionBall::new(cs.clone(), move |f: &[f64]| {
            kk.iter()
                .zip(f)
                .map(|(row, fi)| (fi - row.iter().zip(f).map(|(a, b)| a * b).sum::<f64>()).abs())
                .fold(0.0, f64::max)
        });
        let fseeds: Vec<Vec<f64>> = (0..cs.len()).map(|i| (1..cs.len()).map(|j| cs.distance(i, j) - cs.distance(i, 0)).collect()).collect();
        Some(maximize_over_lip_ball(&pf, settings, &fseeds, Some(cap_a))?.with_key(key))
    } else {
        None
    };

    Ok(DeltaValues {
        delta_a: BoundValue::exact(0.0).with_key(key),
        delta_b,
        delta_hat_a,
        delta_hat_b,
        delta_tilde_b,
    })
}

/// Direct `γ^m_n = sup{‖T̃ω − ωΦ(T)~‖ : L(T) ≤ 1}` for `T` on side `from`
/// of a second-class bridge.
pub fn gamma_cross(spec: &BridgeSpec, from: usize, settings: &OptimizerSettings) -> Result<BoundValue> {
    if spec.class() != BridgeClass::MatrixMatrix {
        return Err(Error::Spec("cross reach is defined for the second class only".into()));
    }
    let s1 = spec.with_level(1)?;
    let rep = s1.side(from).projection().rep().clone();
    let w = pivot(&s1);
    let p = OperatorBall::new(rep, |t: &CMat| {
        let s = phi_composite(&s1, t, from).expect("operator matches the bridge");
        let a = embed_operator(&s1, t, from).expect("operator matches the bridge");
        let b = embed_operator(&s1, &s, 1 - from).expect("operator matches the bridge");
        a.mul(&w).sub(&w.mul(&b)).norm()
    });
    let seeds = axis_seeds(p.basis().len());
    Ok(maximize_over_lip_ball(&p, settings, &seeds, Some(radius_cap(&s1)))?.with_key(spec.family_key()))
}

/// All level-1 quantities of one first-class bridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstClassParts {
    pub label: String,
    pub dim: usize,
    #[serde(skip)]
    pub family: u64,
    #[serde(skip)]
    pub coset_key: usize,
    pub gamma_breve_a: BoundValue,
    pub gamma_b: BoundValue,
    pub delta_tilde_a: BoundValue,
    #[serde(flatten)]
    pub deltas: DeltaValues,
}

impl FirstClassParts {
    fn values(&self) -> Vec<&BoundValue> {
        let d = &self.deltas;
        let mut v = vec![
            &self.gamma_breve_a,
            &self.gamma_b,
            &self.delta_tilde_a,
            &d.delta_a,
            &d.delta_b,
            &d.delta_hat_b,
            &d.delta_tilde_b,
        ];
        v.extend(d.delta_hat_a.as_ref());
        v
    }

    fn check_consistent(&self) -> Result<()> {
        for v in self.values() {
            if v.spec_key != self.family {
                return Err(Error::Consistency(format!(
                    "value keyed {} in parts for bridge {}",
                    v.spec_key, self.family
                )));
            }
            v.check_cap()?;
        }
        Ok(())
    }

    /// `min(δ^B, δ̂^B)`; in the first class both equal `δ̃^B` analytically.
    pub fn height_term(&self) -> f64 {
        self.deltas.delta_b.value.min(self.deltas.delta_hat_b.value)
    }

    fn height_term_upper(&self) -> f64 {
        self.deltas.delta_b.upper().min(self.deltas.delta_hat_b.upper())
    }
}

pub fn first_class_parts(spec: &BridgeSpec, settings: &OptimizerSettings) -> Result<FirstClassParts> {
    let s1 = require_first_class(spec)?;
    let rep = s1.side(0).projection().rep();
    Ok(FirstClassParts {
        label: rep.label().to_string(),
        dim: rep.dim(),
        family: spec.family_key(),
        coset_key: Arc::as_ptr(spec.coset()) as usize,
        gamma_breve_a: gamma_breve_a(&s1, 0),
        gamma_b: gamma_b(&s1, settings)?,
        delta_tilde_a: delta_tilde_a(&s1, 0),
        deltas: delta_quantities(&s1, settings)?,
    })
}

/// `1` at level 1, `2q` above.
pub fn level_factor(q: usize) -> f64 {
    if q <= 1 {
        1.0
    } else {
        2.0 * q as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub class: BridgeClass,
    pub q: usize,
    pub parts: Vec<FirstClassParts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_mn: Option<BoundValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_nm: Option<BoundValue>,
    pub reach_bound: f64,
    pub height_bound: f64,
    pub length_bound: f64,
    pub propinquity_bound: f64,
    /// The same assembly run on certified upper values.
    pub reach_cap: f64,
    pub height_cap: f64,
    pub length_cap: f64,
    pub reach_branch: String,
    pub height_branch: String,
}

fn check_level(q: usize) -> Result<()> {
    if q == 0 {
        Err(Error::Parameter("amplification level must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Level 1: reach `max(γ̆^A, γ^B)`, height `min(δ^B, δ̂^B)`. Level `q ≥ 2`:
/// reach `max(γ̆^A, 2q γ^B)` (the function side needs no factor) and height
/// `2q·min(δ^B, δ̂^B)`.
pub fn assemble_first_class(parts: &FirstClassParts, q: usize) -> Result<BoundReport> {
    check_level(q)?;
    parts.check_consistent()?;
    let k = level_factor(q);
    let ga = parts.gamma_breve_a.value;
    let gb = k * parts.gamma_b.value;
    let reach = ga.max(gb);
    let height = k * parts.height_term();
    let reach_cap = parts.gamma_breve_a.upper().max(k * parts.gamma_b.upper());
    let height_cap = k * parts.height_term_upper();
    let length = reach.max(height);
    Ok(BoundReport {
        class: BridgeClass::FunctionMatrix,
        q,
        parts: vec![parts.clone()],
        gamma_mn: None,
        gamma_nm: None,
        reach_bound: reach,
        height_bound: height,
        length_bound: length,
        propinquity_bound: length,
        reach_cap,
        height_cap,
        length_cap: reach_cap.max(height_cap),
        reach_branch: if ga >= gb { "gamma_breve_a" } else { "gamma_b" }.into(),
        height_branch: if parts.deltas.delta_b.value <= parts.deltas.delta_hat_b.value { "delta_b" } else { "delta_hat_b" }.into(),
    })
}

/// Reach `max(γ̆^A_m + γ^B_n, γ̆^A_n + γ^B_m)` and height
/// `max(δ̃^B_n + δ̃^A_m, δ̃^B_m + δ̃^A_n)`, scaled by [`level_factor`].
pub fn assemble_second_class(
    pm: &FirstClassParts,
    pn: &FirstClassParts,
    q: usize,
    gamma_mn: Option<BoundValue>,
    gamma_nm: Option<BoundValue>,
) -> Result<BoundReport> {
    check_level(q)?;
    pm.check_consistent()?;
    pn.check_consistent()?;
    if pm.coset_key != pn.coset_key {
        return Err(Error::Consistency("the two sides live on different coset spaces".into()));
    }
    for g in gamma_mn.iter().chain(gamma_nm.iter()) {
        g.check_cap()?;
    }
    let k = level_factor(q);
    let assemble = |val: &dyn Fn(&BoundValue) -> f64| {
        let r1 = val(&pm.gamma_breve_a) + val(&pn.gamma_b);
        let r2 = val(&pn.gamma_breve_a) + val(&pm.gamma_b);
        let h1 = val(&pn.deltas.delta_tilde_b) + val(&pm.delta_tilde_a);
        let h2 = val(&pm.deltas.delta_tilde_b) + val(&pn.delta_tilde_a);
        (r1, r2, h1, h2)
    };
    let (r1, r2, h1, h2) = assemble(&|v| v.value);
    let (u1, u2, u3, u4) = assemble(&|v| v.upper());
    let reach = k * r1.max(r2);
    let height = k * h1.max(h2);
    let length = reach.max(height);
    let reach_cap = k * u1.max(u2);
    let height_cap = k * u3.max(u4);
    Ok(BoundReport {
        class: BridgeClass::MatrixMatrix,
        q,
        parts: vec![pm.clone(), pn.clone()],
        gamma_mn,
        gamma_nm,
        reach_bound: reach,
        height_bound: height,
        length_bound: length,
        propinquity_bound: length,
        reach_cap,
        height_cap,
        length_cap: reach_cap.max(height_cap),
        reach_branch: if r1 >= r2 { "m_then_n" } else { "n_then_m" }.into(),
        height_branch: if h1 >= h2 { "n_then_m" } else { "m_then_n" }.into(),
    })
}

/// Two first-class bridges chained through `C(G/H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrekReport {
    pub reach_sum: f64,
    pub height_sum: f64,
    pub length_sum: f64,
    /// `max(reach_sum, height_sum)`.
    pub alternative_length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_length: Option<f64>,
    pub smallest: String,
}

pub fn trek_bounds(dm: &BoundReport, dn: &BoundReport, direct: Option<&BoundReport>) -> Result<TrekReport> {
    for r in [dm, dn] {
        if r.class != BridgeClass::FunctionMatrix || r.q != 1 {
            return Err(Error::Parameter("trek legs must be first-class level-1 reports".into()));
        }
    }
    let reach_sum = dm.reach_bound + dn.reach_bound;
    let height_sum = dm.height_bound + dn.height_bound;
    let length_sum = dm.length_bound + dn.length_bound;
    let alternative_length = reach_sum.max(height_sum);
    let direct_length = direct.map(|d| d.length_bound);
    let mut smallest = ("trek_sum", length_sum);
    if alternative_length < smallest.1 {
        smallest = ("trek_alternative", alternative_length);
    }
    if let Some(d) = direct_length {
        if d < smallest.1 {
            smallest = ("direct", d);
        }
    }
    Ok(TrekReport {
        reach_sum,
        height_sum,
        length_sum,
        alternative_length,
        direct_length,
        smallest: smallest.0.into(),
    })
}

/// `‖f ω − ω σ̆_f‖` in `D` at level 1 (left side of the `γ̆^A` inequality).
pub fn function_pivot_defect(spec: &BridgeSpec, f: &SymbolFunction) -> Result<f64> {
    let s = contravariant_symbol(spec, f, 0)?;
    let w = pivot(spec);
    let a = crate::berezin::embed_function(spec, f)?;
    let b = embed_operator(spec, &s, 0)?;
    Ok(a.mul(&w).sub(&w.mul(&b)).norm())
}

/// `‖Φ^A(T) ω − ω T‖` in `D` at level 1.
pub fn operator_pivot_defect(spec: &BridgeSpec, t: &CMat) -> Result<f64> {
    let f = covariant_symbol(spec, t, 0)?;
    let w = pivot(spec);
    let a = crate::berezin::embed_function(spec, &f)?;
    let b = embed_operator(spec, t, 0)?;
    Ok(a.mul(&w).sub(&w.mul(&b)).norm())
}

//! Brute-force estimates on small instances: sampled Lipschitz balls,
//! empirical reach, state-space height and the Lipschitz state metric.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::berezin::{cond_exp_a, contravariant_symbol, embed_function, pivot, BridgeClass, BridgeSpec};
use crate::bounds::{BoundValue, Provenance};
use crate::error::{Error, Result};
use crate::group::{CosetSpace, Representation};
use crate::linalg::{c, random_psd, random_unit_vector, trace, CMat, C64};
use crate::metric::{lip_norm_operator_unchecked, SymbolFunction};
use crate::optimize::{axis_seeds, search, FunctionBall, LipBallProblem, OperatorBall, OptimizerSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Cube-surface directions scaled onto the unit sphere plus an interior lattice.
    Grid { step: f64 },
    /// Gaussian directions: half on the sphere, half inside.
    Random { count: usize, seed: u64 },
}

/// Finite inner approximation of `{X : L(X) ≤ 1}`.
#[derive(Debug, Clone)]
pub struct BallSample<E> {
    pub members: Vec<E>,
    pub coords: Vec<Vec<f64>>,
    pub mode: SampleMode,
}

impl<E> BallSample<E> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Scales `x` so that its seminorm is at most `radius`; `None` for the zero
/// direction.
fn onto_sphere<P: LipBallProblem>(p: &P, x: &[f64], radius: f64) -> Option<Vec<f64>> {
    let l = p.seminorm(&p.embed(x));
    if !l.is_finite() || l <= 0.0 {
        return None;
    }
    let mut y: Vec<f64> = x.iter().map(|v| v * radius / l).collect();
    for _ in 0..8 {
        let ly = p.seminorm(&p.embed(&y));
        if ly <= radius {
            return Some(y);
        }
        y.iter_mut().for_each(|v| *v *= 1.0 - 4.0 * f64::EPSILON);
    }
    None
}

fn lattice(dim: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-n..=n).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

fn key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v * 1e10).round() as i64).collect()
}

/// Samples the unit ball of `p` in its own coordinates.
pub fn sample_ball<P: LipBallProblem>(p: &P, mode: SampleMode) -> Result<BallSample<P::Elem>>
where
    P::Elem: Send,
{
    let dim = p.dim();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    match mode {
        SampleMode::Grid { step } => {
            if dim > 3 {
                return Err(Error::Feasibility(format!(
                    "grid sampling of a {dim}-dimensional ball is too large; use random mode"
                )));
            }
            if !(step > 0.0 && step <= 1.0) {
                return Err(Error::Parameter(format!("grid step must be in (0, 1], got {step}")));
            }
            let n = (1.0 / step).round().max(1.0) as i64;
            let pts = lattice(dim, n);
            let boundary: Vec<Vec<f64>> = pts
                .par_iter()
                .filter(|k| k.iter().any(|v| v.abs() == n))
                .filter_map(|k| {
                    let x: Vec<f64> = k.iter().map(|&v| v as f64 / n as f64).collect();
                    onto_sphere(p, &x, 1.0)
                })
                .collect();
            let r = boundary
                .iter()
                .flat_map(|x| x.iter().map(|v| v.abs()))
                .fold(0.0, f64::max);
            let h = r / n as f64;
            let interior: Vec<Vec<f64>> = pts
                .par_iter()
                .filter_map(|k| {
                    let x: Vec<f64> = k.iter().map(|&v| v as f64 * h).collect();
                    (p.seminorm(&p.embed(&x)) <= 1.0).then_some(x)
                })
                .collect();
            coords.extend(boundary);
            coords.extend(interior);
        }
        SampleMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if dim == 0 {
                coords.push(Vec::new());
            }
            for k in 0..count {
                if dim == 0 {
                    break;
                }
                let x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let radius = if k % 2 == 0 { 1.0 } else { rng.random::<f64>().powf(1.0 / dim as f64) };
                if let Some(y) = onto_sphere(p, &x, radius) {
                    coords.push(y);
                }
            }
        }
    }
    if dim == 0 && coords.is_empty() {
        coords.push(Vec::new());
    }
    let mut seen = HashSet::new();
    coords.retain(|x| seen.insert(key(x)));
    let members = coords.par_iter().map(|x| p.embed(x)).collect();
    Ok(BallSample { members, coords, mode })
}

fn matvec(t: &CMat, v: &[C64]) -> Vec<C64> {
    (0..v.len()).map(|i| (0..v.len()).map(|j| t[(i, j)] * v[j]).sum()).collect()
}

/// Pointwise data of `ω b` for Hermitian `b`: the symbol `σ_b(x_i)` and the
/// off-diagonal residual `r_i = ‖(1 − α_{x_i}(P)) b v_i‖`.
fn symbol_and_residual(spec: &BridgeSpec, b: &CMat) -> (Vec<f64>, Vec<f64>) {
    let s = spec.side(0);
    (0..spec.coset().len())
        .map(|i| {
            let v = s.vector(i);
            let bv = matvec(b, v);
            let e: C64 = v.iter().zip(&bv).map(|(a, b)| a.conj() * b).sum();
            let r2: f64 = bv.iter().zip(v).map(|(x, y)| (x - e * y).norm_sqr()).sum();
            (e.re, r2.sqrt())
        })
        .unzip()
}

/// `min_c max_i √((a_i + c)² + r_i²)`: the optimum sits at a single
/// vertex `c = −a_i` or where two branches cross.
fn shifted_cost(a: &[f64], r: &[f64]) -> f64 {
    let eval = |c: f64| {
        a.iter()
            .zip(r)
            .map(|(ai, ri)| ((ai + c) * (ai + c) + ri * ri).sqrt())
            .fold(0.0, f64::max)
    };
    let n = a.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        best = best.min(eval(-a[i]));
        for j in (i + 1)..n {
            let da = a[i] - a[j];
            if da.abs() > 1e-300 {
                let cc = ((r[j] * r[j] - r[i] * r[i]) / da - a[i] - a[j]) / 2.0;
                best = best.min(eval(cc));
            }
        }
    }
    best
}

fn require_small_first_class(spec: &BridgeSpec) -> Result<()> {
    if spec.class() != BridgeClass::FunctionMatrix || spec.q() != 1 {
        return Err(Error::Spec("oracle needs a first-class level-1 bridge".into()));
    }
    if !spec.coset().group().is_finite() {
        return Err(Error::Spec("oracle needs a finite group".into()));
    }
    Ok(())
}

/// Empirical `Haus_D{L¹_A ω, ω L¹_B}` between sampled balls, with the
/// scalars of each ball handled exactly. The `B` sample is enlarged by
/// `σ̆_f` for every sampled `f`, and each `ω b` is matched by `σ_b ω`,
/// which is optimal within the whole `A` ball.
pub fn hausdorff_reach_oracle(spec: &BridgeSpec, ball_a: &[Vec<f64>], ball_b: &[CMat]) -> Result<f64> {
    require_small_first_class(spec)?;
    if ball_a.is_empty() || ball_b.is_empty() {
        return Err(Error::Parameter("empty ball sample".into()));
    }
    let n = spec.coset().len();
    if ball_a.iter().any(|f| f.len() != n) {
        return Err(Error::Shape(format!("functions must have {n} values")));
    }
    let rep = spec.side(0).projection().rep();
    let mut b_all: Vec<CMat> = ball_b.to_vec();
    for f in ball_a {
        let s = contravariant_symbol(spec, &SymbolFunction::scalar(f), 0)?;
        let l = lip_norm_operator_unchecked(rep, &s);
        b_all.push(if l > 1.0 { s * c(1.0 / l, 0.0) } else { s });
    }
    let b_data: Vec<(Vec<f64>, Vec<f64>, f64)> = b_all
        .par_iter()
        .map(|b| {
            let (sig, r) = symbol_and_residual(spec, b);
            let rmax = r.iter().cloned().fold(0.0, f64::max);
            (sig, r, rmax)
        })
        .collect();

    // ω b to the A side: exactly max_i r_i(b)
    let from_b = b_data[..ball_b.len()].iter().map(|d| d.2).fold(0.0, f64::max);

    let from_a = ball_a
        .par_iter()
        .map(|f| {
            let mut best = f64::INFINITY;
            let mut a = vec![0.0; n];
            for (sig, r, rmax) in &b_data {
                if *rmax >= best {
                    continue;
                }
                for i in 0..n {
                    a[i] = f[i] - sig[i];
                }
                best = best.min(shifted_cost(&a, r));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(from_a.max(from_b))
}

/// States of `A` (probability vectors on coset points) and of `B` (density
/// matrices).
#[derive(Debug, Clone)]
pub struct StateSample {
    pub weights: Vec<Vec<f64>>,
    pub densities: Vec<CMat>,
}

fn simplex_grid(n: usize, denom: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, denom: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / denom as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, denom, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, denom, denom, &mut Vec::new(), &mut out);
    }
    out
}

/// Simplex lattice with denominator `resolution` on the `A` side; on the
/// `B` side the Bloch-ball lattice for `d = 2`, otherwise seeded pure and
/// mixed states.
pub fn sample_states(spec: &BridgeSpec, resolution: usize, seed: u64) -> Result<StateSample> {
    if resolution == 0 {
        return Err(Error::Parameter("state resolution must be positive".into()));
    }
    let n = spec.coset().len();
    let d = spec.side(0).dim();
    let weights = simplex_grid(n, resolution);
    let mut densities = Vec::new();
    if d == 2 {
        let k = resolution as i64;
        for x in -k..=k {
            for y in -k..=k {
                for z in -k..=k {
                    let (a, b, cz) = (x as f64 / k as f64, y as f64 / k as f64, z as f64 / k as f64);
                    let r2 = a * a + b * b + cz * cz;
                    if r2 <= 1.0 + 1e-12 {
                        let s = if r2 > 1.0 { 1.0 / r2.sqrt() } else { 1.0 };
                        let (a, b, cz) = (a * s, b * s, cz * s);
                        densities.push(CMat::from_row_slice(
                            2,
                            2,
                            &[c((1.0 + cz) / 2.0, 0.0), c(a / 2.0, -b / 2.0), c(a / 2.0, b / 2.0), c((1.0 - cz) / 2.0, 0.0)],
                        ));
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = resolution * resolution * resolution;
        for k in 0..count {
            let m = if k % 2 == 0 {
                crate::linalg::projector(&random_unit_vector(d, &mut rng))
            } else {
                let m = random_psd(d, &mut rng);
                let t = trace(&m);
                m * c(1.0 / t.re, 0.0)
            };
            densities.push(m);
        }
        densities.push(CMat::identity(d, d) * c(1.0 / d as f64, 0.0));
    }
    Ok(StateSample { weights, densities })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightOracle {
    pub a_side: f64,
    pub b_side: f64,
    pub value: f64,
}

/// Empirical height: for every sampled state of each side, the distance to
/// the nearest restriction of a level-1 state of `ω`, with the state metric
/// estimated over the ball samples.
pub fn height_oracle(spec: &BridgeSpec, ball_a: &[Vec<f64>], ball_b: &[CMat], states: &StateSample) -> Result<HeightOracle> {
    require_small_first_class(spec)?;
    if ball_a.is_empty() || ball_b.is_empty() || states.weights.is_empty() || states.densities.is_empty() {
        return Err(Error::Parameter("empty sample".into()));
    }
    let n = spec.coset().len();
    let side = spec.side(0);
    let d = side.dim() as f64;
    let w = spec.coset().weights();

    // A side: candidates μ ∘ Φ^A on A, with Φ^A(a) = r⁻¹ E^A(ω a ω)
    let om = pivot(spec);
    let phi_a: Vec<Vec<f64>> = ball_a
        .iter()
        .map(|a| {
            let e = embed_function(spec, &SymbolFunction::scalar(a))?;
            let f = cond_exp_a(spec, &om.mul(&e).mul(&om))?;
            Ok(f.values.iter().map(|v| v[(0, 0)].re / spec.r_omega()).collect())
        })
        .collect::<Result<_>>()?;
    let eval_a = |mu: &[f64], vals: &[f64]| mu.iter().zip(vals).map(|(x, y)| x * y).sum::<f64>();
    let a_side = states
        .weights
        .par_iter()
        .map(|nu| {
            let own: Vec<f64> = ball_a.iter().map(|a| eval_a(nu, a)).collect();
            states
                .weights
                .iter()
                .map(|mu| {
                    phi_a
                        .iter()
                        .zip(&own)
                        .map(|(pa, o)| (o - eval_a(mu, pa)).abs())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);

    // B side: φ_μ|_B has density Σ μ_i α_i(P); ψ_ν|_B has μ_i = d w_i tr(ρ_ν α_i(P))
    let density_of = |mu: &[f64]| {
        let mut m = CMat::zeros(side.dim(), side.dim());
        for (i, x) in mu.iter().enumerate() {
            m += side.moved(i) * c(*x, 0.0);
        }
        m
    };
    let mut candidates: Vec<CMat> = states.weights.iter().map(|mu| density_of(mu)).collect();
    for rho in &states.densities {
        let mu: Vec<f64> = (0..n)
            .map(|i| d * w[i] * crate::berezin::expectation(rho, side.vector(i)))
            .collect();
        candidates.push(density_of(&mu));
    }
    let pairing = |rho: &CMat| -> Vec<f64> { ball_b.iter().map(|b| (rho * b).trace().re).collect() };
    let cand_vals: Vec<Vec<f64>> = candidates.par_iter().map(&pairing).collect();
    let b_side = states
        .densities
        .par_iter()
        .map(|rho| {
            let own = pairing(rho);
            cand_vals
                .iter()
                .map(|cv| cv.iter().zip(&own).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(HeightOracle {
        a_side,
        b_side,
        value: a_side.max(b_side),
    })
}

fn finish_metric(out: crate::optimize::SearchOutcome, cap: f64) -> Result<BoundValue> {
    let bv = BoundValue {
        value: out.value,
        provenance: Provenance::HeuristicLower,
        cap: Some(cap),
        witness: if out.witness.is_empty() { None } else { Some(out.witness) },
        spec_key: 0,
    };
    bv.check_cap()?;
    Ok(bv)
}

/// `sup{|μ(T) − ν(T)| : L(T) ≤ 1}` for density matrices, capped by
/// `‖μ − ν‖₁ · mean ℓ`.
pub fn state_metric_operator(rep: &Arc<Representation>, mu: &CMat, nu: &CMat, settings: &OptimizerSettings) -> Result<BoundValue> {
    let diff = mu - nu;
    let trace_norm: f64 = diff.clone().symmetric_eigenvalues().iter().map(|v| v.abs()).sum();
    let p = OperatorBall::new(rep.clone(), move |t: &CMat| (&diff * t).trace().re.abs());
    let seeds = axis_seeds(p.dim());
    let out = search(&p, settings, &seeds)?;
    finish_metric(out, trace_norm * rep.group().mean_length())
}

/// `sup{|μ(f) − ν(f)| : L(f) ≤ 1}` for probability vectors on `G/H`,
/// capped by `½‖μ − ν‖₁ · diam`.
pub fn state_metric_function(coset: &Arc<CosetSpace>, mu: &[f64], nu: &[f64], settings: &OptimizerSettings) -> Result<BoundValue> {
    let n = coset.len();
    if mu.len() != n || nu.len() != n {
        return Err(Error::Shape(format!("states must have {n} weights")));
    }
    let diff: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    let l1: f64 = diff.iter().map(|v| v.abs()).sum();
    let dd = diff.clone();
    let p = FunctionBall::new(coset.clone(), move |f: &[f64]| dd.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs());
    let seeds: Vec<Vec<f64>> = (0..n)
        .map(|k| (1..n).map(|j| coset.distance(k, j) - coset.distance(k, 0)).collect())
        .collect();
    let out = search(&p, settings, &seeds)?;
    finish_metric(out, 0.5 * l1 * coset.diameter())
}

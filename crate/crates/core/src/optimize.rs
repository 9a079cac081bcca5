//! Random-restart pattern search for suprema over Lipschitz unit balls.
//!
//! Every objective handled here is positively homogeneous of degree one and
//! invariant under adding scalars, so `sup{g(X) : L(X) ≤ 1}` equals the
//! supremum of `g/L` over traceless coordinates. The search maximizes that
//! ratio and rescales the best point onto the unit sphere of `L`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundValue, Provenance};
use crate::error::{Error, Result};
use crate::group::{CosetSpace, Representation};
use crate::linalg::{c, traceless_hermitian_basis, CMat};
use crate::metric::{lip_norm_operator_unchecked, lip_norm_scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub steps: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 64,
            steps: 500,
            step: 0.1,
            seed: 0,
        }
    }
}

/// A search space of real coordinates mapped into an algebra, with a
/// seminorm and a homogeneous objective.
pub trait LipBallProblem: Sync {
    type Elem;
    fn dim(&self) -> usize;
    fn embed(&self, coords: &[f64]) -> Self::Elem;
    /// `x + c·1`.
    fn shift(&self, x: &Self::Elem, c: f64) -> Self::Elem;
    fn seminorm(&self, x: &Self::Elem) -> f64;
    fn objective(&self, x: &Self::Elem) -> f64;
}

/// Traceless Hermitian operators under the operator Lip-norm of `rep`.
pub struct OperatorBall<F> {
    rep: Arc<Representation>,
    basis: Vec<CMat>,
    objective: F,
}

impl<F: Fn(&CMat) -> f64 + Sync> OperatorBall<F> {
    pub fn new(rep: Arc<Representation>, objective: F) -> Self {
        let basis = traceless_hermitian_basis(rep.dim());
        OperatorBall { rep, basis, objective }
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }
}

impl<F: Fn(&CMat) -> f64 + Sync> LipBallProblem for OperatorBall<F> {
    type Elem = CMat;

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn embed(&self, coords: &[f64]) -> CMat {
        let d = self.rep.dim();
        let mut out = CMat::zeros(d, d);
        for (b, &x) in self.basis.iter().zip(coords) {
            out += b * c(x, 0.0);
        }
        out
    }

    fn shift(&self, x: &CMat, s: f64) -> CMat {
        let d = x.nrows();
        x + CMat::identity(d, d) * c(s, 0.0)
    }

    fn seminorm(&self, x: &CMat) -> f64 {
        lip_norm_operator_unchecked(&self.rep, x)
    }

    fn objective(&self, x: &CMat) -> f64 {
        (self.objective)(x)
    }
}

/// Real functions on `G/H` pinned to 0 at the base point.
pub struct FunctionBall<F> {
    coset: Arc<CosetSpace>,
    objective: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FunctionBall<F> {
    pub fn new(coset: Arc<CosetSpace>, objective: F) -> Self {
        FunctionBall { coset, objective }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> LipBallProblem for FunctionBall<F> {
    type Elem = Vec<f64>;

    fn dim(&self) -> usize {
        self.coset.len().saturating_sub(1)
    }

    fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let mut f = Vec::with_capacity(coords.len() + 1);
        f.push(0.0);
        f.extend_from_slice(coords);
        f
    }

    fn shift(&self, x: &Vec<f64>, s: f64) -> Vec<f64> {
        x.iter().map(|v| v + s).collect()
    }

    fn seminorm(&self, x: &Vec<f64>) -> f64 {
        lip_norm_scalar(&self.coset, x)
    }

    fn objective(&self, x: &Vec<f64>) -> f64 {
        (self.objective)(x)
    }
}

/// Best point of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub value: f64,
    /// Coordinates scaled so that the seminorm is 1.
    pub witness: Vec<f64>,
}

fn ratio<P: LipBallProblem>(p: &P, x: &[f64]) -> f64 {
    let e = p.embed(x);
    let l = p.seminorm(&e);
    let g = p.objective(&e);
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if l > 1e-14 * scale {
        g / l
    } else if g > 1e-12 * scale {
        f64::INFINITY
    } else {
        0.0
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn gaussian<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    normalize(&mut u);
    u
}

fn stepped(x: &[f64], u: &[f64], s: f64) -> Vec<f64> {
    let mut y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + s * b).collect();
    normalize(&mut y);
    y
}

/// Pattern search with random directions and step halving.
fn explore<P: LipBallProblem, R: Rng>(p: &P, start: Vec<f64>, settings: &OptimizerSettings, rng: &mut R) -> (f64, Vec<f64>) {
    let dim = p.dim();
    let mut x = start;
    normalize(&mut x);
    let mut v = ratio(p, &x);
    let mut s = settings.step;
    for _ in 0..settings.steps {
        let u = gaussian(dim, rng);
        let mut moved = false;
        for sign in [1.0, -1.0] {
            let y = stepped(&x, &u, sign * s);
            let vy = ratio(p, &y);
            if vy > v {
                x = y;
                v = vy;
                moved = true;
                break;
            }
        }
        if !moved {
            s *= 0.5;
            if s < 1e-6 {
                s = settings.step;
            }
        }
    }
    (v, x)
}

/// Coordinate and random directions at shrinking scales.
fn polish<P: LipBallProblem, R: Rng>(p: &P, (mut v, mut x): (f64, Vec<f64>), settings: &OptimizerSettings, rng: &mut R) -> (f64, Vec<f64>) {
    let dim = p.dim();
    let mut scale = settings.step;
    while scale > 1e-10 {
        for _ in 0..POLISH_ROUNDS {
            let mut improved = false;
            let mut dirs: Vec<Vec<f64>> = (0..dim)
                .map(|k| {
                    let mut e = vec![0.0; dim];
                    e[k] = 1.0;
                    e
                })
                .collect();
            dirs.extend((0..2).map(|_| gaussian(dim, rng)));
            for u in &dirs {
                for sign in [1.0, -1.0] {
                    let y = stepped(&x, u, sign * scale);
                    let vy = ratio(p, &y);
                    if vy > v {
                        x = y;
                        v = vy;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        scale *= 0.1;
    }
    (v, x)
}

/// Rounds per polish scale.
const POLISH_ROUNDS: usize = 2;

/// One restart: exploration then polish. Depends only on its own stream, so
/// adding restarts never lowers the best value.
fn ascend<P: LipBallProblem, R: Rng>(p: &P, start: Vec<f64>, settings: &OptimizerSettings, rng: &mut R) -> (f64, Vec<f64>) {
    let explored = explore(p, start, settings, rng);
    polish(p, explored, settings, rng)
}

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Checks `g(X + c·1) = g(X)` at one random point.
pub fn check_translation_invariance<P: LipBallProblem>(p: &P, seed: u64) -> Result<()> {
    let mut rng = restart_rng(seed, 0);
    let x: Vec<f64> = (0..p.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let e = p.embed(&x);
    let cshift = 0.5 + rng.random::<f64>();
    let g0 = p.objective(&e);
    let g1 = p.objective(&p.shift(&e, cshift));
    if (g0 - g1).abs() > 1e-8 * (1.0 + g0.abs()) {
        return Err(Error::Precondition(format!(
            "objective changes under X -> X + c·1 ({g0} vs {g1})"
        )));
    }
    Ok(())
}

/// Runs the seeded starts and then `settings.restarts` random restarts in
/// parallel; reduction is in index order and only a strictly larger value
/// replaces the incumbent, so adding restarts never lowers the result.
pub fn search<P: LipBallProblem>(p: &P, settings: &OptimizerSettings, seeds: &[Vec<f64>]) -> Result<SearchOutcome> {
    let dim = p.dim();
    if dim == 0 {
        return Ok(SearchOutcome {
            value: 0.0,
            witness: Vec::new(),
        });
    }
    if seeds.iter().any(|s| s.len() != dim) {
        return Err(Error::Shape(format!("seed points must have {dim} coordinates")));
    }
    check_translation_invariance(p, settings.seed)?;

    let seeded: Vec<(f64, Vec<f64>)> = seeds
        .par_iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|v| *v != 0.0))
        .map(|(k, s)| {
            let mut rng = restart_rng(settings.seed, (1 << 32) + k as u64);
            ascend(p, s.clone(), settings, &mut rng)
        })
        .collect();
    let random: Vec<(f64, Vec<f64>)> = (0..settings.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(settings.seed, k as u64 + 1);
            let start = gaussian(dim, &mut rng);
            ascend(p, start, settings, &mut rng)
        })
        .collect();

    let mut best = (0.0, vec![0.0; dim]);
    for (v, x) in seeded.into_iter().chain(random) {
        if v > best.0 {
            best = (v, x);
        }
    }
    let (value, mut x) = best;
    if value.is_finite() && value > 0.0 {
        let l = p.seminorm(&p.embed(&x));
        x.iter_mut().for_each(|v| *v /= l);
    }
    Ok(SearchOutcome { value, witness: x })
}

/// [`search`] packaged as a heuristic lower bound with an optional analytic
/// cap. A lower value above its cap is rejected.
pub fn maximize_over_lip_ball<P: LipBallProblem>(
    p: &P,
    settings: &OptimizerSettings,
    seeds: &[Vec<f64>],
    cap: Option<f64>,
) -> Result<BoundValue> {
    let out = search(p, settings, seeds)?;
    let bv = BoundValue {
        value: out.value,
        provenance: Provenance::HeuristicLower,
        cap,
        witness: if out.witness.is_empty() { None } else { Some(out.witness) },
        spec_key: 0,
    };
    bv.check_cap()?;
    Ok(bv)
}

/// `e_k` for every coordinate direction. The ball objectives are norms of
/// linear maps, hence even, so `−e_k` would repeat the same start.
pub fn axis_seeds(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_finite_group, builtin, stability_subgroup, coset_space};
    use crate::linalg::projector;

    fn s3_rep() -> Arc<Representation> {
        let b = builtin::s3();
        let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
        let spec = b.irrep("std").unwrap();
        Arc::new(Representation::from_generators(g, "std", &spec.generator_matrices).unwrap())
    }

    fn quick() -> OptimizerSettings {
        OptimizerSettings {
            restarts: 8,
            steps: 150,
            step: 0.1,
            seed: 3,
        }
    }

    #[test]
    fn zero_objective_gives_zero() {
        let p = OperatorBall::new(s3_rep(), |_: &CMat| 0.0);
        assert_eq!(search(&p, &quick(), &[]).unwrap().value, 0.0);
    }

    #[test]
    fn non_invariant_objective_is_rejected() {
        let p = OperatorBall::new(s3_rep(), |t: &CMat| t[(0, 0)].re.abs());
        assert!(matches!(search(&p, &quick(), &[]), Err(Error::Precondition(_))));
    }

    #[test]
    fn linear_objective_matches_lipschitz_duality() {
        // point masses on a finite metric space: sup |f(i) - f(j)| = ρ(i, j)
        let rep = s3_rep();
        let pd = stability_subgroup(&rep, &projector(&builtin::s3().irrep("std").unwrap().vector), 1e-8).unwrap();
        let cs = Arc::new(coset_space(&pd).unwrap());
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let p = FunctionBall::new(cs.clone(), move |f: &[f64]| (f[i] - f[j]).abs());
            let out = search(&p, &quick(), &[]).unwrap();
            assert!((out.value - cs.distance(i, j)).abs() < 1e-8, "{} vs {}", out.value, cs.distance(i, j));
            let w = p.embed(&out.witness);
            assert!((p.seminorm(&w) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn more_restarts_never_decrease() {
        let rep = s3_rep();
        let v = builtin::s3().irrep("std").unwrap().vector.clone();
        let obj = move |t: &CMat| {
            let d = v.len();
            let tv: Vec<_> = (0..d).map(|i| (0..d).map(|j| t[(i, j)] * v[j]).sum::<crate::C64>()).collect();
            let e: crate::C64 = (0..d).map(|i| v[i].conj() * tv[i]).sum();
            (0..d).map(|i| (tv[i] - e * v[i]).norm_sqr()).sum::<f64>().sqrt()
        };
        let p = OperatorBall::new(rep, obj);
        let mut last = 0.0;
        for r in [1, 2, 4, 8] {
            let s = OptimizerSettings { restarts: r, ..quick() };
            let v = search(&p, &s, &[]).unwrap().value;
            assert!(v >= last);
            last = v;
        }
        let s = quick();
        assert_eq!(search(&p, &s, &[]).unwrap(), search(&p, &s, &[]).unwrap());
    }

    #[test]
    fn trivial_dimension_is_exact_zero() {
        let b = builtin::z2();
        let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
        let spec = b.irrep("triv").unwrap();
        let rep = Arc::new(Representation::from_generators(g, "triv", &spec.generator_matrices).unwrap());
        let p = OperatorBall::new(rep, |_: &CMat| 1.0);
        assert_eq!(p.dim(), 0);
        let bv = maximize_over_lip_ball(&p, &quick(), &[], Some(1.0)).unwrap();
        assert_eq!(bv.value, 0.0);
    }
}

//! Lower bounds on λ₁ and λ_{d+1}: the first-order curvature bound, the
//! Cordero-type bound, the second-order bound through the reweighted gap
//! λ₁ᴬ, the per-coordinate α/β criteria for perturbed products, and the
//! closed forms for power-law components.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::intertwine::{box_infimum, inf_rho, InfRhoResult};
use crate::minimize::{golden_section, grid_refine_1d};
use crate::model::{ComponentFamily, DiagonalWeight, OneDimComponent, Potential, WeightFamily};
use crate::oracle::{discretize, lowest_eigs_with, EigenOptions, Grid};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[serde(rename = "lambda_1")]
    Lambda1,
    #[serde(rename = "lambda_d_plus_1")]
    LambdaDPlus1,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Lambda1 => "lambda_1",
            Target::LambdaDPlus1 => "lambda_d_plus_1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AnalyticClosedForm,
    GridInfimum,
    OracleEigensolve,
    /// Passed in by the caller.
    Supplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    FirstOrder,
    Cordero,
    SecondOrder,
    PerturbedProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constituent<T> {
    pub name: String,
    pub value: T,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck<T> {
    pub name: String,
    pub passed: bool,
    /// Signed distance to failure (positive when passed).
    pub margin: T,
}

/// A named lower bound. `value` is `None` when a hypothesis failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult<T> {
    pub target: Target,
    pub method: BoundMethod,
    pub value: Option<T>,
    pub checks: Vec<HypothesisCheck<T>>,
    pub constituents: Vec<Constituent<T>>,
    pub notes: Vec<String>,
}

impl<T: Scalar> BoundResult<T> {
    fn assemble(
        target: Target,
        method: BoundMethod,
        candidate: T,
        checks: Vec<HypothesisCheck<T>>,
        constituents: Vec<Constituent<T>>,
    ) -> Self {
        let ok = checks.iter().all(|c| c.passed) && candidate.is_finite();
        Self {
            target,
            method,
            value: ok.then_some(candidate),
            checks,
            constituents,
            notes: vec![],
        }
    }

    pub fn applicable(&self) -> bool {
        self.value.is_some()
    }

    pub fn constituent(&self, name: &str) -> Option<T> {
        self.constituents
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

fn positive<T: Scalar>(name: &str, margin: T) -> HypothesisCheck<T> {
    HypothesisCheck {
        name: name.to_string(),
        passed: margin > T::zero(),
        margin,
    }
}

fn constituent<T>(name: &str, value: T, provenance: Provenance) -> Constituent<T> {
    Constituent {
        name: name.to_string(),
        value,
        provenance,
    }
}

/// Box `[−R, R]^d` and lattice resolution for infimum searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox<T> {
    pub radius: T,
    pub grid_n: usize,
}

impl<T: Scalar> SearchBox<T> {
    pub fn new(radius: T, grid_n: usize) -> Self {
        Self { radius, grid_n }
    }

    /// Radius 8 with a resolution that keeps the scan at desk scale.
    pub fn default_for(d: usize) -> Self {
        let grid_n = match d {
            1 => 4001,
            2 => 401,
            3 => 61,
            4 => 21,
            _ => 9,
        };
        Self::new(T::c(8.0), grid_n)
    }
}

/// `λ₁ ≥ inf ρ(curvature matrix)`.
pub fn first_order_bound<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    sbox: &SearchBox<T>,
) -> Result<BoundResult<T>> {
    let r = inf_rho(v, w, sbox.radius, sbox.grid_n)?;
    Ok(first_order_from(&r))
}

fn first_order_from<T: Scalar>(r: &InfRhoResult<T>) -> BoundResult<T> {
    BoundResult::assemble(
        Target::Lambda1,
        BoundMethod::FirstOrder,
        r.value,
        vec![positive("inf_rho_positive", r.value)],
        vec![constituent("inf_rho", r.value, Provenance::GridInfimum)],
    )
    .with_note(format!(
        "infimum over [-{0}, {0}]^d at {1:?} ({2})",
        r.box_radius,
        r.argmin,
        if r.interior() {
            "interior"
        } else {
            "on the box boundary"
        }
    ))
}

/// `λ_{d+1} ≥ λ₁ + inf ρ(∇²V)`, with `λ₁` supplied (oracle value or bound).
pub fn cordero_bound<T: Scalar>(
    v: &Potential<T>,
    lambda_1: T,
    lambda_1_provenance: Provenance,
    sbox: &SearchBox<T>,
) -> Result<BoundResult<T>> {
    let r = inf_rho(
        v,
        &DiagonalWeight::identity(v.dim()),
        sbox.radius,
        sbox.grid_n,
    )?;
    Ok(BoundResult::assemble(
        Target::LambdaDPlus1,
        BoundMethod::Cordero,
        lambda_1 + r.value,
        vec![positive("inf_rho_hessian_positive", r.value)],
        vec![
            constituent("lambda_1", lambda_1, lambda_1_provenance),
            constituent("inf_rho_hessian", r.value, Provenance::GridInfimum),
        ],
    ))
}

/// `λ_{d+1} ≥ λ₁ᴬ + inf ρ(curvature matrix)`. λ₁ᴬ stands in for the gap
/// restricted to weighted gradients, which can only be larger.
pub fn second_order_bound<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    lambda_1_a: T,
    lambda_1_a_provenance: Provenance,
    sbox: &SearchBox<T>,
) -> Result<BoundResult<T>> {
    let r = inf_rho(v, w, sbox.radius, sbox.grid_n)?;
    Ok(BoundResult::assemble(
        Target::LambdaDPlus1,
        BoundMethod::SecondOrder,
        lambda_1_a + r.value,
        vec![
            positive("inf_rho_positive", r.value),
            positive("lambda_1_a_positive", lambda_1_a),
        ],
        vec![
            constituent("lambda_1_A", lambda_1_a, lambda_1_a_provenance),
            constituent("inf_rho", r.value, Provenance::GridInfimum),
        ],
    )
    .with_note("lambda_1_A used in place of the gap restricted to weighted gradients"))
}

/// The reweighted potential `V_Aⁱ = V − log S_ii` attached to coordinate `i`.
#[derive(Clone)]
pub struct WeightedMeasureSpec<T> {
    pub index: usize,
    pub potential: Potential<T>,
    pub weight_family: WeightFamily,
}

pub fn weighted_potential<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    i: usize,
) -> Result<WeightedMeasureSpec<T>> {
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: w.dim(),
        });
    }
    if i >= v.dim() {
        return Err(invalid(
            "i",
            format!("index {i} out of range for d = {}", v.dim()),
        ));
    }
    let potential = match w.family() {
        WeightFamily::Identity => v.clone(),
        WeightFamily::ExpEpsU => {
            // −2 log e^{εU} = −2εU, so component i becomes (1 − 2ε)U
            let eps = w.eps().expect("exp family carries eps")[i];
            let s = v.require_structure()?;
            let scaled = s.components[i].scaled(T::one() - T::c(2.0) * eps)?;
            v.with_component(i, scaled)?
        }
        WeightFamily::Custom => {
            let log_s = w.log_s_component(i);
            let (l0, l1, l2) = (log_s.clone(), log_s.clone(), log_s);
            let minus = OneDimComponent::custom(
                move |y| -l0.value(y),
                move |y| -l1.d1(y),
                move |y| -l2.d2(y),
            );
            v.plus_axis_term(
                i,
                minus,
                format!("{} - log S_{}{}", v.label(), i + 1, i + 1),
            )?
        }
    };
    Ok(WeightedMeasureSpec {
        index: i,
        potential,
        weight_family: w.family(),
    })
}

/// How to obtain the per-coordinate gap λ₁ⁱ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapMethod<T> {
    /// Discretise `V_Aⁱ` and take the difference of its two lowest eigenvalues.
    Oracle {
        grid: Grid<T>,
        opts: EigenOptions<T>,
    },
    /// Nested first-order bound (the α/β criteria for `exp_eps_U` weights,
    /// `inf ρ(∇²V)` for the identity weight).
    Analytic { sbox: SearchBox<T> },
}

impl<T: Scalar> GapMethod<T> {
    pub fn oracle(grid: Grid<T>) -> Self {
        GapMethod::Oracle {
            grid,
            opts: EigenOptions::default(),
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            GapMethod::Oracle { .. } => Provenance::OracleEigensolve,
            GapMethod::Analytic { .. } => Provenance::AnalyticClosedForm,
        }
    }
}

fn oracle_gap<T: Scalar>(v: &Potential<T>, grid: &Grid<T>, opts: &EigenOptions<T>) -> Result<T> {
    let spec = lowest_eigs_with(&discretize(v, grid)?, 2, opts)?;
    Ok(spec.eigenvalues[1] - spec.eigenvalues[0])
}

/// λ₁ⁱ, the spectral gap of `μ_Aⁱ ∝ e^{−V_Aⁱ}`.
pub fn weighted_gap<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    i: usize,
    method: &GapMethod<T>,
) -> Result<T> {
    match method {
        GapMethod::Oracle { grid, opts } => {
            let spec = weighted_potential(v, w, i)?;
            oracle_gap(&spec.potential, grid, opts)
        }
        GapMethod::Analytic { sbox } => match w.family() {
            WeightFamily::Identity => {
                let r = inf_rho(v, w, sbox.radius, sbox.grid_n)?;
                Ok(r.value)
            }
            WeightFamily::ExpEpsU => {
                let eps = w.eps().expect("exp family carries eps");
                let ab = alpha_beta(
                    v,
                    &eps,
                    &AlphaRoute::Separated {
                        radius: sbox.radius,
                    },
                )?;
                Ok(analytic_gap_from(&ab, i))
            }
            WeightFamily::Custom => Err(Error::UnsupportedWeight),
        },
    }
}

fn analytic_gap_from<T: Scalar>(ab: &AlphaBeta<T>, i: usize) -> T {
    ab.alpha
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .fold(ab.beta[i], |m, (_, &a)| m.min(a))
}

/// λ₁ᴬ = min_i λ₁ⁱ with every per-index value reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGaps<T> {
    pub value: T,
    pub per_index: Vec<T>,
    /// Smallest index attaining the minimum.
    pub argmin: usize,
    pub provenance: Provenance,
}

pub fn lambda_1_a<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    method: &GapMethod<T>,
) -> Result<WeightedGaps<T>> {
    let d = v.dim();
    let per_index: Vec<T> = match (method, w.family()) {
        // identical reweighted measures: one solve serves every index
        (GapMethod::Oracle { .. }, WeightFamily::Identity) => {
            vec![weighted_gap(v, w, 0, method)?; d]
        }
        (GapMethod::Analytic { sbox }, WeightFamily::ExpEpsU) => {
            let eps = w.eps().expect("exp family carries eps");
            let ab = alpha_beta(
                v,
                &eps,
                &AlphaRoute::Separated {
                    radius: sbox.radius,
                },
            )?;
            (0..d).map(|i| analytic_gap_from(&ab, i)).collect()
        }
        _ => (0..d)
            .map(|i| weighted_gap(v, w, i, method))
            .collect::<Result<_>>()?,
    };
    let (argmin, value) =
        per_index
            .iter()
            .enumerate()
            .fold(
                (0, T::infinity()),
                |(bi, bv), (i, &x)| if x < bv { (i, x) } else { (bi, bv) },
            );
    Ok(WeightedGaps {
        value,
        per_index,
        argmin,
        provenance: method.provenance(),
    })
}

/// Route used for the α/β infima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRoute<T> {
    /// Interaction replaced by its constants `c₁ − c₂²/2`, then one-dimensional
    /// infima over `[−R, R]`.
    Separated { radius: T },
    /// Joint scan of the full expression over a box.
    Joint { sbox: SearchBox<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub c1: T,
    pub c2: T,
    pub route: AlphaRoute<T>,
    pub provenance: Provenance,
    /// All α_i and β_i positive.
    pub applicable: bool,
}

/// Closed-form or numerical `inf_y p·U″(y) + q·U′(y)²` over `[−R, R]` minus
/// the puncture.
pub fn inf_curvature_combination<T: Scalar>(
    u: &OneDimComponent<T>,
    p: T,
    q: T,
    radius: T,
) -> (T, Provenance) {
    let s = u.scale();
    match (u.family(), u.exponent()) {
        (ComponentFamily::Power, Some(a)) if p > T::zero() && q > T::zero() && a < T::c(2.0) => {
            // f(y) = p s (a−1) y^{a−2} + q s² y^{2a−2}, stationary at y^a = p(2−a)/(2qs)
            let ystar = (p * (T::c(2.0) - a) / (T::c(2.0) * q * s)).powf(T::one() / a);
            let y = ystar.min(radius);
            let value = p * s * (a - T::one()) * y.powf(a - T::c(2.0))
                + q * s * s * y.powf(T::c(2.0) * a - T::c(2.0));
            (value, Provenance::AnalyticClosedForm)
        }
        (ComponentFamily::Quadratic, _) if q >= T::zero() => {
            (p * s, Provenance::AnalyticClosedForm)
        }
        _ => {
            let f = |y: T| p * u.d2(y) + q * u.d1(y) * u.d1(y);
            let r = grid_refine_1d(f, -radius, radius, 20001, |y| u.in_puncture(y), T::c(1e-12));
            (r.value, Provenance::GridInfimum)
        }
    }
}

fn check_eps<T: Scalar>(v: &Potential<T>, eps: &[T]) -> Result<()> {
    if eps.len() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: eps.len(),
        });
    }
    if let Some(bad) = eps.iter().find(|&&e| !(e > T::zero() && e < T::c(0.5))) {
        return Err(invalid(
            "eps",
            format!("each ε_i must lie in (0, 1/2), got {bad}"),
        ));
    }
    Ok(())
}

/// Coefficients `(p, q)` of `pU″ + qU′²` in α_i and β_i.
fn alpha_coeffs<T: Scalar>(e: T) -> (T, T) {
    (T::one() - e, e * (T::one() - T::c(1.5) * e))
}

fn beta_coeffs<T: Scalar>(e: T) -> (T, T) {
    let r = T::one() - T::c(2.0) * e;
    ((T::one() - e) * r, e * (T::one() - T::c(1.5) * e) * r * r)
}

/// α_i and β_i of the perturbed-product criteria.
pub fn alpha_beta<T: Scalar>(
    v: &Potential<T>,
    eps: &[T],
    route: &AlphaRoute<T>,
) -> Result<AlphaBeta<T>> {
    let s = v.require_structure()?;
    check_eps(v, eps)?;
    let (c1, c2) = s.interaction_constants();
    let d = v.dim();
    let (alpha, beta, provenance) = match route {
        AlphaRoute::Separated { radius } => {
            let shift = c1 - c2 * c2 * T::c(0.5);
            let mut prov = Provenance::AnalyticClosedForm;
            let mut one = |i: usize, (p, q): (T, T)| {
                let (val, pr) = inf_curvature_combination(&s.components[i], p, q, *radius);
                if pr != Provenance::AnalyticClosedForm {
                    prov = Provenance::GridInfimum;
                }
                shift + val
            };
            let alpha: Vec<T> = (0..d).map(|i| one(i, alpha_coeffs(eps[i]))).collect();
            let beta: Vec<T> = (0..d).map(|i| one(i, beta_coeffs(eps[i]))).collect();
            (alpha, beta, prov)
        }
        AlphaRoute::Joint { sbox } => {
            let joint = |i: usize, (p, q): (T, T)| -> Result<T> {
                let u = &s.components[i];
                let r = box_infimum(
                    d,
                    sbox.radius,
                    sbox.grid_n,
                    |x| {
                        let rho = s.interaction_hessian(x).min_eigenvalue();
                        let gi = s.interaction_gradient(x)[i];
                        rho - gi * gi * T::c(0.5) + p * u.d2(x[i]) + q * u.d1(x[i]) * u.d1(x[i])
                    },
                    |x| v.in_puncture(x),
                )?;
                Ok(r.value)
            };
            let alpha = (0..d)
                .map(|i| joint(i, alpha_coeffs(eps[i])))
                .collect::<Result<Vec<T>>>()?;
            let beta = (0..d)
                .map(|i| joint(i, beta_coeffs(eps[i])))
                .collect::<Result<Vec<T>>>()?;
            (alpha, beta, Provenance::GridInfimum)
        }
    };
    let applicable = alpha.iter().chain(&beta).all(|&x| x > T::zero());
    Ok(AlphaBeta {
        alpha,
        beta,
        c1,
        c2,
        route: *route,
        provenance,
        applicable,
    })
}

/// `inf_y U″ + εU′²` for `U = |y|^a/a`:
/// `(a−1)((2−a)/(2ε))^{1−2/a} + ε((2−a)/(2ε))^{2−2/a}`.
pub fn closed_form_inf_power<T: Scalar>(a: T, eps: T) -> Result<T> {
    let two = T::c(2.0);
    if !(a > T::one() && a < two) {
        return Err(invalid(
            "a",
            format!("exponent must lie in (1, 2), got {a}"),
        ));
    }
    if !(eps > T::zero() && eps < T::c(0.5)) {
        return Err(invalid("eps", format!("ε must lie in (0, 1/2), got {eps}")));
    }
    let base = (two - a) / (two * eps);
    Ok((a - T::one()) * base.powf(T::one() - two / a) + eps * base.powf(two - two / a))
}

/// Radius used for one-dimensional infima of non-closed-form components.
pub const DEFAULT_COMPONENT_RADIUS: f64 = 8.0;

/// `(1 − 3ε/2)(1 − 2ε)² inf(U″ + εU′²)` for one component.
pub fn gamma_component<T: Scalar>(u: &OneDimComponent<T>, eps: T, radius: T) -> (T, Provenance) {
    let r = T::one() - T::c(2.0) * eps;
    let factor = (T::one() - T::c(1.5) * eps) * r * r;
    let (inf, prov) = inf_curvature_combination(u, T::one(), eps, radius);
    (factor * inf, prov)
}

/// γ = min_i γ_i and its provenance.
pub fn gamma<T: Scalar>(v: &Potential<T>, eps: &[T]) -> Result<(T, Provenance)> {
    let s = v.require_structure()?;
    check_eps(v, eps)?;
    let radius = T::c(DEFAULT_COMPONENT_RADIUS);
    let mut best = T::infinity();
    let mut prov = Provenance::AnalyticClosedForm;
    for (u, &e) in s.components.iter().zip(eps) {
        let (g, p) = gamma_component(u, e, radius);
        if p != Provenance::AnalyticClosedForm {
            prov = p;
        }
        best = best.min(g);
    }
    Ok((best, prov))
}

/// The perturbed-product bounds `λ₁ ≥ γ + c₁ − c₂²/2` and
/// `λ_{d+1} ≥ 2γ + c₁ − c₂²/2`.
pub fn prop41<T: Scalar>(v: &Potential<T>, eps: &[T]) -> Result<(BoundResult<T>, BoundResult<T>)> {
    let s = v.require_structure()?;
    let (gamma, gamma_prov) = gamma(v, eps)?;
    let (c1, c2) = s.interaction_constants();
    let penalty = c1 - c2 * c2 * T::c(0.5);
    let convex = s.components.iter().all(|u| u.convex());
    let convex_check = HypothesisCheck {
        name: "components_convex".to_string(),
        passed: convex,
        margin: if convex { T::one() } else { -T::one() },
    };
    let mut constituents = vec![
        constituent("gamma", gamma, gamma_prov),
        constituent("c_1", c1, Provenance::AnalyticClosedForm),
        constituent("c_2", c2, Provenance::AnalyticClosedForm),
    ];
    for (i, &e) in eps.iter().enumerate() {
        constituent_push(&mut constituents, &format!("eps_{}", i + 1), e);
    }
    let low = gamma + penalty;
    let high = T::c(2.0) * gamma + penalty;
    let first = BoundResult::assemble(
        Target::Lambda1,
        BoundMethod::PerturbedProduct,
        low,
        vec![
            convex_check.clone(),
            positive("gamma_positive", gamma),
            positive("bound_positive", low),
        ],
        constituents.clone(),
    );
    let second = BoundResult::assemble(
        Target::LambdaDPlus1,
        BoundMethod::PerturbedProduct,
        high,
        vec![
            convex_check,
            positive("gamma_positive", gamma),
            positive("bound_positive", low),
        ],
        constituents,
    );
    Ok((first, second))
}

fn constituent_push<T>(list: &mut Vec<Constituent<T>>, name: &str, value: T) {
    list.push(constituent(name, value, Provenance::Supplied));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsObjective {
    Gamma,
    /// `γ + c₁ − c₂²/2`, which differs from γ by an ε-independent constant.
    Lambda1Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsOptimum<T> {
    pub eps: Vec<T>,
    pub value: T,
    /// Achieved γ_i per coordinate.
    pub per_coordinate: Vec<T>,
}

/// Search bounds for each ε_i.
pub const EPS_RANGE: (f64, f64) = (1e-3, 0.5 - 1e-3);
const EPS_SEEDS: usize = 64;

/// Maximises the objective over ε coordinate by coordinate (γ is a minimum of
/// per-coordinate terms): a 64-point seed grid, plus `1 − a/2` for power
/// components, then golden-section refinement around the best seed.
pub fn optimize_eps<T: Scalar>(v: &Potential<T>, objective: EpsObjective) -> Result<EpsOptimum<T>> {
    let s = v.require_structure()?;
    let radius = T::c(DEFAULT_COMPONENT_RADIUS);
    let (lo, hi) = (T::c(EPS_RANGE.0), T::c(EPS_RANGE.1));
    let step = (hi - lo) / T::from_usize_lossy(EPS_SEEDS - 1);
    let mut eps = Vec::with_capacity(v.dim());
    let mut per = Vec::with_capacity(v.dim());
    for u in &s.components {
        let g = |e: T| gamma_component(u, e, radius).0;
        let mut seeds: Vec<T> = (0..EPS_SEEDS)
            .map(|k| lo + step * T::from_usize_lossy(k))
            .collect();
        if let Some(a) = u.exponent() {
            let e = T::one() - a * T::c(0.5);
            if e >= lo && e <= hi {
                seeds.push(e);
            }
        }
        let (mut best_e, mut best_g) = (seeds[0], T::neg_infinity());
        for &e in &seeds {
            let val = g(e);
            if val > best_g {
                best_e = e;
                best_g = val;
            }
        }
        let (a, b) = ((best_e - step).max(lo), (best_e + step).min(hi));
        let (e_ref, neg) = golden_section(|e| -g(e), a, b, T::c(1e-10));
        if -neg > best_g {
            best_e = e_ref;
            best_g = -neg;
        }
        eps.push(best_e);
        per.push(best_g);
    }
    let gamma = per.iter().copied().fold(T::infinity(), T::min);
    let value = match objective {
        EpsObjective::Gamma => gamma,
        EpsObjective::Lambda1Bound => {
            let (c1, c2) = s.interaction_constants();
            gamma + c1 - c2 * c2 * T::c(0.5)
        }
    };
    Ok(EpsOptimum {
        eps,
        value,
        per_coordinate: per,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarField;

    fn power(d: usize, c: f64) -> Potential<f64> {
        Potential::power_product(d, 1.5, c, 0.01).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let g2 = Potential::<f64>::gaussian(2).unwrap();
        let b =
            first_order_bound(&g2, &DiagonalWeight::identity(2), &SearchBox::new(8.0, 33)).unwrap();
        assert_eq!(b.value, Some(1.0));

        let p = power(1, 0.0);
        let w = DiagonalWeight::exp_eps_u(&p, &[0.25]).unwrap();
        let b = first_order_bound(&p, &w, &SearchBox::default_for(1)).unwrap();
        assert!((b.value.unwrap() - 0.5625).abs() < 1e-10);

        let g1 = Potential::<f64>::gaussian(1).unwrap();
        let w = DiagonalWeight::exp_eps_u(&g1, &[0.25]).unwrap();
        let b = first_order_bound(&g1, &w, &SearchBox::default_for(1)).unwrap();
        assert!((b.value.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cordero_examples() {
        let g2 = Potential::<f64>::gaussian(2).unwrap();
        let b = cordero_bound(&g2, 1.0, Provenance::Supplied, &SearchBox::new(8.0, 33)).unwrap();
        assert_eq!(b.value, Some(2.0));
        let p = Potential::product(vec![OneDimComponent::power(1.5).unwrap()], None).unwrap();
        let b = cordero_bound(&p, 0.3, Provenance::Supplied, &SearchBox::new(8.0, 401)).unwrap();
        // U″ = 0.5|y|^{−1/2} is positive on the box but decays, so the bound
        // applies only with the box-limited infimum
        assert!(b.constituent("inf_rho_hessian").unwrap() < 0.18);
    }

    #[test]
    fn second_order_examples() {
        let g2 = Potential::<f64>::gaussian(2).unwrap();
        let id = DiagonalWeight::identity(2);
        let b = second_order_bound(
            &g2,
            &id,
            1.0,
            Provenance::Supplied,
            &SearchBox::new(8.0, 33),
        )
        .unwrap();
        assert_eq!(b.value, Some(2.0));
        let b = second_order_bound(
            &g2,
            &id,
            0.0,
            Provenance::Supplied,
            &SearchBox::new(8.0, 33),
        )
        .unwrap();
        assert!(!b.applicable());
    }

    #[test]
    fn weighted_potential_scales_component() {
        let g1 = Potential::<f64>::gaussian(1).unwrap();
        let w = DiagonalWeight::exp_eps_u(&g1, &[0.25]).unwrap();
        let va = weighted_potential(&g1, &w, 0).unwrap();
        assert!((va.potential.value(&[2.0]) - 1.0).abs() < 1e-15);
        let custom = DiagonalWeight::custom(vec![crate::model::CustomCoord::new(|y: f64| {
            (0.125 * y * y).exp()
        })]);
        let vc = weighted_potential(&g1, &custom, 0).unwrap();
        assert!((vc.potential.value(&[2.0]) - 1.0).abs() < 1e-12);
        assert!((vc.potential.hessian(&[0.7])[(0, 0)] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn analytic_gaps() {
        let g2 = Potential::<f64>::gaussian(2).unwrap();
        let id = DiagonalWeight::identity(2);
        let m = GapMethod::Analytic {
            sbox: SearchBox::new(8.0, 33),
        };
        let gaps = lambda_1_a(&g2, &id, &m).unwrap();
        assert_eq!(gaps.per_index, vec![1.0, 1.0]);
        let p = power(2, 0.0);
        let w = DiagonalWeight::exp_eps_u(&p, &[0.25, 0.25]).unwrap();
        let ab = alpha_beta(&p, &[0.25, 0.25], &AlphaRoute::Separated { radius: 8.0 }).unwrap();
        let g = weighted_gap(&p, &w, 0, &m).unwrap();
        assert_eq!(g, ab.alpha[1].min(ab.beta[0]));
        let custom = DiagonalWeight::custom(vec![crate::model::CustomCoord::new(|_y: f64| 1.0); 2]);
        assert_eq!(
            weighted_gap(&g2, &custom, 0, &m),
            Err(Error::UnsupportedWeight)
        );
    }

    #[test]
    fn alpha_beta_examples() {
        let p = power(1, 0.0);
        let ab = alpha_beta(&p, &[0.25], &AlphaRoute::Separated { radius: 8.0 }).unwrap();
        assert!((ab.alpha[0] - 0.529_3).abs() < 1e-4, "{}", ab.alpha[0]);
        let f = |y: f64| 0.375 * 0.5 * y.powf(-0.5) + 0.15625 * 0.25 * y;
        let brute = (1..200_000)
            .map(|k| f(k as f64 * 4e-5))
            .fold(f64::INFINITY, f64::min);
        assert!((ab.beta[0] - brute).abs() < 1e-8);

        let p2 = power(2, 0.1);
        let sep = alpha_beta(&p2, &[0.25, 0.25], &AlphaRoute::Separated { radius: 8.0 }).unwrap();
        let p0 = power(2, 0.0);
        let sep0 = alpha_beta(&p0, &[0.25, 0.25], &AlphaRoute::Separated { radius: 8.0 }).unwrap();
        assert!((sep0.alpha[0] - sep.alpha[0] - 0.02).abs() < 1e-14);
        let joint = alpha_beta(
            &p2,
            &[0.25, 0.25],
            &AlphaRoute::Joint {
                sbox: SearchBox::new(4.0, 81),
            },
        )
        .unwrap();
        assert!(joint.alpha[0] >= sep.alpha[0] - 1e-9);
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_inf_power(1.5f64, 0.25).unwrap() - 0.75).abs() < 1e-15);
        let expect = 0.5 * 2.5f64.powf(-1.0 / 3.0) + 0.1 * 2.5f64.powf(2.0 / 3.0);
        assert!((closed_form_inf_power(1.5f64, 0.1).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.5526).abs() < 1e-3);
        assert!(closed_form_inf_power(1.5f64, 1e-6).unwrap() < 0.02);
        assert!(closed_form_inf_power(2.0f64, 0.25).is_err());
    }

    #[test]
    fn prop41_examples() {
        let p = power(2, 0.1);
        let (l1, l3) = prop41(&p, &[0.25, 0.25]).unwrap();
        assert!((l1.value.unwrap() - 0.0971875).abs() < 1e-12);
        assert!((l3.value.unwrap() - 0.214375).abs() < 1e-12);
        assert!((l1.constituent("gamma").unwrap() - 0.1171875).abs() < 1e-15);
        let heavy = power(2, 0.3);
        let (l1, _) = prop41(&heavy, &[0.25, 0.25]).unwrap();
        assert!(!l1.applicable());
    }

    #[test]
    fn optimizer_examples() {
        let p = power(1, 0.0);
        let opt = optimize_eps(&p, EpsObjective::Gamma).unwrap();
        assert!(opt.value >= 0.1171875);
        let q = Potential::product(vec![OneDimComponent::<f64>::quadratic()], None).unwrap();
        let opt = optimize_eps(&q, EpsObjective::Gamma).unwrap();
        assert!(opt.eps[0] < 0.01, "{:?}", opt);
        let g = |e: f64| gamma_component(&OneDimComponent::power(1.5).unwrap(), e, 8.0).0;
        let (e, negv) = golden_section(|e| -g(e), 1e-3, 0.499, 1e-10);
        assert!((opt_single(&p) - (-negv)).abs() < 1e-9, "{e}");
    }

    fn opt_single(p: &Potential<f64>) -> f64 {
        optimize_eps(p, EpsObjective::Gamma).unwrap().value
    }
}

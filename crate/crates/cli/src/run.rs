//! Command execution.

use std::collections::BTreeMap;
use std::time::Instant;

use specgap::bounds::{
    alpha_beta, cordero_bound, first_order_bound, lambda_1_a, optimize_eps, prop41,
    second_order_bound, AlphaRoute, EpsObjective, GapMethod, Provenance, SearchBox, Target,
};
use specgap::intertwine::{check_intertwining, symmetry_report};
use specgap::model::{FnField, ScalarField};
use specgap::oracle::{
    discretize, johnsen_check_1d, lowest_eigs_with, verify_bl, verify_cordero,
    verify_second_order_1d, verify_variance_identity_1d, EigenOptions,
};
use specgap::{
    BoundResult, DiagonalWeight, DiscreteOperator, Grid, MatrixField, Potential, SpectrumResult,
    WeightFamily,
};

use crate::config::{Command, ProblemSpec, RunConfig, WeightSpec, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::write_outputs;
use crate::report::{
    GridInfo, IntertwiningSummary, Metadata, NamedBound, NamedIdentity, NamedInequality,
    NamedSecondOrder, Report, Verification, Violation, VIOLATION_TOL,
};

/// Seed used when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Finite-difference step of the intertwining residuals.
pub const INTERTWINING_STEP: f64 = 1e-3;
const SYMMETRY_SAMPLES: usize = 64;

pub(crate) struct Problem {
    pub potential: Potential<f64>,
    pub weight: DiagonalWeight<f64>,
    pub weight_label: String,
    pub eps: Option<Vec<f64>>,
}

pub(crate) fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let potential = match &cfg.problem {
        ProblemSpec::Gaussian { d } => Potential::gaussian(*d)?,
        ProblemSpec::Power { d, a, c, tau } => Potential::power_product(*d, *a, *c, *tau)?,
        ProblemSpec::Custom { d, expression } => Potential::from_expression(*d, expression)?,
    };
    let d = potential.dim();
    let spec = cfg.weight.clone().unwrap_or(match &cfg.problem {
        ProblemSpec::Power { a, .. } => WeightSpec::ExpEpsU {
            eps: vec![1.0 - a / 2.0; d],
        },
        _ => WeightSpec::Identity,
    });
    let (eps, weight_label) = match spec {
        WeightSpec::Identity => (None, "identity".to_string()),
        WeightSpec::ExpEpsU { eps } => (Some(eps), "exp_eps_u".to_string()),
        WeightSpec::Optimize => {
            let opt = optimize_eps(&potential, EpsObjective::Gamma)?;
            (Some(opt.eps), "exp_eps_u (optimised)".to_string())
        }
    };
    let weight = match &eps {
        None => DiagonalWeight::identity(d),
        Some(e) => DiagonalWeight::exp_eps_u(&potential, e)?,
    };
    Ok(Problem {
        potential,
        weight,
        weight_label,
        eps,
    })
}

fn search_box(cfg: &RunConfig, d: usize) -> SearchBox<f64> {
    let default = SearchBox::<f64>::default_for(d);
    SearchBox::new(
        cfg.search.radius,
        cfg.search.grid_n.unwrap_or(default.grid_n),
    )
}

fn oracle_grid(cfg: &RunConfig, d: usize) -> Result<Grid<f64>, CliError> {
    match (cfg.grid.radius, cfg.grid.n) {
        (Some(r), Some(n)) => Ok(Grid::new(d, r, n)?),
        (r, n) => {
            let def = Grid::default_for(d).map_err(|_| {
                CliError::Config(format!("grid: radius and n are required for d = {d}"))
            })?;
            Ok(Grid::new(d, r.unwrap_or(def.radius), n.unwrap_or(def.n))?)
        }
    }
}

/// State shared between commands of one run.
pub(crate) struct Session<'a> {
    pub cfg: &'a RunConfig,
    pub problem: Problem,
    pub sbox: SearchBox<f64>,
    pub seed: u64,
    pub op: Option<DiscreteOperator<f64>>,
    pub spectrum: Option<SpectrumResult<f64>>,
    pub report: Report,
}

impl<'a> Session<'a> {
    fn operator(&mut self) -> Result<&DiscreteOperator<f64>, CliError> {
        if self.op.is_none() {
            let grid = oracle_grid(self.cfg, self.problem.potential.dim())?;
            self.report.metadata.grid = Some(GridInfo {
                radius: grid.radius,
                n: grid.n,
                spacing: grid.spacing(),
                nodes: grid.len(),
            });
            self.op = Some(discretize(&self.problem.potential, &grid)?);
        }
        Ok(self.op.as_ref().expect("operator just built"))
    }

    fn push(&mut self, id: &str, result: BoundResult<f64>) {
        self.report.bounds.push(NamedBound {
            id: id.to_string(),
            result,
        });
    }

    fn bounds(&mut self) -> Result<(), CliError> {
        let v = self.problem.potential.clone();
        let w = self.problem.weight.clone();
        let sbox = self.sbox;
        let mut best_lambda_1: Option<(f64, Provenance)> = None;
        let mut consider = |b: &BoundResult<f64>, prov: Provenance| {
            if let Some(x) = b.value {
                if best_lambda_1.is_none_or(|(y, _)| x > y) {
                    best_lambda_1 = Some((x, prov));
                }
            }
        };

        let first = first_order_bound(&v, &w, &sbox)?;
        consider(&first, Provenance::GridInfimum);
        self.push("first_order", first);
        if w.family() != WeightFamily::Identity {
            let plain = first_order_bound(&v, &DiagonalWeight::identity(v.dim()), &sbox)?;
            consider(&plain, Provenance::GridInfimum);
            self.push("first_order_identity", plain);
        }

        if let (Some(eps), Some(_)) = (self.problem.eps.clone(), v.structure()) {
            let (l1, ld) = prop41(&v, &eps)?;
            consider(&l1, Provenance::AnalyticClosedForm);
            self.push("perturbed_product_lambda_1", l1);
            self.push("perturbed_product_lambda_d_plus_1", ld);
            self.report.alpha_beta = Some(alpha_beta(
                &v,
                &eps,
                &AlphaRoute::Separated {
                    radius: sbox.radius,
                },
            )?);
        }

        if let Some((lambda_1, prov)) = best_lambda_1 {
            let b = cordero_bound(&v, lambda_1, prov, &sbox)?;
            self.push("cordero", b);
        }

        match lambda_1_a(&v, &w, &GapMethod::Analytic { sbox }) {
            Ok(gaps) => {
                let b = second_order_bound(&v, &w, gaps.value, gaps.provenance, &sbox)?;
                self.report.weighted_gaps = Some(gaps);
                self.push("second_order", b);
            }
            Err(specgap::Error::MissingStructure | specgap::Error::UnsupportedWeight) => {}
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }

    fn eigs(&mut self) -> Result<(), CliError> {
        let d = self.problem.potential.dim();
        let k = self.cfg.grid.k.unwrap_or(d + 2);
        let opts = EigenOptions {
            seed: self.seed,
            ..EigenOptions::default()
        };
        let spectrum = lowest_eigs_with(self.operator()?, k, &opts)?;
        let mut public = spectrum.clone();
        public.vectors.clear();
        self.report.spectrum = Some(public);
        self.spectrum = Some(spectrum);
        Ok(())
    }

    fn verify(&mut self) -> Result<(), CliError> {
        let v = self.problem.potential.clone();
        let w = self.problem.weight.clone();
        let d = v.dim();
        let last = d - 1;

        let tests: Vec<FnField<f64>> = vec![
            FnField::new(d, |x: &[f64]| x[0]),
            FnField::new(d, move |x: &[f64]| x[0] * x[last]),
            FnField::new(d, move |x: &[f64]| x[0].powi(3) + x[last] * x[last]),
        ];
        let points: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                (0..d)
                    .map(|i| {
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        0.4 * (j + 1) as f64 * sign + 0.05 * i as f64
                    })
                    .collect()
            })
            .collect();
        let mut max_residual = 0.0f64;
        for f in &tests {
            for x in &points {
                let r =
                    check_intertwining(&v, &w, f as &dyn ScalarField<f64>, x, INTERTWINING_STEP)?;
                max_residual = r.iter().fold(max_residual, |m, &c| m.max(c.abs()));
            }
        }
        let intertwining = IntertwiningSummary {
            step: INTERTWINING_STEP,
            samples: tests.len() * points.len(),
            max_residual,
        };
        let symmetry = symmetry_report(
            &v,
            &MatrixField::from_weight(&w),
            self.sbox.radius.min(4.0),
            SYMMETRY_SAMPLES,
            self.seed,
        )?;

        let op = self.operator()?.clone();
        let grid = *op.grid();
        let vg = v.clone();
        let generic: Vec<(&str, Vec<f64>)> = vec![
            ("product", grid.sample(|x| x[0] * x[last])),
            ("sine", grid.sample(|x| x[0].sin())),
            ("extremal_gradient", grid.sample(|x| vg.gradient(x)[0])),
        ];
        let mut brascamp_lieb = Vec::new();
        for (name, f) in &generic {
            brascamp_lieb.push(NamedInequality {
                name: format!("hessian/{name}"),
                check: verify_bl(&op, &v, None, f)?,
            });
            if w.family() != WeightFamily::Identity {
                brascamp_lieb.push(NamedInequality {
                    name: format!("curvature/{name}"),
                    check: verify_bl(&op, &v, Some(&w), f)?,
                });
            }
        }

        let cordero = match &self.spectrum {
            Some(s) if s.eigenvalues.len() > 1 => {
                let f = grid.sample(|x| {
                    if d > 1 {
                        x[0] * x[last]
                    } else {
                        x[0] * x[0] - 1.0
                    }
                });
                Some(verify_cordero(&op, &v, s.eigenvalues[1], &f)?)
            }
            _ => None,
        };

        let (mut variance_identity, mut second_order, mut schrodinger_spectrum) =
            (vec![], vec![], None);
        if d == 1 {
            let fields: Vec<(&str, FnField<f64>)> = vec![
                ("x", FnField::new(1, |x: &[f64]| x[0])),
                ("x^2", FnField::new(1, |x: &[f64]| x[0] * x[0])),
                ("sin", FnField::new(1, |x: &[f64]| x[0].sin())),
            ];
            for (name, f) in &fields {
                variance_identity.push(NamedIdentity {
                    name: name.to_string(),
                    check: verify_variance_identity_1d(&v, &w, f, &grid)?,
                });
                second_order.push(NamedSecondOrder {
                    name: name.to_string(),
                    check: verify_second_order_1d(&v, &w, f, &grid)?,
                });
            }
            schrodinger_spectrum = Some(johnsen_check_1d(&v, &grid, 5)?);
        }

        self.report.verification = Some(Verification {
            intertwining,
            symmetry,
            brascamp_lieb,
            cordero,
            variance_identity,
            second_order,
            schrodinger_spectrum,
        });
        Ok(())
    }
}

/// Bounds above oracle eigenvalues, and inequalities with negative slack,
/// beyond [`VIOLATION_TOL`].
pub fn find_violations(report: &Report) -> Vec<Violation> {
    let mut out = vec![];
    let d = report.metadata.dim;
    if let Some(s) = &report.spectrum {
        for b in &report.bounds {
            let index = match b.result.target {
                Target::Lambda1 => 1,
                Target::LambdaDPlus1 => d + 1,
            };
            if let (Some(claimed), Some(&observed)) = (b.result.value, s.eigenvalues.get(index)) {
                if claimed - observed > VIOLATION_TOL {
                    out.push(Violation {
                        item: b.id.clone(),
                        target: Some(b.result.target),
                        claimed,
                        observed,
                        excess: claimed - observed,
                    });
                }
            }
        }
    }
    if let Some(v) = &report.verification {
        let mut inequality = |name: String, lhs: f64, rhs: f64, slack: f64| {
            if slack < -VIOLATION_TOL {
                out.push(Violation {
                    item: name,
                    target: None,
                    claimed: rhs,
                    observed: lhs,
                    excess: -slack,
                });
            }
        };
        for bl in &v.brascamp_lieb {
            inequality(
                format!("brascamp_lieb/{}", bl.name),
                bl.check.lhs,
                bl.check.rhs,
                bl.check.slack,
            );
        }
        if let Some(c) = &v.cordero {
            inequality("cordero".into(), c.check.lhs, c.check.rhs, c.check.slack);
        }
        for s in &v.second_order {
            inequality(
                format!("second_order/{}", s.name),
                s.check.check.lhs,
                s.check.check.rhs,
                s.check.check.slack,
            );
        }
    }
    out
}

/// Executes the configured commands in order. The `report` command writes
/// `report.json` (and CSV tables) when an output directory is configured.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let d = problem.potential.dim();
    let sbox = search_box(cfg, d);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            potential: problem.potential.label().to_string(),
            dim: d,
            weight: problem.weight_label.clone(),
            eps: problem.eps.clone(),
            search_box: sbox,
            grid: None,
            seed,
            commands: cfg.commands.clone(),
        },
        bounds: vec![],
        alpha_beta: None,
        weighted_gaps: None,
        spectrum: None,
        verification: None,
        violations: vec![],
        timings_ms: BTreeMap::new(),
    };
    let mut session = Session {
        cfg,
        problem,
        sbox,
        seed,
        op: None,
        spectrum: None,
        report,
    };
    for &command in &cfg.commands {
        let t = Instant::now();
        match command {
            Command::Bound => session.bounds()?,
            Command::Eigs => session.eigs()?,
            Command::Verify => session.verify()?,
            Command::Report => {
                session.report.violations = find_violations(&session.report);
                if let Some(dir) = &cfg.output.dir {
                    write_outputs(&session, dir)?;
                }
            }
        }
        let label = serde_json::to_value(command)?
            .as_str()
            .unwrap_or("command")
            .to_string();
        *session.report.timings_ms.entry(label).or_insert(0.0) += t.elapsed().as_secs_f64() * 1e3;
    }
    session.report.violations = find_violations(&session.report);
    Ok(session.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn config(src: &str) -> RunConfig {
        RunConfig::from_toml_str(src).unwrap()
    }

    #[test]
    fn power_defaults_to_half_minus_exponent_weight() {
        let cfg = config("schema_version = 1\ncommands = [\"bound\"]\n[problem]\nfamily = \"power\"\nd = 2\na = 1.5\nc = 0.1\ntau = 0.01\n");
        let p = build_problem(&cfg).unwrap();
        assert_eq!(p.eps, Some(vec![0.25, 0.25]));
    }

    #[test]
    fn custom_potential_rejects_exp_weight() {
        let cfg = config(
            "schema_version = 1\n[problem]\nfamily = \"custom\"\nd = 1\nexpression = \"x1^2\"\n[weight]\nkind = \"exp_eps_u\"\neps = [0.2]\n",
        );
        let err = build_problem(&cfg)
            .err()
            .expect("exp weight needs structure");
        assert_eq!(err.exit_code(), crate::EXIT_CONFIG);
    }

    #[test]
    fn violations_compare_bounds_with_oracle() {
        let cfg = config("schema_version = 1\ncommands = [\"bound\", \"eigs\"]\n[problem]\nfamily = \"gaussian\"\nd = 1\n[grid]\nradius = 8.0\nn = 801\n");
        let mut report = run(&cfg).unwrap();
        assert!(report.violations.is_empty());
        let spectrum = report.spectrum.as_mut().unwrap();
        spectrum.eigenvalues[1] = 0.5;
        let found = find_violations(&report);
        assert!(found
            .iter()
            .any(|v| v.item == "first_order" && (v.excess - 0.5).abs() < 1e-9));
        assert_eq!(
            crate::exit_code(&Report {
                violations: found,
                ..report
            }),
            crate::EXIT_VIOLATION
        );
    }

    #[test]
    fn non_convergence_maps_to_exit_three() {
        let e = CliError::Core(specgap::Error::NoConvergence {
            solver: "test",
            iterations: 1,
            residual: 1.0,
        });
        assert_eq!(e.exit_code(), crate::EXIT_NO_CONVERGENCE);
    }
}

//! Experiment configuration: one JSON document naming a problem and the
//! solvers to run on it.

use crate::CliError;
use lrk_core::krylov::{Restart, Truncation};
use lrk_core::nnr::{LambdaRule, NnrConfig};
use lrk_core::problems::ProblemSpec;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Gmres,
    Lsqr,
    RsLrGmres,
    LrFgmres,
    LrFlsqr,
    IrnGmresNnrp,
    IrnLsqrNnrp,
    FgmresNnrp,
    FlsqrNnrp,
    FgmresNnrpV,
    FlsqrNnrpV,
    Svt,
}

impl SolverKind {
    pub const ALL: [SolverKind; 12] = [
        SolverKind::Gmres,
        SolverKind::Lsqr,
        SolverKind::RsLrGmres,
        SolverKind::LrFgmres,
        SolverKind::LrFlsqr,
        SolverKind::IrnGmresNnrp,
        SolverKind::IrnLsqrNnrp,
        SolverKind::FgmresNnrp,
        SolverKind::FlsqrNnrp,
        SolverKind::FgmresNnrpV,
        SolverKind::FlsqrNnrpV,
        SolverKind::Svt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gmres => "gmres",
            SolverKind::Lsqr => "lsqr",
            SolverKind::RsLrGmres => "rs-lr-gmres",
            SolverKind::LrFgmres => "lr-fgmres",
            SolverKind::LrFlsqr => "lr-flsqr",
            SolverKind::IrnGmresNnrp => "irn-gmres-nnrp",
            SolverKind::IrnLsqrNnrp => "irn-lsqr-nnrp",
            SolverKind::FgmresNnrp => "fgmres-nnrp",
            SolverKind::FlsqrNnrp => "flsqr-nnrp",
            SolverKind::FgmresNnrpV => "fgmres-nnrp-v",
            SolverKind::FlsqrNnrpV => "flsqr-nnrp-v",
            SolverKind::Svt => "svt",
        }
    }

    pub fn needs_square(self) -> bool {
        matches!(
            self,
            SolverKind::Gmres
                | SolverKind::RsLrGmres
                | SolverKind::LrFgmres
                | SolverKind::IrnGmresNnrp
                | SolverKind::FgmresNnrp
                | SolverKind::FgmresNnrpV
        )
    }

    fn is_nnr(self) -> bool {
        matches!(
            self,
            SolverKind::IrnGmresNnrp
                | SolverKind::IrnLsqrNnrp
                | SolverKind::FgmresNnrp
                | SolverKind::FlsqrNnrp
                | SolverKind::FgmresNnrpV
                | SolverKind::FlsqrNnrpV
        )
    }

    /// Whether the monitored residual is the projected one that must match
    /// the true residual (truncated iterates break that identity).
    pub fn has_residual_identity(self) -> bool {
        !matches!(self, SolverKind::LrFgmres | SolverKind::LrFlsqr)
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown solver `{s}` (expected one of {})", names.join(", "))
            })
    }
}

fn default_true() -> bool {
    true
}

fn default_theta() -> f64 {
    1.01
}

/// One solver entry. Only the fields relevant to `name` may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    pub name: String,
    /// Output file prefix; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_rule: Option<LambdaRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nnr: Option<NnrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverEntry>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub emit_images: bool,
    #[serde(default = "default_true")]
    pub emit_spectra: bool,
    #[serde(default)]
    pub cross_check_residuals: bool,
    /// Stop by the discrepancy principle using the generated noise norm.
    #[serde(default)]
    pub discrepancy: bool,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lrk-output")
}

/// A validated solver with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverParams {
    Krylov { max_iter: usize, lambda_rule: LambdaRule },
    LowRank { max_iter: usize, lambda_rule: LambdaRule, ranks: Truncation },
    Restarted { max_iter: usize, restart: Restart },
    Nnr(NnrConfig),
    Svt { max_iter: usize, tau: f64, delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverPlan {
    pub kind: SolverKind,
    pub label: String,
    pub params: SolverParams,
}

fn config_err(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", field.into()))
}

const DEFAULT_MAX_ITER: usize = 100;

impl SolverEntry {
    fn resolve(&self, index: usize, side: usize) -> Result<SolverPlan, CliError> {
        let field = |f: &str| format!("solvers[{index}].{f}");
        let kind: SolverKind = self.name.parse().map_err(|e| config_err(field("name"), e))?;
        let label = self.label.clone().unwrap_or_else(|| kind.name().to_string());
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(config_err(field("label"), format!("`{label}` is not a safe file prefix")));
        }
        let given = |name: &str, present: bool| -> Result<(), CliError> {
            if present {
                Err(config_err(field(name), format!("not used by {}", kind.name())))
            } else {
                Ok(())
            }
        };
        let positive = |name: &str, v: Option<usize>, default: usize| -> Result<usize, CliError> {
            match v {
                Some(0) => Err(config_err(field(name), "must be at least 1")),
                Some(v) => Ok(v),
                None => Ok(default),
            }
        };
        let max_iter = positive("max_iter", self.max_iter, DEFAULT_MAX_ITER)?;
        let lambda_rule = self.lambda_rule.unwrap_or_default();
        if let LambdaRule::Fixed { value } = lambda_rule {
            if !(value >= 0.0) {
                return Err(config_err(field("lambda_rule"), "fixed value must be nonnegative"));
            }
        }
        if !kind.is_nnr() {
            given("nnr", self.nnr.is_some())?;
        }
        if !matches!(kind, SolverKind::LrFgmres | SolverKind::LrFlsqr) {
            given("basis_rank", self.basis_rank.is_some())?;
            given("solution_rank", self.solution_rank.is_some())?;
        }
        if kind != SolverKind::RsLrGmres {
            given("restart_len", self.restart_len.is_some())?;
            given("rank", self.rank.is_some())?;
            given("max_outer", self.max_outer.is_some())?;
        }
        if kind != SolverKind::Svt {
            given("tau", self.tau.is_some())?;
            given("delta", self.delta.is_some())?;
        }
        let rank_in_range = |name: &str, r: usize| -> Result<usize, CliError> {
            if r == 0 || r > side {
                Err(config_err(field(name), format!("must lie in 1..={side}, got {r}")))
            } else {
                Ok(r)
            }
        };
        let params = match kind {
            SolverKind::Gmres | SolverKind::Lsqr => SolverParams::Krylov { max_iter, lambda_rule },
            SolverKind::LrFgmres | SolverKind::LrFlsqr => {
                let basis = self.basis_rank.ok_or_else(|| config_err(field("basis_rank"), "required"))?;
                let solution = self.solution_rank.unwrap_or(basis);
                SolverParams::LowRank {
                    max_iter,
                    lambda_rule,
                    ranks: Truncation {
                        basis_rank: rank_in_range("basis_rank", basis)?,
                        solution_rank: rank_in_range("solution_rank", solution)?,
                    },
                }
            }
            SolverKind::RsLrGmres => {
                given("lambda_rule", self.lambda_rule.is_some())?;
                let length = positive("restart_len", self.restart_len, 40)?;
                let rank = rank_in_range("rank", self.rank.ok_or_else(|| config_err(field("rank"), "required"))?)?;
                let max_outer = positive("max_outer", self.max_outer, max_iter.div_ceil(length))?;
                SolverParams::Restarted {
                    max_iter,
                    restart: Restart { length, rank, max_outer },
                }
            }
            SolverKind::Svt => {
                given("lambda_rule", self.lambda_rule.is_some())?;
                let tau = self.tau.ok_or_else(|| config_err(field("tau"), "required"))?;
                let delta = self.delta.ok_or_else(|| config_err(field("delta"), "required"))?;
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(config_err(field("tau"), "must be positive"));
                }
                if !(delta > 0.0) || !delta.is_finite() {
                    return Err(config_err(field("delta"), "must be positive"));
                }
                SolverParams::Svt { max_iter, tau, delta }
            }
            _ => {
                given("max_iter", self.max_iter.is_some())?;
                given("lambda_rule", self.lambda_rule.is_some())?;
                let nnr = self.nnr.clone().unwrap_or_default();
                nnr.validate().map_err(|e| config_err(field("nnr"), e))?;
                if nnr.lambda_rule == LambdaRule::Optimal
                    && !matches!(kind, SolverKind::IrnGmresNnrp | SolverKind::IrnLsqrNnrp)
                {
                    return Err(config_err(field("nnr.lambda_rule"), "optimal-oracle is only available for irn solvers"));
                }
                SolverParams::Nnr(nnr)
            }
        };
        Ok(SolverPlan { kind, label, params })
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Check everything that can be checked without building operators.
    pub fn plan(&self) -> Result<Vec<SolverPlan>, CliError> {
        if self.solvers.is_empty() {
            return Err(config_err("solvers", "at least one solver is required"));
        }
        if !(self.theta > 1.0) || !self.theta.is_finite() {
            return Err(config_err("theta", "must exceed 1"));
        }
        let side = self.problem.side();
        let mut labels = HashSet::new();
        let mut plans = Vec::with_capacity(self.solvers.len());
        for (i, entry) in self.solvers.iter().enumerate() {
            let plan = entry.resolve(i, side)?;
            if !labels.insert(plan.label.clone()) {
                return Err(config_err(format!("solvers[{i}].label"), format!("duplicate label `{}`", plan.label)));
            }
            if plan_needs_discrepancy(&plan) && !self.discrepancy {
                return Err(config_err(
                    format!("solvers[{i}].lambda_rule"),
                    "the secant rule needs \"discrepancy\": true",
                ));
            }
            plans.push(plan);
        }
        Ok(plans)
    }

}

/// Reject square-only solvers once the operator shape is known.
pub fn check_operator(plans: &[SolverPlan], rows: usize, cols: usize) -> Result<(), CliError> {
    for (i, plan) in plans.iter().enumerate() {
        if plan.kind.needs_square() && rows != cols {
            return Err(config_err(
                format!("solvers[{i}].name"),
                format!("{} needs a square operator, the problem is {rows}x{cols}", plan.kind.name()),
            ));
        }
    }
    Ok(())
}

fn plan_needs_discrepancy(plan: &SolverPlan) -> bool {
    match &plan.params {
        SolverParams::Krylov { lambda_rule, .. } | SolverParams::LowRank { lambda_rule, .. } => {
            *lambda_rule == LambdaRule::Secant
        }
        SolverParams::Nnr(c) => c.lambda_rule == LambdaRule::Secant && c.epsilon.is_none(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(solvers: &str) -> String {
        format!(
            r#"{{"problem": {{"type": "star", "n": 16, "noise_level": 0.001, "sigma_blur": 1.5, "seed": 1}},
                "solvers": {solvers}}}"#
        )
    }

    #[test]
    fn names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("cg".parse::<SolverKind>().is_err());
    }

    #[test]
    fn resolves_defaults() {
        let c = ExperimentConfig::parse(&base(r#"[{"name": "gmres"}, {"name": "irn-gmres-nnrp"}]"#)).unwrap();
        let plans = c.plan().unwrap();
        assert_eq!(
            plans[0].params,
            SolverParams::Krylov {
                max_iter: 100,
                lambda_rule: LambdaRule::Zero
            }
        );
        assert_eq!(plans[1].params, SolverParams::Nnr(NnrConfig::default()));
        assert!(c.emit_images && c.emit_spectra && !c.cross_check_residuals);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"[]"#, "solvers"),
            (r#"[{"name": "cg"}]"#, "solvers[0].name"),
            (r#"[{"name": "gmres"}, {"name": "gmres"}]"#, "solvers[1].label"),
            (r#"[{"name": "gmres", "tau": 1}]"#, "solvers[0].tau"),
            (r#"[{"name": "lr-fgmres"}]"#, "solvers[0].basis_rank"),
            (r#"[{"name": "lr-fgmres", "basis_rank": 17}]"#, "solvers[0].basis_rank"),
            (r#"[{"name": "svt", "tau": 1}]"#, "solvers[0].delta"),
            (r#"[{"name": "gmres", "lambda_rule": {"rule": "secant"}}]"#, "solvers[0].lambda_rule"),
            (r#"[{"name": "flsqr-nnrp", "nnr": {"p": 2}}]"#, "solvers[0].nnr"),
            (r#"[{"name": "gmres", "max_iter": 0}]"#, "solvers[0].max_iter"),
        ];
        for (solvers, field) in cases {
            let c = ExperimentConfig::parse(&base(solvers)).unwrap();
            match c.plan() {
                Err(CliError::Config(msg)) => assert!(msg.starts_with(field), "{msg} does not name {field}"),
                other => panic!("{solvers}: expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_unknown_keys_and_rectangular_gmres() {
        assert!(ExperimentConfig::parse(&base(r#"[{"name": "gmres", "speed": 2}]"#)).is_err());
        let c = ExperimentConfig::parse(&base(r#"[{"name": "lsqr"}, {"name": "gmres"}]"#)).unwrap();
        let plans = c.plan().unwrap();
        assert!(check_operator(&plans, 16, 16).is_ok());
        match check_operator(&plans, 20, 16) {
            Err(CliError::Config(msg)) => assert!(msg.starts_with("solvers[1].name")),
            other => panic!("{other:?}"),
        }
    }
}

use std::fmt;
use std::str::FromStr;

use crate::convex::ObjectiveSpec;
use crate::error::{Error, Result};

use super::steps::{AlphaChoice, StepRule};

/// Members of the extended Bregman-Kaczmarz family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Single row / single column steps, no relaxation.
    Rebk,
    /// Averaging blocks with constant relaxation on a quadratic objective.
    Reabk,
    /// Averaging blocks with constant relaxation `1 / beta_max`.
    Crabebk,
    /// Averaging blocks with residual-adaptive relaxation.
    Arabebk,
    /// Averaging blocks with unit relaxation.
    Rabebk,
    /// Averaging blocks with exact line-search relaxation.
    ExactLsRabebk,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Rebk,
        Method::Reabk,
        Method::Crabebk,
        Method::Arabebk,
        Method::Rabebk,
        Method::ExactLsRabebk,
    ];

    /// Lower-case identifier used on the command line and in CSV output.
    pub fn id(&self) -> &'static str {
        match self {
            Method::Rebk => "rebk",
            Method::Reabk => "reabk",
            Method::Crabebk => "crabebk",
            Method::Arabebk => "arabebk",
            Method::Rabebk => "rabebk",
            Method::ExactLsRabebk => "exactls-rabebk",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Method::Rebk => "REBK",
            Method::Reabk => "REABK",
            Method::Crabebk => "cRABEBK",
            Method::Arabebk => "aRABEBK",
            Method::Rabebk => "RABEBK",
            Method::ExactLsRabebk => "exactLS-RABEBK",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(Method::id)
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Method::Arabebk)
    }

    pub fn uses_spectral_constants(&self) -> bool {
        matches!(self, Method::Reabk | Method::Crabebk)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let m = match key.as_str() {
            "rebk" => Method::Rebk,
            "reabk" => Method::Reabk,
            "crabebk" => Method::Crabebk,
            "arabebk" => Method::Arabebk,
            "rabebk" => Method::Rabebk,
            "exactls-rabebk" | "exactls" | "exact" => Method::ExactLsRabebk,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown method `{s}`; valid methods: {}",
                    Method::valid_names()
                )))
            }
        };
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Record every `stride` iterations (and at termination).
    pub stride: usize,
    pub bregman: bool,
    pub dual_residual: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            stride: 10,
            bregman: false,
            dual_residual: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Generating function `f` of the primal problem.
    pub objective: ObjectiveSpec,
    /// Generating function `g` of the data misfit; only the quadratic is supported.
    pub misfit: ObjectiveSpec,
    /// Block size; clamped to the matrix extent along each axis.
    pub tau: usize,
    pub delta_z: f64,
    pub delta_x: f64,
    pub alpha: AlphaChoice,
    pub max_iters: usize,
    /// Relative-error threshold; requires a reference solution.
    pub tol: Option<f64>,
    pub trace: TraceOptions,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(method: Method, objective: ObjectiveSpec) -> Self {
        Self {
            method,
            objective,
            misfit: ObjectiveSpec::Quadratic,
            tau: 20,
            delta_z: 1.0,
            delta_x: 1.0,
            alpha: AlphaChoice::Experiment,
            max_iters: 5_000_000,
            tol: Some(1e-5),
            trace: TraceOptions::default(),
            seed: 0,
        }
    }

    pub fn tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn deltas(mut self, delta_z: f64, delta_x: f64) -> Self {
        self.delta_z = delta_z;
        self.delta_x = delta_x;
        self
    }

    pub fn alpha(mut self, alpha: AlphaChoice) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn tol(mut self, tol: Option<f64>) -> Self {
        self.tol = tol;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn trace(mut self, trace: TraceOptions) -> Self {
        self.trace = trace;
        self
    }

    /// Block size actually used: REBK always works on single rows/columns.
    pub fn effective_tau(&self) -> usize {
        match self.method {
            Method::Rebk => 1,
            _ => self.tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.tau == 0 {
            return bad("tau must be >= 1".into());
        }
        if !self.misfit.is_quadratic() {
            return bad("only the quadratic data misfit is supported".into());
        }
        if let ObjectiveSpec::ElasticNet { lambda } = self.objective {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return bad(format!("lambda must be finite and >= 0, got {lambda}"));
            }
        }
        if self.method == Method::Reabk && !self.objective.is_quadratic() {
            return bad("REABK is defined for the quadratic objective only (use crabebk)".into());
        }
        if self.method.is_adaptive() {
            let mu_g = self.misfit.mu();
            let mu_f = self.objective.mu();
            if !(self.delta_z > 0.0 && self.delta_z < 2.0 * mu_g) {
                return bad(format!(
                    "delta_z must lie in (0, {}), got {}",
                    2.0 * mu_g,
                    self.delta_z
                ));
            }
            if !(self.delta_x > 0.0 && self.delta_x < 2.0 * mu_f) {
                return bad(format!(
                    "delta_x must lie in (0, {}), got {}",
                    2.0 * mu_f,
                    self.delta_x
                ));
            }
        }
        if let AlphaChoice::Fixed { alpha_z, alpha_x } = self.alpha {
            if !(alpha_z > 0.0 && alpha_z.is_finite() && alpha_x > 0.0 && alpha_x.is_finite()) {
                return bad(format!(
                    "constant relaxation must be positive and finite, got ({alpha_z}, {alpha_x})"
                ));
            }
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return bad(format!("tol must be positive, got {tol}"));
            }
        }
        if self.trace.stride == 0 {
            return bad("trace stride must be >= 1".into());
        }
        Ok(())
    }

    /// Step rules for the z and x half-steps, given resolved constants.
    pub(crate) fn step_rules(&self, constants: Option<(f64, f64)>) -> (StepRule, StepRule) {
        match self.method {
            Method::Rebk | Method::Rabebk => (StepRule::Constant(1.0), StepRule::Constant(1.0)),
            Method::Reabk | Method::Crabebk => {
                let (az, ax) = constants.expect("constant methods resolve their alphas");
                (StepRule::Constant(az), StepRule::Constant(ax))
            }
            Method::Arabebk => (
                StepRule::Adaptive(self.delta_z),
                StepRule::Adaptive(self.delta_x),
            ),
            Method::ExactLsRabebk => (StepRule::ExactLineSearch, StepRule::ExactLineSearch),
        }
    }
}

//! Named checks, their default tolerances and the models they apply to.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    // spin chain
    Positivity,
    Indefiniteness,
    DetRhoDrift,
    MetricVsClosed,
    KappaOde,
    QuasiResidual,
    Rk4Order,
    ExplicitTriple,
    Unitarity,
    // oscillator
    ConstrainResidual,
    HermiticityH,
    OffdiagH,
    ImF,
    TdsePhi,
    TdsePsi,
    TruncationGain,
    QuadratureIdentity,
    HtildeIdentity,
    HtildeSpectrum,
    // both
    Conservation,
}

/// What a check needs beyond the model itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    None,
    /// A closed solution family (`family` set).
    Family,
    /// The explicit `η` of the single-site `s1` family with `δ₀ = 1`.
    ExplicitTriple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Oscillator,
    SpinChain,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::Oscillator => "oscillator",
            Model::SpinChain => "spinchain",
        }
    }
}

impl CheckName {
    pub const ALL: [CheckName; 20] = [
        CheckName::Positivity,
        CheckName::Indefiniteness,
        CheckName::DetRhoDrift,
        CheckName::MetricVsClosed,
        CheckName::KappaOde,
        CheckName::QuasiResidual,
        CheckName::Rk4Order,
        CheckName::ExplicitTriple,
        CheckName::Unitarity,
        CheckName::ConstrainResidual,
        CheckName::HermiticityH,
        CheckName::OffdiagH,
        CheckName::ImF,
        CheckName::TdsePhi,
        CheckName::TdsePsi,
        CheckName::TruncationGain,
        CheckName::QuadratureIdentity,
        CheckName::HtildeIdentity,
        CheckName::HtildeSpectrum,
        CheckName::Conservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckName::Positivity => "positivity",
            CheckName::Indefiniteness => "indefiniteness",
            CheckName::DetRhoDrift => "det_rho_drift",
            CheckName::MetricVsClosed => "metric_vs_closed",
            CheckName::KappaOde => "kappa_ode",
            CheckName::QuasiResidual => "quasi_residual",
            CheckName::Rk4Order => "rk4_order",
            CheckName::ExplicitTriple => "explicit_triple",
            CheckName::ConstrainResidual => "constrain_residual",
            CheckName::HermiticityH => "hermiticity_h",
            CheckName::OffdiagH => "offdiag_h",
            CheckName::ImF => "im_f",
            CheckName::TdsePhi => "tdse_phi",
            CheckName::TdsePsi => "tdse_psi",
            CheckName::TruncationGain => "truncation_gain",
            CheckName::QuadratureIdentity => "quadrature_identity",
            CheckName::HtildeIdentity => "htilde_identity",
            CheckName::HtildeSpectrum => "htilde_spectrum",
            CheckName::Unitarity => "unitarity",
            CheckName::Conservation => "conservation",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckName::Positivity | CheckName::Indefiniteness => 1e-12,
            CheckName::DetRhoDrift => 1e-8,
            CheckName::MetricVsClosed | CheckName::KappaOde | CheckName::TdsePhi => 1e-6,
            CheckName::QuasiResidual | CheckName::ExplicitTriple => 1e-10,
            // |ratio − 16| per halving of dt
            CheckName::Rk4Order => 2.0,
            CheckName::ConstrainResidual => 1e-8,
            CheckName::HermiticityH | CheckName::OffdiagH => 1e-10,
            CheckName::ImF => 1e-12,
            CheckName::TdsePsi => 1e-5,
            // residual(2·dim) / residual(dim)
            CheckName::TruncationGain => 0.1,
            CheckName::QuadratureIdentity | CheckName::HtildeIdentity => 1e-8,
            CheckName::HtildeSpectrum => 1e-7,
            CheckName::Unitarity | CheckName::Conservation => 1e-8,
        }
    }

    pub fn applies_to(self, model: Model) -> bool {
        use CheckName::*;
        match self {
            Conservation => true,
            Positivity | Indefiniteness | DetRhoDrift | MetricVsClosed | KappaOde | QuasiResidual | Rk4Order
            | ExplicitTriple | Unitarity => model == Model::SpinChain,
            _ => model == Model::Oscillator,
        }
    }

    pub fn requirement(self, model: Model) -> Requirement {
        use CheckName::*;
        match (self, model) {
            (MetricVsClosed | KappaOde | QuasiResidual | Rk4Order, Model::SpinChain) => Requirement::Family,
            (ExplicitTriple | Unitarity | Conservation, Model::SpinChain) => Requirement::ExplicitTriple,
            _ => Requirement::None,
        }
    }

    /// Checks run when a scenario lists none.
    pub fn defaults(model: Model, requirement_met: impl Fn(Requirement) -> bool) -> Vec<CheckName> {
        CheckName::ALL
            .into_iter()
            .filter(|c| c.applies_to(model) && requirement_met(c.requirement(model)))
            .collect()
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_serde() {
        for c in CheckName::ALL {
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
            assert!(c.default_tolerance() > 0.0);
        }
    }

    #[test]
    fn every_check_belongs_to_a_model() {
        for c in CheckName::ALL {
            assert!(c.applies_to(Model::Oscillator) || c.applies_to(Model::SpinChain), "{c}");
        }
        let osc = CheckName::defaults(Model::Oscillator, |_| true);
        assert!(osc.contains(&CheckName::TdsePsi) && !osc.contains(&CheckName::Positivity));
        assert!(!osc.contains(&CheckName::Unitarity));
        let chain = CheckName::defaults(Model::SpinChain, |r| r == Requirement::None);
        assert_eq!(chain, vec![CheckName::Positivity, CheckName::Indefiniteness, CheckName::DetRhoDrift]);
    }
}

//! Numerical tolerances.
//!
//! Two presets exist: one for models with exact (analytic) derivatives and a
//! relaxed one for central finite differences, whose truncation error
//! dominates every downstream identity check. Individual values may be
//! overridden from a spec file; nothing is relaxed implicitly.

use serde::{Deserialize, Serialize};

use crate::model::DerivativeMode;

/// Relative FD disagreement between the forward and backward one-sided
/// stencils above which a smoothness warning is raised.
pub const FD_CONSISTENCY_REL: f64 = 1e-3;

/// |∂p| threshold for off-support points (boundary-of-support warning).
pub const BOUNDARY_DERIVATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// |Σ w |ψ|² − 1|, |Σ w p − 1|, |Tr ρ − 1|.
    pub norm: f64,
    /// Support mask threshold relative to max p.
    pub support: f64,
    /// Hermiticity of ρ, ∂ρ and the SLDs.
    pub hermitian: f64,
    /// Relative eigenvalue floor for PSD checks (λ_min ≥ −psd·‖M‖).
    pub psd: f64,
    pub trace: f64,
    pub purity: f64,
    /// Support-block residual of ½(ρL + Lρ) − ∂ρ.
    pub sld: f64,
    /// Kernel cut on λ_a + λ_b, relative to λ_max.
    pub rank_cut: f64,
    /// Reconstruction of ∂ψ from (d ln p, dα).
    pub cross: f64,
    /// Re H vs ¼F + Cov(dα) and Im H vs the log-differential route.
    pub assembly: f64,
    /// ‖H − H†‖_max.
    pub tensor_hermitian: f64,
    /// |E_p[∂_j ln p]|.
    pub score: f64,
    /// max_j |Re⟨ψ|∂_jψ⟩|.
    pub normalization_differential: f64,
    /// ‖4 Re H − F‖ when dα = 0.
    pub classical_recovery: f64,
    /// Pure-state identities ρdρ + dρρ = dρ, Tr dρ = 0, Tr ρdρ = 0.
    pub pure_identities: f64,
    /// Pairwise agreement of the pure-state QFI routes.
    pub qfi_agreement: f64,
    /// Change of H under a global θ-dependent phase.
    pub gauge: f64,
    /// Diagonal-density QFI vs classical Fisher.
    pub classical_reduction: f64,
}

impl Tolerances {
    pub const fn analytic() -> Self {
        Tolerances {
            norm: 1e-10,
            support: 1e-12,
            hermitian: 1e-10,
            psd: 1e-9,
            trace: 1e-10,
            purity: 1e-10,
            sld: 1e-10,
            rank_cut: 1e-12,
            cross: 1e-8,
            assembly: 1e-8,
            tensor_hermitian: 1e-12,
            score: 1e-8,
            normalization_differential: 1e-10,
            classical_recovery: 1e-8,
            pure_identities: 1e-8,
            qfi_agreement: 1e-7,
            gauge: 1e-7,
            classical_reduction: 1e-9,
        }
    }

    pub const fn finite_difference() -> Self {
        Tolerances {
            norm: 1e-8,
            hermitian: 1e-8,
            trace: 1e-6,
            purity: 1e-8,
            cross: 1e-6,
            assembly: 1e-5,
            tensor_hermitian: 1e-8,
            score: 1e-6,
            normalization_differential: 1e-7,
            classical_recovery: 1e-5,
            pure_identities: 1e-6,
            qfi_agreement: 1e-5,
            classical_reduction: 1e-6,
            ..Self::analytic()
        }
    }

    pub fn for_mode(mode: DerivativeMode) -> Self {
        match mode {
            DerivativeMode::Analytic => Self::analytic(),
            DerivativeMode::FiniteDifference => Self::finite_difference(),
        }
    }

    pub fn with_overrides(mut self, o: &ToleranceOverrides) -> Self {
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        apply!(
            norm,
            support,
            hermitian,
            psd,
            trace,
            purity,
            sld,
            rank_cut,
            cross,
            assembly,
            tensor_hermitian,
            score,
            normalization_differential,
            classical_recovery,
            pure_identities,
            qfi_agreement,
            gauge,
            classical_reduction
        );
        self
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::analytic()
    }
}

/// Explicit per-field overrides, as read from a spec file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub norm: Option<f64>,
    pub support: Option<f64>,
    pub hermitian: Option<f64>,
    pub psd: Option<f64>,
    pub trace: Option<f64>,
    pub purity: Option<f64>,
    pub sld: Option<f64>,
    pub rank_cut: Option<f64>,
    pub cross: Option<f64>,
    pub assembly: Option<f64>,
    pub tensor_hermitian: Option<f64>,
    pub score: Option<f64>,
    pub normalization_differential: Option<f64>,
    pub classical_recovery: Option<f64>,
    pub pure_identities: Option<f64>,
    pub qfi_agreement: Option<f64>,
    pub gauge: Option<f64>,
    pub classical_reduction: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_only_touch_named_fields() {
        let o = ToleranceOverrides {
            assembly: Some(1e-3),
            ..Default::default()
        };
        let t = Tolerances::analytic().with_overrides(&o);
        assert_eq!(t.assembly, 1e-3);
        assert_eq!(t.cross, 1e-8);
    }

    #[test]
    fn fd_preset_is_never_tighter() {
        let a = Tolerances::analytic();
        let f = Tolerances::finite_difference();
        assert!(f.assembly >= a.assembly && f.cross >= a.cross && f.score >= a.score);
        assert_eq!(f.sld, a.sld);
    }
}

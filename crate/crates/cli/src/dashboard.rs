use ownconc_core::{
    dependence_index, rho, sparsity_score, summary, Error, MaxOptions, OwnershipMatrix,
};
use serde::Serialize;

/// Above this many labels (investors + stocks) Ψ is off unless requested.
pub const PSI_LABEL_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DashboardOptions {
    pub compute_psi: bool,
    pub max: MaxOptions,
}

impl DashboardOptions {
    /// Ψ on for matrices with at most [`PSI_LABEL_LIMIT`] labels.
    pub fn for_matrix(a: &OwnershipMatrix) -> Self {
        Self {
            compute_psi: a.n() + a.m() <= PSI_LABEL_LIMIT,
            max: MaxOptions::default(),
        }
    }
}

/// The headline numbers of a holdings matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dashboard {
    #[serde(rename = "H_I")]
    pub h_i: f64,
    #[serde(rename = "H_S")]
    pub h_s: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "Psi")]
    pub psi: Option<f64>,
    #[serde(rename = "X")]
    pub x: f64,
    pub rho: f64,
    #[serde(rename = "N_I")]
    pub n_i: f64,
    #[serde(rename = "N_S")]
    pub n_s: f64,
    #[serde(rename = "N_M")]
    pub n_m: f64,
    #[serde(skip)]
    pub psi_certified: bool,
    /// Why Ψ is missing, when it is.
    #[serde(skip)]
    pub psi_note: Option<String>,
}

pub fn dashboard(a: &OwnershipMatrix, opts: &DashboardOptions) -> Result<Dashboard, Error> {
    let s = summary(a);
    let x = dependence_index(a)?.x;
    let rho = rho(a)?;
    let (psi, psi_certified, psi_note) = if !opts.compute_psi {
        (
            None,
            false,
            Some("not computed (pass --psi to enable)".to_string()),
        )
    } else {
        match sparsity_score(a, &opts.max) {
            Ok(score) => (Some(score.psi), score.certified, None),
            Err(Error::DegenerateRange(w)) => (
                None,
                false,
                Some(format!("undefined: feasible range of M has width {w:.3e}")),
            ),
            Err(e) => return Err(e),
        }
    };
    Ok(Dashboard {
        h_i: s.h_i,
        h_s: s.h_s,
        m: s.m,
        psi,
        x,
        rho,
        n_i: s.n_i,
        n_s: s.n_s,
        n_m: s.n_m,
        psi_certified,
        psi_note,
    })
}

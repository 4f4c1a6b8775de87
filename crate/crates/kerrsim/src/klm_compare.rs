//! Side-by-side resource table: the linear-optics sign gate against the
//! superposition-operator scheme, for several detector models.

use std::f64::consts::FRAC_1_SQRT_2;

use kerrsim_core::fock::{density_from_pure, fidelity, FockVector};
use kerrsim_core::gate::{
    apply_conditional, build_superposition_operator, gkerr_target, solve_superposition, SuperpositionParams,
};
use kerrsim_core::klm::{run_ns_gate, solve_ns_transmittances, DetectorKind, DetectorModel, NsSolution};
use kerrsim_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::{AtStage, Result, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Beam splitters, one ancilla photon, two herald detectors.
    NsGate,
    /// Coherent superposition `A â↠+ B â†â` heralded by single clicks.
    Superposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlmRow {
    pub scheme: Scheme,
    pub detector: String,
    pub eta: f64,
    pub probe: String,
    pub fidelity: f64,
    /// Heralding probability (NS gate) or relative success weight (superposition).
    pub success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlmReport {
    pub schema_version: u32,
    pub transmittances: [f64; 3],
    pub ns_success_probability: f64,
    pub ns_residual: f64,
    pub rows: Vec<KlmRow>,
}

/// Probe states on span{0,1,2}.
pub fn probes() -> Vec<(&'static str, FockVector)> {
    let s3 = 1.0 / 3f64.sqrt();
    vec![
        ("|0>", FockVector::basis(0, 3)),
        ("|1>", FockVector::basis(1, 3)),
        ("|2>", FockVector::basis(2, 3)),
        (
            "(|0>+|1>+|2>)/sqrt3",
            FockVector::from_real(&[s3, s3, s3]).expect("finite"),
        ),
        (
            "(|0>+|2>)/sqrt2",
            FockVector::from_real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).expect("finite"),
        ),
        (
            "(|1>+|2>)/sqrt2",
            FockVector::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("finite"),
        ),
    ]
}

fn detector_label(kind: DetectorKind) -> &'static str {
    match kind {
        DetectorKind::PhotonNumberResolving => "pnr",
        DetectorKind::OnOff => "on-off",
    }
}

pub const DETECTOR_SETTINGS: [(DetectorKind, f64); 4] = [
    (DetectorKind::PhotonNumberResolving, 1.0),
    (DetectorKind::PhotonNumberResolving, 0.66),
    (DetectorKind::OnOff, 1.0),
    (DetectorKind::OnOff, 0.66),
];

fn ns_rows(solution: &NsSolution, tol: &Tolerances) -> Result<Vec<KlmRow>> {
    let mut rows = Vec::new();
    for (kind, eta) in DETECTOR_SETTINGS {
        let det = DetectorModel::new(kind, eta).at(Stage::Klm, None)?;
        for (label, probe) in probes() {
            let out = run_ns_gate(&probe, solution, [det, det], tol).at(Stage::Klm, None)?;
            rows.push(KlmRow {
                scheme: Scheme::NsGate,
                detector: detector_label(kind).to_string(),
                eta,
                probe: label.to_string(),
                fidelity: out.fidelity,
                success: out.success_probability,
            });
        }
    }
    Ok(rows)
}

/// With one photon pair per event a click is all the herald needs, so the
/// detector efficiency enters only as `η²` on the rate.
fn superposition_rows(tol: &Tolerances) -> Result<Vec<KlmRow>> {
    let gain = solve_superposition().gain;
    let v = build_superposition_operator(SuperpositionParams::ideal(), 3).at(Stage::Klm, None)?;
    let mut rows = Vec::new();
    for eta in [1.0, 0.66] {
        for (label, probe) in probes() {
            let out = apply_conditional(&v, &probe, tol).at(Stage::Klm, None)?;
            let target = gkerr_target(&probe, gain, tol).at(Stage::Klm, None)?;
            let f = fidelity(
                &density_from_pure(&out.state).at(Stage::Klm, None)?,
                &density_from_pure(&target).at(Stage::Klm, None)?,
                tol,
            )
            .at(Stage::Klm, None)?;
            rows.push(KlmRow {
                scheme: Scheme::Superposition,
                detector: "on-off".to_string(),
                eta,
                probe: label.to_string(),
                fidelity: f,
                success: eta * eta * out.weight,
            });
        }
    }
    Ok(rows)
}

pub fn klm_compare() -> Result<KlmReport> {
    let tol = Tolerances::DEFAULT;
    let solution = solve_ns_transmittances().at(Stage::Klm, None)?;
    let mut rows = ns_rows(&solution, &tol)?;
    rows.extend(superposition_rows(&tol)?);
    Ok(KlmReport {
        schema_version: SCHEMA_VERSION,
        transmittances: solution.transmittances(),
        ns_success_probability: solution.success_probability,
        ns_residual: solution.residual,
        rows,
    })
}

/// CSV with header `scheme,detector,eta,probe,fidelity,success`.
pub fn rows_csv(rows: &[KlmRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_are_normalized() {
        for (label, p) in probes() {
            assert!(p.is_normalized(1e-14), "{label}");
        }
    }

    #[test]
    fn csv_header() {
        let report = klm_compare().unwrap();
        let text = String::from_utf8(rows_csv(&report.rows)).unwrap();
        assert!(text.starts_with("scheme,detector,eta,probe,fidelity,success\n"));
        assert_eq!(text.lines().count(), report.rows.len() + 1);
    }
}

//! Fixtures shared by the benchmarks.

use copula_crm::{AttributionFlags, DoseBounds, Outcome, PatientRecord, StandardizedDose};

/// `n` patients spread over the default dose square with a mix of outcomes.
pub fn patients(n: usize) -> Vec<PatientRecord> {
    let levels = DoseBounds::default().levels(6);
    (0..n)
        .map(|i| {
            let dose = StandardizedDose::new(levels[i % 6], levels[(i / 6 + i) % 6]);
            let outcome = match i % 7 {
                2 => Outcome::Attributed(AttributionFlags::DRUG1),
                4 => Outcome::Unattributed,
                6 => Outcome::Attributed(AttributionFlags::BOTH),
                _ => Outcome::NoDlt,
            };
            PatientRecord::new(dose, outcome)
        })
        .collect()
}

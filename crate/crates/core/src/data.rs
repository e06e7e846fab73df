//! Bundled example dataset: mouse mortality after irradiation (Hoel's
//! laboratory data), reduced to two competing causes — reticulum cell
//! sarcoma as cause 1, everything else as cause 2 — and subjected to a
//! generalized progressive hybrid censoring design with n = 77, k = 20,
//! m = 25, T = 700 and removals (2, ..., 2, 4).

use crate::sample::{classify_and_summarize, Cause, GphcSample};
use crate::scheme::CensoringScheme;

pub const HOEL_GPHC_NAME: &str = "hoel-gphc";

/// (failure time in days, cause label).
pub const HOEL_GPHC_DATA: [(f64, u8); 25] = [
    (40.0, 2),
    (42.0, 2),
    (62.0, 2),
    (163.0, 2),
    (179.0, 2),
    (206.0, 2),
    (222.0, 2),
    (228.0, 2),
    (252.0, 2),
    (259.0, 2),
    (318.0, 1),
    (385.0, 2),
    (407.0, 2),
    (420.0, 2),
    (462.0, 2),
    (507.0, 2),
    (517.0, 2),
    (524.0, 2),
    (525.0, 1),
    (528.0, 1),
    (536.0, 1),
    (605.0, 1),
    (612.0, 1),
    (620.0, 2),
    (621.0, 1),
];

pub fn hoel_gphc_scheme() -> CensoringScheme {
    let mut removals = vec![2u32; 25];
    removals[24] = 4;
    CensoringScheme::new(77, 25, 20, 700.0, removals).expect("valid by construction")
}

pub fn hoel_gphc_sample() -> GphcSample {
    let times: Vec<f64> = HOEL_GPHC_DATA.iter().map(|&(z, _)| z).collect();
    let causes: Vec<Cause> = HOEL_GPHC_DATA
        .iter()
        .map(|&(_, c)| Cause::from_label(c).unwrap())
        .collect();
    classify_and_summarize(&times, &causes, &hoel_gphc_scheme()).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::TerminationKind;

    #[test]
    fn sufficient_statistics() {
        let s = hoel_gphc_sample();
        assert_eq!(s.termination, TerminationKind::AtMthFailure);
        assert_eq!(s.j, 25);
        assert_eq!(s.d1, 7);
        assert_eq!(s.d2, 18);
        assert_eq!(s.w, 28962.0);
        assert_eq!(s.r_star, 0);
    }
}

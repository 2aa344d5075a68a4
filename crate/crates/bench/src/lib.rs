//! Fixtures shared by the benchmarks.

use mzdist_core::{FockLevel, ProbeFamily, SpinJ, SpinState};

pub fn families() -> [(&'static str, ProbeFamily); 3] {
    [
        ("noon", ProbeFamily::Noon { zeta: 0.0 }),
        ("fockz_top", ProbeFamily::FockZ(FockLevel::Highest)),
        (
            "phase",
            ProbeFamily::PhaseState {
                gamma: std::f64::consts::FRAC_PI_2,
            },
        ),
    ]
}

pub fn probe(family: ProbeFamily, photons: u32) -> SpinState {
    let j = SpinJ::from_photons(photons).expect("photon number in range");
    family.build(j).expect("family is defined for every j")
}

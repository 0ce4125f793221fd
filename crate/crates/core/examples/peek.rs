use lwi_core::atom::{DriveField, DriveStrength, FieldName, LevelScheme, PumpSet};
use lwi_core::constants::hz_to_angular;
use lwi_core::response::{DopplerSettings, MediumResponse};

fn build(r: f64, b_s: f64, b_w: f64, t: f64) -> MediumResponse {
    let drives = vec![
        DriveField::new(FieldName::Strong, DriveStrength::ComponentMagnitude(hz_to_angular(33.5e6)))
            .with_linewidth(hz_to_angular(b_s)),
        DriveField::new(FieldName::Weak, DriveStrength::ComponentMagnitude(hz_to_angular(3.7e6)))
            .with_linewidth(hz_to_angular(b_w)),
        DriveField::new(FieldName::Repump, DriveStrength::ComponentMagnitude(hz_to_angular(2.8e6)))
            .with_linewidth(hz_to_angular(25.0e6)),
    ];
    MediumResponse::builder(LevelScheme::mercury())
        .drives(drives)
        .pumps(PumpSet { r, r_cd: 1.0e4 })
        .probe_rabi(hz_to_angular(1.0e3))
        .density(lwi_core::doppler::vapor_density(t).unwrap())
        .doppler(Some(DopplerSettings::mercury(t).unwrap()))
        .build()
        .unwrap()
}

fn main() {
    println!("== T = 310 K, b = 0: <chi''(0)> vs r  (threshold needs < -5.05e-7)");
    for r in [1.1e6, 2.2e6, 3.3e6, 4.4e6] {
        let chi = build(r, 0.0, 0.0, 310.0).averaged_chi(0.0).unwrap();
        println!("r {r:.2e}: {:+.4e}", chi.im);
    }
    println!("== T = 310 K, reference linewidth sets: best gain over r");
    for (bs, bw) in [(45.0e3, 21.6e3), (50.0e3, 24.0e3), (55.0e3, 26.4e3)] {
        let mut best = f64::INFINITY;
        let mut best_r = 0.0;
        for r in [2.2e6, 4.4e6, 6.6e6, 8.8e6, 13.2e6] {
            let chi = build(r, bs, bw, 310.0).averaged_chi(0.0).unwrap();
            if chi.im < best {
                best = chi.im;
                best_r = r;
            }
        }
        println!("b_s {bs:.1e}, b_w {bw:.1e}: best {best:+.4e} at r = {best_r:.1e}");
    }
    println!("== T = 300 K, b = 64 kHz compensation check");
    for r in [2.2e6, 4.4e6, 8.8e6] {
        let chi = build(r, 64.0e3, 64.0e3, 300.0).averaged_chi(0.0).unwrap();
        println!("r {r:.2e}: {:+.4e}", chi.im);
    }
}

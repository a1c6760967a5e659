//! Coefficient backward errors of the structured and dense solvers on random
//! polynomials with widely spread coefficients.

use corechase::backerr::{loglog_slope, run_experiment, ExperimentConfig, Method, Status};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        degrees: vec![20],
        rhos: (1..=12).collect(),
        samples: 10,
        methods: vec![Method::CompanionQr, Method::DenseQr, Method::CompanionQz, Method::CompanionQzUnscaled],
        seed: 1,
        accumulate: false,
    };
    let reports = run_experiment(&cfg);
    for m in &cfg.methods {
        let pts: Vec<(f64, f64)> = reports
            .iter()
            .filter(|r| r.method == *m && r.status == Status::Ok)
            .map(|r| (r.norm_a, m.metric(r)))
            .collect();
        let s = loglog_slope(&pts)?;
        let worst = pts.iter().map(|(a, d)| d / a).fold(0.0, f64::max);
        println!("{m:>22}: slope {:.2} ± {:.2}, worst relative error {worst:.1e}", s.slope, s.stderr);
    }
    Ok(())
}

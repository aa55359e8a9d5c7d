use stdmap::greene::{GreeneEngine, GreeneOptions};
use stdmap::orbits::PrecisionSchedule;
use stdmap::rotation::ContinuedFraction;

fn run(omega: &str, target_digits: u32, expect: f64, tol: f64) {
    let omega = ContinuedFraction::parse(omega).unwrap();
    let mut opts = GreeneOptions::default();
    opts.max_q = Some(5000);
    opts.schedule = PrecisionSchedule::capped(150);
    let mut e = GreeneEngine::new(opts);
    let depth = e.deepest_k(&omega, 40);
    let t0 = std::time::Instant::now();
    let est = e.critical_function(&omega, target_digits, depth, None, |_| {}).unwrap();
    let val = est.value().to_f64();
    println!("eps_c({}) = {:.7} +- {:.1e}  (expect {expect}, diff {:.2e}, {} steps, {:?})",
        est.omega.to_bracket(), val, est.error().to_f64(), (val-expect).abs(),
        est.history.len(), t0.elapsed());
    assert!((val - expect).abs() < tol, "off by {:.2e}", (val - expect).abs());
}

#[test]
fn probe_golden() { run("[(1)]", 4, 0.971635406, 5e-4); }
#[test]
fn probe_silver() { run("[(2)]", 3, 0.957445408, 1e-3); }
#[test]
fn probe_bronze() { run("[(3)]", 3, 0.890863502, 1e-3); }

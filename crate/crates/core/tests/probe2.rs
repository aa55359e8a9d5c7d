use stdmap::greene::{GreeneEngine, GreeneOptions};
use stdmap::orbits::PrecisionSchedule;
use stdmap::rotation::ContinuedFraction;

fn run(omega_s: &str, expect: f64) {
    let omega = ContinuedFraction::parse(omega_s).unwrap();
    let mut opts = GreeneOptions::default();
    opts.max_q = Some(60000);
    opts.schedule = PrecisionSchedule::capped(600);
    let mut e = GreeneEngine::new(opts);
    let t0 = std::time::Instant::now();
    match e.critical_function(&omega, 4, 8, None, |est| {
        eprintln!("  [{:.6},{:.6}] k={} {:?}", est.lo.to_f64(), est.hi.to_f64(), est.k_max, t0.elapsed());
    }) {
        Ok(est) => {
            let val = est.value().to_f64();
            println!("eps_c({omega_s}) = {val:.6} expect {expect} rel {:.2e} in {:?}",
                (val/expect - 1.0).abs(), t0.elapsed());
            assert!((val/expect - 1.0).abs() < 0.01);
        }
        Err(e) => panic!("{omega_s}: ERR {e} after {:?}", t0.elapsed()),
    }
}

#[test]
fn probe_near_half() { run("[2,500,(1)]", 0.12872); }
#[test]
fn probe_near_third() { run("[3,500,(1)]", 0.244787); }

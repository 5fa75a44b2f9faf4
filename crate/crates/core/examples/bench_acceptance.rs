use innerclt::blocks;
use innerclt::correlations::suite;
use innerclt::sequences::{self, CoefficientSequence};
use innerclt::C64;
use std::time::Instant;

fn main() {
    // criterion 1 cost: full suite over the standard products, n_max = 12
    let t0 = Instant::now();
    let mut total = 0usize;
    let mut failures = 0usize;
    for (name, f) in suite::standard_products() {
        let t1 = Instant::now();
        let reports = suite::exact_identity_suite(&name, &f, 12, 1 << 21).unwrap();
        total += reports.len();
        failures += reports.iter().filter(|r| !r.pass).count();
        println!("  {name}: {} reports in {:.1}s", reports.len(), t1.elapsed().as_secs_f64());
    }
    println!("criterion1: {total} reports, {failures} failures, {:.1}s total", t0.elapsed().as_secs_f64());

    // criterion 5 twin: ratio at N = 1e9
    let t0 = Instant::now();
    let seq = CoefficientSequence::Constant(C64::new(1.0, 0.0));
    let n = 1_000_000_000u64;
    let phi = sequences::phi_envelope(&seq, n, n);
    let part = blocks::build_blocks(&seq, n, phi).unwrap();
    let ratio = blocks::block_variance_ratio(&seq, C64::new(0.5, 0.0), &part).unwrap();
    println!(
        "criterion5 twin: N=1e9 ratio = {ratio:.6} (P_N={}, Q_N={}) in {:.1}s",
        part.p_n,
        part.q_n,
        t0.elapsed().as_secs_f64()
    );
    // as-specified: N = 1e6
    let n = 1_000_000u64;
    let phi = sequences::phi_envelope(&seq, n, n);
    let part = blocks::build_blocks(&seq, n, phi).unwrap();
    let ratio6 = blocks::block_variance_ratio(&seq, C64::new(0.5, 0.0), &part).unwrap();
    println!("criterion5 as-specified: N=1e6 ratio = {ratio6:.6}");
}

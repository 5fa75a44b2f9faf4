use innerclt::util::Kahan;
use innerclt::BlaschkeProduct;
use innerclt::C64;
use std::time::Instant;

fn main() {
    let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
    let coeffs: Vec<C64> = (1..=200_000u64).map(|n| C64::new(1.0 / n as f64, 0.0)).collect();
    // plain accumulation
    let t0 = Instant::now();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..640 {
        let mut w = C64::from_polar(1.0, 0.1 + j as f64);
        let mut a = C64::new(0.0, 0.0);
        for c in &coeffs {
            w = f.eval_boundary(w);
            a += c * w;
        }
        acc += a;
    }
    let n = 640 * coeffs.len();
    println!("plain: {:.1} ns/eval ({acc})", t0.elapsed().as_secs_f64() * 1e9 / n as f64);
    // kahan accumulation
    let t0 = Instant::now();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..640 {
        let mut w = C64::from_polar(1.0, 0.1 + j as f64);
        let (mut re, mut im) = (Kahan::new(), Kahan::new());
        for c in &coeffs {
            w = f.eval_boundary(w);
            let t = c * w;
            re.add(t.re);
            im.add(t.im);
        }
        acc += C64::new(re.value(), im.value());
    }
    println!("kahan: {:.1} ns/eval ({acc})", t0.elapsed().as_secs_f64() * 1e9 / n as f64);
}

use innerclt::spectral::IterateTable;
use innerclt::BlaschkeProduct;
use std::time::Instant;

fn main() {
    for (zeros, name) in [
        (vec![0.0, 0.5], "[0,0.5]"),
        (vec![0.0, 0.35], "[0,0.35]"),
        (vec![0.0, 0.21], "[0,0.21]"),
    ] {
        let f = BlaschkeProduct::from_real_zeros(&zeros).unwrap();
        let t0 = Instant::now();
        let table = IterateTable::build(&f, 12, 1 << 21);
        let dt = t0.elapsed().as_secs_f64();
        let lens: Vec<usize> = (1..=12).map(|n| table.series(n).len()).collect();
        println!("{name}: build {dt:.2}s, len(f^12) = {}, tail(12) = {:.2e}", lens[11], table.tail_mass(12));
        let t1 = Instant::now();
        let v = table.tuple_value(&[(9, -1), (10, 1), (11, -1), (12, 1)]);
        println!("   worst 4-tuple: {:.3}ms value {:.3e} cert {:.1e}", t1.elapsed().as_secs_f64()*1e3, v.value.norm(), v.certificate);
    }
}

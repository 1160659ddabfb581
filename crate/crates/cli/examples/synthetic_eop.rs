//! Regenerates `data/eop_c01_2015_2017_synthetic.txt`:
//!
//! ```text
//! cargo run -p ou-design-cli --example synthetic_eop > crates/cli/data/eop_c01_2015_2017_synthetic.txt
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use ou_design::simulate::{regular_times, simulate};
use ou_design::OuParams;

const SEED: u64 = 20150101;
const LAMBDA: f64 = 2.4522;
const OMEGA: f64 = -4.1274;
const STATIONARY_SD: f64 = 0.05;
const DT: f64 = 0.05;
const ROWS: usize = 60;

fn main() {
    let sigma = STATIONARY_SD * (2.0 * LAMBDA).sqrt();
    let params = OuParams::with_sigma(LAMBDA, OMEGA, sigma).expect("valid parameters");
    let times = regular_times(ROWS, DT);
    let path = &simulate(&params, &times, SEED, 1).expect("simulation")[0];
    let c = Complex64::new(0.045, 0.335);
    let m = Complex64::new(0.080, -0.025);

    println!("# SYNTHETIC pole coordinates in the EOP C01 column layout; not IERS data.");
    println!("# Generated by examples/synthetic_eop.rs: Z(t) = c + m exp(i 2 pi t) + Y(t),");
    println!("# c = {c}, m = {m}, Y complex OU with lambda = {LAMBDA}, omega = {OMEGA},");
    println!("# stationary sd {STATIONARY_SD} arcsec per coordinate, seed {SEED}.");
    println!("#     an        x(\")     sigma_x     y(\")     sigma_y");
    for (k, z) in path.iter().enumerate() {
        let epoch = 2015.0 + k as f64 * DT;
        let trend = c + m * Complex64::from_polar(1.0, 2.0 * PI * epoch);
        println!(
            "{epoch:10.2} {:10.6} {:10.6} {:10.6} {:10.6}",
            trend.re + z[0],
            0.000030,
            trend.im + z[1],
            0.000030
        );
    }
}

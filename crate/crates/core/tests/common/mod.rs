#![allow(dead_code)]

use holoflow::poly::ComplexPoly;
use holoflow::Complex64;
use proptest::prelude::*;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Polynomial of degree in `dmin..=dmax` with coefficients in the unit box and
/// a leading coefficient bounded away from zero.
pub fn poly(dmin: usize, dmax: usize) -> impl Strategy<Value = ComplexPoly> {
    (dmin..=dmax).prop_flat_map(|d| {
        (proptest::collection::vec(complex(1.0), d), 0.5f64..1.5, 0.0..std::f64::consts::TAU)
            .prop_map(|(mut cs, r, th)| {
                cs.push(Complex64::from_polar(r, th));
                ComplexPoly::new(cs)
            })
    })
}

pub fn random_poly<R: Rng>(rng: &mut R, dmin: usize, dmax: usize) -> ComplexPoly {
    let d = rng.gen_range(dmin..=dmax);
    let mut cs: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    cs.push(Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)));
    ComplexPoly::new(cs)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn zeros() -> holoflow::xi::ZeroTable {
    let f = std::fs::File::open(fixture("zeros100.txt")).unwrap();
    holoflow::xi::load_zeros(std::io::BufReader::new(f)).unwrap()
}

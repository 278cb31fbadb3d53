//! Lists the regressor columns of a small polynomial model and the
//! coefficient counts for the usual six-gauge-plus-temperature setup.

use ftcal::features::{count_coefficients, enumerate_monomials};

fn main() {
    let names = ["u1", "u2", "temp"];
    for (k, m) in enumerate_monomials(3, 3).unwrap().iter().enumerate() {
        println!("{k:>3}  degree {}  {}", m.degree(), m.name(&names));
    }

    println!("\ncoefficients for 6 outputs and 7 inputs:");
    for degree in 1..=5 {
        println!("  degree {degree}: {}", count_coefficients(degree, 6, 7).unwrap());
    }
}
